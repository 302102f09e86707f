"""Command-line front end.

Every subcommand reads its inputs, calls one library operation, and writes
the result.  Exit codes: 0 ok, 2 parse error, 3 spectral precondition,
4 labeling, 5 search budget.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .constructions import (
    ConstructionError,
    DecayStudy,
    GluePlan,
    SearchBudgetError,
    StageRecord,
    build_sequence,
    decay_study,
    glue,
    prescribe,
)
from .graph import (
    GraphDocument,
    GraphError,
    ParseError,
    based_core,
    graph_to_json,
    load_document,
    serialize_graph,
    to_dot,
    two_core,
)
from .labeling import LabelingError, enumerate_subgroup_words, proper_label
from .spectral import DEFAULT_TOL, SpectralError, growth_rate, truncation_growth_profile

EXIT_OK, EXIT_PARSE, EXIT_SPECTRAL, EXIT_LABEL, EXIT_BUDGET = 0, 2, 3, 4, 5


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- output helpers ---------------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class Output:
    """Collects named artifacts; writes them under --out or prints the primary one."""

    def __init__(self, args):
        self.args = args
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str):
        self.files[name] = text

    def finish(self, primary: str | None, inputs=()):
        out = self.args.out
        if out is None:
            if primary is not None:
                sys.stdout.write(self.files[primary])
            return
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            p = d / name
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text, encoding="utf-8")
        manifest = {
            "subcommand": self.args.command,
            "inputs": [str(p) for p in inputs],
            "parameters": _parameters(self.args),
            "output_dir": str(d),
            "version": __version__,
            "artifacts": {n: hashlib.sha256(t.encode()).hexdigest() for n, t in sorted(self.files.items())},
        }
        stamp = {"timestamp": datetime.now(timezone.utc).isoformat()}
        (d / "manifest.json").write_text(_json_text(manifest), encoding="utf-8")
        (d / "manifest.timestamp.json").write_text(_json_text(stamp), encoding="utf-8")


def _parameters(args) -> dict:
    skip = {"command", "func", "out", "inputs"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and not k.startswith("_")}


def _load(path) -> GraphDocument:
    try:
        return load_document(path)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}", EXIT_PARSE) from exc
    except GraphError as exc:
        raise CLIError(f"{path}: {exc}", EXIT_PARSE) from exc


def _fmt_interval(lo: float, hi: float, digits: int = 10) -> str:
    scale = 10**digits
    return f"[{math.floor(lo * scale) / scale:.{digits}f}, {math.ceil(hi * scale) / scale:.{digits}f}]"


def _summary(cert) -> str:
    if cert.kind == "cycle":
        return "growth = 1 (cycle)"
    if cert.kind == "degenerate":
        return "growth = 1 (trivial group: no closed non-backtracking loops)"
    flag = "" if cert.converged else "  [unconverged]"
    return f"growth ∈ {_fmt_interval(cert.lo, cert.hi)}{flag}"


def _graph_artifact(doc, fmt: str) -> tuple[str, str]:
    if fmt == "json":
        return "graph.json", _json_text(graph_to_json(doc))
    if fmt == "dot":
        return "graph.dot", to_dot(doc)
    return "graph.nbg", serialize_graph(doc)


# -- subcommands ---------------------------------------------------------------------

def cmd_growth(args) -> int:
    doc = _load(args.input)
    try:
        cert = growth_rate(doc.graph, args.tol)
    except (SpectralError, GraphError) as exc:
        raise CLIError(f"{args.input}: {exc}", EXIT_SPECTRAL) from exc
    if cert.kind == "degenerate":
        raise CLIError(f"{args.input}: {_summary(cert)}", EXIT_SPECTRAL)
    out = Output(args)
    out.add("certificate.json", _json_text(cert.to_json()))
    out.add("summary.txt", _summary(cert) + "\n")
    out.finish("certificate.json" if args.format == "json" else "summary.txt", [args.input])
    if args.out is not None:
        print(_summary(cert))
    return EXIT_OK


def cmd_label(args) -> int:
    doc = _load(args.input)
    r = args.r if args.r is not None else doc.graph.rank
    g = doc.graph.with_rank(r)
    try:
        lab = proper_label(g, r)
    except LabelingError as exc:
        raise CLIError(f"{args.input}: {exc}", EXIT_LABEL) from exc
    labeled = GraphDocument(g, lab, doc.name, doc.provenance or f"labeled from {Path(args.input).name}")
    out = Output(args)
    out.add(*_graph_artifact(labeled, args.format))
    out.finish(next(iter(out.files)), [args.input])
    return EXIT_OK


def cmd_core(args) -> int:
    doc = _load(args.input)
    try:
        core = based_core(doc.graph) if args.based else two_core(doc.graph)
    except GraphError as exc:
        raise CLIError(f"{args.input}: {exc}", EXIT_SPECTRAL) from exc
    out = Output(args)
    out.add(*_graph_artifact(GraphDocument(core, None, doc.name), args.format))
    out.finish(next(iter(out.files)), [args.input])
    return EXIT_OK


def _plan(args, k: int) -> GluePlan:
    d1, d2 = _load(args.g1), _load(args.g2)
    r = args.r if args.r is not None else max(d1.graph.rank, d2.graph.rank)
    try:
        return GluePlan(d1.graph, args.u, d2.graph, args.v, k, r)
    except GraphError as exc:
        raise CLIError(str(exc), EXIT_SPECTRAL) from exc


def cmd_glue(args) -> int:
    plan = _plan(args, args.k)
    g3 = glue(plan)
    cert = growth_rate(g3, args.tol)
    out = Output(args)
    out.add(*_graph_artifact(GraphDocument(g3, None, "glued", f"glue k={args.k}"), args.format))
    out.add("certificate.json", _json_text(cert.to_json()))
    out.finish(next(iter(out.files)), [args.g1, args.g2])
    print(_summary(cert), file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_decay(args) -> int:
    if args.k_min < 1 or args.k_max < args.k_min:
        raise CLIError("need 1 <= k-min <= k-max", EXIT_PARSE)
    plan = _plan(args, args.k_min)
    study = decay_study(plan, range(args.k_min, args.k_max + 1), args.tol)
    out = Output(args)
    out.add("decay.csv", _csv_text(DecayStudy.CSV_HEADER, [r.row() for r in study.records]))
    out.add("decay.json", _json_text({
        "slope": study.slope, "intercept": study.intercept, "m": study.m,
        "records": [{**dict(zip(DecayStudy.CSV_HEADER, r.row())), "c_prime": r.c_prime, "flagged": r.flagged}
                    for r in study.records],
    }))
    out.finish("decay.json" if args.format == "json" else "decay.csv", [args.g1, args.g2])
    print(f"slope of log eps(k): {study.slope:.6f} (-log m = {-math.log(study.m):.6f})",
          file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_prescribe(args) -> int:
    try:
        p = prescribe(args.alpha, args.eps, args.r, seed=args.seed, tol=args.tol, n_cap=args.max_beads)
    except SearchBudgetError as exc:
        raise CLIError(str(exc), EXIT_BUDGET) from exc
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_PARSE) from exc
    doc = GraphDocument(p.graph, None, f"prescribed_{args.alpha}",
                        f"necklace multiplicities {''.join(map(str, p.multiplicities))}")
    out = Output(args)
    out.add(*_graph_artifact(doc, args.format))
    out.add("certificate.json", _json_text({**p.certificate.to_json(), "attach": p.attach}))
    out.finish(next(iter(out.files)))
    print(_summary(p.certificate), file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_sequence(args) -> int:
    if args.out is None:
        raise CLIError("sequence needs --out DIR", EXIT_PARSE)
    try:
        records = build_sequence(args.alpha, args.r, args.stages, args.tol, seed=args.seed)
    except SearchBudgetError as exc:
        raise CLIError(str(exc), EXIT_BUDGET) from exc
    except (ConstructionError, ValueError) as exc:
        raise CLIError(str(exc), EXIT_PARSE) from exc
    out = Output(args)
    for rec in records:
        out.add(f"stage_{rec.n:02d}.nbg", serialize_graph(
            GraphDocument(rec.graph, rec.labeling, f"G_{rec.n}", f"target alpha={args.alpha} r={args.r}")))
        out.add(f"block_{rec.n:02d}.nbg", serialize_graph(GraphDocument(rec.block, None, f"H_{rec.n}")))
    out.add("sequence.csv", _csv_text(StageRecord.CSV_HEADER, [r.row() for r in records]))
    profile = truncation_growth_profile([r.graph for r in records], args.tol)
    out.add("convergence.csv", _csv_text(("n", "lo", "hi", "target"),
                                         [(r.n, c.lo, c.hi, args.alpha) for r, c in zip(records, profile)]))
    out.add("sequence.json", _json_text([
        {"n": r.n, "alpha_n": r.alpha_n, "k_n": r.k, "lo": r.certificate.lo, "hi": r.certificate.hi,
         "ceiling": r.ceiling, "edges": len(r.graph.edges)} for r in records]))
    out.finish(None)
    for r in records:
        print(f"G_{r.n}: {_summary(r.certificate)}  k={r.k}")
    return EXIT_OK


def cmd_words(args) -> int:
    doc = _load(args.input)
    g = doc.graph
    lab = doc.labeling
    if lab is None:
        try:
            lab = proper_label(g)
        except LabelingError as exc:
            raise CLIError(f"{args.input}: {exc}", EXIT_LABEL) from exc
    try:
        result = enumerate_subgroup_words(g, lab, g.basepoint, args.n_max)
    except LabelingError as exc:
        raise CLIError(str(exc), EXIT_LABEL) from exc
    out = Output(args)
    out.add("counts.csv", _csv_text(("n", "count"), list(enumerate(result.counts))))
    if args.format == "json":
        out.add("words.json", _json_text({str(n): [w.to_json() for w in ws] for n, ws in enumerate(result.words)}))
    else:
        out.add("words.txt", "".join(f"{n}\t{w}\n" for n, ws in enumerate(result.words) for w in ws))
    primary = "counts.csv" if args.format == "csv" else ("words.json" if args.format == "json" else "words.txt")
    out.finish(primary, [args.input])
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="certificate width target")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "dot", "text"), default="text")
    common.add_argument("--out", metavar="DIR", default=None, help="write artifacts and a manifest here")

    p = argparse.ArgumentParser(prog="nbgrowth", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"nbgrowth {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("growth", parents=[common], help="certified growth rate of a graph file")
    s.add_argument("input")
    s.set_defaults(func=cmd_growth)

    s = sub.add_parser("label", parents=[common], help="label a graph as an immersion into B_r")
    s.add_argument("input")
    s.add_argument("--r", type=int, default=None, help="alphabet size (default: file rank)")
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("core", parents=[common], help="2-core (or based core) of a graph")
    s.add_argument("input")
    s.add_argument("--based", action="store_true", help="keep the arc to the basepoint")
    s.set_defaults(func=cmd_core)

    for name, func in (("glue", cmd_glue), ("decay", cmd_decay)):
        s = sub.add_parser(name, parents=[common], help=f"{name} two graphs along a path")
        s.add_argument("g1")
        s.add_argument("u")
        s.add_argument("g2")
        s.add_argument("v")
        if name == "glue":
            s.add_argument("k", type=int)
        else:
            s.add_argument("--k-min", type=int, default=2)
            s.add_argument("--k-max", type=int, default=10)
        s.add_argument("--r", type=int, default=None)
        s.set_defaults(func=func)

    s = sub.add_parser("prescribe", parents=[common], help="finite graph with growth in (alpha-eps, alpha)")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--max-beads", type=int, default=1 << 14,
                   help="bead-count cap (doubled once before giving up)")
    s.set_defaults(func=cmd_prescribe)

    s = sub.add_parser("sequence", parents=[common], help="staged graphs with growth increasing to alpha")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--stages", "-N", type=int, default=6)
    s.set_defaults(func=cmd_sequence)

    s = sub.add_parser("words", parents=[common], help="reduced words read along basepoint loops")
    s.add_argument("input")
    s.add_argument("--n-max", type=int, default=8)
    s.set_defaults(func=cmd_words)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"nbgrowth {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
