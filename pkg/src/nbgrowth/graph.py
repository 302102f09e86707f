"""Based undirected multigraphs, darts, and the ``.nbg`` / JSON / DOT formats.

Edges are stored in insertion order; edge ``i`` owns darts ``2*i`` (tail ``u``,
head ``v`` as written) and ``2*i + 1`` (the reverse).  A loop therefore yields
two distinct darts with equal tail and head.
"""

from __future__ import annotations

import json
import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence


class GraphError(ValueError):
    """Base class for malformed graphs and graph documents."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DanglingEndpointError(ParseError):
    pass


class DuplicateIdError(ParseError):
    pass


class DegreeOverflowError(GraphError):
    pass


class ForestError(GraphError):
    """Raised when a cycle-spanned subgraph is requested of an acyclic graph."""


class UnknownVertexError(GraphError, KeyError):
    def __str__(self) -> str:
        return ValueError.__str__(self)


def natural_key(ident: str) -> tuple:
    """Sort key treating digit runs numerically, so ``e2 < e10``."""
    return tuple(int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", ident))


@dataclass(frozen=True)
class Dart:
    edge: str
    orientation: int
    tail: str
    head: str

    @property
    def reverse_orientation(self) -> int:
        return self.orientation ^ 1


@dataclass(frozen=True)
class BasedMultigraph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]
    basepoint: str
    rank: int = 2

    def __post_init__(self):
        vs = tuple(self.vertices)
        es = tuple((str(e), str(u), str(v)) for e, u, v in self.edges)
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", es)
        if self.rank < 1:
            raise GraphError(f"rank must be positive, got {self.rank}")
        vset = set(vs)
        if len(vset) != len(vs):
            raise DuplicateIdError("duplicate vertex id")
        if len({e for e, _, _ in es}) != len(es):
            raise DuplicateIdError("duplicate edge id")
        for e, u, v in es:
            for w in (u, v):
                if w not in vset:
                    raise DanglingEndpointError(f"edge {e} has unknown endpoint {w}")
        if self.basepoint not in vset:
            raise DanglingEndpointError(f"basepoint {self.basepoint} is not a vertex")

    # -- darts ---------------------------------------------------------------
    @property
    def num_darts(self) -> int:
        return 2 * len(self.edges)

    def dart_tail(self, d: int) -> str:
        _, u, v = self.edges[d >> 1]
        return v if d & 1 else u

    def dart_head(self, d: int) -> str:
        _, u, v = self.edges[d >> 1]
        return u if d & 1 else v

    @staticmethod
    def reverse(d: int) -> int:
        return d ^ 1

    def dart(self, d: int) -> Dart:
        return Dart(self.edges[d >> 1][0], d & 1, self.dart_tail(d), self.dart_head(d))

    def darts(self) -> Iterator[Dart]:
        for d in range(self.num_darts):
            yield self.dart(d)

    def edge_index(self) -> dict[str, int]:
        return {e: i for i, (e, _, _) in enumerate(self.edges)}

    def out_darts(self) -> dict[str, list[int]]:
        """Darts grouped by tail vertex, every vertex present."""
        out: dict[str, list[int]] = {v: [] for v in self.vertices}
        for d in range(self.num_darts):
            out[self.dart_tail(d)].append(d)
        return out

    # -- degrees -------------------------------------------------------------
    def degrees(self) -> dict[str, int]:
        deg = dict.fromkeys(self.vertices, 0)
        for _, u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def max_degree(self) -> int:
        return max(self.degrees().values(), default=0)

    def is_connected(self) -> bool:
        return len(self.component_of(self.basepoint)) == len(self.vertices)

    def component_of(self, start: str) -> set[str]:
        adj = self.adjacency()
        seen = {start}
        todo = deque([start])
        while todo:
            x = todo.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return seen

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.vertices}
        for _, u, v in self.edges:
            adj[u].append(v)
            if u != v:
                adj[v].append(u)
        return adj

    def betti_number(self) -> int:
        """First Betti number |E| - |V| + #components."""
        comps = 0
        seen: set[str] = set()
        for v in self.vertices:
            if v not in seen:
                comps += 1
                seen |= self.component_of(v)
        return len(self.edges) - len(self.vertices) + comps

    def is_cycle(self) -> bool:
        return (
            len(self.vertices) > 0
            and len(self.edges) == len(self.vertices)
            and all(d == 2 for d in self.degrees().values())
            and self.is_connected()
        )

    # -- editing -------------------------------------------------------------
    def subgraph(self, vertices: Iterable[str], edge_ids: Iterable[str] | None = None,
                 basepoint: str | None = None) -> "BasedMultigraph":
        keep_v = set(vertices)
        if edge_ids is None:
            keep_e = None
        else:
            keep_e = set(edge_ids)
        vs = tuple(v for v in self.vertices if v in keep_v)
        es = tuple(
            (e, u, v) for e, u, v in self.edges
            if u in keep_v and v in keep_v and (keep_e is None or e in keep_e)
        )
        return BasedMultigraph(vs, es, basepoint if basepoint is not None else self.basepoint,
                               self.rank)

    def with_basepoint(self, v: str) -> "BasedMultigraph":
        return BasedMultigraph(self.vertices, self.edges, v, self.rank)

    def with_rank(self, r: int) -> "BasedMultigraph":
        return BasedMultigraph(self.vertices, self.edges, self.basepoint, r)

    def relabel(self, prefix: str) -> "BasedMultigraph":
        """Copy with every vertex and edge id prefixed."""
        return BasedMultigraph(
            tuple(prefix + v for v in self.vertices),
            tuple((prefix + e, prefix + u, prefix + v) for e, u, v in self.edges),
            prefix + self.basepoint,
            self.rank,
        )

    def is_subgraph_of(self, other: "BasedMultigraph") -> bool:
        """Id-level containment: same ids with the same endpoints."""
        ov = set(other.vertices)
        oe = {e: {u, v} for e, u, v in other.edges}
        return all(v in ov for v in self.vertices) and all(
            e in oe and oe[e] == {u, v} for e, u, v in self.edges
        )


def degree(g: BasedMultigraph, v: str) -> int:
    """Number of darts with tail ``v``; a loop counts twice."""
    if v not in set(g.vertices):
        raise UnknownVertexError(f"unknown vertex {v!r}")
    n = 0
    for _, a, b in g.edges:
        n += (a == v) + (b == v)
    return n


# -- cores -------------------------------------------------------------------

def _prune_leaves(g: BasedMultigraph) -> tuple[set[str], set[str]]:
    """Iterated deletion of vertices of degree <= 1; returns surviving vertex and edge ids."""
    deg = g.degrees()
    incident: dict[str, list[int]] = defaultdict(list)
    for i, (_, u, v) in enumerate(g.edges):
        incident[u].append(i)
        if v != u:
            incident[v].append(i)
    alive_e = [True] * len(g.edges)
    alive_v = set(g.vertices)
    todo = deque(v for v in g.vertices if deg[v] <= 1)
    while todo:
        x = todo.popleft()
        if x not in alive_v or deg[x] > 1:
            continue
        alive_v.discard(x)
        for i in incident[x]:
            if alive_e[i]:
                alive_e[i] = False
                _, u, v = g.edges[i]
                y = v if u == x else u
                deg[y] -= 1
                deg[x] -= 1
                if y in alive_v and deg[y] <= 1:
                    todo.append(y)
    edges = {g.edges[i][0] for i in range(len(g.edges)) if alive_e[i]}
    return alive_v, edges


def _nearest(g: BasedMultigraph, start: str, targets: set[str]) -> list[str]:
    """Shortest vertex path from ``start`` to the nearest vertex of ``targets``."""
    adj = g.adjacency()
    prev = {start: None}
    todo = deque([start])
    while todo:
        x = todo.popleft()
        if x in targets:
            path = [x]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for y in sorted(adj[x], key=natural_key):
            if y not in prev:
                prev[y] = x
                todo.append(y)
    raise GraphError("target set unreachable from basepoint")


def two_core(g: BasedMultigraph) -> BasedMultigraph:
    """Cycle-spanned part of ``g``: what survives iterated leaf deletion.

    The basepoint is kept if it survives, otherwise moved to the core vertex
    nearest to it.
    """
    vs, es = _prune_leaves(g)
    if not vs:
        raise ForestError("graph is a forest; its 2-core is empty")
    base = g.basepoint if g.basepoint in vs else _nearest(g, g.basepoint, vs)[-1]
    return g.subgraph(vs, es, base)


def based_core(g: BasedMultigraph) -> BasedMultigraph:
    """Two-core plus the arc joining it to the basepoint (single vertex if acyclic)."""
    vs, es = _prune_leaves(g)
    if not vs:
        return BasedMultigraph((g.basepoint,), (), g.basepoint, g.rank)
    if g.basepoint in vs:
        return g.subgraph(vs, es)
    arc = _nearest(g, g.basepoint, vs)
    vs = vs | set(arc)
    # outside the 2-core the graph is a forest, so the arc uses unique edges
    for a, b in zip(arc, arc[1:]):
        for e, u, v in g.edges:
            if {u, v} == {a, b} and e not in es:
                es.add(e)
                break
    return g.subgraph(vs, es)


def disjoint_union_with_path(g1: BasedMultigraph, u: str, g2: BasedMultigraph, v: str,
                             k: int, prefix: str = "p0_") -> BasedMultigraph:
    """Disjoint union of ``g1`` and ``g2`` plus a path of ``k`` edges from ``u`` to ``v``.

    Ids of ``g1`` and ``g2`` must already be disjoint; new path vertices and
    edges are named ``{prefix}{i}`` and ``{prefix}e{i}``.  The result keeps the
    basepoint of ``g1`` and the larger of the two ranks.
    """
    if k < 1:
        raise GraphError(f"path length must be >= 1, got {k}")
    r = max(g1.rank, g2.rank)
    for g, w in ((g1, u), (g2, v)):
        if degree(g, w) >= 2 * r:
            raise DegreeOverflowError(
                f"vertex {w} already has degree {degree(g, w)} = 2*rank, no room for a path")
    clash = (set(g1.vertices) & set(g2.vertices)) | (
        {e for e, _, _ in g1.edges} & {e for e, _, _ in g2.edges})
    if clash:
        raise DuplicateIdError(f"graphs share ids: {sorted(clash, key=natural_key)[:5]}")
    inner = [f"{prefix}{i}" for i in range(1, k)]
    chain = [u, *inner, v]
    path_edges = tuple((f"{prefix}e{i}", a, b) for i, (a, b) in enumerate(zip(chain, chain[1:])))
    return BasedMultigraph(
        g1.vertices + g2.vertices + tuple(inner),
        g1.edges + g2.edges + path_edges,
        g1.basepoint,
        r,
    )


# -- documents -----------------------------------------------------------------

LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class GraphDocument:
    graph: BasedMultigraph
    labeling: "Mapping[str, tuple[int, int]] | None" = None
    name: str = ""
    provenance: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.labeling is not None:
            from .labeling import Labeling, verify_labeling

            lab = self.labeling if isinstance(self.labeling, Labeling) else Labeling(dict(self.labeling))
            object.__setattr__(self, "labeling", lab)
            ok, violations = verify_labeling(self.graph, lab, self.graph.rank)
            if not ok:
                raise GraphError(f"labeling is not an immersion: {violations[:3]}")


_TOKEN = re.compile(r"\S+")


def parse_graph(text: str) -> GraphDocument:
    """Parse the line-oriented ``.nbg`` format."""
    rank = None
    base = None
    name = ""
    provenance = ""
    vertices: list[str] = []
    vseen: dict[str, int] = {}
    edges: list[tuple[str, str, str]] = []
    eseen: dict[str, int] = {}
    raw_labels: dict[str, tuple[str, str | None, int]] = {}
    edge_lines: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith("#"):
            meta = stripped[1:].strip()
            if meta.startswith("name:"):
                name = meta[5:].strip()
            elif meta.startswith("provenance:"):
                provenance = meta[11:].strip()
            continue
        if "#" in stripped:
            stripped = stripped[: stripped.index("#")].strip()
        if not stripped:
            continue
        toks = _TOKEN.findall(stripped)
        kw = toks[0]
        if kw == "rank":
            if len(toks) != 2 or not toks[1].isdigit() or int(toks[1]) < 1:
                raise ParseError("expected 'rank <positive integer>'", lineno)
            rank = int(toks[1])
        elif kw == "base":
            if len(toks) != 2:
                raise ParseError("expected 'base <vid>'", lineno)
            base = toks[1]
        elif kw == "vertex":
            if len(toks) != 2:
                raise ParseError("expected 'vertex <vid>'", lineno)
            if toks[1] in vseen:
                raise DuplicateIdError(f"duplicate vertex {toks[1]} (first on line {vseen[toks[1]]})", lineno)
            vseen[toks[1]] = lineno
            vertices.append(toks[1])
        elif kw == "edge":
            if len(toks) < 4:
                raise ParseError("expected 'edge <eid> <vid> <vid> [label=<letter> dir=<vid>]'", lineno)
            eid, u, v = toks[1:4]
            if eid in eseen:
                raise DuplicateIdError(f"duplicate edge {eid} (first on line {eseen[eid]})", lineno)
            eseen[eid] = lineno
            attrs = {}
            for tok in toks[4:]:
                key, sep, val = tok.partition("=")
                if not sep or key not in ("label", "dir") or not val:
                    raise ParseError(f"bad edge attribute {tok!r}", lineno)
                attrs[key] = val
            if attrs:
                if "label" not in attrs:
                    raise ParseError("dir= given without label=", lineno)
                raw_labels[eid] = (attrs["label"], attrs.get("dir"), lineno)
            edges.append((eid, u, v))
            edge_lines[eid] = lineno
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno)
    if rank is None:
        raise ParseError("missing 'rank' header")
    if base is None:
        raise ParseError("missing 'base' header")
    for eid, u, v in edges:
        for w in (u, v):
            if w not in vseen:
                raise DanglingEndpointError(f"edge {eid} endpoint {w} is not a declared vertex",
                                            edge_lines[eid])
    if base not in vseen:
        raise DanglingEndpointError(f"basepoint {base} is not a declared vertex")
    g = BasedMultigraph(tuple(vertices), tuple(edges), base, rank)
    labeling = None
    if raw_labels:
        if len(raw_labels) != len(edges):
            missing = [e for e, _, _ in edges if e not in raw_labels]
            raise ParseError(f"partially labeled graph; unlabeled edges: {missing[:5]}")
        labeling = {}
        ends = {e: (u, v) for e, u, v in edges}
        for eid, (letter, head, lineno) in raw_labels.items():
            labeling[eid] = (_letter_index(letter, rank, lineno), _orientation(ends[eid], head, lineno))
    return GraphDocument(g, labeling, name, provenance, _degree_warnings(g))


def _letter_index(letter: str, rank: int, lineno: int | None = None) -> int:
    if len(letter) != 1 or letter not in LETTERS[:rank]:
        raise ParseError(f"label {letter!r} is not one of the first {rank} letters", lineno)
    return LETTERS.index(letter) + 1


def _orientation(ends: tuple[str, str], head: str | None, lineno: int | None = None) -> int:
    """0 if the positive dart runs as written (u -> v), 1 if reversed."""
    u, v = ends
    if head is None or head == v:
        return 0
    if head == u:
        return 1
    raise ParseError(f"dir={head} is not an endpoint of the edge", lineno)


def _degree_warnings(g: BasedMultigraph) -> tuple[str, ...]:
    return tuple(
        f"vertex {v} has degree {d} > 2*rank = {2 * g.rank}"
        for v, d in g.degrees().items() if d > 2 * g.rank
    )


def serialize_graph(doc: GraphDocument | BasedMultigraph) -> str:
    if isinstance(doc, BasedMultigraph):
        doc = GraphDocument(doc)
    g = doc.graph
    lines = []
    if doc.name:
        lines.append(f"# name: {doc.name}")
    if doc.provenance:
        lines.append(f"# provenance: {doc.provenance}")
    lines += [f"rank {g.rank}", f"base {g.basepoint}"]
    lines += [f"vertex {v}" for v in g.vertices]
    for e, u, v in g.edges:
        line = f"edge {e} {u} {v}"
        if doc.labeling is not None:
            letter, orient = doc.labeling[e]
            line += f" label={LETTERS[letter - 1]} dir={v if orient == 0 else u}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def graph_to_json(doc: GraphDocument | BasedMultigraph) -> dict:
    if isinstance(doc, BasedMultigraph):
        doc = GraphDocument(doc)
    g = doc.graph
    edges = []
    for e, u, v in g.edges:
        item = {"id": e, "u": u, "v": v}
        if doc.labeling is not None:
            letter, orient = doc.labeling[e]
            item["label"] = LETTERS[letter - 1]
            item["dir"] = v if orient == 0 else u
        edges.append(item)
    out = {"rank": g.rank, "base": g.basepoint, "vertices": list(g.vertices), "edges": edges}
    if doc.name:
        out["name"] = doc.name
    if doc.provenance:
        out["provenance"] = doc.provenance
    return out


def graph_from_json(data: Mapping | str) -> GraphDocument:
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    try:
        rank = int(data["rank"])
        base = str(data["base"])
        vertices = [str(v) for v in data["vertices"]]
        raw_edges = list(data["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from exc
    vseen = set()
    for v in vertices:
        if v in vseen:
            raise DuplicateIdError(f"duplicate vertex {v}")
        vseen.add(v)
    edges = []
    labels = {}
    for item in raw_edges:
        e, u, v = str(item["id"]), str(item["u"]), str(item["v"])
        for w in (u, v):
            if w not in vseen:
                raise DanglingEndpointError(f"edge {e} endpoint {w} is not a declared vertex")
        edges.append((e, u, v))
        if "label" in item:
            labels[e] = (_letter_index(item["label"], rank), _orientation((u, v), item.get("dir")))
    g = BasedMultigraph(tuple(vertices), tuple(edges), base, rank)
    labeling = None
    if labels:
        if len(labels) != len(edges):
            raise ParseError("partially labeled graph")
        labeling = labels
    return GraphDocument(g, labeling, str(data.get("name", "")), str(data.get("provenance", "")),
                         _degree_warnings(g))


def load_document(path) -> GraphDocument:
    """Read a ``.nbg`` or ``.json`` graph file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).endswith(".json") or text.lstrip().startswith("{"):
        return graph_from_json(text)
    return parse_graph(text)


def to_dot(doc: GraphDocument | BasedMultigraph) -> str:
    if isinstance(doc, BasedMultigraph):
        doc = GraphDocument(doc)
    g = doc.graph
    labeled = doc.labeling is not None
    out = [("digraph" if labeled else "graph") + f" {json.dumps(doc.name or 'G')} {{"]
    for v in g.vertices:
        shape = ' shape="doublecircle"' if v == g.basepoint else ""
        out.append(f"  {json.dumps(v)} [{shape.strip()}];" if shape else f"  {json.dumps(v)};")
    for e, u, v in g.edges:
        if labeled:
            letter, orient = doc.labeling[e]
            a, b = (u, v) if orient == 0 else (v, u)
            out.append(f'  {json.dumps(a)} -> {json.dumps(b)} [label="{LETTERS[letter - 1]}" id={json.dumps(e)}];')
        else:
            out.append(f"  {json.dumps(u)} -- {json.dumps(v)} [id={json.dumps(e)}];")
    out.append("}")
    return "\n".join(out) + "\n"


def from_edge_list(pairs: Sequence[tuple], basepoint=None, rank: int | None = None,
                   prefix: str = "") -> BasedMultigraph:
    """Build a graph from ``(u, v)`` pairs; vertex ids are ``f"{prefix}v{u}"``."""
    names: dict = {}
    for u, v in pairs:
        for w in (u, v):
            names.setdefault(w, f"{prefix}v{w}")
    if basepoint is not None:
        names.setdefault(basepoint, f"{prefix}v{basepoint}")
    vertices = tuple(names.values())
    edges = tuple((f"{prefix}e{i}", names[u], names[v]) for i, (u, v) in enumerate(pairs))
    base = names[basepoint] if basepoint is not None else vertices[0]
    g = BasedMultigraph(vertices, edges, base, 1)
    r = rank if rank is not None else max(1, -(-g.max_degree() // 2))
    return g.with_rank(r)
