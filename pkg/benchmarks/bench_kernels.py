"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--iters 64]

Operators come from long necklaces and a built stage graph, which are the
sizes the prescriber and the staged construction actually hit.
"""

import argparse
import random
import sys
import timeit

import numpy as np

from nbgrowth import _pykernels
from nbgrowth import families as F
from nbgrowth.constructions import build_sequence
from nbgrowth.spectral import build_nb_operator


def operators():
    rng = random.Random(0)
    for n in (256, 4096, 65536):
        yield f"necklace n={n}", build_nb_operator(F.necklace([rng.choice((1, 2)) for _ in range(n)]))
    stage = build_sequence(2.5, 2, 6, label=False)[-1].graph
    yield f"stage G_6 ({len(stage.edges)} edges)", build_nb_operator(stage)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--iters", type=int, default=64, help="power steps per timed call")
    args = p.parse_args(argv)
    try:
        from nbgrowth import _ckernels
    except ImportError:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1

    print(f"{'operator':<28}{'kernel':<16}{'cython ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, B in operators():
        x0 = np.random.default_rng(1).random(B.dim) + 0.5
        cases = {
            "power_iterate": lambda mod: mod.power_iterate(B.indptr, B.indices, x0.copy(), 1.0, args.iters),
            "cw_bounds": lambda mod: mod.cw_bounds(B.indptr, B.indices, x0, 1.0),
        }
        for kernel, call in cases.items():
            tc = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=args.repeat)) * 1e3
            tp = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<28}{kernel:<16}{tc:>12.3f}{tp:>12.3f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
