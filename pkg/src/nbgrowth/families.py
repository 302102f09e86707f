"""Small named graph families used as inputs, tests, and prescriber blocks."""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .graph import BasedMultigraph, GraphError, from_edge_list


def bouquet(r: int, prefix: str = "") -> BasedMultigraph:
    """One vertex with ``r`` loops; fundamental group F_r."""
    if r < 1:
        raise GraphError("bouquet needs at least one loop")
    v = f"{prefix}v0"
    return BasedMultigraph((v,), tuple((f"{prefix}e{i}", v, v) for i in range(1, r + 1)), v, r)


def cycle(n: int, rank: int = 2, prefix: str = "") -> BasedMultigraph:
    if n < 1:
        raise GraphError("cycle length must be >= 1")
    return from_edge_list([(i, (i + 1) % n) for i in range(n)], 0, rank, prefix)


def path(n_edges: int, rank: int = 2, prefix: str = "") -> BasedMultigraph:
    if n_edges < 1:
        return BasedMultigraph((f"{prefix}v0",), (), f"{prefix}v0", rank)
    return from_edge_list([(i, i + 1) for i in range(n_edges)], 0, rank, prefix)


def complete(n: int, rank: int | None = None, prefix: str = "") -> BasedMultigraph:
    return from_edge_list(list(combinations(range(n), 2)), 0, rank, prefix)


def complete_bipartite(a: int, b: int, rank: int | None = None, prefix: str = "") -> BasedMultigraph:
    return from_edge_list([(i, a + j) for i in range(a) for j in range(b)], 0, rank, prefix)


def petersen(rank: int | None = None, prefix: str = "") -> BasedMultigraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return from_edge_list(outer + spokes + inner, 0, rank, prefix)


def hypercube(dim: int = 3, rank: int | None = None, prefix: str = "") -> BasedMultigraph:
    pairs = [(x, x | (1 << b)) for x in range(1 << dim) for b in range(dim) if not x & (1 << b)]
    return from_edge_list(pairs, 0, rank, prefix)


def theta(multiplicity: int = 3, rank: int = 2, prefix: str = "") -> BasedMultigraph:
    """Two vertices joined by ``multiplicity`` parallel edges."""
    return from_edge_list([(0, 1)] * multiplicity, 0, rank, prefix)


def lollipop(cycle_len: int, tail_len: int, rank: int = 2, prefix: str = "") -> BasedMultigraph:
    """Cycle on vertices 0..c-1 with a tail ending at the basepoint."""
    pairs = [(i, (i + 1) % cycle_len) for i in range(cycle_len)]
    chain = [0] + [cycle_len + i for i in range(tail_len)]
    pairs += list(zip(chain, chain[1:]))
    return from_edge_list(pairs, chain[-1], rank, prefix)


def with_tail(g: BasedMultigraph, at: str, length: int, prefix: str = "t") -> BasedMultigraph:
    """Attach a pendant path of ``length`` edges at vertex ``at``."""
    chain = [at] + [f"{prefix}{i}" for i in range(1, length + 1)]
    return BasedMultigraph(
        g.vertices + tuple(chain[1:]),
        g.edges + tuple((f"{prefix}e{i}", a, b) for i, (a, b) in enumerate(zip(chain, chain[1:]))),
        g.basepoint,
        g.rank,
    )


def necklace(multiplicities: Sequence[int], rank: int = 2, prefix: str = "") -> BasedMultigraph:
    """Cycle whose i-th bead (edge slot i -> i+1) carries ``multiplicities[i]`` parallel edges.

    Vertex degrees are sums of adjacent multiplicities, so multiplicities in
    ``1..rank`` keep every degree within ``2..2*rank``.
    """
    n = len(multiplicities)
    if n < 1:
        raise GraphError("necklace needs at least one bead")
    if any(m < 1 or m > rank for m in multiplicities):
        raise GraphError(f"multiplicities must lie in 1..{rank}")
    pairs = [(i, (i + 1) % n) for i, m in enumerate(multiplicities) for _ in range(m)]
    return from_edge_list(pairs, 0, rank, prefix)


def wedge_of_cycles(lengths: Sequence[int], rank: int = 2, prefix: str = "") -> BasedMultigraph:
    """Cycles of the given lengths sharing vertex 0."""
    pairs = []
    nxt = 1
    for L in lengths:
        chain = [0] + list(range(nxt, nxt + L - 1)) + [0]
        nxt += L - 1
        pairs += list(zip(chain, chain[1:]))
    return from_edge_list(pairs, 0, rank, prefix)
