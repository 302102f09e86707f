"""Gluing with certified decay, growth prescription, and the staged construction.

The staged construction hangs finite blocks ``H_1, H_2, ...`` with growth
increasing to a target off a spine, spacing them far enough apart that each
stage's growth stays below the next block's.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .families import bouquet, cycle, necklace
from .graph import (
    BasedMultigraph,
    DegreeOverflowError,
    GraphError,
    degree,
    disjoint_union_with_path,
    two_core,
)
from .labeling import Labeling, extend_labeling, proper_label
from .spectral import (
    DEFAULT_TOL,
    GrowthCertificate,
    build_nb_operator,
    growth_rate,
    is_irreducible,
    spectral_radius,
)

log = logging.getLogger(__name__)


class ConstructionError(ValueError):
    pass


class SearchBudgetError(ConstructionError):
    pass


# -- gluing ------------------------------------------------------------------------

@dataclass(frozen=True)
class GluePlan:
    g1: BasedMultigraph
    u: str
    g2: BasedMultigraph
    v: str
    k: int
    r: int

    def __post_init__(self):
        if self.k < 1:
            raise GraphError("path length k must be >= 1")
        for g, w in ((self.g1, self.u), (self.g2, self.v)):
            if degree(g, w) >= 2 * self.r:
                raise DegreeOverflowError(f"vertex {w} has no free slot (degree {degree(g, w)}, r={self.r})")
            if min(g.degrees().values()) < 2 or g.is_cycle():
                raise GraphError("glue blocks must have min degree >= 2 and not be cycles")

    def with_k(self, k: int) -> "GluePlan":
        return GluePlan(self.g1, self.u, self.g2, self.v, k, self.r)

    def blocks(self) -> tuple[BasedMultigraph, str, BasedMultigraph, str]:
        """The two blocks with ids made disjoint (``g2`` prefixed on clash)."""
        g1, g2, v = self.g1.with_rank(self.r), self.g2.with_rank(self.r), self.v
        clash = set(g1.vertices) & set(g2.vertices) or (
            {e for e, _, _ in g1.edges} & {e for e, _, _ in g2.edges})
        if clash:
            g2, v = g2.relabel("g2_"), "g2_" + v
        return g1, self.u, g2, v


def glue(plan: GluePlan) -> BasedMultigraph:
    g1, u, g2, v = plan.blocks()
    return disjoint_union_with_path(g1, u, g2, v, plan.k, prefix="p1_")


@dataclass
class CertificateVector:
    graph: BasedMultigraph
    x: np.ndarray
    c0: float
    c1: float
    c_prime: float
    m: float
    k: int
    cw_upper: float

    @property
    def bound(self) -> float:
        """Closed-form bound m + C' m^-k."""
        return self.m + self.c_prime * self.m ** (-self.k)


def glue_certificate_vector(g1: BasedMultigraph, u: str, x1: np.ndarray, g2: BasedMultigraph, v: str,
                            x2: np.ndarray, k: int, m: float) -> CertificateVector:
    """Positive test vector on the darts of ``g1 -path(k)- g2`` and its CW upper bound.

    Blocks keep their PF witnesses; path darts decay geometrically away from
    the block they point at, so every path dart has ratio exactly ``m``:

        forward  (w_{t-1} -> w_t):  C0 * m^(t-k+1)
        backward (w_t -> w_{t-1}):  C1 * m^(2-t)

    with ``C0 = 2 S2 / m^2`` and ``C1 = 2 S1 / m^2`` where ``S1``, ``S2`` are the
    witness sums over darts leaving ``u`` in ``g1`` and ``v`` in ``g2``; the two
    darts entering the blocks then have ratio ``m / 2``.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if np.any(x1 <= 0) or np.any(x2 <= 0):
        raise ConstructionError("witness vectors must be strictly positive")
    if len(x1) != g1.num_darts or len(x2) != g2.num_darts:
        raise ConstructionError("witness length does not match dart count")
    if k < 1:
        raise GraphError("k must be >= 1")
    g3 = disjoint_union_with_path(g1, u, g2, v, k, prefix="p1_")
    s1 = sum(x1[d] for d in range(g1.num_darts) if g1.dart_tail(d) == u)
    s2 = sum(x2[d] for d in range(g2.num_darts) if g2.dart_tail(d) == v)
    c0 = 2.0 * s2 / m**2
    c1 = 2.0 * s1 / m**2
    t = np.arange(1, k + 1, dtype=np.float64)
    path = np.empty(2 * k, dtype=np.float64)
    path[0::2] = c0 * m ** (t - k + 1)
    path[1::2] = c1 * m ** (2 - t)
    x = np.concatenate([x1, x2, path])
    into_u = min(x1[d] for d in range(g1.num_darts) if g1.dart_head(d) == u)
    into_v = min(x2[d] for d in range(g2.num_darts) if g2.dart_head(d) == v)
    c_prime = max(c0 * m**2 / into_u, c1 * m**2 / into_v)
    B3 = build_nb_operator(g3)
    cw_upper = float(np.max(B3.matvec(x) / x))
    return CertificateVector(g3, x, c0, c1, c_prime, m, k, cw_upper)


@dataclass
class DecayRecord:
    k: int
    lo: float
    hi: float
    m: float
    eps: float
    cw_upper: float
    c_prime: float
    flagged: bool = False

    def row(self) -> tuple:
        return (self.k, self.lo, self.hi, self.m, self.eps, self.cw_upper)


@dataclass
class DecayStudy:
    records: list[DecayRecord]
    slope: float
    intercept: float
    m: float

    CSV_HEADER = ("k", "lo", "hi", "m", "eps", "cw_upper")


def decay_study(plan: GluePlan, k_list, tol: float = DEFAULT_TOL) -> DecayStudy:
    """Excess growth eps(k) of the glued graph over the larger block, and its log-slope."""
    g1, u, g2, v = plan.blocks()
    c1 = spectral_radius(build_nb_operator(g1), tol)
    c2 = spectral_radius(build_nb_operator(g2), tol)
    base = max(c1.mid, c2.mid)
    m = max(c1.hi, c2.hi)
    records = []
    for k in k_list:
        g3 = disjoint_union_with_path(g1, u, g2, v, k, prefix="p1_")
        c3 = spectral_radius(build_nb_operator(g3), tol)
        vec = glue_certificate_vector(g1, u, c1.witness, g2, v, c2.witness, k, m)
        eps = c3.mid - base
        records.append(DecayRecord(k, c3.lo, c3.hi, m, eps, vec.cw_upper, vec.c_prime,
                                   flagged=eps <= 5 * tol))
    fit = [(r.k, math.log(r.eps)) for r in records if not r.flagged]
    if len(fit) >= 2:
        ks, ls = zip(*fit)
        slope, intercept = np.polyfit(ks, ls, 1)
    else:
        slope = intercept = float("nan")
    return DecayStudy(records, float(slope), float(intercept), m)


# -- prescription ------------------------------------------------------------------------

@dataclass
class Prescription:
    graph: BasedMultigraph
    certificate: GrowthCertificate
    attach: str
    multiplicities: tuple[int, ...]
    evaluations: int = 0


def _spread_order(n: int, seed: int = 0) -> list[int]:
    """Bit-reversal order of bead positions, rotated by ``seed``."""
    width = max(1, (n - 1).bit_length())
    order = sorted(range(n), key=lambda i: (int(format(i, f"0{width}b")[::-1], 2), i))
    return [(i + seed) % n for i in order]


def _canonical(m: tuple[int, ...]) -> tuple[int, ...]:
    """Representative of the multiplicity pattern under rotation and reflection.

    Only applied to short necklaces; long ones are keyed as given.
    """
    n = len(m)
    best = m
    if n > 64:
        return m
    for seq in (m, m[::-1]):
        for s in range(n):
            rot = seq[s:] + seq[:s]
            if rot < best:
                best = rot
    return best


class _NecklaceEvaluator:
    def __init__(self, r: int, tol: float):
        self.r = r
        self.tol = tol
        self.cache: dict[tuple[int, ...], GrowthCertificate] = {}
        self.evaluations = 0

    def __call__(self, m) -> GrowthCertificate:
        key = _canonical(tuple(m))
        if key not in self.cache:
            self.evaluations += 1
            self.cache[key] = growth_rate(necklace(key, self.r), self.tol)
        return self.cache[key]


def _search_necklace(alpha: float, eps: float, r: int, n: int, ev: _NecklaceEvaluator, seed: int):
    """Binary search along a nested fill order, then greedy single-bead increments."""
    order = _spread_order(n, seed)
    steps = [order[j % n] for j in range(n * (r - 1))]

    def config(c):
        m = [1] * n
        for p in steps[:c]:
            m[p] += 1
        return m

    lo_c, hi_c = 0, len(steps)          # growth(config(lo_c)) < alpha by invariant
    while hi_c - lo_c > 1:
        mid = (lo_c + hi_c) // 2
        if ev(config(mid)).hi < alpha:
            lo_c = mid
        else:
            hi_c = mid
    for start in (config(lo_c), [1] * n):
        found = _ascend(start, alpha, eps, r, ev, order)
        if found is not None:
            return found
    return None


def _candidates(m, r, order, limit=48):
    """Bead positions worth trying next.

    Short necklaces try every free position.  Long ones try a bounded mix of
    positions next to existing doubled beads (larger growth jumps) and fresh
    positions in spread order (smaller jumps), since trying all n per step
    makes the ascent quadratic.
    """
    n = len(m)
    free = [i for i in order if m[i] < r]
    if n <= 64:
        return free
    near = [i for i in free if m[i - 1] > 1 or m[(i + 1) % n] > 1 or m[i] > 1]
    step = max(1, len(near) // (limit // 2))
    picked = near[::step][: limit // 2]
    fresh = [i for i in free if i not in set(near)][: limit - len(picked)]
    return picked + fresh


def _ascend(m, alpha, eps, r, ev, order):
    """Repeatedly add the single bead keeping certified growth highest but below alpha."""
    m = list(m)
    cert = ev(m)
    if not cert.hi < alpha:
        return None
    while not (cert.lo > alpha - eps and cert.kind == "spectral"):
        best = None
        for i in _candidates(m, r, order):
            trial = list(m)
            trial[i] += 1
            c = ev(trial)
            if c.hi < alpha and (best is None or c.lo > best[0].lo):
                best = (c, trial)
        if best is None:
            return None
        cert, m = best
    return m, cert


def prescribe(alpha: float, eps: float, r: int = 2, seed: int = 0, tol: float = DEFAULT_TOL,
              n_start: int = 8, n_cap: int = 1 << 14) -> Prescription:
    """Necklace graph with certified growth inside ``(alpha - eps, alpha)``.

    Bead count doubles from ``n_start`` until the search lands in the window;
    the cap is doubled once before giving up.
    """
    if r < 1:
        raise ValueError("r must be positive")
    if not 1 < alpha < 2 * r - 1:
        raise ValueError(f"alpha must lie in the open interval (1, {2 * r - 1})")
    if eps <= 0 or alpha - eps <= 1:
        raise ValueError("need eps > 0 and alpha - eps > 1")
    ev = _NecklaceEvaluator(r, tol)
    n = n_start
    tried = []
    for cap in (n_cap, 2 * n_cap):
        while n <= cap:
            # the sparsest non-cycle necklace bounds every candidate of this size from below
            if not ev([2] + [1] * (n - 1)).hi < alpha:
                tried.append(n)
                n *= 2
                continue
            found = _search_necklace(alpha, eps, r, n, ev, seed)
            tried.append(n)
            if found is not None:
                m, cert = found
                m = _canonical(tuple(m))
                g = necklace(m, r)
                _check_block(g, cert, alpha, eps, r)
                attach = min(g.vertices, key=lambda w: (degree(g, w), g.vertices.index(w)))
                return Prescription(g, cert, attach, tuple(m), ev.evaluations)
            n *= 2
        log.info("prescribe(%s, %s, r=%s): raising size cap to %s", alpha, eps, r, 2 * cap)
    raise SearchBudgetError(
        f"no necklace with growth in ({alpha - eps}, {alpha}) for r={r}; "
        f"tried bead counts {tried}, {ev.evaluations} certified evaluations")


def _check_block(g: BasedMultigraph, cert: GrowthCertificate, alpha: float, eps: float, r: int):
    degs = g.degrees().values()
    problems = []
    if not g.is_connected():
        problems.append("disconnected")
    if min(degs) < 2 or max(degs) > 2 * r:
        problems.append("degree outside 2..2r")
    if min(degs) >= 2 * r:
        problems.append("no vertex of degree < 2r")
    if not is_irreducible(build_nb_operator(g)):
        problems.append("reducible operator")
    if not (alpha - eps < cert.lo and cert.hi < alpha):
        problems.append(f"enclosure [{cert.lo}, {cert.hi}] outside window")
    if problems:
        raise ConstructionError("prescribed block fails checks: " + ", ".join(problems))


def endpoint_graphs(r: int, which: str) -> BasedMultigraph:
    """Graphs realising the endpoints 1 and 2r-1 of the growth interval."""
    if r < 2:
        raise ValueError("r must be >= 2")
    if which == "low":
        return cycle(3, rank=r)
    if which == "high":
        return bouquet(r)
    raise ValueError("which must be 'low' or 'high'")


# -- staged construction -----------------------------------------------------------------

@dataclass
class StageRecord:
    n: int
    block: BasedMultigraph
    block_certificate: GrowthCertificate
    k: int | None
    graph: BasedMultigraph
    certificate: GrowthCertificate
    alpha: float
    spine: str
    ceiling: float
    labeling: Labeling | None = field(default=None, repr=False)

    @property
    def alpha_n(self) -> float:
        return self.block_certificate.mid

    def in_window(self, tol: float = DEFAULT_TOL) -> bool:
        """Certified growth in [alpha_n - tol, alpha_{n+1}), using certified block bounds."""
        return self.certificate.lo >= self.block_certificate.lo - tol and self.certificate.hi < self.ceiling

    def row(self) -> tuple:
        return (self.n, self.alpha_n, "" if self.k is None else self.k,
                self.certificate.lo, self.certificate.hi)

    CSV_HEADER = ("n", "alpha_n", "k_n", "lo", "hi")


def _hang(block: Prescription, n: int) -> tuple[BasedMultigraph, str]:
    """Block ``H_n`` with ids prefixed ``h{n}_`` plus a pendant spine vertex ``s{n}``."""
    h = block.graph.relabel(f"h{n}_")
    s = f"s{n}"
    g = BasedMultigraph(h.vertices + (s,), h.edges + ((f"s{n}e", f"h{n}_" + block.attach, s),), s, h.rank)
    return g, s


def build_sequence(alpha: float, r: int = 2, stages: int = 6, tol: float = DEFAULT_TOL, seed: int = 0,
                   k_start: int = 4, k_cap: int = 1 << 15, label: bool = True) -> list[StageRecord]:
    """Nested graphs G_1 < G_2 < ... whose growth increases towards ``alpha``.

    Block ``H_n`` is prescribed in ``(alpha - d_n, alpha - d_n/2)`` with
    ``d_n = (alpha - 1)/4 * 2^-n``.  ``G_{n+1}`` joins the spine end of ``G_n``
    to ``H_{n+1}`` by the shortest path found (doubling, then bisection) whose
    certified growth stays below the certified lower bound of ``H_{n+2}``.
    """
    if not 1 < alpha < 2 * r - 1:
        raise ValueError(f"alpha must lie in (1, {2 * r - 1})")
    if stages < 2:
        raise ValueError("need at least 2 stages")
    d0 = (alpha - 1) / 4
    blocks = []
    for n in range(1, stages + 2):
        d = d0 * 2.0**-n
        blocks.append(prescribe(alpha - d / 2, d / 2, r, seed=seed, tol=tol))
    for a, b in zip(blocks, blocks[1:]):
        if not a.certificate.hi < b.certificate.lo:
            raise ConstructionError("prescribed block growths are not strictly increasing")

    g, spine = _hang(blocks[0], 1)
    cert = growth_rate(g, tol)
    records = [StageRecord(1, blocks[0].graph, blocks[0].certificate, None, g, cert, alpha, spine,
                           blocks[1].certificate.lo)]
    for n in range(1, stages):
        nxt, s_next = _hang(blocks[n], n + 1)
        ceiling = blocks[n + 1].certificate.lo

        def attempt(k):
            cand = disjoint_union_with_path(g, spine, nxt, s_next, k, prefix=f"p{n}_")
            return cand, growth_rate(cand, tol)

        k = k_start
        cand, c = attempt(k)
        while not c.hi < ceiling:
            if k >= k_cap:
                raise SearchBudgetError(f"stage {n + 1}: no spine length <= {k_cap} keeps growth below {ceiling}")
            k *= 2
            cand, c = attempt(k)
        lo_k, hi_k = k // 2, k
        best = (k, cand, c)
        while hi_k - lo_k > 1 and k > k_start:
            mid = (lo_k + hi_k) // 2
            cm, ccm = attempt(mid)
            if ccm.hi < ceiling:
                hi_k, best = mid, (mid, cm, ccm)
            else:
                lo_k = mid
        k, g, cert = best
        spine = s_next
        records.append(StageRecord(n + 1, blocks[n].graph, blocks[n].certificate, k, g, cert, alpha,
                                   spine, ceiling))

    for rec in records:
        if not rec.in_window(tol):
            raise ConstructionError(f"stage {rec.n} violates its window")
    if label:
        lab = proper_label(records[0].graph, r)
        records[0].labeling = lab
        for rec in records[1:]:
            lab = extend_labeling(rec.graph, lab, r)
            rec.labeling = lab
    return records
