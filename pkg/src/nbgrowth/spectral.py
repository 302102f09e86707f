"""Non-backtracking operator, exact walk counts, and certified growth rates.

Growth certificates are two-sided Collatz-Wielandt enclosures: for any
positive vector ``x`` and irreducible non-negative ``B``,

    min_e (Bx)_e / x_e  <=  lambda_1(B)  <=  max_e (Bx)_e / x_e.

The witness is produced by power iteration on ``B + shift*I`` (primitive even
when ``B`` is periodic) and, when the spectral gap is small, polished by
inverse iteration with a shift above ``lambda_1`` so the iterate stays positive.
The bounds are rigorous for whatever positive vector comes out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.optimize import brentq
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigs, splu

from . import kernels
from .graph import BasedMultigraph, ForestError, GraphError, UnknownVertexError, two_core

DEFAULT_TOL = 1e-10


class SpectralError(ValueError):
    pass


class ReducibleOperatorError(SpectralError):
    pass


@dataclass(frozen=True, eq=False)
class NBOperator:
    """Sparse 0/1 non-backtracking operator on the darts of ``graph``.

    Row ``e`` lists the darts ``f`` with ``tail(f) == head(e)`` and
    ``f != reverse(e)``, in ascending dart order.
    """

    graph: BasedMultigraph
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.indptr) - 1

    def row(self, e: int) -> np.ndarray:
        return self.indices[self.indptr[e]:self.indptr[e + 1]]

    def row_sums(self) -> np.ndarray:
        return np.diff(self.indptr)

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.dim, self.dim))

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray().astype(np.int64)

    def triples(self) -> list[tuple[int, int, int]]:
        """Coordinate list (row dart, column dart, 1)."""
        return [(e, int(f), 1) for e in range(self.dim) for f in self.row(e)]

    def matvec(self, x: np.ndarray, shift: float = 0.0) -> np.ndarray:
        return kernels.nb_matvec(self.indptr, self.indices, np.ascontiguousarray(x, dtype=np.float64),
                                 float(shift))


def build_nb_operator(g: BasedMultigraph) -> NBOperator:
    out = g.out_darts()
    indptr = [0]
    indices: list[int] = []
    for e in range(g.num_darts):
        rev = e ^ 1
        indices.extend(f for f in out[g.dart_head(e)] if f != rev)
        indptr.append(len(indices))
    return NBOperator(g, np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64))


def is_irreducible(B: NBOperator) -> bool:
    """Strong connectivity of the dart digraph."""
    if B.dim == 0:
        return False
    n_comp, _ = connected_components(B.to_scipy(), directed=True, connection="strong")
    return n_comp == 1


# -- exact walk counting ---------------------------------------------------------

@dataclass(frozen=True)
class WalkCount:
    basepoint: str
    length: int
    count: int


def nb_walk_counts(g: BasedMultigraph, v: str, n_max: int, B: NBOperator | None = None) -> list[int]:
    """Exact ``NB_v(n)`` for ``n = 0..n_max`` by sparse big-integer products.

    A closed walk of ``n`` darts corresponds to ``n - 1`` operator steps, so
    ``NB_v(n) = sum over darts e leaving v and f entering v of (B^(n-1))_{e,f}``.
    """
    if v not in set(g.vertices):
        raise UnknownVertexError(f"unknown vertex {v!r}")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    B = B if B is not None else build_nb_operator(g)
    rows = [B.row(e).tolist() for e in range(B.dim)]
    into_v = [f for f in range(g.num_darts) if g.dart_head(f) == v]
    w = [1 if g.dart_tail(e) == v else 0 for e in range(g.num_darts)]
    counts = [1]
    for n in range(1, n_max + 1):
        if n > 1:
            nxt = [0] * len(w)
            for e, we in enumerate(w):
                if we:
                    for f in rows[e]:
                        nxt[f] += we
            w = nxt
        counts.append(sum(w[f] for f in into_v))
    return counts


def nb_walk_count(g: BasedMultigraph, v: str, n: int) -> WalkCount:
    return WalkCount(v, n, nb_walk_counts(g, v, n)[n])


def enumerate_nb_loops(g: BasedMultigraph, v: str, n: int):
    """Yield every closed non-backtracking dart sequence of length ``n`` at ``v`` (DFS)."""
    if v not in set(g.vertices):
        raise UnknownVertexError(f"unknown vertex {v!r}")
    if n == 0:
        yield ()
        return
    out = g.out_darts()
    head = [g.dart_head(d) for d in range(g.num_darts)]
    walk: list[int] = []
    stack = [iter(out[v])]
    while stack:
        d = next(stack[-1], None)
        if d is None:
            stack.pop()
            if walk:
                walk.pop()
            continue
        if walk and d == walk[-1] ^ 1:
            continue
        if len(walk) == n - 1:
            if head[d] == v:
                yield tuple(walk) + (d,)
            continue
        walk.append(d)
        stack.append(iter(out[head[d]]))


# -- certified spectral radius ---------------------------------------------------

@dataclass
class GrowthCertificate:
    lo: float
    hi: float
    witness: np.ndarray | None = field(default=None, repr=False)
    iters: int = 0
    tol: float = DEFAULT_TOL
    converged: bool = True
    kind: str = "spectral"
    shift: float = 1.0

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack

    def recheck(self, B: NBOperator) -> tuple[float, float]:
        """Recompute (lo, hi) from the stored witness."""
        if self.witness is None:
            return self.lo, self.hi
        lo, hi = kernels.cw_bounds(B.indptr, B.indices, np.ascontiguousarray(self.witness), self.shift)
        return lo - self.shift, hi - self.shift

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "iters": self.iters, "tol": self.tol,
                "converged": self.converged, "kind": self.kind}


def _bounds(B: NBOperator, x: np.ndarray, shift: float) -> tuple[float, float]:
    lo, hi = kernels.cw_bounds(B.indptr, B.indices, x, shift)
    return lo - shift, hi - shift


def spectral_radius(B: NBOperator, tol: float = DEFAULT_TOL, max_iter: int | None = None,
                    shift: float = 1.0, power_chunk: int = 32) -> GrowthCertificate:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if shift <= 0:
        raise ValueError("shift must be positive")
    if not is_irreducible(B):
        raise ReducibleOperatorError("non-backtracking operator is reducible")
    if max_iter is None:
        max_iter = 100 * B.dim + 10_000
    x = np.ones(B.dim, dtype=np.float64)
    lo, hi = _bounds(B, x, shift)
    best = (hi - lo, lo, hi, x.copy())
    iters = 0

    # power phase: stop once the width shrinks too slowly per chunk
    stall = 0
    while hi - lo > tol and iters < max_iter:
        n = min(power_chunk, max_iter - iters)
        kernels.power_iterate(B.indptr, B.indices, x, shift, n)
        iters += n
        prev = hi - lo
        lo, hi = _bounds(B, x, shift)
        if hi - lo < best[0]:
            best = (hi - lo, lo, hi, x.copy())
        stall = stall + 1 if hi - lo > 0.5 * prev else 0
        if stall >= 3:
            break

    if best[0] > tol and iters < max_iter:
        y = _chain_witness(B, best[1], best[2])
        if y is not None:
            iters += 1
            nlo, nhi = _bounds(B, y, shift)
            if nhi - nlo < best[0]:
                best = (nhi - nlo, nlo, nhi, y)

    if best[0] > tol and iters < max_iter:
        for y, n in _polish(B, best[3], best[2]):
            iters += n
            if np.all(y > 0):
                nlo, nhi = _bounds(B, y, shift)
                if nhi - nlo < best[0]:
                    best = (nhi - nlo, nlo, nhi, y)
            if best[0] <= tol or iters >= max_iter:
                break

    width, lo, hi, x = best
    return GrowthCertificate(lo=lo, hi=hi, witness=x, iters=iters, tol=tol,
                             converged=width <= tol, shift=shift)


def _segments(g: BasedMultigraph):
    """Maximal dart chains through degree-2 vertices, each starting at a branch vertex."""
    deg = g.degrees()
    out = g.out_darts()
    segs = []
    for v in g.vertices:
        if deg[v] == 2:
            continue
        for d in out[v]:
            chain = [d]
            while deg[g.dart_head(chain[-1])] == 2:
                nxt = [f for f in out[g.dart_head(chain[-1])] if f != chain[-1] ^ 1]
                chain.append(nxt[0])
            segs.append(chain)
    return segs


def _chain_witness(B: NBOperator, lo: float, hi: float, max_segments: int = 600):
    """Witness from the chain-contracted eigenproblem, or None if it does not pay off.

    With ``z_s`` the value on the last dart of segment ``s`` of length ``L_s``,
    an eigenvector satisfies ``z = M(lam) z`` where
    ``M(lam)[s, t] = [t may follow s] * lam**-L_t``; ``rho(M(lam))`` decreases
    in ``lam`` and equals 1 exactly at the PF eigenvalue.  Dart values along a
    segment are ``lam**(i - L) * z_s``.
    """
    g = B.graph
    segs = _segments(g)
    if not segs or len(segs) > max_segments or 2 * len(segs) > B.dim:
        return None
    first = {c[0]: i for i, c in enumerate(segs)}
    lengths = np.array([len(c) for c in segs], dtype=np.float64)
    adj = np.zeros((len(segs), len(segs)))
    for i, c in enumerate(segs):
        for f in B.row(c[-1]):
            adj[i, first[int(f)]] = 1.0

    def rho(lam):
        return np.max(np.abs(np.linalg.eigvals(adj * lam ** -lengths[None, :]))) - 1.0

    a, b = max(lo, 1e-12), hi
    try:
        if rho(a) < 0:
            a = 1e-12
        if rho(b) > 0:
            return None
        lam = brentq(rho, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError, np.linalg.LinAlgError):
        return None
    vals, vecs = np.linalg.eig(adj * lam ** -lengths[None, :])
    z = vecs[:, np.argmax(vals.real)].real
    z = z * np.sign(z.sum())
    if np.any(z <= 0):
        return None
    x = np.empty(B.dim)
    for zi, c in zip(z, segs):
        L = len(c)
        x[c] = zi * lam ** (np.arange(1, L + 1) - L)
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        return None
    return np.ascontiguousarray(x / x.sum())


def _polish(B: NBOperator, x: np.ndarray, hi: float):
    """Candidate witnesses from shift-invert iterations; yields (vector, solves used).

    For real sigma >= lambda_1 the PF eigenvalue is the eigenvalue nearest to
    sigma, so shift-invert Arnoldi at the CW upper bound locates it.  Inverse
    iteration just above that estimate then yields ``(sigma I - B)^-1 x``,
    which is entrywise positive whenever ``sigma > lambda_1``.
    """
    A = B.to_scipy().tocsc()
    ident = sp.identity(B.dim, format="csc")
    lam = None
    if B.dim > 2:
        try:
            vals, vecs = eigs(A, k=1, sigma=hi, which="LM", v0=x, tol=1e-14,
                              ncv=min(B.dim - 1, 48), maxiter=500)
        except ArpackNoConvergence as exc:
            vals, vecs = exc.eigenvalues, exc.eigenvectors
        except (ArpackError, RuntimeError, ValueError):
            vals = vecs = None
        if vals is not None and len(vals):
            lam = float(vals[0].real)
            v = vecs[:, 0].real
            v = v * np.sign(v.sum())
            yield np.ascontiguousarray(v / v.sum()), 1
    if lam is None:
        lam = hi
    scale = max(1.0, abs(lam))
    for rel in (1e-12, 1e-10, 1e-8, 1e-6):
        sigma = lam + rel * scale
        try:
            lu = splu((sigma * ident - A).tocsc())
        except RuntimeError:
            continue
        y = x.copy()
        for _ in range(3):
            y = lu.solve(y)
            total = y.sum()
            if not np.isfinite(total) or total == 0:
                break
            y = np.ascontiguousarray(y / total)
            yield y, 1


def growth_rate(g: BasedMultigraph, tol: float = DEFAULT_TOL, max_iter: int | None = None,
                shift: float = 1.0) -> GrowthCertificate:
    """Certified growth of closed non-backtracking loops of a connected graph.

    Tails are stripped first.  A core that is a single cycle gets the exact
    certificate [1, 1]; an acyclic graph gets [1, 1] with ``kind="degenerate"``.
    """
    if not g.is_connected():
        raise GraphError("growth_rate needs a connected graph")
    try:
        core = two_core(g)
    except ForestError:
        return GrowthCertificate(1.0, 1.0, None, 0, tol, True, kind="degenerate", shift=shift)
    if core.is_cycle():
        return GrowthCertificate(1.0, 1.0, None, 0, tol, True, kind="cycle", shift=shift)
    return spectral_radius(build_nb_operator(core), tol, max_iter, shift)


def core_operator(g: BasedMultigraph) -> NBOperator:
    return build_nb_operator(two_core(g))


def truncation_growth_profile(stages, tol: float = DEFAULT_TOL) -> list[GrowthCertificate]:
    """Certificates for a nested sequence of finite graphs (id-level containment)."""
    stages = list(stages)
    for i, (a, b) in enumerate(zip(stages, stages[1:])):
        if not a.is_subgraph_of(b):
            raise GraphError(f"stage {i} is not a subgraph of stage {i + 1}")
    return [growth_rate(s, tol) for s in stages]
