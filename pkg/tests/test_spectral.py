import math
import os
import random
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import dfs_loop_count, random_multigraph
from nbgrowth import _pykernels, kernels
from nbgrowth import families as F
from nbgrowth.graph import GraphError, UnknownVertexError, disjoint_union_with_path, from_edge_list
from nbgrowth.spectral import (
    ReducibleOperatorError,
    build_nb_operator,
    enumerate_nb_loops,
    growth_rate,
    is_irreducible,
    nb_walk_count,
    nb_walk_counts,
    spectral_radius,
    truncation_growth_profile,
)

TOL = 1e-10


# -- operator ---------------------------------------------------------------------

@pytest.mark.parametrize("g, dim, rowsum", [
    (F.bouquet(2), 4, 3),
    (F.cycle(5), 10, 1),
    (F.complete(4), 12, 2),
    (F.theta(3), 6, 2),
])
def test_operator_shape_and_row_sums(g, dim, rowsum):
    B = build_nb_operator(g)
    assert B.dim == dim
    assert np.all(B.row_sums() == rowsum)


def test_operator_dense_matches_definition():
    g = F.lollipop(3, 2)
    D = build_nb_operator(g).to_dense()
    for e in range(g.num_darts):
        for f in range(g.num_darts):
            follows = g.dart_head(e) == g.dart_tail(f) and f != g.reverse(e)
            assert D[e, f] == int(follows)


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_row_sum_law(seed):
    rng = random.Random(seed)
    g = random_multigraph(rng, rng.randint(1, 8), rng.randint(1, 14))
    B = build_nb_operator(g)
    deg = g.degrees()
    expected = [deg[g.dart_head(e)] - 1 for e in range(g.num_darts)]
    assert B.row_sums().tolist() == expected
    assert len(B.triples()) == sum(expected)


def test_irreducibility():
    assert is_irreducible(build_nb_operator(F.complete(4)))
    assert is_irreducible(build_nb_operator(F.bouquet(2)))
    assert not is_irreducible(build_nb_operator(F.cycle(6)))
    assert not is_irreducible(build_nb_operator(F.path(3)))
    assert not is_irreducible(build_nb_operator(F.lollipop(3, 2)))


# -- walk counts -----------------------------------------------------------------

def test_walk_count_examples():
    assert nb_walk_count(F.bouquet(2), "v0", 3).count == 36
    c5 = F.cycle(5)
    assert nb_walk_count(c5, "v0", 5).count == 2
    assert nb_walk_count(c5, "v0", 4).count == 0
    assert nb_walk_counts(c5, "v0", 0) == [1]
    with pytest.raises(UnknownVertexError):
        nb_walk_counts(c5, "zz", 3)


def test_k4_walk_counts_against_dfs():
    g = F.complete(4)
    counts = nb_walk_counts(g, "v0", 20)
    assert counts == [dfs_loop_count(g, "v0", n) for n in range(21)]
    assert 1.9 <= counts[20] / counts[19] <= 2.1


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_walk_counts_against_dfs_random(seed):
    rng = random.Random(seed)
    g = random_multigraph(rng, rng.randint(1, 6), rng.randint(1, 9))
    v = rng.choice(g.vertices)
    assert nb_walk_counts(g, v, 9) == [dfs_loop_count(g, v, n) for n in range(10)]


def test_enumerated_loops_are_counted():
    g = F.theta(3)
    for n in range(8):
        loops = list(enumerate_nb_loops(g, g.basepoint, n))
        assert len(loops) == len(set(loops)) == dfs_loop_count(g, g.basepoint, n)


# -- certificates ------------------------------------------------------------------

@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_bouquet_certificate(r):
    cert = growth_rate(F.bouquet(r), TOL)
    assert cert.contains(2 * r - 1) and cert.width <= 1e-8 and cert.converged


@pytest.mark.parametrize("g, d", [
    (F.complete(4), 3), (F.complete_bipartite(3, 3), 3), (F.petersen(), 3), (F.hypercube(3), 3),
    (F.complete(5), 4), (F.hypercube(4), 4), (F.complete(6), 5), (F.theta(3), 3),
])
def test_regular_graphs(g, d):
    cert = growth_rate(g, TOL)
    assert cert.contains(d - 1, slack=1e-12) and cert.width <= 1e-8


def test_certificate_recheck_and_shift():
    g = disjoint_union_with_path(F.complete(4, prefix="a"), "av0", F.theta(3, prefix="b"), "bv0", 2)
    B = build_nb_operator(g)
    c1 = spectral_radius(B, TOL)
    lo, hi = c1.recheck(B)
    assert (lo, hi) == pytest.approx((c1.lo, c1.hi), abs=1e-14)
    assert np.all(c1.witness > 0)
    c2 = spectral_radius(B, TOL, shift=2.0)
    assert c1.lo <= c2.hi + 2 * TOL and c2.lo <= c1.hi + 2 * TOL
    assert 2 < c1.lo < c1.hi < 3


def test_certificate_from_walk_ratio():
    # B_2 with one loop subdivided into a triangle
    g = from_edge_list([(0, 0), (0, 1), (1, 2), (2, 0)], 0)
    cert = growth_rate(g, TOL)
    counts = nb_walk_counts(g, "v0", 300)
    ratio = counts[300] / counts[299]
    # ratios converge geometrically; compare over one period-free stretch
    assert abs(ratio - cert.mid) < 1e-6


def test_cycles_and_tails_are_exactly_one():
    for n in (3, 7, 20):
        cert = growth_rate(F.lollipop(n, 4), TOL)
        assert (cert.lo, cert.hi, cert.kind) == (1.0, 1.0, "cycle")
    cert = growth_rate(F.path(4), TOL)
    assert cert.kind == "degenerate"


def test_tail_does_not_change_growth():
    k4 = growth_rate(F.complete(4), TOL)
    tailed = growth_rate(F.with_tail(F.complete(4), "v0", 5), TOL)
    assert abs(k4.mid - tailed.mid) < 1e-9


def test_errors():
    with pytest.raises(GraphError):
        growth_rate(F.cycle(3).subgraph(["v0", "v1"], []), TOL)
    with pytest.raises(ReducibleOperatorError):
        spectral_radius(build_nb_operator(F.cycle(4)), TOL)
    with pytest.raises(ValueError):
        spectral_radius(build_nb_operator(F.complete(4)), 0.0)


def test_truncation_profile():
    k4 = F.complete(4)
    big = disjoint_union_with_path(k4, "v0", F.complete(5, rank=3, prefix="b"), "bv0", 3)
    profile = truncation_growth_profile([k4, F.with_tail(k4, "v0", 2, prefix="p0_"), big], TOL)
    assert profile[0].contains(2) and profile[1].contains(2)
    assert profile[1].hi <= profile[2].lo
    with pytest.raises(GraphError):
        truncation_growth_profile([big, k4], TOL)


def test_subgraph_monotonicity_small():
    k4 = F.complete(4)
    sub = k4.subgraph(k4.vertices, [e for e, _, _ in k4.edges][:-1])
    assert growth_rate(sub, TOL).lo <= growth_rate(k4, TOL).hi + 2 * TOL


# -- kernels -----------------------------------------------------------------------------

@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
def test_compiled_kernels_match_fallback():
    from nbgrowth import _ckernels

    rng = np.random.default_rng(1)
    g = F.necklace([1, 2, 1, 3, 2, 1, 1, 2], rank=3)
    B = build_nb_operator(g)
    x = rng.random(B.dim) + 0.1
    np.testing.assert_allclose(_ckernels.nb_matvec(B.indptr, B.indices, x, 0.5),
                               _pykernels.nb_matvec(B.indptr, B.indices, x, 0.5), rtol=1e-14)
    a, b = x.copy(), x.copy()
    _ckernels.power_iterate(B.indptr, B.indices, a, 1.0, 20)
    _pykernels.power_iterate(B.indptr, B.indices, b, 1.0, 20)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    assert _ckernels.cw_bounds(B.indptr, B.indices, a, 1.0) == pytest.approx(
        _pykernels.cw_bounds(B.indptr, B.indices, a, 1.0), rel=1e-14)


def test_pure_python_backend_subprocess():
    code = ("from nbgrowth import kernels, families, growth_rate\n"
            "c = growth_rate(families.petersen(), 1e-10)\n"
            "print(kernels.BACKEND, c.lo, c.hi)\n")
    env = {**os.environ, "NBGROWTH_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, lo, hi = out.stdout.split()
    assert backend == "python"
    assert float(lo) <= 2 + 1e-12 <= float(hi) + 2e-12
    assert math.isclose(float(lo), 2, abs_tol=1e-8)


@pytest.mark.parametrize("g", [F.theta(3), F.bouquet(2), F.petersen(), F.necklace([2, 1, 1, 2, 1, 1, 1]),
                               disjoint_union_with_path(F.complete(4, prefix="a"), "av0",
                                                        F.theta(3, prefix="b"), "bv0", 2)],
                         ids=["theta", "bouquet", "petersen", "necklace", "glued"])
def test_walk_counts_obey_certificate(g):
    # B x <= hi x componentwise, so (B^(n-1))_{ef} <= hi^(n-1) x_e / x_f
    B = build_nb_operator(g)
    cert = spectral_radius(B, TOL)
    x = cert.witness
    v = g.basepoint
    const = sum(x[e] / x[f] for e in range(g.num_darts) if g.dart_tail(e) == v
                for f in range(g.num_darts) if g.dart_head(f) == v)
    counts = nb_walk_counts(g, v, 200, B)
    for n in range(1, 201):
        assert counts[n] <= cert.hi ** (n - 1) * const * (1 + 1e-9)
