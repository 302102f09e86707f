import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import brute_loops, dfs_loop_count, random_multigraph, read_word
from nbgrowth import families as F
from nbgrowth.graph import LETTERS, disjoint_union_with_path
from nbgrowth.labeling import (
    Labeling,
    LabelingError,
    UnlabelableError,
    WalkError,
    Word,
    enumerate_subgroup_words,
    extend_labeling,
    iter_subgroup_words,
    loop_to_word,
    proper_label,
    verify_labeling,
)


def proper_by_definition(g, L, r):
    """Independent properness check: per vertex, per letter, at most one out and one in."""
    outs, ins = {}, {}
    for e, u, v in g.edges:
        letter, orient = L[e]
        if not 1 <= letter <= r:
            return False
        tail, head = (u, v) if orient == 0 else (v, u)
        outs[(tail, letter)] = outs.get((tail, letter), 0) + 1
        ins[(head, letter)] = ins.get((head, letter), 0) + 1
    return all(c <= 1 for c in outs.values()) and all(c <= 1 for c in ins.values())


def test_bouquet_labeling_is_identity_up_to_names():
    g = F.bouquet(2)
    L = proper_label(g, 2)
    assert verify_labeling(g, L, 2)[0]
    assert sorted(letter for letter, _ in L.values()) == [1, 2]


def test_path_rank_one():
    g = F.path(5, rank=1)
    L = proper_label(g, 1)
    assert verify_labeling(g, L, 1)[0]
    # all edges read the same letter, oriented consistently along the path
    assert {letter for letter, _ in L.values()} == {1}


def test_k4_rank_two_exhaustive():
    g = F.complete(4, rank=2)
    ids = [e for e, _, _ in g.edges]
    n_proper = 0
    for combo in itertools.product([(1, 0), (1, 1), (2, 0), (2, 1)], repeat=len(ids)):
        L = dict(zip(ids, combo))
        expected = proper_by_definition(g, L, 2)
        assert verify_labeling(g, L, 2)[0] == expected
        n_proper += expected
    assert n_proper > 0
    assert verify_labeling(g, proper_label(g, 2), 2)[0]


def test_violation_is_reported():
    g = F.bouquet(2)
    bad = {"e1": (1, 0), "e2": (1, 0)}
    ok, violations = verify_labeling(g, bad, 2)
    assert not ok
    vertex, letter, (d1, d2) = violations[0]
    assert vertex == "v0" and letter == 1 and d1 != d2


def test_single_loop_rank_one():
    g = F.bouquet(1)
    L = proper_label(g, 1)
    assert verify_labeling(g, L, 1)[0]


def test_degree_too_large():
    with pytest.raises(UnlabelableError) as err:
        proper_label(F.bouquet(3), 2)
    assert err.value.vertex == "v0"


def test_missing_edge_rejected():
    with pytest.raises(LabelingError):
        verify_labeling(F.bouquet(2), {"e1": (1, 0)}, 2)


@pytest.mark.parametrize("seed", range(100))
def test_random_graphs_label(seed):
    rng = random.Random(seed)
    r = rng.choice([1, 2, 3, 4])
    g = random_multigraph(rng, rng.randint(1, 12), rng.randint(0, 25), max_degree=2 * r, rank=r)
    if g is None:
        pytest.skip("degree budget exhausted")
    L = proper_label(g, r)
    assert verify_labeling(g, L, r)[0]
    assert proper_by_definition(g, L, r)
    assert proper_label(g, r) == L  # deterministic


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_restriction_stays_proper(seed):
    rng = random.Random(seed)
    g = random_multigraph(rng, rng.randint(2, 10), rng.randint(2, 20), max_degree=6, rank=3)
    if g is None:
        return
    L = proper_label(g, 3)
    keep = [e for e, _, _ in g.edges if rng.random() < 0.6]
    sub = g.subgraph(g.vertices, keep)
    assert verify_labeling(sub, L.restrict(keep), 3)[0]


def test_loop_to_word_examples():
    g = F.bouquet(2)
    L = Labeling({"e1": (1, 0), "e2": (2, 0)})
    assert str(loop_to_word(g, L, [0, 2])) == "a b"
    assert str(loop_to_word(g, L, [1, 3])) == "A B"
    assert str(loop_to_word(g, L, [])) == ""
    with pytest.raises(WalkError):
        loop_to_word(g, L, [0, 1])


def test_loop_to_word_rejects_broken_paths():
    g = F.cycle(4)
    L = proper_label(g, 2)
    with pytest.raises(WalkError):
        loop_to_word(g, L, [0, 4])
    with pytest.raises(WalkError):
        loop_to_word(g, L, [2])


def test_word_parse_and_reducedness():
    w = Word.parse("a B a")
    assert str(w) == "a B a" and len(w) == 3
    with pytest.raises(WalkError):
        Word.parse("a A")
    with pytest.raises(ValueError):
        Word.parse("ab")


@pytest.mark.parametrize("g", [F.theta(3), F.complete(4, rank=2), F.lollipop(3, 2), F.petersen(rank=2)],
                         ids=["theta", "k4", "lollipop", "petersen"])
def test_words_match_brute_force(g):
    L = proper_label(g)
    for n in range(0, 9):
        oracle = {read_word(L, w) for w in brute_loops(g, g.basepoint, n)}
        words = {w.letters for w in iter_subgroup_words(g, L, n)}
        assert words == oracle
        assert len(oracle) == dfs_loop_count(g, g.basepoint, n)


@pytest.mark.parametrize("g, n_max", [(F.theta(3), 10), (F.complete(4, rank=2), 10), (F.bouquet(2), 6)])
def test_enumeration_counts(g, n_max):
    res = enumerate_subgroup_words(g, proper_label(g), n_max=n_max)
    assert res.counts == [dfs_loop_count(g, g.basepoint, n) for n in range(n_max + 1)]
    assert all(len(w) == n for n, ws in enumerate(res.words) for w in ws)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_bouquet_counts_all_reduced_words(r):
    g = F.bouquet(r)
    res = enumerate_subgroup_words(g, proper_label(g), n_max=5)
    assert res.counts[0] == 1
    for n in range(1, 6):
        assert res.counts[n] == 2 * r * (2 * r - 1) ** (n - 1)


def test_five_cycle_counts():
    g = F.cycle(5)
    res = enumerate_subgroup_words(g, proper_label(g), n_max=10)
    assert res.counts == [1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2]


def test_improper_labeling_detected_by_enumeration():
    g = F.bouquet(2)
    bad = Labeling({"e1": (1, 0), "e2": (1, 0)})
    with pytest.raises(LabelingError):
        enumerate_subgroup_words(g, bad, n_max=2)


def test_extend_labeling_keeps_old_labels():
    a = F.complete(4, rank=2, prefix="a")
    b = F.theta(3, prefix="b")
    La = proper_label(a, 2)
    g = disjoint_union_with_path(a, "av0", b, "bv0", 3)
    L = extend_labeling(g, La, 2)
    assert verify_labeling(g, L, 2)[0]
    assert all(L[e] == La[e] for e in La)


def test_extend_labeling_noop_and_failure():
    g = F.bouquet(2)
    L = proper_label(g, 2)
    assert extend_labeling(g, L, 2) == L
    # a vertex already saturated by old labels cannot take a new edge
    h = disjoint_union_with_path(F.cycle(3), "v0", F.cycle(3, prefix="c"), "cv0", 1).with_rank(1)
    with pytest.raises(LabelingError):
        extend_labeling(h, proper_label(F.cycle(3), 1), 1)


def test_letters_alphabet():
    assert LETTERS[:3] == "abc"
