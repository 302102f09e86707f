import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbgrowth import families as F
from nbgrowth.graph import (
    BasedMultigraph,
    DanglingEndpointError,
    DegreeOverflowError,
    DuplicateIdError,
    ForestError,
    GraphDocument,
    ParseError,
    UnknownVertexError,
    based_core,
    degree,
    disjoint_union_with_path,
    from_edge_list,
    graph_from_json,
    graph_to_json,
    parse_graph,
    serialize_graph,
    to_dot,
    two_core,
)

B2_TEXT = "rank 2\nbase v0\nvertex v0\nedge e1 v0 v0\nedge e2 v0 v0\n"


def random_multigraph(rng, n_vertices, n_edges, loops=True, connected=True):
    pairs = []
    if connected:
        for i in range(1, n_vertices):
            pairs.append((rng.randrange(i), i))
    while len(pairs) < n_edges:
        u, v = rng.randrange(n_vertices), rng.randrange(n_vertices)
        if u == v and not loops:
            continue
        pairs.append((u, v))
    return from_edge_list(pairs, 0)


multigraphs = st.builds(
    lambda seed, n, extra: random_multigraph(random.Random(seed), n, n - 1 + extra),
    st.integers(0, 10**6), st.integers(1, 9), st.integers(0, 8),
)


def test_parse_bouquet():
    doc = parse_graph(B2_TEXT)
    g = doc.graph
    assert len(g.vertices) == 1 and len(g.edges) == 2 and g.num_darts == 4
    assert degree(g, "v0") == 4
    assert doc.warnings == ()


def test_parse_five_cycle():
    text = "rank 1\nbase a\n" + "".join(f"vertex {c}\n" for c in "abcde")
    text += "".join(f"edge e{i} {u} {v}\n" for i, (u, v) in enumerate(zip("abcde", "bcdea")))
    g = parse_graph(text).graph
    assert len(g.vertices) == 5 and len(g.edges) == 5
    assert all(degree(g, v) == 2 for v in g.vertices)


def test_parse_dangling_endpoint():
    with pytest.raises(DanglingEndpointError) as err:
        parse_graph("rank 2\nbase v0\nvertex v0\nedge e1 v0 v9\n")
    assert err.value.line == 4


@pytest.mark.parametrize("text, exc", [
    ("rank 2\nbase v0\nvertex v0\nvertex v0\n", DuplicateIdError),
    ("rank 2\nbase v0\nvertex v0\nedge e1 v0 v0\nedge e1 v0 v0\n", DuplicateIdError),
    ("rank x\nbase v0\nvertex v0\n", ParseError),
    ("base v0\nvertex v0\n", ParseError),
    ("rank 2\nbase v0\nvertex v0\nblob v0\n", ParseError),
    ("rank 2\nbase v0\nvertex v0\nedge e1 v0 v0 colour=red\n", ParseError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_graph(text)


def test_parse_error_has_line_number():
    with pytest.raises(ParseError, match="line 3"):
        parse_graph("rank 2\nbase v0\nfoo\n")


def test_degree_overflow_is_warning_not_error():
    doc = parse_graph("rank 1\nbase v0\nvertex v0\nedge e1 v0 v0\nedge e2 v0 v0\n")
    assert len(doc.warnings) == 1 and "v0" in doc.warnings[0]


def test_comments_and_metadata():
    doc = parse_graph("# name: rose\n# provenance: test\n" + B2_TEXT.replace("vertex v0", "vertex v0  # wedge"))
    assert doc.name == "rose" and doc.provenance == "test"


def test_degree_examples():
    assert degree(F.bouquet(2), "v0") == 4
    assert all(degree(F.cycle(5), v) == 2 for v in F.cycle(5).vertices)
    k4 = F.complete(4)
    # brute force: count darts by tail
    for v in k4.vertices:
        assert degree(k4, v) == sum(1 for d in k4.darts() if d.tail == v) == 3
    with pytest.raises(UnknownVertexError):
        degree(k4, "nope")


@given(multigraphs)
def test_handshake_and_dart_involution(g):
    assert sum(degree(g, v) for v in g.vertices) == 2 * len(g.edges)
    assert g.num_darts == 2 * len(g.edges)
    for d in range(g.num_darts):
        r = g.reverse(d)
        assert g.reverse(r) == d and r != d
        assert g.dart_tail(d) == g.dart_head(r)


def test_loop_darts_are_distinct():
    g = F.bouquet(1)
    assert g.dart(0) != g.dart(1)
    assert g.dart(0).tail == g.dart(0).head == g.dart(1).tail


def test_two_core_examples():
    lolli = F.lollipop(3, 3)
    core = two_core(lolli)
    assert len(core.vertices) == 3 and len(core.edges) == 3 and core.is_cycle()
    k4 = F.complete(4)
    assert two_core(k4) == k4
    # two triangles joined by a path of length 4: every degree already >= 2
    pairs = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 6)]
    g = from_edge_list(pairs, 0)
    assert two_core(g) == g
    with pytest.raises(ForestError):
        two_core(F.path(4))


def _prune_oracle(g, rng):
    """Leaf deletion in a random order."""
    verts = set(g.vertices)
    edges = {e: (u, v) for e, u, v in g.edges}
    while True:
        deg = {v: 0 for v in verts}
        for u, v in edges.values():
            deg[u] += 1
            deg[v] += 1
        leaves = [v for v in verts if deg[v] <= 1]
        if not leaves:
            return verts, set(edges)
        x = rng.choice(sorted(leaves))
        verts.discard(x)
        edges = {e: uv for e, uv in edges.items() if x not in uv}


@settings(max_examples=60)
@given(multigraphs, st.integers(0, 1000))
def test_two_core_confluent_and_idempotent(g, seed):
    verts, edges = _prune_oracle(g, random.Random(seed))
    if not verts:
        with pytest.raises(ForestError):
            two_core(g)
        return
    core = two_core(g)
    assert set(core.vertices) == verts and {e for e, _, _ in core.edges} == edges
    assert all(d >= 2 for d in core.degrees().values())
    assert two_core(core) == core
    assert core.betti_number() == g.betti_number()


def test_based_core_examples():
    lolli = F.lollipop(3, 3)
    bc = based_core(lolli)
    assert bc.vertices == lolli.vertices and len(bc.edges) == 6
    k4 = F.complete(4)
    assert based_core(k4) == k4
    tree = F.path(5).with_basepoint("v2")
    single = based_core(tree)
    assert single.vertices == ("v2",) and single.edges == ()


@settings(max_examples=60)
@given(multigraphs, st.integers(0, 8))
def test_based_core_keeps_betti_number(g, base_idx):
    g = g.with_basepoint(g.vertices[base_idx % len(g.vertices)])
    bc = based_core(g)
    assert g.basepoint in bc.vertices
    assert bc.betti_number() == g.betti_number()
    assert bc.is_connected()


def test_disjoint_union_with_path_counts():
    a, b = F.complete(4, rank=2, prefix="a"), F.complete(4, rank=2, prefix="b")
    g = disjoint_union_with_path(a, "av0", b, "bv0", 1)
    assert (len(g.vertices), len(g.edges)) == (8, 13)
    g = disjoint_union_with_path(a, "av0", b, "bv0", 5)
    assert (len(g.vertices), len(g.edges)) == (12, 17)
    assert g.basepoint == a.basepoint
    inner = [v for v in g.vertices if v.startswith("p0_")]
    assert len(inner) == 4 and all(degree(g, v) == 2 for v in inner)
    assert a.is_subgraph_of(g) and b.is_subgraph_of(g)


def test_disjoint_union_degree_overflow():
    with pytest.raises(DegreeOverflowError):
        disjoint_union_with_path(F.bouquet(2), "v0", F.complete(4, rank=2, prefix="b"), "bv0", 2)


def test_round_trip_text_and_json():
    from nbgrowth.labeling import proper_label

    for g in (F.bouquet(3), F.petersen(rank=2), F.theta(3), F.lollipop(4, 2)):
        doc = GraphDocument(g, proper_label(g), name="x", provenance="unit")
        assert parse_graph(serialize_graph(doc)) == doc
        assert graph_from_json(json.dumps(graph_to_json(doc))) == doc
        plain = GraphDocument(g)
        assert parse_graph(serialize_graph(plain)) == plain


@settings(max_examples=50)
@given(multigraphs)
def test_round_trip_property(g):
    doc = GraphDocument(g)
    assert parse_graph(serialize_graph(doc)) == doc
    assert graph_from_json(graph_to_json(doc)) == doc


def test_json_errors():
    with pytest.raises(ParseError):
        graph_from_json("{not json")
    with pytest.raises(DanglingEndpointError):
        graph_from_json({"rank": 1, "base": "a", "vertices": ["a"], "edges": [{"id": "e", "u": "a", "v": "b"}]})


def test_dot_export():
    from nbgrowth.labeling import proper_label

    g = F.bouquet(2)
    dot = to_dot(GraphDocument(g, proper_label(g)))
    assert dot.startswith("digraph") and 'label="a"' in dot and 'label="b"' in dot
    assert to_dot(F.cycle(3)).startswith("graph")


def test_invalid_graph_construction():
    with pytest.raises(DanglingEndpointError):
        BasedMultigraph(("a",), (("e", "a", "b"),), "a")
    with pytest.raises(DanglingEndpointError):
        BasedMultigraph(("a",), (), "z")
