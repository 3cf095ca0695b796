import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanembed.graphs import (
    DenseGraph,
    InvalidParameters,
    VertexLabelling,
    WitnessSequence,
    bandwidth_of,
    bits,
    folded_labelling,
    from_edgelist_text,
    graph_power,
    grid_vertex,
    identity_labelling,
    is_labelled_subgraph,
    make_named,
    to_edgelist_text,
    validate_witness,
)


def brute_edge_count(G):
    return sum(
        1 for u in range(G.n) for v in range(u + 1, G.n) if G.has_edge(u, v)
    )


# -- named graphs ---------------------------------------------------------


def z_rule_pairs(r, ell):
    """Independent enumeration of the blown-cycle edge rule."""
    cells = [(i, j) for i in range(1, ell + 1) for j in range(1, r + 1)]
    pairs = set()
    for (i, j), (i2, j2) in itertools.combinations(cells, 2):
        if j == j2:
            continue
        if abs(i - i2) <= 1 or {i, i2} == {1, ell}:
            pairs.add((grid_vertex(i, j, r), grid_vertex(i2, j2, r)))
    return pairs


def test_z_2_3_has_six_vertices_nine_edges():
    G = make_named("Z", [2, 3])
    assert G.n == 6
    assert G.edge_count() == len(z_rule_pairs(2, 3)) == 9


def test_c_2_6_has_twelve_edges():
    G = make_named("C", [2, 6])
    expected = set()
    for i in range(6):
        for j in (1, 2):
            expected.add(frozenset((i, (i + j) % 6)))
    assert G.n == 6
    assert G.edge_count() == len(expected) == 12


def test_p_1_2_is_single_edge():
    G = make_named("P", [1, 2])
    assert G.n == 2 and G.edge_count() == 1


@pytest.mark.parametrize(
    "kind,params",
    [("Z", [2, 2]), ("Z", [1, 1]), ("C", [2, 4]), ("C", [3, 6]), ("P", [0, 5])],
)
def test_degenerate_named_parameters_rejected(kind, params):
    with pytest.raises(InvalidParameters):
        make_named(kind, params)


@pytest.mark.parametrize("r,ell", [(r, ell) for r in (1, 2, 3) for ell in (3, 4, 5)])
def test_z_matches_rule_enumeration(r, ell):
    G = make_named("Z", [r, ell])
    assert set(G.edges()) == z_rule_pairs(r, ell)


@pytest.mark.parametrize("r,ell", [(2, 3), (2, 4), (3, 3), (3, 5)])
def test_z_blocks_span_cliques(r, ell):
    G = make_named("Z", [r, ell])
    for i in range(1, ell + 1):
        block = [grid_vertex(i, j, r) for j in range(1, r + 1)]
        assert G.is_clique(block)


# -- containment chain ------------------------------------------------------


def tiling_graph(copies, r):
    edges = []
    for c in range(copies):
        for u in range(c * r, (c + 1) * r):
            for v in range(u + 1, (c + 1) * r):
                edges.append((u, v))
    return DenseGraph.from_edges(copies * r, edges)


@pytest.mark.parametrize("r,ell", [(r, ell) for r in (2, 3, 4) for ell in (3, 4, 5)])
def test_containment_chain_under_identity(r, ell):
    n = 2 * r * ell
    ident = list(range(n))
    tiling = tiling_graph(2 * ell, r)
    c_low = make_named("C", [r - 1, n]) if r >= 2 else None
    z_mid = make_named("Z", [r, 2 * ell])
    c_high = make_named("C", [2 * r - 1, n])
    z_top = make_named("Z", [2 * r, ell])
    assert is_labelled_subgraph(tiling, c_low, ident)
    assert is_labelled_subgraph(c_low, z_mid, ident)
    assert is_labelled_subgraph(z_mid, c_high, ident)
    assert is_labelled_subgraph(c_high, z_top, ident)


def test_labelled_subgraph_identity_triangle():
    K3 = DenseGraph.complete(3)
    assert is_labelled_subgraph(K3, K3, [0, 1, 2])


def test_labelled_subgraph_rejects_noninjective():
    K3 = DenseGraph.complete(3)
    with pytest.raises(InvalidParameters):
        is_labelled_subgraph(K3, K3, [0, 0, 1])


# -- bandwidth ----------------------------------------------------------


def test_zigzag_cycle_bandwidth_two():
    for n in (4, 6, 10, 50, 200):
        G = make_named("C", [1, n])
        assert bandwidth_of(G, folded_labelling(n)) == 2


def test_complete_graph_bandwidth():
    for n in (2, 5, 9):
        G = DenseGraph.complete(n)
        assert bandwidth_of(G, identity_labelling(n)) == n - 1


def test_cycle_order_labelling_of_squared_cycle():
    G = make_named("C", [2, 12])
    assert bandwidth_of(G, identity_labelling(12)) == 11
    assert bandwidth_of(G, folded_labelling(12)) <= 4


def test_bandwidth_zero_iff_edgeless():
    assert bandwidth_of(DenseGraph.empty(7), identity_labelling(7)) == 0
    G = DenseGraph.from_edges(7, [(0, 6)])
    assert bandwidth_of(G, identity_labelling(7)) > 0


def test_labelling_must_be_permutation():
    with pytest.raises(InvalidParameters):
        VertexLabelling((0, 0, 1))


# -- graph powers -----------------------------------------------------------


def test_power_of_cycle_equals_named_power():
    base = make_named("C", [1, 6])
    assert graph_power(base, 2) == make_named("C", [2, 6])


def test_power_of_path_is_complete():
    base = make_named("P", [1, 4])
    assert graph_power(base, 3) == DenseGraph.complete(4)


def test_power_never_joins_components():
    G = DenseGraph.from_edges(4, [(0, 1), (2, 3)])
    assert graph_power(G, 5) == G


@given(st.integers(2, 7), st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_power_monotone(n, r):
    base = make_named("P", [1, n])
    low = graph_power(base, r)
    high = graph_power(base, r + 1)
    for u in range(n):
        assert low.rows[u] & ~high.rows[u] == 0


# -- witnesses ----------------------------------------------------------


def test_witness_cycle_in_complete_host():
    K5 = DenseGraph.complete(5)
    w = WitnessSequence((3, 0, 4, 1, 2), "cycle", 2)
    assert validate_witness(K5, w)


def test_witness_cycle_missing_chord():
    C6 = make_named("C", [1, 6])
    w = WitnessSequence((0, 1, 2, 3, 4, 5), "cycle", 2)
    res = validate_witness(C6, w)
    assert not res
    assert res.violation == ("edge", 0, 2)


def test_witness_trail_allows_revisits():
    Z = make_named("Z", [2, 3])
    # (1,1)(1,2)(2,1)(2,2)(1,1)... revisiting vertex 0: check the 2-trail edges
    seq = (0, 1, 2, 3, 0, 1)
    needed = set()
    ok = True
    for i in range(len(seq)):
        for j in (1, 2):
            if i + j < len(seq):
                ok = ok and Z.has_edge(seq[i], seq[i + j])
    w = WitnessSequence(seq, "trail", 2)
    assert bool(validate_witness(Z, w)) == ok


def test_witness_path_rejects_duplicates():
    K5 = DenseGraph.complete(5)
    w = WitnessSequence((0, 1, 0), "path", 1)
    res = validate_witness(K5, w)
    assert not res and res.violation == ("dup", 0)


def test_witness_trail_rejects_collapsing_pair():
    K5 = DenseGraph.complete(5)
    w = WitnessSequence((0, 1, 0), "path", 2)
    # as a path it's a dup; as a trail the pair (0,0) at offsets (0,2) collapses
    w2 = WitnessSequence((0, 1, 0), "trail", 2)
    assert not validate_witness(K5, w)
    assert not validate_witness(K5, w2)


@given(st.integers(5, 40), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_named_cycle_power_is_its_own_witness(k, r):
    if k <= 2 * r:
        return
    G = make_named("C", [r, k])
    w = WitnessSequence(tuple(range(k)), "cycle", r)
    assert validate_witness(G, w)


# -- serialization ------------------------------------------------------


def test_edgelist_round_trip():
    G = make_named("Z", [2, 4])
    text = to_edgelist_text(G)
    assert text.splitlines()[0] == f"p {G.n} {G.edge_count()}"
    assert from_edgelist_text(text) == G


def test_edgelist_rejects_bad_header_count():
    with pytest.raises(InvalidParameters):
        from_edgelist_text("p 3 5\ne 0 1\n")


# -- invariants --------------------------------------------------------------


@given(st.integers(0, 10), st.integers(0, 200))
@settings(max_examples=50, deadline=None)
def test_edge_count_is_half_popcount(n, seed):
    import random as _r

    rng = _r.Random(seed)
    edges = set()
    for _ in range(n * 2):
        if n >= 2:
            u, v = rng.sample(range(n), 2)
            edges.add((min(u, v), max(u, v)))
    G = DenseGraph.from_edges(n, edges)
    assert G.edge_count() == brute_edge_count(G) == len(edges)
    assert sum(r.bit_count() for r in G.rows) == 2 * G.edge_count()


def test_adjacency_symmetric_and_loopless():
    G = make_named("Z", [3, 4])
    for u in range(G.n):
        assert not G.has_edge(u, u)
        for v in range(G.n):
            assert G.has_edge(u, v) == G.has_edge(v, u)


def test_bits_helper():
    assert list(bits(0b101001)) == [0, 3, 5]
