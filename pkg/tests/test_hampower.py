import pytest

from spanembed.constants import default_hampower_constants
from spanembed.generators import complete_bipartite, gnp, two_cliques
from spanembed.graphs import DenseGraph, WitnessSequence, validate_witness
from spanembed.hampower import (
    AbsorberSystem,
    HamAudit,
    HamConfig,
    StageFailure,
    absorb,
    build_absorber,
    build_absorbing_path,
    cover_with_paths,
    find_hamilton_power,
    select_reservoir,
)


# -- absorber -----------------------------------------------------------


def test_absorber_complete_host_full_coverage():
    G = DenseGraph.complete(100)
    system = build_absorber(G, 2, seed=0, coverage_target=3, max_blocks=50)
    assert len(system.blocks) >= 3
    for v in range(G.n):
        assert len(system.coverage[v]) >= 3
    used = set()
    for block in system.blocks:
        assert G.is_clique(block) and len(block) == 4
        assert not used & set(block)
        used |= set(block)


def test_absorber_bipartite_unreachable():
    G = complete_bipartite(30, 30)
    with pytest.raises(StageFailure) as exc:
        build_absorber(G, 2, seed=0)
    assert exc.value.stage == "absorber"
    assert "coverage-unreachable" in exc.value.detail


def test_absorber_random_dense_verified():
    G = gnp(200, 0.9, 4)
    system = build_absorber(G, 2, seed=4, coverage_target=2, max_blocks=8)
    system.revalidate(G)
    histogram = {}
    for v in range(G.n):
        histogram[len(system.coverage[v])] = histogram.get(len(system.coverage[v]), 0) + 1
    assert sum(histogram.values()) == G.n


# -- absorbing path ------------------------------------------------------


def test_absorbing_path_two_blocks_has_twenty_vertices():
    G = DenseGraph.complete(60)
    system = build_absorber(G, 2, seed=0, coverage_target=1, max_blocks=2)
    assert len(system.blocks) == 2
    pabs = build_absorbing_path(G, system, seed=0)
    assert len(pabs.path.vertices) == 20  # (t-1)*8r + 2r with t=2, r=2
    assert validate_witness(G, pabs.path)


@pytest.mark.parametrize("t", [1, 3, 4])
def test_absorbing_path_length_formula(t):
    r = 2
    G = DenseGraph.complete(120)
    system = build_absorber(G, r, seed=1, coverage_target=99, max_blocks=t)
    assert len(system.blocks) == t
    pabs = build_absorbing_path(G, system, seed=1)
    assert len(pabs.path.vertices) == (t - 1) * 8 * r + 2 * r
    assert pabs.S == pabs.path.vertices[: 2 * r]
    assert pabs.E_end == pabs.path.vertices[-2 * r :]


# -- absorb ------------------------------------------------------------


def make_pabs(n=140, r=2, t=6, seed=0):
    G = DenseGraph.complete(n)
    system = build_absorber(G, r, seed=seed, coverage_target=99, max_blocks=t)
    return G, build_absorbing_path(G, system, seed=seed)


def test_absorb_empty_set_is_identity():
    G, pabs = make_pabs()
    out = absorb(G, pabs, [])
    assert out.vertices == pabs.path.vertices
    assert out.kind == "path" and out.r == pabs.r


def test_absorb_three_vertices_complete_host():
    G, pabs = make_pabs(t=6)
    free = [v for v in range(G.n) if v not in set(pabs.path.vertices)][:3]
    out = absorb(G, pabs, free)
    assert validate_witness(G, out)
    assert set(out.vertices) == set(pabs.path.vertices) | set(free)
    assert out.vertices[: 2 * pabs.r] == pabs.S
    assert out.vertices[-2 * pabs.r :] == pabs.E_end


def test_absorb_pigeonhole_failure():
    G, pabs = make_pabs(t=4)  # 2 interior blocks
    free = [v for v in range(G.n) if v not in set(pabs.path.vertices)][:3]
    with pytest.raises(StageFailure) as exc:
        absorb(G, pabs, free)
    assert exc.value.stage == "matching-infeasible"


def test_absorb_rejects_overlapping_z():
    G, pabs = make_pabs()
    with pytest.raises(StageFailure):
        absorb(G, pabs, [pabs.path.vertices[0]])


# -- reservoir -----------------------------------------------------------


def test_reservoir_complete_host_first_draw():
    G = DenseGraph.complete(50)
    res = select_reservoir(G, 0.1, 0.2, seed=3)
    assert len(res) == 5
    for x in range(G.n):
        assert G.degree_into(x, sum(1 << v for v in res)) >= (0.5 + 0.1) * 5 - 1e-9


def test_reservoir_random_dense_verified():
    G = gnp(300, 0.8, 11)
    res = select_reservoir(G, 0.1, 0.2, seed=11)
    assert len(res) == 30
    mask = sum(1 << v for v in res)
    need = (0.5 + 0.1) * 30
    assert min(G.degree_into(x, mask) for x in range(G.n)) >= need


def test_reservoir_impossible_demand_exhausts():
    # a vertex of tiny degree can never see half of any sizable draw
    n = 40
    edges = [(u, v) for u in range(1, n) for v in range(u + 1, n)]
    edges.append((0, 1))  # vertex 0 has degree 1
    G = DenseGraph.from_edges(n, edges)
    with pytest.raises(StageFailure) as exc:
        select_reservoir(G, 0.25, 0.2, seed=0, retries=10)
    assert exc.value.stage == "reservoir"
    assert "retries-exhausted" in exc.value.detail


def test_reservoir_deterministic_per_seed():
    G = gnp(100, 0.8, 5)
    a = select_reservoir(G, 0.1, 0.2, seed=7)
    b = select_reservoir(G, 0.1, 0.2, seed=7)
    assert a == b


# -- cover ---------------------------------------------------------------


def test_cover_complete_host_single_path():
    G = DenseGraph.complete(50)
    paths, leftover = cover_with_paths(G, 4, 10, seed=0)
    assert len(paths) == 1
    assert len(paths[0].vertices) == 50
    assert leftover == []


def test_cover_random_dense_leftover_bound():
    G = gnp(200, 0.9, 6)
    paths, leftover = cover_with_paths(G, 4, 9, seed=6)
    for w in paths:
        assert validate_witness(G, w)
        assert len(w.vertices) >= 9
    covered = set()
    for w in paths:
        assert not covered & set(w.vertices)
        covered |= set(w.vertices)
    eta3 = 0.05
    assert len(leftover) <= 2 * eta3 * G.n


def test_cover_edgeless_everything_leftover():
    G = DenseGraph.empty(30)
    paths, leftover = cover_with_paths(G, 2, 4, seed=0)
    assert paths == []
    assert leftover == list(range(30))


def test_cover_respects_max_paths():
    G = DenseGraph.complete(40)
    paths, leftover = cover_with_paths(G, 3, 5, seed=1, max_paths=3)
    assert len(paths) <= 3
    assert sum(len(p.vertices) for p in paths) + len(leftover) == 40


# -- full pipeline ------------------------------------------------------


def test_hamilton_power_complete_r3():
    G = DenseGraph.complete(70)
    w = find_hamilton_power(G, 3, seed=0)
    assert w.kind == "cycle" and w.r == 3
    assert len(w.vertices) == 70
    assert validate_witness(G, w)


def test_hamilton_power_random_dense():
    G = gnp(80, 0.9, 1)
    w = find_hamilton_power(G, 2, seed=1)
    assert validate_witness(G, w)
    assert sorted(w.vertices) == list(range(80))


def test_hamilton_power_subspanning_target():
    G = DenseGraph.complete(64)
    w = find_hamilton_power(G, 2, n_target=60, seed=2)
    assert len(w.vertices) == 60
    assert len(set(w.vertices)) == 60
    assert validate_witness(G, w)


def test_hamilton_power_disconnected_fails_at_connector():
    G = two_cliques(30)
    audit = HamAudit()
    with pytest.raises(StageFailure) as exc:
        find_hamilton_power(G, 1, seed=0, config=HamConfig(attempts=4), audit=audit)
    assert exc.value.stage == "connector"
    assert not audit.prechecks["min-degree"]


def test_hamilton_power_never_emits_invalid(subtests=None):
    # failure paths raise; success paths carry a validated witness
    for seed in range(4):
        G = gnp(60, 0.9, seed + 40)
        try:
            w = find_hamilton_power(G, 2, seed=seed)
        except StageFailure:
            continue
        assert validate_witness(G, w)


def test_hamilton_power_deterministic_per_seed():
    G = gnp(60, 0.9, 3)
    w1 = find_hamilton_power(G, 2, seed=9)
    w2 = find_hamilton_power(G, 2, seed=9)
    assert w1 == w2


def test_hamilton_power_reservoir_accounting():
    # every threading connector consumes exactly r reservoir vertices; with
    # the plan's sizing the final cycle covers everything exactly once
    G = gnp(100, 0.95, 12)
    w = find_hamilton_power(G, 3, seed=12)
    assert sorted(w.vertices) == list(range(100))
