import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sclab.ensembles import (
    DegreeDistribution,
    EnsembleSpec,
    PatternRejected,
    check_count_T,
    count_checks,
    design_rate,
    dump_graph,
    empty_graph,
    enumerate_checks,
    is_m_admissible,
    load_graph,
    occupation_vector,
    pattern_from_degrees,
    sample_configuration_pattern,
    sample_coupled_graph,
    sample_graph_from_types,
    sample_simple_graph,
    sample_type,
    sample_types,
    transform_simple_to_conn,
    two_position_pattern,
    type_codes,
    weighted_two_position_types,
)

REG3 = DegreeDistribution.regular(3)


def frequency_ok(counts, probs, sigmas=3.0):
    """Chi-square goodness of fit, not rejected at the given one-sided sigma level."""
    counts = np.asarray(counts, dtype=float)
    expected = counts.sum() * np.asarray(probs, dtype=float)
    chi2 = ((counts - expected) ** 2 / expected).sum()
    return stats.chi2.sf(chi2, len(counts) - 1) > stats.norm.sf(sigmas)


def assert_distinct_sockets(g):
    used = g.checks.ravel()
    assert np.unique(used).size == used.size


# --- degree distributions and rates ---------------------------------------


def test_parse_and_mean_degree():
    d = DegreeDistribution.parse("2:0.5,4:0.5")
    assert d.mean_degree == 3.0
    assert DegreeDistribution.parse("3") == REG3
    with pytest.raises(ValueError):
        DegreeDistribution(((2, 0.5), (3, 0.4)))


@pytest.mark.parametrize(
    "dist,K", [(REG3, 6), (DegreeDistribution.regular(4), 8), (DegreeDistribution(((3, 0.5), (4, 0.5))), 7)]
)
def test_design_rate_half(dist, K):
    assert design_rate(dist, K) == pytest.approx(0.5, abs=1e-15)


def test_design_rate_invalid():
    with pytest.raises(ValueError):
        design_rate(DegreeDistribution.regular(6), 6)


def test_check_count_T():
    assert check_count_T(256, 4, 3.0, 6, 0.25) == 384
    # N^-gamma -> 0
    assert check_count_T(256, 4, 3.0, 6, 60.0) == 512


# --- patterns ---------------------------------------------------------------


def test_regular_pattern_is_deterministic():
    p = sample_configuration_pattern(4, 1, REG3, rng=0)
    assert p.n_sockets == 12
    assert np.all(p.degrees == 3)
    assert p.socket_index.tolist() == [1, 2, 3] * 4


def test_pattern_band_holds():
    d = DegreeDistribution(((2, 0.5), (4, 0.5)))
    rng = np.random.default_rng(1)
    lo, hi = 3000 * (1 - 1000**-0.4), 3000 * (1 + 1000**-0.4)
    for _ in range(200):
        p = sample_configuration_pattern(1000, 1, d, 0.4, rng)
        assert lo <= p.n_sockets <= hi


def test_pattern_rejects_bad_input():
    with pytest.raises(ValueError):
        sample_configuration_pattern(0, 1, REG3)
    # degree sums 2 and 18 fall outside 10 (1 +- 2^-0.49); seed 1 draws one of them first
    d = DegreeDistribution(((1, 0.5), (9, 0.5)))
    with pytest.raises(PatternRejected):
        sample_configuration_pattern(2, 1, d, 0.49, rng=1, max_retries=0)
    p = sample_configuration_pattern(2, 1, d, 0.49, rng=1, max_retries=50)
    assert p.retries >= 1 and p.n_sockets == 10


def test_open_chain_ghost_positions():
    p = sample_configuration_pattern(5, 4, REG3, rng=0, ghost_width=1)
    assert p.positions == (0, 1, 2, 3, 4, 5)
    assert set(p.var_position[p.ghost].tolist()) == {0, 5}


# --- simple and coupled sampling -------------------------------------------


def test_simple_graph_counts():
    g = sample_simple_graph(pattern_from_degrees({1: [3, 3, 3, 3]}), 4, rng=0)
    assert g.n_checks == 3 and g.n_free == 0
    g = sample_simple_graph(pattern_from_degrees({1: [3, 4]}), 4, rng=0)
    assert g.n_checks == 1 and g.n_free == 3


def test_simple_graph_sockets_distinct_many_samples():
    p = sample_configuration_pattern(50, 1, REG3, rng=0)
    rng = np.random.default_rng(2)
    for _ in range(10_000):
        assert_distinct_sockets(sample_simple_graph(p, 6, rng))


def test_coupled_w1_constant_types():
    p = sample_configuration_pattern(30, 5, REG3, rng=0)
    g = sample_coupled_graph(p, 1, 6, rng=1)
    t = g.check_types
    assert g.n_checks > 0 and np.all(t == t[:, :1])


def test_coupled_w_equals_L_matches_conn():
    # closed chain with w = L: each entry uniform over all positions, independently
    p = sample_configuration_pattern(400, 3, REG3, rng=0)
    rng = np.random.default_rng(3)
    counts = np.zeros(9)
    for _ in range(20):
        g = sample_coupled_graph(p, 3, 2, "closed", rng)
        counts += np.bincount(type_codes(g.check_types, 3), minlength=9)
    assert frequency_ok(counts, np.full(9, 1 / 9))


def test_coupled_open_windows_and_ghosts():
    p = sample_configuration_pattern(20, 4, REG3, rng=0, ghost_width=1)
    g = sample_coupled_graph(p, 2, 2, "open", rng=1)
    t = g.check_types
    assert t.min() >= 0 and t.max() <= 5
    assert np.all(np.abs(t[:, 0] - t[:, 1]) <= 1)
    assert_distinct_sockets(g)


def test_coupled_open_needs_ghosts():
    p = sample_configuration_pattern(20, 4, REG3, rng=0)
    with pytest.raises(ValueError):
        sample_coupled_graph(p, 2, 2, "open", rng=1)


# --- types ------------------------------------------------------------------


def test_disc_and_conn_basics():
    rng = np.random.default_rng(0)
    t = sample_types("disc", 1000, 5, 1, 4, rng)
    assert np.all(t == t[:, :1]) and set(t[:, 0]) == {1, 2, 3, 4, 5}
    assert sample_type("conn", 1, 1, 6, rng) == (1,) * 6


def test_coup_type_distribution():
    # closed chain L=5, w=2, K=2: P[(z, z)] = 1/5 * 1/4 * 2 = 1/10, P[(z, z+1)] = P[(z+1, z)] = 1/20
    L, w, K = 5, 2, 2
    probs = np.zeros(L * L)
    for start in range(1, L + 1):
        win = [(start - 1 + j) % L + 1 for j in range(w)]
        for a, b in itertools.product(win, repeat=K):
            probs[(a - 1) * L + (b - 1)] += 1 / L / w**K
    assert probs[0 * L + 1] == pytest.approx(1 / 20)
    t = sample_types("coup", 10**6, L, w, K, np.random.default_rng(5))
    counts = np.bincount(type_codes(t, L), minlength=L * L)
    support = probs > 0
    assert counts[~support].sum() == 0
    assert frequency_ok(counts[support], probs[support])


def test_weighted_types():
    rng = np.random.default_rng(0)
    assert np.all(weighted_two_position_types("conn", 1.0, 0.0, 100, 4, rng) == 1)
    t = weighted_two_position_types("conn", 1 / 3, 2 / 3, 300_000, 2, rng)
    counts = np.bincount(type_codes(t, 2), minlength=4)
    assert frequency_ok(counts, [1 / 9, 2 / 9, 2 / 9, 4 / 9])
    d = weighted_two_position_types("disc", 0.5, 0.5, 1000, 4, rng)
    assert np.all(d == d[:, :1])
    with pytest.raises(ValueError):
        weighted_two_position_types("conn", 0.5, 0.6, 1, 2, rng)


def test_occupation_vector():
    assert occupation_vector((1, 3, 2, 5, 1, 3), 5).tolist() == [2, 1, 2, 0, 1]
    assert occupation_vector((4,) * 6, 5).tolist() == [0, 0, 0, 6, 0]
    a = (1, 3, 2, 5, 1, 3)
    assert occupation_vector([a, a], 5).tolist() == [4, 2, 4, 0, 2]


@given(st.lists(st.lists(st.integers(1, 4), min_size=4, max_size=4), max_size=20))
def test_occupation_sums_to_K_times_size(types):
    occ = occupation_vector(np.array(types, dtype=np.int64).reshape(-1, 4), 4)
    assert occ.sum() == 4 * len(types)


# --- admissibility and type-driven sampling --------------------------------


def test_admissibility_edges():
    p = pattern_from_degrees({1: [3, 3], 2: [3, 3]})
    assert is_m_admissible(np.zeros((0, 2), dtype=np.int64), p, 6)
    assert not is_m_admissible([(1, 1)] * 3 + [(1, 2)], p, 0)
    assert is_m_admissible([(1, 1)] * 3, p, 0)


def test_admissible_multisets_always_place():
    p = sample_configuration_pattern(40, 3, REG3, rng=0)
    rng = np.random.default_rng(4)
    for _ in range(1000):
        types = sample_types("conn", int(rng.integers(1, 60)), 3, 1, 2, rng)
        g = sample_graph_from_types(types, p, 2, rng)
        if is_m_admissible(types, p, 0):
            assert not g.empty and g.n_checks == len(types)
            occ = occupation_vector(types, 3)
            assert g.free_counts().tolist() == (p.socket_counts() - occ).tolist()
        else:
            assert g.empty and g.n_checks == 0


def test_non_admissible_gives_flagged_empty_graph():
    p = pattern_from_degrees({1: [1, 1]})
    g = sample_graph_from_types([(1, 1), (1, 1)], p, 2, rng=0)
    assert g.empty and g.n_checks == 0


def test_forced_assignment():
    p = pattern_from_degrees({1: [1, 1], 2: [1, 1]})
    g = sample_graph_from_types([(1, 2, 1, 2)], p, 4, rng=0)
    assert sorted(g.checks[0, [0, 2]]) == [0, 1] and sorted(g.checks[0, [1, 3]]) == [2, 3]


def test_uniform_socket_pairs():
    p = pattern_from_degrees({1: [6]})
    rng = np.random.default_rng(6)
    counts = {}
    n = 100_000
    for _ in range(n):
        a, b = sample_graph_from_types([(1, 1)], p, 2, rng).checks[0]
        key = (min(a, b), max(a, b))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 15
    assert frequency_ok(list(counts.values()), np.full(15, 1 / 15))


# --- check enumeration ------------------------------------------------------


def test_enumerate_same_position():
    g = empty_graph(pattern_from_degrees({1: [2]}), 2)
    assert len(enumerate_checks((1, 1), g, True)) == 4
    assert len(enumerate_checks((1, 1), g, False)) == 2


def test_enumerate_distinct_positions():
    g = empty_graph(pattern_from_degrees({1: [3, 0, 0, 0], 2: [1, 1, 1, 1]}), 2)
    assert len(enumerate_checks((1, 2), g, True)) == len(enumerate_checks((1, 2), g, False)) == 12
    assert count_checks((1, 2), g) == (12, 12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_collision_bound(seed):
    rng = np.random.default_rng(seed)
    K, L = 2, 2
    p = pattern_from_degrees({z: list(rng.integers(2, 5, size=3)) for z in (1, 2)})
    g = empty_graph(p, K)
    alpha = tuple(int(x) for x in rng.integers(1, L + 1, size=K))
    m = int(min(g.free_count(z) for z in set(alpha)))
    with_rep = enumerate_checks(alpha, g, True)
    without = enumerate_checks(alpha, g, False)
    assert set(without) <= set(with_rep)
    assert len(with_rep) - len(without) <= K * K * len(with_rep) / m


# --- simple -> conn transformation -----------------------------------------


def test_transformation_hits_census():
    spec = EnsembleSpec(200, 2, 1, 6, REG3)
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = spec.sample_pattern(rng)
        g = sample_simple_graph(p, 6, rng)
        out, st_ = transform_simple_to_conn(g, spec.T, rng)
        if st_.aborted:
            assert out.empty
            continue
        assert out.type_census(2).tolist() == st_.Y.tolist()
        assert_distinct_sockets(out)
        assert st_.edits == int(np.abs(st_.X - st_.Y).sum())


def test_transformation_no_edits_when_census_matches():
    # with L=1 there is one type and Y = Bin(T, 1) = T; a graph with T checks needs no edits
    p = pattern_from_degrees({1: [3] * 40})
    T = 15
    g = sample_graph_from_types([(1,) * 6] * T, p, 6, rng=0)
    out, st_ = transform_simple_to_conn(g, T, rng=1)
    assert st_.edits == 0
    assert np.array_equal(out.checks, g.checks)


# --- spec and serialization -------------------------------------------------


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(10, 2, 3, 6, REG3)
    with pytest.raises(ValueError):
        EnsembleSpec(10, 2, 1, 5, REG3)
    with pytest.raises(ValueError):
        EnsembleSpec(10, 2, 1, 6, REG3, gamma=0.45, eta=0.4)


def test_graph_roundtrip_and_determinism():
    spec = EnsembleSpec(30, 4, 2, 6, REG3, mix="coupled-open")
    a = spec.sample_graph(np.random.default_rng(11))
    b = spec.sample_graph(np.random.default_rng(11))
    assert dump_graph(a) == dump_graph(b)
    back = load_graph(dump_graph(a))
    assert dump_graph(back) == dump_graph(a)
    assert back.pattern.positions == a.pattern.positions


def test_two_position_pattern():
    p = two_position_pattern(10, 20, REG3, rng=0)
    assert p.N == 30 and p.socket_count(1) == 30 and p.socket_count(2) == 60


def test_leftover_sockets_scale():
    # after placing T conn types, leftover sockets per position are of order N^(1-gamma)
    for N in (256, 1024):
        spec = EnsembleSpec(N, 4, 1, 6, REG3, mix={"conn": 0})
        spec = spec.with_mix({"conn": spec.T})
        g = spec.sample_graph(np.random.default_rng(N))
        assert not g.empty
        left = g.free_counts()
        assert left.max() <= 4 * 3 * N ** (1 - spec.gamma)
        assert left.mean() == pytest.approx(3 * N ** (1 - spec.gamma), rel=0.6)
        assert math.isfinite(left.mean())
