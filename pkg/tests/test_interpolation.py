import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sclab.channels import bec, bsc
from sclab.ensembles import DegreeDistribution, EnsembleSpec, design_rate, pattern_from_degrees
from sclab.gibbs import BecEvaluator
from sclab.interpolation import (
    admissibility_margins,
    admissibility_rate,
    chain_ordering_report,
    coupled_gap_experiment,
    estimate_avg_lnZ,
    evaluate,
    run_interpolation_chain,
    simple_vs_conn_experiment,
    superadditivity_experiment,
    trial_graph,
    weighted_jensen_gap,
    _streams,
)
from sclab.mc import MCEstimate, bonferroni_z, paired_difference, run_trials, trial_streams, write_results_csv

REG3 = DegreeDistribution.regular(3)


def _draw(master, index):
    return float(trial_streams(master, index)[0].random())


# ---------------------------------------------------------------------------
# mc plumbing


def test_mc_estimate_stderr():
    e = MCEstimate.from_values([1.0, 2.0, 3.0, 4.0], flagged=1)
    assert e.mean == 2.5
    assert e.stderr == pytest.approx(math.sqrt(5 / 3) / 2, rel=1e-15)
    assert e.flagged_trials == 1 <= e.trials
    with pytest.raises(ValueError):
        MCEstimate.from_values([1.0])


def test_bonferroni_z():
    assert bonferroni_z(1) == pytest.approx(3.0, abs=1e-12)
    # one-sided tail 0.0013499 / 15 = 9.0e-5 sits at z = 3.746
    assert bonferroni_z(15) == pytest.approx(3.746, abs=2e-3)
    assert bonferroni_z(0) == bonferroni_z(1)


def test_paired_difference_uses_alignment():
    a = MCEstimate.from_values([1.0, 2.0, 3.0, 4.0])
    b = MCEstimate.from_values([0.5, 1.5, 2.5, 3.5])
    d = paired_difference(a, b)
    assert d.mean == 0.5 and d.stderr == 0.0
    b.values = None
    assert paired_difference(a, b).stderr == pytest.approx(math.hypot(a.stderr, b.stderr))


def test_run_trials_order_and_workers():
    one = run_trials(_draw, 40, 11, workers=1)
    two = run_trials(_draw, 40, 11, workers=2)
    assert one == two
    assert one[3] == _draw(11, 3)
    assert one != run_trials(_draw, 40, 12, workers=1)


def test_results_csv(tmp_path):
    path = tmp_path / "r.csv"
    write_results_csv(path, [{"experiment": "x", "t": 0, "mean": 0.1, "stderr": 0.0, "trials": 2, "flagged": 0, "seed": 1}])
    lines = path.read_text().splitlines()
    assert lines[0] == "experiment,t,mean,stderr,trials,flagged,seed"
    assert lines[1] == "x,0,0.1,0.0,2,0,1"


# ---------------------------------------------------------------------------
# estimate_avg_lnZ


def test_same_seed_same_estimate():
    spec = EnsembleSpec(40, 2, 2, 6, REG3, {"conn": 10, "coup": 10})
    a = estimate_avg_lnZ(spec, bec(0.4), 30, 7, workers=1)
    b = estimate_avg_lnZ(spec, bec(0.4), 30, 7, workers=2)
    assert a.mean == b.mean and a.stderr == b.stderr
    assert np.array_equal(a.values, b.values)
    assert estimate_avg_lnZ(spec, bec(0.4), 30, 8, workers=1).mean != a.mean


def test_bec1_entropy_is_code_dimension():
    spec = EnsembleSpec(60, 1, 1, 6, REG3, "simple")
    for i in range(5):
        s = _streams(3, i)
        g = trial_graph(spec, s)
        dim = BecEvaluator.from_graph(g).entropy(np.ones(g.n_variables, dtype=bool))
        assert evaluate(g, bec(1.0), s["channel"]) == dim
    est = estimate_avg_lnZ(spec, bec(1.0), 20, 3, workers=1)
    assert design_rate(REG3, 6) * 60 <= est.mean <= 60


def test_bec0_entropy_zero():
    est = estimate_avg_lnZ(EnsembleSpec(60, 2, 2, 6, REG3, {"coup": 5}), bec(0.0), 5, 0, workers=1)
    assert est.mean == 0.0


def _brute_expected_lnz(pairs, n, p):
    a = 0.5 * math.log((1 - p) / p)
    words = [s for s in itertools.product((1, -1), repeat=n) if all(s[i] * s[j] == 1 for i, j in pairs)]
    total = 0.0
    for y in itertools.product((1, -1), repeat=n):
        prob = math.prod(1 - p if v == 1 else p for v in y)
        total += prob * math.log(sum(math.exp(a * sum(yi * si for yi, si in zip(y, s))) for s in words))
    return total


def _matchings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k in range(len(rest)):
        for m in _matchings(rest[:k] + rest[k + 1 :]):
            yield [(first, rest[k])] + m


def test_unbiased_on_enumerable_instance(monkeypatch):
    # three degree-2 variables, K=2: the uniform socket permutation gives a uniform
    # perfect matching of the 6 sockets, so E[ln Z] is an average over 15 matchings
    pattern = pattern_from_degrees({1: [2, 2, 2]})
    var = pattern.socket_var.tolist()
    p = 0.2
    exact = np.mean([_brute_expected_lnz([(var[i], var[j]) for i, j in m], 3, p) for m in _matchings(list(range(6)))])
    monkeypatch.setattr(EnsembleSpec, "sample_pattern", lambda self, rng: pattern)
    est = estimate_avg_lnZ(EnsembleSpec(3, 1, 1, 2, DegreeDistribution.regular(2), "simple"), bsc(p), 4000, 5, workers=1)
    assert abs(est.mean - exact) <= 3 * est.stderr


# ---------------------------------------------------------------------------
# chains


def test_chain_with_no_checks():
    spec = EnsembleSpec(2, 1, 1, 6, REG3, {"conn": 0})
    assert spec.T == 0
    chain = run_interpolation_chain(spec, bec(0.5), trials=10, seed=1, workers=1)
    assert [t for t, _ in chain.points] == [0]
    conn = estimate_avg_lnZ(spec.with_mix({"conn": 0}), bec(0.5), 10, 1, workers=1)
    disc = estimate_avg_lnZ(spec.with_mix({"disc": 0}), bec(0.5), 10, 1, workers=1)
    assert np.array_equal(conn.values, disc.values)
    # no checks: entropy equals the number of erasures
    erasures = [int((_streams(1, i)["channel"].random(2) < 0.5).sum()) for i in range(10)]
    assert conn.values.tolist() == erasures


def test_chain_rejects_bad_grid():
    spec = EnsembleSpec(30, 2, 2, 6, REG3, "simple")
    with pytest.raises(ValueError):
        run_interpolation_chain(spec, bec(0.4), [0, spec.T + 1], trials=2, workers=1)
    with pytest.raises(ValueError):
        run_interpolation_chain(spec, bec(0.4), [0], trials=2, direction="conn-disc", workers=1)


def test_full_window_conn_equals_coup():
    # w = L: every window covers all positions, so conn and coup types share a law
    spec = EnsembleSpec(30, 2, 2, 6, REG3, "simple")
    T = spec.T
    a = estimate_avg_lnZ(spec.with_mix({"conn": T}), bec(0.45), 300, 2, workers=1)
    b = estimate_avg_lnZ(spec.with_mix({"coup": T}), bec(0.45), 300, 2, workers=1)
    d = paired_difference(a, b)
    assert abs(d.mean) <= 3 * d.stderr


@pytest.mark.slow
def test_chain_endpoints_ordered_small():
    spec = EnsembleSpec(40, 4, 2, 6, REG3, "simple")
    chains = [run_interpolation_chain(spec, bec(0.45), [0, spec.T], trials=300, seed=4, direction=d, workers=1) for d in ("conn-coup", "coup-disc")]
    rep = chain_ordering_report(chains)
    assert len(rep["comparisons"]) == 2
    assert rep["holds"]


# ---------------------------------------------------------------------------
# admissibility


def test_admissibility_trivial_cases():
    spec = EnsembleSpec(50, 2, 2, 6, REG3, {"conn": 0})
    assert admissibility_rate(spec, 0, 20, 0, workers=1) == 1.0
    full = spec.with_mix({"coup": spec.T})
    margins = admissibility_margins(full, 20, 0, workers=1)
    assert admissibility_rate(full, margins.max() + 1, 20, 0, workers=1) == 0.0
    # more sockets than any position holds
    assert admissibility_rate(full, 50 * 4 + 1, 20, 0, workers=1) == 0.0


# ---------------------------------------------------------------------------
# simple versus conn, gap and superadditivity experiments


def test_simple_vs_conn_trivial_channel():
    rep = simple_vs_conn_experiment([64, 128], 1, REG3, 6, bec(0.0), 10, 3, workers=1)
    assert rep["census_exact"]
    for row in rep["ladder"]:
        assert row["simple"]["mean"] == 0.0 and row["conn"]["mean"] == 0.0
        assert 0 <= row["edit_fraction"]["mean"]
    with pytest.raises(ValueError):
        simple_vs_conn_experiment([64], 1, REG3, 6, bsc(0.1), 2, 0, workers=1)


def test_simple_vs_conn_edit_statistics_only():
    rep = simple_vs_conn_experiment([128, 512], 2, REG3, 6, None, 20, 1, workers=1)
    assert "simple" not in rep["ladder"][0]
    assert rep["edit_fraction_decreasing"]


def test_coupled_gap_smoke():
    rep = coupled_gap_experiment([32, 64], 4, 2, REG3, 6, bec(0.4), 10, 0, workers=1)
    assert len(rep["ladder"]) == 2
    assert all(r["gap"] >= 0 for r in rep["ladder"])
    assert rep["final_gap"] == rep["ladder"][-1]["gap"]


def test_superadditivity_small():
    rep = superadditivity_experiment([48, 96], REG3, 6, bec(0.45), 30, 2, workers=1)
    assert [r["N1"] for r in rep["weighted"]] == [16, 32]
    assert rep["c"] >= 0
    assert [p["half"] for p in rep["pairs"]] == [48]
    with pytest.raises(ValueError):
        superadditivity_experiment([48], REG3, 6, bsc(0.1), 2, 0, workers=1)


@given(
    st.lists(st.floats(-1, 1), min_size=1, max_size=20),
    st.floats(0, 1),
    st.sampled_from([2, 4, 6, 8]),
    st.randoms(use_true_random=False),
)
def test_weighted_jensen_gap_nonnegative(q1, nu1, K, rnd):
    q2 = [rnd.uniform(-1, 1) for _ in q1]
    assert np.all(weighted_jensen_gap(q1, q2, nu1, K) >= -1e-12)


def test_weighted_jensen_equal_split_is_two_position_mean():
    Q1, Q2 = np.array([0.3, -0.8]), np.array([0.9, 0.1])
    expected = 0.5 * Q1**4 + 0.5 * Q2**4 - ((Q1 + Q2) / 2) ** 4
    assert np.allclose(weighted_jensen_gap(Q1, Q2, 0.5, 4), expected, rtol=0, atol=1e-15)
