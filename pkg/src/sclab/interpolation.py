"""Monte-Carlo interpolation experiments.

Every trial draws its pattern, its types (one stream per kind), its graph and
its channel noise from separate seeded streams. Grid points of a chain reuse
the same streams, so neighbouring points are strongly correlated and their
differences are estimated from paired values.

On the BEC the per-trial quantity is the conditional entropy in bits from the
rank oracle; it differs from ``ln Z`` by a channel-only constant, so
orderings carry over. On other discrete channels it is ``ln Z`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channels import BmsChannel, sample_hllr_vector
from .ensembles import (
    KINDS,
    DegreeDistribution,
    EnsembleSpec,
    TannerGraph,
    check_count_T,
    sample_configuration_pattern,
    sample_graph_from_types,
    sample_simple_graph,
    sample_types,
    transform_simple_to_conn,
    two_position_pattern,
    weighted_two_position_types,
)
from .gibbs import BecEvaluator, log_partition
from .mc import MCEstimate, bonferroni_z, paired_difference, run_trials, trial_streams

STREAMS = ("pattern", "conn", "disc", "coup", "graph", "channel")


def _streams(master: int, index: int) -> Dict[str, np.random.Generator]:
    return dict(zip(STREAMS, trial_streams(master, index, len(STREAMS))))


def mix_types(spec: EnsembleSpec, streams: Dict[str, np.random.Generator]) -> np.ndarray:
    """The trial's type multiset; each kind draws a prefix of its own stream."""
    counts = spec.mix_counts
    parts = [sample_types(k, counts[k], spec.L, spec.w, spec.K, streams[k], spec.topology) for k in KINDS]
    return np.concatenate(parts, axis=0)


def trial_graph(spec: EnsembleSpec, streams: Dict[str, np.random.Generator], m: int = 0) -> TannerGraph:
    pattern = spec.sample_pattern(streams["pattern"])
    if isinstance(spec.mix, str):
        return spec.sample_graph(streams["graph"], pattern)
    return sample_graph_from_types(mix_types(spec, streams), pattern, spec.K, streams["graph"], m=m)


def quantity_for(channel: BmsChannel) -> str:
    return "entropy-bits" if channel.family == "bec" else "lnZ"


def evaluate(graph: TannerGraph, channel: BmsChannel, rng: np.random.Generator) -> float:
    """Entropy in bits (BEC) or ``ln Z`` for one channel realization."""
    if channel.family == "bec":
        erased = rng.random(graph.n_variables) < channel.parameter
        return float(BecEvaluator.from_graph(graph).entropy(erased))
    return log_partition(graph, sample_hllr_vector(channel, graph.pattern, rng))


def _flagged(graph: TannerGraph) -> bool:
    return bool(graph.empty or graph.stopped_early)


def _avg_trial(spec, channel, m, master, index) -> Tuple[float, bool]:
    s = _streams(master, index)
    graph = trial_graph(spec, s, m)
    return evaluate(graph, channel, s["channel"]), _flagged(graph)


def estimate_avg_lnZ(
    spec: EnsembleSpec, channel: BmsChannel, trials: int, seed: int, workers: Optional[int] = None, m: int = 0
) -> MCEstimate:
    """Quenched average over graph and channel; non-admissible draws keep the empty graph and are flagged."""
    if trials < 2:
        raise ValueError("need at least two trials")
    out = run_trials(partial(_avg_trial, spec, channel, m), trials, seed, workers)
    return MCEstimate.from_values([v for v, _ in out], sum(f for _, f in out), quantity_for(channel))


# ---------------------------------------------------------------------------
# interpolation chain


def default_t_grid(T: int, points: int = 5) -> List[int]:
    return sorted({int(round(x)) for x in np.linspace(0, T, points)})


@dataclass
class Comparison:
    lower_t: int
    upper_t: int
    difference: float
    stderr: float
    z_crit: float

    @property
    def margin(self) -> float:
        """Allowed minus observed violation; nonnegative when the ordering holds."""
        return self.z_crit * self.stderr - self.difference

    @property
    def holds(self) -> bool:
        return self.margin >= 0


@dataclass
class ChainResult:
    """Estimates along ``{t x first, (T - t) x second}``; the expected mean is nonincreasing in t."""

    direction: str
    T: int
    points: List[Tuple[int, MCEstimate]]
    seed: int = 0

    def estimate(self, t: int) -> MCEstimate:
        return dict(self.points)[t]

    def comparisons(self, sigmas: float = 3.0, family: Optional[int] = None) -> List[Comparison]:
        pts = sorted(self.points, key=lambda p: p[0])
        z = bonferroni_z(family or max(1, len(pts) - 1), sigmas)
        out = []
        for (t0, e0), (t1, e1) in zip(pts[:-1], pts[1:]):
            d = paired_difference(e1, e0)
            out.append(Comparison(t0, t1, d.mean, d.stderr, z))
        return out

    def ordered(self, sigmas: float = 3.0, family: Optional[int] = None) -> bool:
        return all(c.holds for c in self.comparisons(sigmas, family))

    def rows(self, experiment: str) -> List[dict]:
        return [
            {"experiment": f"{experiment}:{self.direction}", "t": t, "mean": e.mean, "stderr": e.stderr, "trials": e.trials, "flagged": e.flagged_trials, "seed": self.seed}
            for t, e in self.points
        ]


def run_interpolation_chain(
    spec: EnsembleSpec,
    channel: BmsChannel,
    t_grid: Optional[Sequence[int]] = None,
    trials: int = 200,
    seed: int = 0,
    direction: str = "conn-coup",
    workers: Optional[int] = None,
) -> ChainResult:
    if direction not in ("conn-coup", "coup-disc"):
        raise ValueError(f"unknown chain direction {direction!r}")
    T = spec.T
    grid = default_t_grid(T) if t_grid is None else sorted(set(int(t) for t in t_grid))
    if any(not 0 <= t <= T for t in grid):
        raise ValueError(f"t grid must lie in 0..{T}")
    points = [(t, estimate_avg_lnZ(spec.chain_mix(direction, t), channel, trials, seed, workers)) for t in grid]
    return ChainResult(direction, T, points, seed)


def chain_ordering_report(chains: Sequence[ChainResult], sigmas: float = 3.0) -> dict:
    """Bonferroni-corrected monotonicity over all consecutive grid comparisons of all chains."""
    family = sum(max(0, len(c.points) - 1) for c in chains)
    comps = [(c.direction, x) for c in chains for x in c.comparisons(sigmas, family)]
    return {
        "holds": all(x.holds for _, x in comps),
        "min_margin": min((x.margin for _, x in comps), default=math.inf),
        "comparisons": [
            {"direction": d, "t": [x.lower_t, x.upper_t], "difference": x.difference, "stderr": x.stderr, "z_crit": x.z_crit, "holds": x.holds}
            for d, x in comps
        ],
    }


# ---------------------------------------------------------------------------
# admissibility


def _admissibility_trial(spec, m, master, index) -> int:
    s = _streams(master, index)
    pattern = spec.sample_pattern(s["pattern"])
    occ = np.bincount(mix_types(spec, s).ravel() - pattern.positions[0], minlength=len(pattern.positions))
    return int(np.min(pattern.socket_counts() - occ))


def admissibility_margins(spec: EnsembleSpec, trials: int, seed: int, workers: Optional[int] = None) -> np.ndarray:
    """Per trial, ``min_z |S_z| - occ(z)``: the largest m for which the multiset is m-admissible."""
    return np.array(run_trials(partial(_admissibility_trial, spec, 0), trials, seed, workers))


def admissibility_rate(spec: EnsembleSpec, m: float, trials: int, seed: int, workers: Optional[int] = None) -> float:
    return float(np.mean(admissibility_margins(spec, trials, seed, workers) >= m))


# ---------------------------------------------------------------------------
# simple ensemble versus T x conn


def _simple_conn_trial(N, L, dist, K, gamma, eta, channel, master, index) -> dict:
    r_pat, r_graph, r_edit, r_types, r_place, r_chan = trial_streams(master, index, 6)
    pattern = sample_configuration_pattern(N, L, dist, eta, r_pat)
    T = check_count_T(N, L, dist.mean_degree, K, gamma)
    simple = sample_simple_graph(pattern, K, r_graph)
    edited, stats = transform_simple_to_conn(simple, T, r_edit)
    census_ok = stats.aborted or bool(np.array_equal(edited.type_census(L), stats.Y))
    out = {"edit_fraction": stats.edits / T if T else 0.0, "aborted": stats.aborted, "census_ok": census_ok}
    if channel is not None:
        conn = sample_graph_from_types(sample_types("conn", T, L, 1, K, r_types), pattern, K, r_place)
        erased = r_chan.random(pattern.n_variables) < channel.parameter
        out["simple"] = BecEvaluator.from_graph(simple).entropy(erased) / pattern.n_variables
        out["conn"] = BecEvaluator.from_graph(conn).entropy(erased) / pattern.n_variables
        out["conn_flagged"] = conn.empty
    return out


def simple_vs_conn_experiment(
    N_ladder: Sequence[int],
    L: int,
    dist: DegreeDistribution,
    K: int,
    channel: Optional[BmsChannel],
    trials: int,
    seed: int,
    gamma: float = 0.2,
    eta: float = 0.4,
    workers: Optional[int] = None,
) -> dict:
    """Per-variable entropy of LDPC(NL) and of ``T x conn``, plus edit statistics of the transformation.

    Pass ``channel=None`` to collect edit statistics only. Entropies need a BEC.
    """
    if channel is not None and channel.family != "bec":
        raise ValueError("the entropy comparison runs on the BEC rank oracle")
    rows = []
    for N in N_ladder:
        out = run_trials(partial(_simple_conn_trial, N, L, dist, K, gamma, eta, channel), trials, seed + N, workers)
        ef = MCEstimate.from_values([o["edit_fraction"] for o in out])
        row = {
            "N": N,
            "T": check_count_T(N, L, dist.mean_degree, K, gamma),
            "edit_fraction": ef.to_dict(),
            "aborted": sum(o["aborted"] for o in out),
            "census_mismatches": sum(not o["census_ok"] for o in out),
        }
        if channel is not None:
            a = MCEstimate.from_values([o["simple"] for o in out], unit="bits/variable")
            b = MCEstimate.from_values([o["conn"] for o in out], sum(o["conn_flagged"] for o in out), "bits/variable")
            row.update(simple=a.to_dict(), conn=b.to_dict(), gap=paired_difference(b, a).to_dict())
        rows.append(row)
    fr = [r["edit_fraction"]["mean"] for r in rows]
    return {
        "L": L,
        "K": K,
        "lambda": str(dist),
        "channel": None if channel is None else str(channel),
        "trials": trials,
        "seed": seed,
        "ladder": rows,
        "edit_fraction_decreasing": all(b < a for a, b in zip(fr[:-1], fr[1:])),
        "census_exact": all(r["census_mismatches"] == 0 for r in rows),
    }


# ---------------------------------------------------------------------------
# simple versus coupled: finite-size trend


def _gap_trial(spec, channel, master, index) -> float:
    s = _streams(master, index)
    graph = trial_graph(spec, s)
    return evaluate(graph, channel, s["channel"]) / spec.n_variables


def coupled_gap_experiment(
    N_ladder: Sequence[int],
    L: int,
    w: int,
    dist: DegreeDistribution,
    K: int,
    channel: BmsChannel,
    trials: int,
    seed: int,
    topology: str = "closed",
    workers: Optional[int] = None,
) -> dict:
    """``|H_simple/N - H_coupled/(NL)|`` along an N ladder (BEC, bits per variable)."""
    preset = "coupled-closed" if topology == "closed" else "coupled-open"
    rows = []
    for N in N_ladder:
        simple = EnsembleSpec(N, 1, 1, K, dist, "simple")
        coupled = EnsembleSpec(N, L, w, K, dist, preset)
        a = MCEstimate.from_values(run_trials(partial(_gap_trial, simple, channel), trials, seed + N, workers), unit="bits/variable")
        b = MCEstimate.from_values(run_trials(partial(_gap_trial, coupled, channel), trials, seed + 7919 * N, workers), unit="bits/variable")
        rows.append({"N": N, "simple": a.to_dict(), "coupled": b.to_dict(), "gap": abs(a.mean - b.mean), "gap_stderr": math.hypot(a.stderr, b.stderr)})
    gaps = [r["gap"] for r in rows]
    return {
        "L": L,
        "w": w,
        "K": K,
        "lambda": str(dist),
        "channel": str(channel),
        "topology": topology,
        "trials": trials,
        "seed": seed,
        "ladder": rows,
        "decreasing": all(b < a for a, b in zip(gaps[:-1], gaps[1:])),
        "final_gap": gaps[-1],
    }


# ---------------------------------------------------------------------------
# two-position weighted interpolation and superadditivity

SUPERADDITIVITY_EXPONENT = 0.8


def weighted_jensen_gap(Q1, Q2, nu1: float, K: int):
    """``nu1 Q1^K + nu2 Q2^K - (nu1 Q1 + nu2 Q2)^K``; nonnegative for even K."""
    Q1, Q2 = np.asarray(Q1, dtype=float), np.asarray(Q2, dtype=float)
    nu2 = 1.0 - nu1
    return nu1 * Q1**K + nu2 * Q2**K - (nu1 * Q1 + nu2 * Q2) ** K


def _two_position_trial(N1, N2, dist, K, gamma, eta, channel, master, index) -> Tuple[float, float, bool]:
    s = _streams(master, index)
    pattern = two_position_pattern(N1, N2, dist, eta, s["pattern"])
    N = N1 + N2
    T = check_count_T(N, 1, dist.mean_degree, K, gamma)
    nu1 = N1 / N
    erased = s["channel"].random(N) < channel.parameter
    vals = []
    flagged = False
    for kind in ("conn", "disc"):
        types = weighted_two_position_types(kind, nu1, 1 - nu1, T, K, s[kind])
        g = sample_graph_from_types(types, pattern, K, s["graph"])
        flagged |= g.empty
        vals.append(float(BecEvaluator.from_graph(g).entropy(erased)))
    return vals[0], vals[1], flagged


def _simple_entropy_trial(N, dist, K, eta, channel, master, index) -> float:
    s = _streams(master, index)
    pattern = sample_configuration_pattern(N, 1, dist, eta, s["pattern"])
    g = sample_simple_graph(pattern, K, s["graph"])
    return float(BecEvaluator.from_graph(g).entropy(s["channel"].random(N) < channel.parameter))


def superadditivity_experiment(
    N_ladder: Sequence[int],
    dist: DegreeDistribution,
    K: int,
    channel: BmsChannel,
    trials: int,
    seed: int,
    split: float = 1 / 3,
    gamma: float = 0.2,
    eta: float = 0.4,
    workers: Optional[int] = None,
) -> dict:
    """Weighted two-position conn/disc comparison, and near-superadditivity of ``a_N = -E[H_N]``.

    The ladder should be closed under halving above its first entry, so that
    ``a_N`` can be compared with ``2 a_{N/2}``. Entropies are in bits.
    """
    if channel.family != "bec":
        raise ValueError("the superadditivity experiment runs on the BEC rank oracle")
    sigmas_z = bonferroni_z(len(N_ladder))
    weighted = []
    for N in N_ladder:
        N1 = max(1, int(round(split * N)))
        out = run_trials(partial(_two_position_trial, N1, N - N1, dist, K, gamma, eta, channel), trials, seed + N, workers)
        conn = MCEstimate.from_values([o[0] for o in out], sum(o[2] for o in out), "bits")
        disc = MCEstimate.from_values([o[1] for o in out], unit="bits")
        d = paired_difference(conn, disc)
        weighted.append({"N1": N1, "N2": N - N1, "conn": conn.to_dict(), "disc": disc.to_dict(), "difference": d.mean, "stderr": d.stderr, "holds": d.mean <= sigmas_z * d.stderr})

    a = {}
    for N in sorted(set(N_ladder)):
        est = MCEstimate.from_values(run_trials(partial(_simple_entropy_trial, N, dist, K, eta, channel), trials, seed + 31 * N, workers))
        a[N] = est.scaled(-1.0)
    pairs = [(N, N // 2) for N in sorted(a) if N % 2 == 0 and N // 2 in a]
    excess = [(2 * a[h].mean - a[N].mean) / N**SUPERADDITIVITY_EXPONENT for N, h in pairs]
    c = max([0.0] + excess)
    per_var = [a[N].mean / N for N in sorted(a)]
    steps = [abs(y - x) for x, y in zip(per_var[:-1], per_var[1:])]
    return {
        "K": K,
        "lambda": str(dist),
        "channel": str(channel),
        "trials": trials,
        "seed": seed,
        "weighted": weighted,
        "weighted_holds": all(r["holds"] for r in weighted),
        "a": {str(N): e.to_dict() for N, e in a.items()},
        "alpha": SUPERADDITIVITY_EXPONENT,
        "c": c,
        "pairs": [{"N": N, "half": h, "excess": e} for (N, h), e in zip(pairs, excess)],
        "per_variable_steps": steps,
        "steps_shrink": all(y <= x + 1e-12 for x, y in zip(steps[:-1], steps[1:])),
    }
