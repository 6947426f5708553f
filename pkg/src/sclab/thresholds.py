"""Density evolution on the BEC, BP-GEXIT curves and thresholds.

Uncoupled DE is the scalar recursion ``x <- eps * lambda(1 - rho(1 - x))``
with ``rho(y) = y^(K-1)``. Coupled DE runs on an open chain with ghost
positions pinned to erasure probability 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numba
import numpy as np
from scipy import integrate, optimize

from .ensembles import DegreeDistribution, EnsembleSpec, design_rate

DE_TOL = 1e-12
DE_MAX_ITER = 10**5
ZERO = 1e-10


class NoAreaSolution(ValueError):
    """The curve's total area is below the rate, so no area threshold exists."""


@dataclass
class DeResult:
    x: float
    iterations: int
    converged: bool
    monotone: bool


def _de_map(dist: DegreeDistribution, K: int, eps: float, x: float) -> float:
    return eps * dist.edge_poly(1.0 - (1.0 - x) ** (K - 1))


def de_fixed_point(dist: DegreeDistribution, K: int, eps: float, tol: float = DE_TOL, max_iter: int = DE_MAX_ITER, info: bool = False):
    """Iterate BEC density evolution from ``x = eps`` to its fixed point."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps} outside [0, 1]")
    x = eps
    monotone = True
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        nxt = _de_map(dist, K, eps, x)
        if nxt > x + 1e-15:
            monotone = False
        if nxt < ZERO * 1e-3:
            nxt = 0.0
        step = abs(nxt - x)
        x = nxt
        if step < tol or x == 0.0:
            converged = True
            break
    res = DeResult(x, it, converged, monotone)
    return res if info else x


def bp_threshold(dist: DegreeDistribution, K: int, tol: float = 1e-7) -> float:
    """``sup{eps : DE fixed point = 0}`` by bisection."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if de_fixed_point(dist, K, mid) < ZERO:
            lo = mid
        else:
            hi = mid
    return lo


def _eps_of_x(dist, K, x):
    y = dist.edge_poly(1.0 - (1.0 - x) ** (K - 1))
    return x / y if y > 0 else math.inf


def _edge_poly_array(dist: DegreeDistribution, y: np.ndarray) -> np.ndarray:
    return sum(p * d * y ** (d - 1) for d, p in dist.support) / dist.mean_degree


def bp_fixed_point_exact(dist: DegreeDistribution, K: int, eps: float, grid: int = 4001) -> float:
    """Largest fixed point in [0, eps] by root bracketing, independent of DE iteration."""
    if eps <= 0:
        return 0.0
    f = lambda x: _de_map(dist, K, eps, x) - x
    if abs(f(eps)) < 1e-15:
        return float(eps)
    xs = np.linspace(eps, 0.0, grid)[:-1]
    fx = eps * _edge_poly_array(dist, 1.0 - (1.0 - xs) ** (K - 1)) - xs
    flips = np.nonzero(np.sign(fx[1:]) != np.sign(fx[:-1]))[0]
    if flips.size == 0:
        return 0.0
    i = flips[0]
    if fx[i + 1] == 0.0:
        return float(xs[i + 1])
    return float(optimize.brentq(f, xs[i + 1], xs[i], xtol=1e-15, rtol=1e-15))


def bp_gexit_value(dist: DegreeDistribution, K: int, x: float) -> float:
    """Extrinsic erasure probability ``Lambda(1 - rho(1 - x))`` at DE fixed point ``x``."""
    return dist.node_poly(1.0 - (1.0 - x) ** (K - 1))


@dataclass
class GexitCurve:
    eps: np.ndarray
    g: np.ndarray
    kind: str = "BP"
    error: Optional[np.ndarray] = None
    evaluator: Optional[Callable[[float], float]] = field(default=None, repr=False)
    breakpoints: Tuple[float, ...] = ()

    def __call__(self, e: float) -> float:
        if self.evaluator is not None:
            return self.evaluator(e)
        return float(np.interp(e, self.eps, self.g))

    def to_rows(self) -> List[Tuple[float, float, float]]:
        err = self.error if self.error is not None else np.zeros_like(self.g)
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.eps, self.g, err)]


def bp_gexit_curve(dist: DegreeDistribution, K: int, eps_grid: Sequence[float], exact: bool = False) -> GexitCurve:
    """BP-GEXIT samples from DE fixed points (``exact=True`` brackets the fixed point instead).

    The returned curve evaluates off-grid points with the bracketing route, so
    integrals over it do not depend on the sampling grid.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any((eps_grid < 0) | (eps_grid > 1)):
        raise ValueError("grid must lie in [0, 1]")
    eps_bp = bp_threshold(dist, K)

    def g_exact(e):
        if e < eps_bp:
            return 0.0
        return bp_gexit_value(dist, K, bp_fixed_point_exact(dist, K, e))

    if exact:
        g = np.array([g_exact(e) for e in eps_grid])
    else:
        g = np.array([bp_gexit_value(dist, K, de_fixed_point(dist, K, e)) for e in eps_grid])
    return GexitCurve(eps_grid, g, "BP", evaluator=g_exact, breakpoints=(eps_bp,))


def _upper_area(curve: GexitCurve, lo: float) -> float:
    if curve.evaluator is None:
        e, g = curve.eps, curve.g
        mask = e >= lo
        pts = np.concatenate([[lo], e[mask]])
        vals = np.concatenate([[curve(lo)], g[mask]])
        return float(integrate.trapezoid(vals, pts))
    cuts = [lo] + [b for b in curve.breakpoints if lo < b < 1.0] + [1.0]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += integrate.quad(curve.evaluator, a, b, epsabs=1e-11, epsrel=1e-10, limit=200)[0]
    return total


def area_threshold(curve: GexitCurve, R: float, tol: float = 1e-8) -> float:
    """Solve ``integral_{eps}^{1} g = R`` for eps."""
    total = _upper_area(curve, 0.0)
    if total < R - 1e-12:
        raise NoAreaSolution(f"area under curve {total:.6g} is below R={R}")
    return optimize.brentq(lambda e: _upper_area(curve, e) - R, 0.0, 1.0, xtol=tol)


# ---------------------------------------------------------------------------
# coupled chain


@numba.njit(cache=True)
def _edge_poly(y, degs, probs, dbar):
    s = 0.0
    for i in range(degs.shape[0]):
        d = degs[i]
        s += probs[i] * d * y ** (d - 1)
    return s / dbar


@numba.njit(cache=True)
def _coupled_de(eps, degs, probs, dbar, K, L, w, max_iter, tol, x0):
    n = L + 2 * (w - 1)
    x = x0.copy()
    c = np.zeros(L + w - 1)
    new = np.zeros(n)
    for it in range(max_iter):
        for j in range(L + w - 1):
            m = 0.0
            for t in range(w):
                m += x[j + t]
            m /= w
            c[j] = 1.0 - (1.0 - m) ** (K - 1)
        delta = 0.0
        top = 0.0
        for i in range(w - 1, w - 1 + L):
            y = 0.0
            for t in range(w):
                y += c[i - t]
            y /= w
            v = eps * _edge_poly(y, degs, probs, dbar)
            dv = abs(v - x[i])
            if dv > delta:
                delta = dv
            if v > top:
                top = v
            new[i] = v
        for i in range(w - 1, w - 1 + L):
            x[i] = new[i]
        if top < 1e-10:
            return x, it + 1, True
        if delta < tol:
            return x, it + 1, False
    return x, max_iter, False


def coupled_de(dist: DegreeDistribution, K: int, L: int, w: int, eps: float, max_iter: int = DE_MAX_ITER, tol: float = 1e-13):
    """Run coupled DE from all-``eps`` interior; returns (profile over positions 1..L, iterations, decoded)."""
    if not L >= w >= 1:
        raise ValueError(f"need L >= w >= 1, got L={L}, w={w}")
    x0 = np.zeros(L + 2 * (w - 1))
    x0[w - 1 : w - 1 + L] = eps
    x, it, ok = _coupled_de(float(eps), dist.degrees, dist.probs, dist.mean_degree, K, L, w, max_iter, tol, x0)
    return x[w - 1 : w - 1 + L], int(it), bool(ok)


def coupled_bp_threshold(dist: DegreeDistribution, K: int, L: int, w: int, tol: float = 1e-6, lo: Optional[float] = None) -> float:
    """Largest eps for which open-chain coupled DE drives every position to 0."""
    lo = bp_threshold(dist, K, tol=1e-7) - 1e-6 if lo is None else lo
    hi = 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if coupled_de(dist, K, L, w, mid)[2]:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class ThresholdResult:
    eps_bp: float
    eps_area: float
    rate: float
    coupled: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eps_bp": self.eps_bp,
            "eps_area": self.eps_area,
            "rate": self.rate,
            "coupled": {f"L={L},w={w}": v for (L, w), v in self.coupled.items()},
            "tolerances": self.tolerances,
        }


def threshold_summary(dist: DegreeDistribution, K: int, couplings: Sequence[Tuple[int, int]] = ()) -> ThresholdResult:
    eps_bp = bp_threshold(dist, K)
    R = design_rate(dist, K)
    curve = bp_gexit_curve(dist, K, np.linspace(0, 1, 101))
    res = ThresholdResult(eps_bp, area_threshold(curve, R), R, tolerances={"bp": 1e-7, "area": 1e-8, "coupled": 1e-6})
    for L, w in couplings:
        res.coupled[(L, w)] = coupled_bp_threshold(dist, K, L, w)
    return res


# ---------------------------------------------------------------------------
# empirical MAP quantities (rank-oracle Monte Carlo)


def _profile_trial(spec: EnsembleSpec, eps_points: np.ndarray, master: int, index: int) -> np.ndarray:
    from .gibbs import BecEvaluator
    from .mc import trial_streams

    r_pat, r_graph, r_chan = trial_streams(master, index, 3)
    graph = spec.sample_graph(r_graph, pattern=spec.sample_pattern(r_pat))
    u = r_chan.random(graph.n_variables)
    return BecEvaluator.from_graph(graph).profile(u, eps_points).astype(float)


def entropy_curve(spec: EnsembleSpec, eps_points: Sequence[float], trials: int, seed: int, workers: Optional[int] = None):
    """Per-trial BEC entropy (bits) at every eps, with common erasure uniforms across eps.

    Returns a (trials, len(eps_points)) array.
    """
    from functools import partial

    from .mc import run_trials

    pts = np.asarray(eps_points, dtype=float)
    rows = run_trials(partial(_profile_trial, spec, pts), trials, seed, workers)
    return np.array(rows)


def map_gexit_empirical(
    spec: EnsembleSpec, eps_grid: Sequence[float], delta: float = 0.01, trials: int = 200, seed: int = 0, workers: Optional[int] = None
) -> GexitCurve:
    """Finite-difference slope of the per-variable BEC entropy; one-sided at the ends of [0, 1]."""
    eps_grid = np.asarray(eps_grid, dtype=float)
    lo = np.clip(eps_grid - delta, 0.0, 1.0)
    hi = np.clip(eps_grid + delta, 0.0, 1.0)
    pts = np.concatenate([lo, hi])
    H = entropy_curve(spec, pts, trials, seed, workers) / spec.n_variables
    k = eps_grid.size
    slopes = (H[:, k:] - H[:, :k]) / (hi - lo)[None, :]
    g = slopes.mean(axis=0)
    err = slopes.std(axis=0, ddof=1) / math.sqrt(trials)
    return GexitCurve(eps_grid, g, "MAP-empirical", error=err)


@dataclass
class MapThresholdEstimate:
    estimate: Optional[float]
    floor: float
    eps_grid: np.ndarray
    ladder: dict

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "floor": self.floor,
            "eps_grid": self.eps_grid.tolist(),
            "ladder": {str(N): v.tolist() for N, v in self.ladder.items()},
        }


def map_threshold_empirical(
    spec: EnsembleSpec,
    trials: int,
    seed: int,
    N_ladder: Sequence[int] = (256, 512, 1024, 2048),
    eps_grid: Optional[Sequence[float]] = None,
    floor: float = 1e-3,
    workers: Optional[int] = None,
) -> MapThresholdEstimate:
    """Smallest grid eps whose mean entropy per variable exceeds ``floor`` bits at every N of the ladder,
    and keeps exceeding it at all larger grid points."""
    grid = np.round(np.arange(0.40, 0.601, 0.0025), 6) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    ladder = {}
    for N in N_ladder:
        s = spec.with_N(N)
        ladder[N] = entropy_curve(s, grid, trials, seed + N, workers).mean(axis=0) / s.n_variables
    above = np.all(np.array([v > floor for v in ladder.values()]), axis=0)
    estimate = None
    for i in range(grid.size):
        if above[i:].all():
            estimate = float(grid[i])
            break
    return MapThresholdEstimate(estimate, floor, grid, ladder)
