"""Seeded, scheduling-independent Monte-Carlo trials.

Trial ``i`` of a run with master seed ``s`` draws from streams seeded by
``SeedSequence(s, spawn_key=(i, j))``; results are gathered in trial order and
summed with ``math.fsum``, so estimates are bitwise identical for any worker
count.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import stats


def trial_streams(master: int, index: int, count: int = 1) -> List[np.random.Generator]:
    return [np.random.default_rng(np.random.SeedSequence(master, spawn_key=(index, j))) for j in range(count)]


def default_workers() -> int:
    return os.cpu_count() or 1


def run_trials(func: Callable[[int, int], object], trials: int, master: int, workers: Optional[int] = None) -> list:
    """Evaluate ``func(master, i)`` for ``i in range(trials)``, in order."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or trials < 2:
        return [func(master, i) for i in range(trials)]
    chunk = max(1, trials // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, [master] * trials, range(trials), chunksize=chunk))


@dataclass
class MCEstimate:
    mean: float
    stderr: float
    trials: int
    flagged_trials: int = 0
    values: np.ndarray = field(default=None, repr=False)
    unit: str = ""

    @classmethod
    def from_values(cls, values: Sequence[float], flagged: int = 0, unit: str = "") -> "MCEstimate":
        v = np.asarray(values, dtype=float)
        n = v.size
        if n < 2:
            raise ValueError("need at least two trials")
        mean = math.fsum(v.tolist()) / n
        var = math.fsum(((v - mean) ** 2).tolist()) / (n - 1)
        return cls(mean, math.sqrt(var / n), n, int(flagged), v, unit)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "trials": self.trials, "flagged": self.flagged_trials, "unit": self.unit}

    def scaled(self, factor: float) -> "MCEstimate":
        values = None if self.values is None else self.values * factor
        return MCEstimate(self.mean * factor, self.stderr * abs(factor), self.trials, self.flagged_trials, values, self.unit)


def bonferroni_z(comparisons: int, sigmas: float = 3.0) -> float:
    """One-sided critical z for a family of comparisons at the ``sigmas`` level."""
    return float(stats.norm.isf(stats.norm.sf(sigmas) / max(1, comparisons)))


def paired_difference(a: MCEstimate, b: MCEstimate) -> MCEstimate:
    """Estimate of ``E[a] - E[b]`` from trial-aligned values."""
    if a.values is None or b.values is None or a.values.size != b.values.size:
        se = math.hypot(a.stderr, b.stderr)
        return MCEstimate(a.mean - b.mean, se, min(a.trials, b.trials))
    return MCEstimate.from_values(a.values - b.values, unit=a.unit)


RESULT_COLUMNS = ("experiment", "t", "mean", "stderr", "trials", "flagged", "seed")


def write_results_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k, "")) for k in RESULT_COLUMNS})


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v
