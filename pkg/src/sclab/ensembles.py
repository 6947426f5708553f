"""Configuration patterns, Tanner graph samplers and the type algebra.

A graph lives on top of a :class:`ConfigurationPattern`: variables carry
numbered sockets, and a check is an ordered K-tuple of distinct socket ids.
Sockets are numbered canonically by (position, variable, socket index), and
variables are numbered position-major, so the sockets at one position form a
contiguous id range.

Positions are the integers ``1..L``. An open chain with window ``w``
additionally carries ghost positions ``-w+2..0`` and ``L+1..L+w-1`` whose
variables are pinned to +1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

KINDS = ("conn", "disc", "coup")
PRESETS = ("simple", "coupled-closed", "coupled-open")

MAX_PATTERN_RETRIES = 100
DEFAULT_ETA = 0.4
DEFAULT_GAMMA = 0.2
ENUMERATION_CAP = 10**7

CheckType = Tuple[int, ...]


class PatternRejected(RuntimeError):
    """The socket-count band could not be met within the retry budget."""


class EnumerationTooLarge(ValueError):
    pass


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# ---------------------------------------------------------------------------
# degree distributions


@dataclass(frozen=True)
class DegreeDistribution:
    """Variable-node degree distribution, node perspective: ``Lambda(x) = sum_d p_d x^d``."""

    support: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        support = tuple(sorted((int(d), float(p)) for d, p in self.support if p != 0))
        if not support:
            raise ValueError("degree distribution has empty support")
        if any(d < 1 for d, _ in support):
            raise ValueError("degrees must be >= 1")
        if any(p < 0 for _, p in support):
            raise ValueError("probabilities must be nonnegative")
        if len({d for d, _ in support}) != len(support):
            raise ValueError("duplicate degree in support")
        if abs(math.fsum(p for _, p in support) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")
        object.__setattr__(self, "support", support)

    @classmethod
    def regular(cls, d: int) -> "DegreeDistribution":
        return cls(((d, 1.0),))

    @classmethod
    def parse(cls, text: str) -> "DegreeDistribution":
        """Parse ``"2:0.5,4:0.5"`` (or a bare ``"3"`` for a regular distribution)."""
        text = text.strip()
        if ":" not in text:
            return cls.regular(int(text))
        pairs = []
        for item in text.split(","):
            d, p = item.split(":")
            pairs.append((int(d), _parse_prob(p)))
        return cls(tuple(pairs))

    @property
    def degrees(self) -> np.ndarray:
        return np.array([d for d, _ in self.support], dtype=np.int64)

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.support], dtype=float)

    @property
    def mean_degree(self) -> float:
        return math.fsum(d * p for d, p in self.support)

    @property
    def is_regular(self) -> bool:
        return len(self.support) == 1

    def node_poly(self, x: float) -> float:
        """``Lambda(x)``."""
        return math.fsum(p * x**d for d, p in self.support)

    def edge_poly(self, x: float) -> float:
        """Edge-perspective ``lambda(x) = Lambda'(x) / Lambda'(1)``."""
        return math.fsum(p * d * x ** (d - 1) for d, p in self.support) / self.mean_degree

    def __str__(self):
        return ",".join(f"{d}:{p:g}" for d, p in self.support)


def _parse_prob(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def design_rate(dist: DegreeDistribution, K: int) -> float:
    dbar = dist.mean_degree
    if dbar >= K:
        raise ValueError(f"mean degree {dbar} >= K={K}: design rate would be nonpositive")
    return 1.0 - dbar / K


def check_count_T(N: int, L: int, dbar: float, K: int, gamma: float) -> int:
    """Number of checks in the type-driven ensembles, ``floor(N L dbar (1 - N^-gamma) / K)``."""
    value = N * L * dbar * (1.0 - N ** (-gamma)) / K
    return int(math.floor(value + 1e-9))


# ---------------------------------------------------------------------------
# configuration pattern


@dataclass(frozen=True, eq=False)
class ConfigurationPattern:
    N: int
    L: int
    degrees: np.ndarray
    var_position: np.ndarray
    ghost: np.ndarray
    positions: Tuple[int, ...]
    eta: float = DEFAULT_ETA
    retries: int = 0
    mean_degree: float = 0.0

    @property
    def n_variables(self) -> int:
        return int(self.degrees.shape[0])

    @property
    def n_sockets(self) -> int:
        return int(self.degrees.sum())

    @property
    def n_ghost_positions(self) -> int:
        return len(self.positions) - self.L

    @cached_property
    def socket_var(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_variables), self.degrees)

    @cached_property
    def socket_index(self) -> np.ndarray:
        """1-based socket number within its variable."""
        starts = np.repeat(np.cumsum(self.degrees) - self.degrees, self.degrees)
        return np.arange(self.n_sockets) - starts + 1

    @cached_property
    def socket_pos(self) -> np.ndarray:
        return self.var_position[self.socket_var]

    @cached_property
    def _position_slices(self) -> Dict[int, Tuple[int, int]]:
        bounds = {}
        pos = self.socket_pos
        for z in self.positions:
            idx = np.flatnonzero(pos == z)
            lo = int(idx[0]) if idx.size else 0
            bounds[z] = (lo, lo + int(idx.size))
        return bounds

    def sockets_at(self, z: int) -> np.ndarray:
        lo, hi = self._position_slices[z]
        return np.arange(lo, hi)

    def socket_count(self, z: int) -> int:
        lo, hi = self._position_slices[z]
        return hi - lo

    def socket_counts(self) -> np.ndarray:
        return np.array([self.socket_count(z) for z in self.positions], dtype=np.int64)

    def position_index(self, z: int) -> int:
        return self.positions.index(z)

    def variables_at(self, z: int) -> np.ndarray:
        return np.flatnonzero(self.var_position == z)

    @property
    def pinned(self) -> np.ndarray:
        return self.ghost


def _positions_for(L: int, ghost_width: int) -> Tuple[int, ...]:
    return tuple(range(1 - ghost_width, L + ghost_width + 1))


def sample_configuration_pattern(
    N: int,
    L: int,
    dist: DegreeDistribution,
    eta: float = DEFAULT_ETA,
    rng=None,
    ghost_width: int = 0,
    max_retries: int = MAX_PATTERN_RETRIES,
) -> ConfigurationPattern:
    """Draw i.i.d. target degrees for ``N`` variables at each position.

    Patterns whose per-position socket count leaves ``N dbar (1 +- N^-eta)``
    are rejected and redrawn. ``ghost_width = w - 1`` adds the ghost positions
    of an open chain.
    """
    if N < 1 or L < 1:
        raise ValueError(f"need N >= 1 and L >= 1, got N={N}, L={L}")
    if not 0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 1/2)")
    rng = as_rng(rng)
    positions = _positions_for(L, ghost_width)
    n_pos = len(positions)
    var_position = np.repeat(np.array(positions, dtype=np.int64), N)
    ghost = (var_position < 1) | (var_position > L)
    dbar = dist.mean_degree
    lo = N * dbar * (1 - N ** (-eta))
    hi = N * dbar * (1 + N ** (-eta))
    for attempt in range(max_retries + 1):
        if dist.is_regular:
            degrees = np.full(N * n_pos, dist.degrees[0], dtype=np.int64)
        else:
            degrees = rng.choice(dist.degrees, size=N * n_pos, p=dist.probs)
        counts = degrees.reshape(n_pos, N).sum(axis=1)
        if np.all((counts >= lo - 1e-9) & (counts <= hi + 1e-9)):
            return ConfigurationPattern(
                N=N,
                L=L,
                degrees=degrees,
                var_position=var_position,
                ghost=ghost,
                positions=positions,
                eta=eta,
                retries=attempt,
                mean_degree=dbar,
            )
    raise PatternRejected(
        f"socket band N*dbar*(1 +- N^-eta) not met after {max_retries} retries "
        f"(N={N}, eta={eta}); parameters are pathological"
    )


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """A set of checks over the sockets of a configuration pattern.

    ``checks`` has shape (M, K) and holds socket ids; rows are ordered tuples.
    """

    pattern: ConfigurationPattern
    checks: np.ndarray
    K: int
    stopped_early: bool = False
    unplaced: int = 0
    empty: bool = False

    def __post_init__(self):
        checks = np.asarray(self.checks, dtype=np.int64).reshape(-1, self.K)
        checks.setflags(write=False)
        object.__setattr__(self, "checks", checks)

    @property
    def n_checks(self) -> int:
        return int(self.checks.shape[0])

    @property
    def n_variables(self) -> int:
        return self.pattern.n_variables

    @cached_property
    def check_variables(self) -> np.ndarray:
        return self.pattern.socket_var[self.checks]

    @cached_property
    def check_types(self) -> np.ndarray:
        return self.pattern.socket_pos[self.checks]

    @cached_property
    def used_mask(self) -> np.ndarray:
        mask = np.zeros(self.pattern.n_sockets, dtype=bool)
        mask[self.checks.ravel()] = True
        return mask

    def free_sockets(self, z: int) -> np.ndarray:
        s = self.pattern.sockets_at(z)
        return s[~self.used_mask[s]]

    def free_count(self, z: int) -> int:
        return int(self.free_sockets(z).size)

    def free_counts(self) -> np.ndarray:
        return np.array([self.free_count(z) for z in self.pattern.positions], dtype=np.int64)

    @property
    def n_free(self) -> int:
        return int(self.pattern.n_sockets - self.used_mask.sum())

    def free_per_variable(self) -> np.ndarray:
        free = ~self.used_mask
        return np.bincount(self.pattern.socket_var[free], minlength=self.n_variables)

    def parity_matrix(self) -> np.ndarray:
        """Dense (M, n) 0/1 parity-check matrix; repeated variables in a check cancel."""
        H = np.zeros((self.n_checks, self.n_variables), dtype=np.uint8)
        rows = np.repeat(np.arange(self.n_checks), self.K)
        np.add.at(H, (rows, self.check_variables.ravel()), 1)
        return H & 1

    def parity_rows(self) -> List[int]:
        """Checks as int bitsets over variables."""
        out = []
        for row in self.check_variables.tolist():
            x = 0
            for v in row:
                x ^= 1 << v
            out.append(x)
        return out

    def with_checks(self, checks, **flags) -> "TannerGraph":
        return TannerGraph(self.pattern, np.asarray(checks, dtype=np.int64), self.K, **flags)

    def type_census(self, L: Optional[int] = None) -> np.ndarray:
        """Counts of each ordered type over positions 1..L, indexed by base-L code."""
        L = self.pattern.L if L is None else L
        return np.bincount(type_codes(self.check_types, L), minlength=L**self.K)


def empty_graph(pattern: ConfigurationPattern, K: int, flagged: bool = False) -> TannerGraph:
    return TannerGraph(pattern, np.zeros((0, K), dtype=np.int64), K, empty=flagged)


def _check_even(K: int):
    if K < 2 or K % 2:
        raise ValueError(f"K must be even and >= 2, got {K}")


def sample_simple_graph(pattern: ConfigurationPattern, K: int, rng=None) -> TannerGraph:
    """Place ``floor(D/K)`` checks on uniformly random distinct sockets.

    Positions are ignored, so on an L-position pattern this samples
    LDPC(NL, Lambda, K).
    """
    _check_even(K)
    rng = as_rng(rng)
    D = pattern.n_sockets
    M = D // K
    perm = rng.permutation(D)
    return TannerGraph(pattern, perm[: M * K].reshape(M, K), K)


class _SocketPools:
    """Per-position free-socket pools with O(1) uniform draw-and-remove."""

    def __init__(self, graph_or_pattern, positions=None):
        if isinstance(graph_or_pattern, TannerGraph):
            pattern = graph_or_pattern.pattern
            get = graph_or_pattern.free_sockets
        else:
            pattern = graph_or_pattern
            get = pattern.sockets_at
        positions = pattern.positions if positions is None else positions
        self.pools = {z: list(get(z)) for z in positions}

    def size(self, z) -> int:
        pool = self.pools.get(z)
        return 0 if pool is None else len(pool)

    def take(self, z, u: float) -> int:
        pool = self.pools[z]
        i = int(u * len(pool))
        s = pool[i]
        pool[i] = pool[-1]
        pool.pop()
        return s

    def put(self, z, s):
        self.pools[z].append(s)


def window_positions(start: int, w: int, L: int, topology: str) -> List[int]:
    if topology == "closed":
        return [((start - 1 + j) % L) + 1 for j in range(w)]
    return [start + j for j in range(w)]


def window_starts(L: int, w: int, topology: str) -> np.ndarray:
    if topology == "closed":
        return np.arange(1, L + 1)
    return np.arange(-w + 2, L + 1)


def _check_topology(topology: str):
    if topology not in ("closed", "open"):
        raise ValueError(f"topology must be 'closed' or 'open', got {topology!r}")


def sample_coupled_graph(
    pattern: ConfigurationPattern, w: int, K: int, topology: str = "closed", rng=None
) -> TannerGraph:
    """Sample LDPC(N, L, w, Lambda, K) by sequential socket placement.

    Each check picks a window uniformly, then each edge a uniform position in
    the window and a uniform free socket there. The whole process stops at the
    first edge whose position has no free socket; the partial check is
    discarded and the graph is flagged ``stopped_early``.
    """
    _check_even(K)
    _check_topology(topology)
    L = pattern.L
    if not L >= w >= 1:
        raise ValueError(f"need L >= w >= 1, got L={L}, w={w}")
    if topology == "open" and pattern.n_ghost_positions != 2 * (w - 1):
        raise ValueError("open chain needs a pattern sampled with ghost_width = w - 1")
    rng = as_rng(rng)
    starts = window_starts(L, w, topology)
    pools = _SocketPools(pattern)
    checks: List[List[int]] = []
    target = pattern.n_sockets // K
    stopped = False
    batch = 1024
    while not stopped:
        s_idx = rng.integers(0, len(starts), size=batch)
        offs = rng.integers(0, w, size=(batch, K))
        us = rng.random((batch, K))
        for b in range(batch):
            start = int(starts[s_idx[b]])
            row = []
            for j in range(K):
                off = int(offs[b, j])
                if topology == "closed":
                    z = ((start - 1 + off) % L) + 1
                else:
                    z = start + off
                if pools.size(z) == 0:
                    stopped = True
                    break
                row.append((z, pools.take(z, us[b, j])))
            if stopped:
                for z, s in row:
                    pools.put(z, s)
                break
            checks.append([s for _, s in row])
    M = len(checks)
    return TannerGraph(
        pattern,
        np.array(checks, dtype=np.int64).reshape(M, K),
        K,
        stopped_early=M < target,
        unplaced=max(0, target - M),
    )


# ---------------------------------------------------------------------------
# types


def sample_types(
    kind: str, count: int, L: int, w: int, K: int, rng=None, topology: str = "closed"
) -> np.ndarray:
    """Draw ``count`` independent types of one kind; returns a (count, K) array."""
    rng = as_rng(rng)
    _check_topology(topology)
    if not L >= w >= 1:
        raise ValueError(f"need L >= w >= 1, got L={L}, w={w}")
    if kind == "conn":
        return rng.integers(1, L + 1, size=(count, K))
    if kind == "disc":
        z = rng.integers(1, L + 1, size=(count, 1))
        return np.repeat(z, K, axis=1)
    if kind == "coup":
        starts = window_starts(L, w, topology)
        s = starts[rng.integers(0, len(starts), size=(count, 1))]
        offs = rng.integers(0, w, size=(count, K))
        if topology == "closed":
            return (s - 1 + offs) % L + 1
        return s + offs
    raise ValueError(f"unknown type kind {kind!r}")


def sample_type(
    kind: str, L: int, w: int, K: int, rng=None, topology: str = "closed"
) -> CheckType:
    return tuple(int(x) for x in sample_types(kind, 1, L, w, K, rng, topology)[0])


def sample_type_multiset(
    mix: Dict[str, int], L: int, w: int, K: int, rng=None, topology: str = "closed"
) -> np.ndarray:
    """Concatenate ``mix[kind]`` types of each kind, in conn/disc/coup order."""
    rng = as_rng(rng)
    parts = [sample_types(k, int(mix.get(k, 0)), L, w, K, rng, topology) for k in KINDS]
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, K), dtype=np.int64)


def weighted_two_position_types(kind: str, nu1: float, nu2: float, count: int, K: int, rng=None) -> np.ndarray:
    """Two-position types where position 1 is chosen with weight ``nu1``."""
    if nu1 < 0 or nu2 < 0 or abs(nu1 + nu2 - 1) > 1e-12:
        raise ValueError("nu1, nu2 must be nonnegative and sum to 1")
    rng = as_rng(rng)
    if kind == "conn":
        return np.where(rng.random((count, K)) < nu1, 1, 2)
    if kind == "disc":
        z = np.where(rng.random((count, 1)) < nu1, 1, 2)
        return np.repeat(z, K, axis=1)
    raise ValueError(f"weighted types exist for conn and disc only, got {kind!r}")


def weighted_two_position_type(kind: str, nu1: float, nu2: float, K: int, rng=None) -> CheckType:
    return tuple(int(x) for x in weighted_two_position_types(kind, nu1, nu2, 1, K, rng)[0])


def type_codes(types: np.ndarray, L: int) -> np.ndarray:
    """Base-L code of each ordered type over positions 1..L (first entry most significant)."""
    types = np.asarray(types, dtype=np.int64)
    if types.size == 0:
        return np.zeros(0, dtype=np.int64)
    K = types.shape[1]
    weights = L ** np.arange(K - 1, -1, -1, dtype=np.int64)
    return (types - 1) @ weights


def type_from_code(code: int, L: int, K: int) -> CheckType:
    out = []
    for _ in range(K):
        code, rem = divmod(code, L)
        out.append(rem + 1)
    return tuple(reversed(out))


def occupation_vector(x, L: int, positions: Optional[Sequence[int]] = None) -> np.ndarray:
    """Per-position occurrence counts of a type or of a multiset of types."""
    positions = tuple(range(1, L + 1)) if positions is None else tuple(positions)
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    flat = arr.ravel()
    offset = positions[0]
    if flat.size and (flat.min() < offset or flat.max() > positions[-1]):
        raise ValueError("type entry outside the position range")
    return np.bincount(flat - offset, minlength=len(positions)).astype(np.int64)


def is_m_admissible(types, pattern: ConfigurationPattern, m: int = 0) -> bool:
    if m < 0:
        raise ValueError("m must be >= 0")
    arr = np.asarray(types, dtype=np.int64)
    if arr.ndim == 1 and arr.size:
        arr = arr[None, :]
    flat = arr.ravel()
    if flat.size and (flat.min() < pattern.positions[0] or flat.max() > pattern.positions[-1]):
        return False
    occ = np.bincount(flat - pattern.positions[0], minlength=len(pattern.positions))
    return bool(np.all(occ <= pattern.socket_counts() - m))


def sample_graph_from_types(
    types, pattern: ConfigurationPattern, K: int, rng=None, m: int = 0
) -> TannerGraph:
    """Uniform graph compatible with the type multiset.

    A multiset that is not ``m``-admissible yields the empty graph with
    ``empty=True``.
    """
    _check_even(K)
    rng = as_rng(rng)
    types = np.asarray(types, dtype=np.int64).reshape(-1, K)
    if not is_m_admissible(types, pattern, m):
        return empty_graph(pattern, K, flagged=True)
    return _place_types(empty_graph(pattern, K), types, rng)


def extend_graph(graph: TannerGraph, types, rng=None) -> TannerGraph:
    """Add one check per type on uniformly chosen distinct free sockets.

    Raises ``ValueError`` when some position runs out of free sockets.
    """
    rng = as_rng(rng)
    types = np.asarray(types, dtype=np.int64).reshape(-1, graph.K)
    return _place_types(graph, types, rng)


def _place_types(graph: TannerGraph, types: np.ndarray, rng) -> TannerGraph:
    flat = types.ravel()
    sockets = np.empty_like(flat)
    for z in np.unique(flat):
        idx = np.flatnonzero(flat == z)
        free = graph.free_sockets(int(z))
        if free.size < idx.size:
            raise ValueError(f"position {z} has {free.size} free sockets, {idx.size} needed")
        sockets[idx] = rng.permutation(free)[: idx.size]
    new = np.concatenate([graph.checks, sockets.reshape(-1, graph.K)], axis=0)
    return graph.with_checks(new)


def sample_check(alpha: Sequence[int], graph: TannerGraph, rng=None) -> np.ndarray:
    """One draw from nu(alpha, G): distinct uniform free sockets at the type's positions."""
    rng = as_rng(rng)
    alpha = np.asarray(alpha, dtype=np.int64)
    out = np.empty(alpha.size, dtype=np.int64)
    for z in np.unique(alpha):
        idx = np.flatnonzero(alpha == z)
        free = graph.free_sockets(int(z))
        if free.size < idx.size:
            raise ValueError(f"position {z} lacks free sockets")
        out[idx] = rng.choice(free, size=idx.size, replace=False)
    return out


def count_checks(alpha: Sequence[int], graph: TannerGraph) -> Tuple[int, int]:
    """(|B_alpha|, |B'_alpha|): compatible checks without / with socket replacement."""
    with_rep = 1
    without = 1
    for z, c in zip(*np.unique(np.asarray(alpha), return_counts=True)):
        f = graph.free_count(int(z))
        with_rep *= f**int(c)
        without *= math.perm(f, int(c))
    return without, with_rep


def enumerate_checks(
    alpha: Sequence[int], graph: TannerGraph, with_replacement: bool = False, cap: int = ENUMERATION_CAP
) -> List[Tuple[int, ...]]:
    """All checks of type ``alpha`` on free sockets (B_alpha, or B'_alpha with replacement)."""
    _, size = count_checks(alpha, graph)
    if size > cap:
        raise EnumerationTooLarge(f"|B'_alpha| = {size} exceeds cap {cap}")
    pools = [graph.free_sockets(int(z)).tolist() for z in alpha]
    prod = itertools.product(*pools)
    if with_replacement:
        return list(prod)
    return [a for a in prod if len(set(a)) == len(a)]


# ---------------------------------------------------------------------------
# simple -> conn edit transformation


@dataclass
class EditStats:
    X: np.ndarray
    Y: np.ndarray
    insertions: int = 0
    deletions: int = 0
    aborted: bool = False

    @property
    def edits(self) -> int:
        return self.insertions + self.deletions


def transform_simple_to_conn(graph: TannerGraph, T: int, rng=None) -> Tuple[TannerGraph, EditStats]:
    """Edit a simple-ensemble graph so its type census is i.i.d. Bin(T, L^-K).

    All deletions happen before any insertion; insertions run over types in
    increasing code order. A failed insertion yields the trivial code.
    """
    rng = as_rng(rng)
    L, K = graph.pattern.L, graph.K
    n_types = L**K
    codes = type_codes(graph.check_types, L)
    X = np.bincount(codes, minlength=n_types)
    Y = rng.binomial(T, L ** (-float(K)), size=n_types)
    stats = EditStats(X=X, Y=Y)

    keep = np.ones(graph.n_checks, dtype=bool)
    for code in np.flatnonzero(X > Y):
        members = np.flatnonzero(codes == code)
        drop = rng.choice(members, size=int(X[code] - Y[code]), replace=False)
        keep[drop] = False
    stats.deletions = int((~keep).sum())
    current = graph.with_checks(graph.checks[keep])

    pools = _SocketPools(current)
    added = []
    for code in np.flatnonzero(Y > X):
        alpha = type_from_code(int(code), L, K)
        for _ in range(int(Y[code] - X[code])):
            us = rng.random(K)
            row = []
            for j, z in enumerate(alpha):
                if pools.size(z) == 0:
                    stats.aborted = True
                    stats.insertions = len(added)
                    return empty_graph(graph.pattern, K, flagged=True), stats
                row.append(pools.take(z, us[j]))
            added.append(row)
    stats.insertions = len(added)
    if added:
        current = current.with_checks(np.concatenate([current.checks, np.array(added, dtype=np.int64)]))
    return current, stats


# ---------------------------------------------------------------------------
# ensemble specification


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of one ensemble.

    ``mix`` is either a preset name (``simple``, ``coupled-closed``,
    ``coupled-open``) or a mapping ``{"conn": t1, "disc": t2, "coup": t3}`` of
    type counts for the type-driven ensembles.
    """

    N: int
    L: int
    w: int
    K: int
    dist: DegreeDistribution
    mix: Union[str, Tuple[Tuple[str, int], ...]] = "simple"
    gamma: float = DEFAULT_GAMMA
    eta: float = DEFAULT_ETA
    topology: str = "closed"

    def __post_init__(self):
        if isinstance(self.mix, dict):
            object.__setattr__(self, "mix", tuple((k, int(self.mix.get(k, 0))) for k in KINDS))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.L >= self.w >= 1:
            raise ValueError(f"need L >= w >= 1, got L={self.L}, w={self.w}")
        _check_even(self.K)
        if not 0 < self.gamma < self.eta < 0.5:
            raise ValueError("need 0 < gamma < eta < 1/2")
        _check_topology(self.topology)
        if isinstance(self.mix, str):
            if self.mix not in PRESETS:
                raise ValueError(f"unknown mix preset {self.mix!r}")
        elif any(k not in KINDS or t < 0 for k, t in self.mix):
            raise ValueError(f"bad type mix {self.mix!r}")

    @property
    def T(self) -> int:
        return check_count_T(self.N, self.L, self.dist.mean_degree, self.K, self.gamma)

    @property
    def mix_counts(self) -> Dict[str, int]:
        if isinstance(self.mix, str):
            raise ValueError(f"preset {self.mix!r} has no type counts")
        return dict(self.mix)

    @property
    def n_variables(self) -> int:
        return self.N * self.L

    @property
    def admissibility_m(self) -> float:
        return self.dist.mean_degree * self.N ** (1 - self.gamma) / 2

    def with_mix(self, mix) -> "EnsembleSpec":
        return EnsembleSpec(self.N, self.L, self.w, self.K, self.dist, mix, self.gamma, self.eta, self.topology)

    def with_N(self, N: int) -> "EnsembleSpec":
        return EnsembleSpec(N, self.L, self.w, self.K, self.dist, self.mix, self.gamma, self.eta, self.topology)

    def chain_mix(self, direction: str, t: int) -> "EnsembleSpec":
        """Mix ``{t x first, (T - t) x second}`` for a ``conn-coup`` or ``coup-disc`` chain."""
        first, second = direction.split("-")
        T = self.T
        if not 0 <= t <= T:
            raise ValueError(f"t={t} outside 0..{T}")
        return self.with_mix({first: t, second: T - t})

    def sample_pattern(self, rng) -> ConfigurationPattern:
        ghost = self.w - 1 if self.mix == "coupled-open" else 0
        return sample_configuration_pattern(self.N, self.L, self.dist, self.eta, rng, ghost_width=ghost)

    def sample_graph(self, rng, pattern: Optional[ConfigurationPattern] = None, m: int = 0) -> TannerGraph:
        rng = as_rng(rng)
        if pattern is None:
            pattern = self.sample_pattern(rng)
        if self.mix == "simple":
            return sample_simple_graph(pattern, self.K, rng)
        if self.mix == "coupled-closed":
            return sample_coupled_graph(pattern, self.w, self.K, "closed", rng)
        if self.mix == "coupled-open":
            return sample_coupled_graph(pattern, self.w, self.K, "open", rng)
        types = sample_type_multiset(self.mix_counts, self.L, self.w, self.K, rng, self.topology)
        return sample_graph_from_types(types, pattern, self.K, rng, m=m)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "L": self.L,
            "w": self.w,
            "K": self.K,
            "lambda": str(self.dist),
            "mix": self.mix if isinstance(self.mix, str) else dict(self.mix),
            "topology": self.topology,
            "gamma": self.gamma,
            "eta": self.eta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        known = {"N", "L", "w", "K", "lambda", "mix", "topology", "gamma", "eta", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown ensemble key(s): {', '.join(sorted(unknown))}")
        for key in ("N", "K", "lambda"):
            if key not in d:
                raise ValueError(f"missing ensemble key {key!r}")
        lam = d["lambda"]
        if isinstance(lam, dict):
            dist = DegreeDistribution(tuple((int(k), _parse_prob(str(v))) for k, v in lam.items()))
        elif isinstance(lam, int):
            dist = DegreeDistribution.regular(lam)
        else:
            dist = DegreeDistribution.parse(str(lam))
        mix = d.get("mix", "simple")
        return cls(
            N=int(d["N"]),
            L=int(d.get("L", 1)),
            w=int(d.get("w", 1)),
            K=int(d["K"]),
            dist=dist,
            mix=mix if isinstance(mix, str) else {k: int(v) for k, v in mix.items()},
            gamma=float(d.get("gamma", DEFAULT_GAMMA)),
            eta=float(d.get("eta", DEFAULT_ETA)),
            topology=str(d.get("topology", "closed")),
        )


def transform_exponents(eta: float = DEFAULT_ETA) -> Dict[str, float]:
    """Exponent preset used for the simple-to-conn comparison: gamma = eta/2, zeta = eta/4."""
    return {"eta": eta, "gamma": eta / 2, "zeta": eta / 4}


# ---------------------------------------------------------------------------
# canonical text serialization

GRAPH_FORMAT = "sclab-graph 1"


def dump_graph(graph: TannerGraph) -> str:
    p = graph.pattern
    lines = [
        GRAPH_FORMAT,
        f"N {p.N}",
        f"L {p.L}",
        f"positions {p.positions[0]} {p.positions[-1]}",
        f"eta {p.eta!r}",
        f"K {graph.K}",
        "degrees " + " ".join(map(str, p.degrees.tolist())),
        f"flags stopped_early={int(graph.stopped_early)} unplaced={graph.unplaced} empty={int(graph.empty)}",
        f"checks {graph.n_checks}",
    ]
    lines.extend(" ".join(map(str, row)) for row in graph.checks.tolist())
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> TannerGraph:
    lines = text.splitlines()
    if not lines or lines[0].strip() != GRAPH_FORMAT:
        raise ValueError(f"not a {GRAPH_FORMAT!r} record")
    head = {}
    i = 1
    while i < len(lines):
        key, _, rest = lines[i].partition(" ")
        head[key] = rest
        i += 1
        if key == "checks":
            break
    N, L, K = int(head["N"]), int(head["L"]), int(head["K"])
    lo, hi = map(int, head["positions"].split())
    positions = tuple(range(lo, hi + 1))
    degrees = np.array(head["degrees"].split(), dtype=np.int64)
    var_position = np.repeat(np.array(positions, dtype=np.int64), N)
    if degrees.size != var_position.size:
        raise ValueError("degree list does not match N and positions")
    flags = dict(item.split("=") for item in head["flags"].split())
    M = int(head["checks"])
    rows = [list(map(int, ln.split())) for ln in lines[i : i + M]]
    if len(rows) != M:
        raise ValueError("truncated check list")
    dist_mean = float(degrees[(var_position >= 1) & (var_position <= L)].mean())
    pattern = ConfigurationPattern(
        N=N,
        L=L,
        degrees=degrees,
        var_position=var_position,
        ghost=(var_position < 1) | (var_position > L),
        positions=positions,
        eta=float(head["eta"]),
        mean_degree=dist_mean,
    )
    return TannerGraph(
        pattern,
        np.array(rows, dtype=np.int64).reshape(M, K),
        K,
        stopped_early=bool(int(flags["stopped_early"])),
        unplaced=int(flags["unplaced"]),
        empty=bool(int(flags["empty"])),
    )


def pattern_from_degrees(
    degrees_by_position: Dict[int, Sequence[int]], L: Optional[int] = None, eta: float = DEFAULT_ETA
) -> ConfigurationPattern:
    """Deterministic pattern with the given per-variable degrees at each position.

    Positions must be consecutive; every position needs the same number of
    variables. Used to build hand-made small instances.
    """
    positions = tuple(sorted(degrees_by_position))
    if positions != tuple(range(positions[0], positions[-1] + 1)):
        raise ValueError("positions must be consecutive")
    sizes = {len(v) for v in degrees_by_position.values()}
    if len(sizes) != 1:
        raise ValueError("every position needs the same number of variables")
    N = sizes.pop()
    L = L if L is not None else sum(1 for z in positions if z >= 1)
    degrees = np.concatenate([np.asarray(degrees_by_position[z], dtype=np.int64) for z in positions])
    var_position = np.repeat(np.array(positions, dtype=np.int64), N)
    return ConfigurationPattern(
        N=N,
        L=L,
        degrees=degrees,
        var_position=var_position,
        ghost=(var_position < 1) | (var_position > L),
        positions=positions,
        eta=eta,
        mean_degree=float(degrees.mean()),
    )


def two_position_pattern(
    N1: int, N2: int, dist: DegreeDistribution, eta: float = DEFAULT_ETA, rng=None, max_retries: int = MAX_PATTERN_RETRIES
) -> ConfigurationPattern:
    """Pattern with ``N1`` variables at position 1 and ``N2`` at position 2.

    Each position is band-checked against its own size. ``N`` records the
    total ``N1 + N2``.
    """
    if N1 < 1 or N2 < 1:
        raise ValueError("both positions need at least one variable")
    rng = as_rng(rng)
    dbar = dist.mean_degree
    for attempt in range(max_retries + 1):
        parts = []
        for n in (N1, N2):
            if dist.is_regular:
                parts.append(np.full(n, dist.degrees[0], dtype=np.int64))
            else:
                parts.append(rng.choice(dist.degrees, size=n, p=dist.probs))
        if all(abs(p.sum() - len(p) * dbar) <= len(p) * dbar * len(p) ** (-eta) + 1e-9 for p in parts):
            var_position = np.repeat(np.array([1, 2], dtype=np.int64), [N1, N2])
            return ConfigurationPattern(
                N=N1 + N2,
                L=2,
                degrees=np.concatenate(parts),
                var_position=var_position,
                ghost=np.zeros(N1 + N2, dtype=bool),
                positions=(1, 2),
                eta=eta,
                retries=attempt,
                mean_degree=dbar,
            )
    raise PatternRejected(f"socket band not met after {max_retries} retries (N1={N1}, N2={N2})")
