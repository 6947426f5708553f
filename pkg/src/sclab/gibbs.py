"""Exact Gibbs-measure computations on small codes.

The measure is ``mu(sigma) ~ exp(h . sigma)`` restricted to the codewords of
the parity system. Everything here is exact: partition functions are
log-sum-exps over the enumerated code, and expectations over the channel are
sums over every output vector. Coordinates with ``h = +inf`` (known bits,
pinned ghosts) restrict the code to words that are +1 there, and their
infinite contribution to ``ln Z`` is dropped.

The BEC entropy is handled separately by :class:`BecEvaluator`, which counts
consistent codewords through a GF(2) rank and works at any blocklength.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from . import gf2
from .channels import BmsChannel, output_table
from .ensembles import TannerGraph, as_rng, sample_check, window_positions, window_starts

LN2 = math.log(2.0)
CODEWORD_CAP_BITS = 24


class CapExceeded(ValueError):
    """An exhaustive enumeration would exceed its configured size cap."""


# ---------------------------------------------------------------------------
# codes and codeword bases


@dataclass(frozen=True, eq=False)
class ParityCode:
    """Parity constraints over ``n`` variables as int bitsets, plus pinned coordinates."""

    rows: Tuple[int, ...]
    n: int
    pinned: Optional[np.ndarray] = None

    @classmethod
    def from_graph(cls, graph: TannerGraph) -> "ParityCode":
        pinned = graph.pattern.pinned
        return cls(tuple(graph.parity_rows()), graph.n_variables, pinned if pinned.any() else None)

    @classmethod
    def from_checks(cls, checks: Sequence[Sequence[int]], n: int) -> "ParityCode":
        return cls(tuple(_tuple_bits(b) for b in checks), n)

    def with_check(self, b: Sequence[int]) -> "ParityCode":
        return ParityCode(self.rows + (_tuple_bits(b),), self.n, self.pinned)

    def contains(self, word_bits: int) -> bool:
        return all(bin(r & word_bits).count("1") % 2 == 0 for r in self.rows)

    @cached_property
    def basis(self) -> "BinaryCodeBasis":
        return codeword_basis(self)


def _tuple_bits(b) -> int:
    x = 0
    for v in b:
        x ^= 1 << int(v)
    return x


def as_code(G) -> ParityCode:
    if isinstance(G, ParityCode):
        return G
    if isinstance(G, TannerGraph):
        return ParityCode.from_graph(G)
    raise TypeError(f"expected a TannerGraph or ParityCode, got {type(G).__name__}")


@dataclass(frozen=True, eq=False)
class BinaryCodeBasis:
    generators: Tuple[int, ...]
    n: int

    @property
    def k(self) -> int:
        return len(self.generators)

    def codewords(self, cap_bits: int = CODEWORD_CAP_BITS) -> np.ndarray:
        """All ``2^k`` codewords as a 0/1 array; row ``i`` is the combination with coefficient bits ``i``."""
        if self.k > cap_bits:
            raise CapExceeded(f"code dimension {self.k} exceeds enumeration cap {cap_bits}")
        gens = gf2.ints_to_bits(self.generators, self.n)
        coeffs = (np.arange(2**self.k)[:, None] >> np.arange(self.k)[None, :]) & 1
        return ((coeffs @ gens) & 1).astype(np.uint8)

    def spins(self, cap_bits: int = CODEWORD_CAP_BITS) -> np.ndarray:
        return 1 - 2 * self.codewords(cap_bits).astype(np.int8)


def codeword_basis(G) -> BinaryCodeBasis:
    """Basis of the solution space of the parity system (pinned coordinates forced to 0)."""
    code = as_code(G)
    rows = list(code.rows)
    if code.pinned is not None:
        rows.extend(1 << int(v) for v in np.flatnonzero(code.pinned))
    return BinaryCodeBasis(tuple(gf2.nullspace(rows, code.n)), code.n)


# ---------------------------------------------------------------------------
# energies


def _energies(spins: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``h . sigma`` for every (output row, codeword) pair, with +-inf coordinates as hard constraints.

    ``h`` may be a single vector or a matrix of output vectors.
    """
    h = np.atleast_2d(np.asarray(h, dtype=float))
    finite = np.isfinite(h)
    e = np.where(finite, h, 0.0) @ spins.T.astype(float)
    if not finite.all():
        neg = (spins < 0).astype(float)
        pos = (spins > 0).astype(float)
        bad = (h == np.inf).astype(float) @ neg.T + (h == -np.inf).astype(float) @ pos.T
        e = np.where(bad > 0, -np.inf, e)
    return e


def _softmax_rows(e: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lz = logsumexp(e, axis=1)
    return np.exp(e - lz[:, None]), lz


def _spin_products(spins: np.ndarray, b: Sequence[int]) -> np.ndarray:
    return np.prod(spins[:, list(b)].astype(np.int64), axis=1) if len(b) else np.ones(spins.shape[0], np.int64)


# ---------------------------------------------------------------------------
# Gibbs state


@dataclass(frozen=True, eq=False)
class GibbsState:
    """Gibbs measure of one code under one HLLR realization."""

    code: ParityCode
    h: np.ndarray
    spins: np.ndarray
    probs: np.ndarray
    log_z: float

    @classmethod
    def build(cls, G, h, cap_bits: int = CODEWORD_CAP_BITS) -> "GibbsState":
        code = as_code(G)
        h = np.asarray(h, dtype=float)
        if h.shape != (code.n,):
            raise ValueError(f"HLLR vector has shape {h.shape}, expected ({code.n},)")
        spins = code.basis.spins(cap_bits)
        p, lz = _softmax_rows(_energies(spins, h))
        return cls(code, h, spins, p[0], float(lz[0]))

    @property
    def n(self) -> int:
        return self.code.n

    def bracket(self, b: Sequence[int]) -> float:
        """``<sigma_b>``, clipped to [-1, 1] against rounding."""
        return min(1.0, max(-1.0, float(self.probs @ _spin_products(self.spins, b))))

    def marginals(self) -> np.ndarray:
        return self.probs @ self.spins.astype(float)

    def replica_bracket(self, b: Sequence[int], r: int, cap_bits: int = CODEWORD_CAP_BITS) -> float:
        """``<sigma_b^(1) ... sigma_b^(r)>`` under the r-fold product measure, by enumeration."""
        sb = _spin_products(self.spins, b).astype(float)
        total = 0.0
        for w, t in replica_tuples(self, r, cap_bits, values=sb):
            total += float(w @ t)
        return total

    def product_law(self, r: int) -> np.ndarray:
        """Law of the spin product ``sigma^(1) ... sigma^(r)`` over codewords.

        The product of r codewords is the codeword whose coefficient vector is
        the XOR of theirs, so the law is an r-fold XOR convolution, done with a
        Walsh-Hadamard transform.
        """
        k = self.code.basis.k
        if k == 0:
            return np.ones(1)
        spec = _walsh_hadamard(self.probs.reshape((2,) * k))
        out = _walsh_hadamard(spec**r) / (2**k)
        return np.clip(out.reshape(-1), 0.0, None)


def _walsh_hadamard(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    for axis in range(a.ndim):
        x0 = np.take(a, 0, axis=axis)
        x1 = np.take(a, 1, axis=axis)
        a = np.stack([x0 + x1, x0 - x1], axis=axis)
    return a


def replica_tuples(state: GibbsState, r: int, cap_bits: int = CODEWORD_CAP_BITS, values=None, chunk: int = 1 << 16):
    """Iterate the r-fold product measure in chunks.

    Yields ``(weights, products)``: the product-measure weight of each replica
    tuple and the coordinatewise spin product ``sigma^(1) ... sigma^(r)``
    (or, when ``values`` is given, the product of ``values`` across replicas).
    """
    k = state.code.basis.k
    if r * k > cap_bits:
        raise CapExceeded(f"r*k = {r * k} exceeds replica cap {cap_bits}")
    base = state.spins if values is None else np.asarray(values)
    C = state.probs.shape[0]
    inner_r = max(0, r - 1)
    # enumerate the first r-1 replicas lexicographically; the last one is vectorized
    for head in itertools.product(range(C), repeat=inner_r):
        w_head = 1.0
        prod_head = np.ones(base.shape[1:], dtype=base.dtype) if base.ndim > 1 else 1
        for i in head:
            w_head *= state.probs[i]
            prod_head = prod_head * base[i]
        if w_head == 0.0:
            continue
        for lo in range(0, C, chunk):
            hi = min(C, lo + chunk)
            yield w_head * state.probs[lo:hi], prod_head * base[lo:hi]


def log_partition(G, h) -> float:
    return GibbsState.build(G, h).log_z


def gibbs_bracket(state: GibbsState, b: Sequence[int], r: int = 1) -> float:
    """``<sigma_b>^r``."""
    return state.bracket(b) ** r


# ---------------------------------------------------------------------------
# expectations over the channel


@dataclass(frozen=True, eq=False)
class OutputEnsemble:
    """Every output of a discrete channel on ``n`` coordinates with the Gibbs data of a code."""

    probs: np.ndarray
    h: np.ndarray
    log_z: np.ndarray
    gibbs: np.ndarray
    spins: np.ndarray

    @classmethod
    def build(cls, G, channel: BmsChannel, cap_bits: int = CODEWORD_CAP_BITS) -> "OutputEnsemble":
        code = as_code(G)
        H, P = output_table(channel, code.n)
        spins = code.basis.spins(cap_bits)
        if code.pinned is not None:
            H = np.where(code.pinned[None, :], np.inf, H)
        mu, lz = _softmax_rows(_energies(spins, H))
        return cls(P, H, lz, mu, spins)

    def brackets(self, b: Sequence[int]) -> np.ndarray:
        """``<sigma_b>`` for every output."""
        return np.clip(self.gibbs @ _spin_products(self.spins, b).astype(float), -1.0, 1.0)

    def expect(self, values: np.ndarray) -> float:
        return float(math.fsum(self.probs * values))


def expected_log_partition(G, channel: BmsChannel) -> float:
    ens = OutputEnsemble.build(G, channel)
    return ens.expect(ens.log_z)


def conditional_entropy_exact(G, channel: BmsChannel) -> float:
    """``H(X|Y)`` in nats for a uniformly chosen codeword, exactly.

    Channels with almost surely finite HLLR use ``E[ln Z] - n E[h]``; the BEC
    goes through the rank oracle averaged over every erasure pattern.
    """
    code = as_code(G)
    if channel.family == "bec":
        return LN2 * _bec_expected_entropy_bits(G, channel.parameter)
    hs, _ = channel.hllr_law()
    if not np.all(np.isfinite(hs)):
        raise ValueError("the ln Z route needs a channel with finite HLLRs")
    ens = OutputEnsemble.build(code, channel)
    n_free = code.n - (0 if code.pinned is None else int(code.pinned.sum()))
    return ens.expect(ens.log_z) - n_free * channel.mean_hllr


def _bec_expected_entropy_bits(G, eps: float) -> float:
    code = as_code(G)
    free = np.ones(code.n, bool) if code.pinned is None else ~code.pinned
    idx = np.flatnonzero(free)
    if idx.size > CODEWORD_CAP_BITS:
        raise CapExceeded("too many coordinates for an exhaustive erasure average")
    ev = BecEvaluator.from_code(code)
    total = []
    for mask in itertools.product((False, True), repeat=idx.size):
        mask = np.array(mask, dtype=bool)
        erased = np.zeros(code.n, dtype=bool)
        erased[idx[mask]] = True
        e = int(mask.sum())
        total.append(eps**e * (1 - eps) ** (idx.size - e) * ev.entropy(erased))
    return math.fsum(total)


def nishimori_check(G, channel: BmsChannel, b: Sequence[int], m: int) -> Tuple[float, float]:
    """Exact ``(E_h <sigma_b>^m, E_h <sigma_b>^(m+1))`` for odd ``m``."""
    if m < 1 or m % 2 == 0:
        raise ValueError("m must be an odd positive integer")
    ens = OutputEnsemble.build(G, channel)
    br = ens.brackets(b)
    return ens.expect(br**m), ens.expect(br ** (m + 1))


def logz_increment(G, b: Sequence[int], h) -> float:
    """``ln Z(G u b) - ln Z(G) = -ln 2 + ln(1 + <sigma_b>_G)``."""
    br = GibbsState.build(G, h).bracket(b)
    if br <= -1.0:
        # unreachable: the all-+1 word satisfies b and has positive weight
        return -math.inf
    return -LN2 + math.log1p(br)


def logz_increment_direct(G, b: Sequence[int], h) -> float:
    """The same increment from two separate partition functions."""
    code = as_code(G)
    return log_partition(code.with_check(b), h) - log_partition(code, h)


def expected_logz_increment(G, b: Sequence[int], channel: BmsChannel) -> float:
    ens = OutputEnsemble.build(G, channel)
    return ens.expect(-LN2 + np.log1p(ens.brackets(b)))


def logz_increment_series(G, b: Sequence[int], channel: BmsChannel, r_max: int) -> float:
    """``-ln 2 + sum_{r even, 2<=r<=r_max} E_h[<sigma_b>^r] / (r^2 - r)``.

    The omitted tail is at most ``sum_{r>r_max even} 1/(r^2-r) <= 1/r_max``.
    """
    if r_max < 2 or r_max % 2:
        raise ValueError("r_max must be an even integer >= 2")
    ens = OutputEnsemble.build(G, channel)
    br = ens.brackets(b)
    terms = [ens.expect(br**r) / (r * r - r) for r in range(2, r_max + 1, 2)]
    return -LN2 + math.fsum(terms)


def gauge_transform(h, tau, G=None) -> np.ndarray:
    """``h_v -> h_v tau_v`` for a codeword ``tau`` given in spin form."""
    tau = np.asarray(tau)
    if G is not None:
        bits = _tuple_bits(np.flatnonzero(tau < 0))
        if not as_code(G).contains(bits):
            raise ValueError("gauge vector is not a codeword")
    return np.asarray(h, dtype=float) * tau


# ---------------------------------------------------------------------------
# BEC rank oracle


class BecEvaluator:
    """Conditional entropy (bits) of a code on the BEC via GF(2) ranks.

    ``H(X|Y=erasure set E) = |E| - rank(H_E)``: the log2 count of codewords
    consistent with the unerased bits. Pinned coordinates are never erased.
    """

    def __init__(self, H: np.ndarray, pinned: Optional[np.ndarray] = None):
        self.n = H.shape[1]
        self.columns = gf2.pack_columns(H)
        self.free = np.ones(self.n, dtype=bool) if pinned is None else ~np.asarray(pinned, dtype=bool)

    @classmethod
    def from_graph(cls, graph: TannerGraph) -> "BecEvaluator":
        return cls(graph.parity_matrix(), graph.pattern.pinned)

    @classmethod
    def from_code(cls, code: ParityCode) -> "BecEvaluator":
        H = gf2.ints_to_bits(code.rows, code.n) if code.rows else np.zeros((0, code.n), np.uint8)
        return cls(H, code.pinned)

    @property
    def dimension(self) -> int:
        """Dimension of the code on the unpinned coordinates."""
        idx = np.flatnonzero(self.free)
        return int(idx.size - gf2.column_rank(self.columns, idx))

    def entropy(self, erased: np.ndarray) -> int:
        idx = np.flatnonzero(np.asarray(erased, dtype=bool) & self.free)
        return int(idx.size - gf2.column_rank(self.columns, idx))

    def profile(self, u: np.ndarray, eps_grid: Sequence[float]) -> np.ndarray:
        """Entropy at every grid value for the nested erasure sets ``{v : u_v < eps}``."""
        u = np.where(self.free, np.asarray(u, dtype=float), np.inf)
        order = np.argsort(u, kind="stable")
        ranks = gf2.rank_profile(self.columns, order[np.isfinite(u[order])])
        counts = np.searchsorted(u[order], np.asarray(eps_grid, dtype=float), side="left")
        counts = np.minimum(counts, ranks.size - 1)
        return counts - ranks[counts]


def bec_conditional_entropy(G, erased) -> int:
    """Bits of uncertainty left after observing the unerased coordinates."""
    if isinstance(G, TannerGraph):
        return BecEvaluator.from_graph(G).entropy(erased)
    return BecEvaluator.from_code(as_code(G)).entropy(erased)


# ---------------------------------------------------------------------------
# positional overlaps and check averages


def overlap_weights(graph: TannerGraph) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """(n, P) matrix ``W[u, z] = f_u / |F_z|`` for variables u at z, with ``f_u`` free sockets of u."""
    f = graph.free_per_variable().astype(float)
    P = graph.pattern.positions
    W = np.zeros((graph.n_variables, len(P)))
    for j, z in enumerate(P):
        fz = graph.free_count(z)
        if fz:
            at = graph.pattern.variables_at(z)
            W[at, j] = f[at] / fz
    return W, P


def positional_overlap(graph: TannerGraph, replicas: np.ndarray, z: int) -> float:
    """``Q_z = (1/|F_z|) sum_{s in F_z} sigma^(1)_s ... sigma^(r)_s`` for one replica tuple."""
    free = graph.free_sockets(z)
    if free.size == 0:
        raise ValueError(f"no free sockets at position {z}: overlap undefined")
    replicas = np.atleast_2d(replicas)
    t = np.prod(replicas.astype(np.int64), axis=0)
    return float(t[graph.pattern.socket_var[free]].mean())


def overlap_matrix(graph: TannerGraph, products: np.ndarray) -> np.ndarray:
    """Overlaps ``Q_z`` for each row of spin products; shape (rows, positions)."""
    W, _ = overlap_weights(graph)
    return np.asarray(products, dtype=float) @ W


def overlap_product_bracket(
    alpha: Sequence[int], graph: TannerGraph, h, r: int, method: str = "enumerate", cap_bits: int = CODEWORD_CAP_BITS
) -> float:
    """``< prod_j Q_{alpha_j} >`` under the r-fold product Gibbs measure."""
    _need_free(alpha, graph)
    state = GibbsState.build(graph, h, cap_bits)
    cols = [graph.pattern.position_index(int(z)) for z in alpha]
    if method == "convolve":
        law = state.product_law(r)
        Q = overlap_matrix(graph, state.spins)
        return float(law @ np.prod(Q[:, cols], axis=1))
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    W, _ = overlap_weights(graph)
    total = 0.0
    for w, t in replica_tuples(state, r, cap_bits):
        Q = t.astype(float) @ W
        total += float(w @ np.prod(Q[:, cols], axis=1))
    return total


def _need_free(alpha, graph):
    for z in alpha:
        if graph.free_count(int(z)) == 0:
            raise ValueError(f"no free sockets at position {z}")


def _variable_tuple_weights(alpha, graph, with_replacement):
    """Variable tuples reachable by checks of type alpha, with socket-level multiplicities."""
    f = graph.free_per_variable()
    pools = []
    for z in alpha:
        at = graph.pattern.variables_at(int(z))
        pools.append(at[f[at] > 0])
    tuples = np.array(list(itertools.product(*pools)), dtype=np.int64).reshape(-1, len(alpha))
    weights = np.ones(tuples.shape[0], dtype=float)
    for i, vt in enumerate(tuples):
        wgt = 1
        for u, c in zip(*np.unique(vt, return_counts=True)):
            wgt *= int(f[u]) ** int(c) if with_replacement else math.perm(int(f[u]), int(c))
        weights[i] = wgt
    return tuples, weights


def check_average_bracket(
    alpha: Sequence[int], graph: TannerGraph, h, r: int, with_replacement: bool = False
) -> float:
    """Exact average of ``<sigma_a>^r`` over B_alpha (or B'_alpha)."""
    _need_free(alpha, graph)
    state = GibbsState.build(graph, h)
    tuples, weights = _variable_tuple_weights(alpha, graph, with_replacement)
    if weights.sum() == 0:
        raise ValueError("no compatible check: B_alpha is empty")
    sp = state.spins.astype(np.int64)
    vals = np.empty(tuples.shape[0])
    for lo in range(0, tuples.shape[0], 4096):
        blk = tuples[lo : lo + 4096]
        prods = np.prod(sp[:, blk], axis=2)
        vals[lo : lo + 4096] = (state.probs @ prods) ** r
    return float(math.fsum(weights * vals) / math.fsum(weights))


def replica_bracket_over_nu(
    alpha: Sequence[int], graph: TannerGraph, h, r: int, mode: str = "exact", samples: int = 1000, rng=None
) -> float:
    """``E_{a ~ nu(alpha, G)} <sigma_a^(1) ... sigma_a^(r)>``, exactly or by sampling ``a``."""
    if mode == "exact":
        return check_average_bracket(alpha, graph, h, r, with_replacement=False)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = as_rng(rng)
    state = GibbsState.build(graph, h)
    var = graph.pattern.socket_var
    vals = [state.bracket(var[sample_check(alpha, graph, rng)]) ** r for _ in range(samples)]
    return float(np.mean(vals))


@dataclass
class CheckAverageBounds:
    """Both one-sided bounds relating the B_alpha and B'_alpha averages."""

    avg_distinct: float
    avg_replacement: float
    m: int
    K: int
    n_distinct: int
    n_replacement: int

    @property
    def collision_count(self) -> int:
        return self.n_replacement - self.n_distinct

    @property
    def collision_bound(self) -> float:
        return self.K**2 * self.n_replacement / self.m

    @property
    def upper(self) -> float:
        return self.m / (self.m - self.K**2) * self.avg_replacement + self.K**2 / (self.m - self.K**2)

    @property
    def lower(self) -> float:
        return self.avg_replacement - self.K**2 / (self.m - self.K**2)

    @property
    def holds(self) -> bool:
        return (
            self.lower <= self.avg_distinct <= self.upper
            and self.collision_count <= self.collision_bound
        )


def check_average_bounds(alpha: Sequence[int], graph: TannerGraph, h, r: int) -> CheckAverageBounds:
    from .ensembles import count_checks

    K = len(alpha)
    m = int(min(graph.free_count(int(z)) for z in alpha))
    if m <= K * K:
        raise ValueError(f"need m > K^2 free sockets per named position, have m={m}")
    nb, nbp = count_checks(alpha, graph)
    return CheckAverageBounds(
        avg_distinct=check_average_bracket(alpha, graph, h, r, with_replacement=False),
        avg_replacement=check_average_bracket(alpha, graph, h, r, with_replacement=True),
        m=m,
        K=K,
        n_distinct=nb,
        n_replacement=nbp,
    )


# ---------------------------------------------------------------------------
# type averages of overlap products


def jensen_forms(Q: np.ndarray, K: int, w: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collapsed conn, coup (closed chain) and disc forms for overlap rows ``Q`` of shape (..., L).

    For even K these are ordered conn <= coup <= disc pointwise.
    """
    Q = np.asarray(Q, dtype=float)
    L = Q.shape[-1]
    conn = Q.mean(axis=-1) ** K
    rolled = np.stack([np.roll(Q, -j, axis=-1) for j in range(w)], axis=0).mean(axis=0)
    coup = (rolled**K).mean(axis=-1)
    disc = (Q**K).mean(axis=-1)
    return conn, coup, disc


def type_distribution(kind: str, L: int, w: int, K: int, topology: str = "closed"):
    """Exact law of a random type: iterator of (type tuple, probability) with positive mass."""
    law = {}
    if kind == "conn":
        for a in itertools.product(range(1, L + 1), repeat=K):
            law[a] = L ** (-K)
    elif kind == "disc":
        for z in range(1, L + 1):
            law[(z,) * K] = 1.0 / L
    elif kind == "coup":
        starts = window_starts(L, w, topology)
        for s in starts:
            win = window_positions(int(s), w, L, topology)
            for a in itertools.product(win, repeat=K):
                law[a] = law.get(a, 0.0) + 1.0 / (len(starts) * w**K)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return law


def type_average_overlap(kind: str, graph: TannerGraph, h, r: int, w: int, K: int, how: str = "collapsed") -> float:
    """``E_{alpha ~ kind} < Q_{alpha_1} ... Q_{alpha_K} >`` on a closed chain over positions 1..L.

    ``how="expanded"`` sums over every type with its probability;
    ``how="collapsed"`` uses the closed forms in the single overlap vector.
    """
    L = graph.pattern.L
    state = GibbsState.build(graph, h)
    law = state.product_law(r)
    Q = overlap_matrix(graph, state.spins)[:, [graph.pattern.position_index(z) for z in range(1, L + 1)]]
    if how == "collapsed":
        conn, coup, disc = jensen_forms(Q, K, w)
        return float(law @ {"conn": conn, "coup": coup, "disc": disc}[kind])
    if how != "expanded":
        raise ValueError(f"unknown how {how!r}")
    total = np.zeros(Q.shape[0])
    for a, p in type_distribution(kind, L, w, K).items():
        total += p * np.prod(Q[:, [z - 1 for z in a]], axis=1)
    return float(law @ total)
