"""Binary-input memoryless symmetric channels in HLLR form.

Transmission is always of the all-+1 word, so a channel is fully described by
the law of the half-log-likelihood ratio ``h = 1/2 ln p(y|+1)/p(y|-1)`` under
input +1. Known bits (BEC non-erasures, pinned ghost variables) carry
``h = +inf``; erasures carry ``h = 0``.
"""

from __future__ import annotations

import ast
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

ENUMERATION_CAP = 2**24


class ChannelError(ValueError):
    pass


def h2(p: float) -> float:
    """Binary entropy in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def h2_inverse(eps: float) -> float:
    """The crossover probability in [0, 1/2] with ``h2(p) = eps``."""
    if not 0.0 <= eps <= 1.0:
        raise ChannelError(f"entropy {eps} outside [0, 1]")
    if eps == 0.0:
        return 0.0
    if eps == 1.0:
        return 0.5
    return optimize.brentq(lambda p: h2(p) - eps, 0.0, 0.5, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _half_llr(p_plus: float, p_minus: float) -> float:
    if p_minus == 0.0:
        return math.inf
    if p_plus == 0.0:
        return -math.inf
    return 0.5 * math.log(p_plus / p_minus)


@dataclass(frozen=True)
class BmsChannel:
    """A BMS channel.

    ``family`` is ``"bec"`` (``parameter`` = erasure probability), ``"bsc"``
    (crossover probability), ``"table"`` (a symmetric discrete channel given
    by ``outputs = ((y, p(y|+1)), ...)`` with ``p(y|-1) = p(-y|+1)``) or
    ``"biawgn"`` (noise standard deviation; sampling only).
    """

    family: str
    parameter: Optional[float] = None
    outputs: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.family == "bec":
            if not 0.0 <= self.parameter <= 1.0:
                raise ChannelError("BEC erasure probability must lie in [0, 1]")
            outs = ((1.0, 1.0 - self.parameter), (0.0, self.parameter), (-1.0, 0.0))
        elif self.family == "bsc":
            if not 0.0 <= self.parameter <= 1.0:
                raise ChannelError("BSC crossover probability must lie in [0, 1]")
            outs = ((1.0, 1.0 - self.parameter), (-1.0, self.parameter))
        elif self.family == "table":
            outs = tuple((float(y), float(p)) for y, p in self.outputs)
            ys = {y for y, _ in outs}
            if len(ys) != len(outs):
                raise ChannelError("duplicate output symbol")
            if any(-y not in ys for y in ys):
                raise ChannelError("output alphabet must be closed under y -> -y")
            if any(p < 0 for _, p in outs) or abs(math.fsum(p for _, p in outs) - 1) > 1e-12:
                raise ChannelError("output probabilities must be a distribution")
        elif self.family == "biawgn":
            if self.parameter is None or self.parameter <= 0:
                raise ChannelError("BIAWGN needs a positive noise deviation")
            outs = ()
        else:
            raise ChannelError(f"unknown channel family {self.family!r}")
        object.__setattr__(self, "outputs", outs)

    # -- output alphabet --------------------------------------------------

    @property
    def is_discrete(self) -> bool:
        return self.family != "biawgn"

    def likelihood(self, y: float, x: int) -> float:
        table = dict(self.outputs)
        if y not in table:
            raise ChannelError(f"output {y!r} not in the channel alphabet")
        return table[y] if x > 0 else table[-y]

    def hllr_law(self) -> Tuple[np.ndarray, np.ndarray]:
        """Distinct HLLR values with positive probability under input +1, and their probabilities."""
        self._need_discrete()
        law = {}
        for y, p in self.outputs:
            if p > 0:
                h = _half_llr(p, dict(self.outputs)[-y])
                law[h] = law.get(h, 0.0) + p
        hs = np.array(sorted(law), dtype=float)
        return hs, np.array([law[h] for h in hs])

    def _need_discrete(self):
        if not self.is_discrete:
            raise ChannelError(f"{self.family} has no finite output alphabet")

    @property
    def entropy(self) -> float:
        """Bit entropy ``H(X|Y)`` for a uniform input, the channel's ordering parameter."""
        if self.family == "bec":
            return float(self.parameter)
        if self.family == "bsc":
            return h2(self.parameter)
        if self.family == "biawgn":
            s = self.parameter
            f = lambda h: _log2_1p_exp(-2 * h) * _normal_pdf(h, 1 / s**2, 1 / s)
            mu = 1 / s**2
            return integrate.quad(f, mu - 40 / s, mu + 40 / s, limit=200)[0]
        hs, ps = self.hllr_law()
        return math.fsum(p * _log2_1p_exp(-2 * h) for h, p in zip(hs, ps))

    @property
    def mean_hllr(self) -> float:
        """``E[h]`` under input +1 (infinite for the BEC unless it is useless)."""
        if self.family == "biawgn":
            return 1 / self.parameter**2
        hs, ps = self.hllr_law()
        return math.fsum(p * h for h, p in zip(hs, ps))

    def symmetry_defect(self) -> float:
        """max |p(h) - p(-h) e^{2h}| over the finite part of the HLLR support."""
        hs, ps = self.hllr_law()
        law = dict(zip(hs.tolist(), ps.tolist()))
        worst = 0.0
        for h, p in law.items():
            if math.isfinite(h):
                worst = max(worst, abs(p - law.get(-h, 0.0) * math.exp(2 * h)))
        return worst

    def __str__(self):
        if self.family == "table":
            return "table:" + repr(list(self.outputs))
        return f"{self.family}:{self.parameter!r}"


def _log2_1p_exp(x: float) -> float:
    if x == -math.inf:
        return 0.0
    if x > 30:
        return (x + math.log1p(math.exp(-x))) / math.log(2)
    return math.log1p(math.exp(x)) / math.log(2)


def _normal_pdf(x, mu, s):
    return math.exp(-0.5 * ((x - mu) / s) ** 2) / (s * math.sqrt(2 * math.pi))


def bec(eps: float) -> BmsChannel:
    return BmsChannel("bec", eps)


def bsc(p: float) -> BmsChannel:
    return BmsChannel("bsc", p)


def channel_from_entropy(family: str, eps: float) -> BmsChannel:
    """Member of a family with bit entropy ``eps``."""
    if not 0.0 <= eps <= 1.0:
        raise ChannelError(f"entropy {eps} outside [0, 1]")
    if family == "bec":
        return bec(eps)
    if family == "bsc":
        return bsc(h2_inverse(eps))
    raise ChannelError(f"no entropy parameterization for {family!r}")


def parse_channel(text: str) -> BmsChannel:
    """Parse ``bec:0.45``, ``bsc:0.11``, ``bsc-entropy:0.5``, ``biawgn:0.9`` or ``table:[(y,p),...]``."""
    family, sep, arg = text.strip().partition(":")
    if not sep:
        raise ChannelError(f"channel spec {text!r} lacks ':'")
    family = family.strip().lower()
    try:
        if family == "table":
            pairs = ast.literal_eval(arg.strip())
            return BmsChannel("table", outputs=tuple((float(y), float(p)) for y, p in pairs))
        value = float(arg)
    except (ValueError, SyntaxError, TypeError) as exc:
        raise ChannelError(f"bad channel argument in {text!r}: {exc}") from None
    if family.endswith("-entropy"):
        return channel_from_entropy(family[: -len("-entropy")], value)
    return BmsChannel(family, value)


def hllr_of_output(channel: BmsChannel, y: float) -> float:
    return _half_llr(channel.likelihood(y, +1), channel.likelihood(y, -1))


def sample_hllr_vector(channel: BmsChannel, n_or_pattern, rng=None) -> np.ndarray:
    """i.i.d. HLLRs given all-+1 input; pinned (ghost) variables get ``+inf``."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if isinstance(n_or_pattern, (int, np.integer)):
        n, pinned = int(n_or_pattern), None
    else:
        n, pinned = n_or_pattern.n_variables, n_or_pattern.pinned
    if channel.family == "biawgn":
        s = channel.parameter
        h = (1.0 + s * rng.standard_normal(n)) / s**2
    else:
        hs, ps = channel.hllr_law()
        h = hs[np.minimum(np.searchsorted(np.cumsum(ps), rng.random(n), side="right"), len(hs) - 1)]
    if pinned is not None:
        h = np.where(pinned, np.inf, h)
    return h


def enumerate_outputs(channel: BmsChannel, n: int, cap: int = ENUMERATION_CAP) -> Iterator[Tuple[np.ndarray, float]]:
    """Every HLLR vector of length ``n`` with positive probability, with that probability."""
    hs, ps = _output_symbols(channel)
    if len(hs) ** n > cap:
        raise ChannelError(f"{len(hs)}^{n} outputs exceed cap {cap}")
    for idx in itertools.product(range(len(hs)), repeat=n):
        idx = np.array(idx, dtype=np.int64)
        yield hs[idx], float(np.prod(ps[idx]))


def output_table(channel: BmsChannel, n: int, cap: int = ENUMERATION_CAP) -> Tuple[np.ndarray, np.ndarray]:
    """All outputs at once: an (A^n, n) HLLR matrix and the matching probability vector."""
    hs, ps = _output_symbols(channel)
    A = len(hs)
    if A**n > cap:
        raise ChannelError(f"{A}^{n} outputs exceed cap {cap}")
    idx = np.indices((A,) * n).reshape(n, -1).T
    return hs[idx], np.prod(ps[idx], axis=1)


def _output_symbols(channel):
    channel._need_discrete()
    hs, ps = [], []
    table = dict(channel.outputs)
    for y, p in channel.outputs:
        if p > 0:
            hs.append(_half_llr(p, table[-y]))
            ps.append(p)
    return np.array(hs, dtype=float), np.array(ps, dtype=float)


def gauge_hllr(h: np.ndarray, tau_spins: Sequence[int]) -> np.ndarray:
    """``h_v -> h_v tau_v``: the HLLRs seen when codeword ``tau`` is sent instead of all-+1."""
    return np.asarray(h, dtype=float) * np.asarray(tau_spins, dtype=float)
