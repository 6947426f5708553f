import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sclab.channels import (
    BmsChannel,
    ChannelError,
    bec,
    bsc,
    channel_from_entropy,
    enumerate_outputs,
    gauge_hllr,
    h2,
    hllr_of_output,
    output_table,
    parse_channel,
    sample_hllr_vector,
)
from sclab.ensembles import DegreeDistribution, sample_configuration_pattern


def test_hllr_of_output():
    assert hllr_of_output(bsc(0.1), 1.0) == pytest.approx(0.5 * math.log(9), abs=1e-15)
    assert hllr_of_output(bec(0.3), 0.0) == 0.0
    assert hllr_of_output(bec(0.3), 1.0) == math.inf
    with pytest.raises(ChannelError):
        hllr_of_output(bsc(0.1), 0.0)


def test_sample_frequencies():
    rng = np.random.default_rng(0)
    n = 10**6
    h = sample_hllr_vector(bec(0.3), n, rng)
    assert abs((h == 0).mean() - 0.3) < 3 * math.sqrt(0.3 * 0.7 / n)
    assert np.all((h == 0) | (h == math.inf))
    h = sample_hllr_vector(bsc(0.1), n, rng)
    assert abs((h < 0).mean() - 0.1) < 3 * math.sqrt(0.1 * 0.9 / n)
    assert np.all(sample_hllr_vector(bec(1.0), 1000, rng) == 0)


def test_pinned_variables_get_infinity():
    p = sample_configuration_pattern(4, 3, DegreeDistribution.regular(3), rng=0, ghost_width=1)
    h = sample_hllr_vector(bsc(0.2), p, np.random.default_rng(1))
    assert np.all(h[p.ghost] == math.inf)
    assert np.all(np.isfinite(h[~p.ghost]))


def test_channel_from_entropy():
    assert channel_from_entropy("bec", 0.5).parameter == 0.5
    assert channel_from_entropy("bsc", 1.0).parameter == pytest.approx(0.5, abs=1e-12)
    # h2(0.10) = 0.46900 and h2(0.11) = 0.49992, so entropy 0.4690 inverts to p = 0.10
    ch = channel_from_entropy("bsc", 0.4690)
    assert ch.parameter == pytest.approx(0.1, abs=1e-5)
    assert h2(0.11) == pytest.approx(0.5, abs=1e-3)
    with pytest.raises(ChannelError):
        channel_from_entropy("bsc", 1.5)


@given(st.floats(0.0, 1.0))
def test_entropy_roundtrip(eps):
    assert channel_from_entropy("bsc", eps).entropy == pytest.approx(eps, abs=1e-10)


def test_enumerate_outputs():
    outs = list(enumerate_outputs(bsc(0.1), 1))
    assert sorted(p for _, p in outs) == pytest.approx([0.1, 0.9])
    H, P = output_table(bsc(0.1), 10)
    assert H.shape == (1024, 10) and math.fsum(P) == pytest.approx(1.0, abs=1e-12)
    probs = sorted(p for _, p in enumerate_outputs(bec(0.3), 2))
    assert probs == pytest.approx(sorted([0.49, 0.21, 0.21, 0.09]))
    with pytest.raises(ChannelError):
        output_table(bsc(0.1), 30)


@pytest.mark.parametrize(
    "ch",
    [bsc(0.1), bsc(0.37), bec(0.45), BmsChannel("table", outputs=((2.0, 0.6), (1.0, 0.2), (-1.0, 0.1), (-2.0, 0.1)))],
)
def test_symmetry_and_mean(ch):
    hs, ps = ch.hllr_law()
    finite = np.isfinite(hs)
    for h, p in zip(hs[finite], ps[finite]):
        q = ps[np.isclose(hs, -h, rtol=0, atol=1e-12)]
        q = q[0] if q.size else 0.0
        assert p == pytest.approx(q * math.exp(2 * h), abs=1e-12)
    assert ch.mean_hllr >= 0


def test_table_entropy_matches_bsc():
    t = BmsChannel("table", outputs=((1.0, 0.9), (-1.0, 0.1)))
    assert t.entropy == pytest.approx(h2(0.1), abs=1e-14)


def test_parse_channel():
    assert parse_channel("bec:0.45") == bec(0.45)
    assert parse_channel("bsc:0.11") == bsc(0.11)
    assert parse_channel("bsc-entropy:0.5").entropy == pytest.approx(0.5, abs=1e-12)
    assert parse_channel("table:[(1, 0.8), (-1, 0.2)]").entropy == pytest.approx(h2(0.2))
    for bad in ("bec", "bec:x", "foo:0.1", "bec:1.5", "table:[(1, 0.5)]"):
        with pytest.raises(ChannelError):
            parse_channel(bad)


def test_gauge():
    h = np.array([0.5, -1.0, 2.0])
    tau = np.array([1, -1, -1])
    assert gauge_hllr(h, tau).tolist() == [0.5, 1.0, -2.0]
    assert gauge_hllr(gauge_hllr(h, tau), tau).tolist() == h.tolist()
