import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from pelagic.channel import (
    ChannelParams,
    ergodic_rate,
    ergodic_rate_mc,
    horizon_excess,
    invert_ergodic_rate,
    mean_snr,
    noise_power,
    path_loss,
    radio_horizon,
    rician_power_gain,
)


def quad_rate(snr, k):
    """E[log2(1 + snr X)] with X * 2(K+1) ~ noncentral chi2(2, 2K), by adaptive quadrature."""
    if k == 0:
        f = lambda x: math.log2(1 + snr * x) * math.exp(-x)
        return integrate.quad(f, 0, np.inf, limit=400)[0]
    dist = stats.ncx2(df=2, nc=2 * k, scale=1 / (2 * (k + 1)))
    lo, hi = dist.ppf(1e-16), dist.ppf(1 - 1e-16)
    f = lambda x: math.log2(1 + snr * x) * dist.pdf(x)
    return integrate.quad(f, 0, hi, points=[lo, dist.mean()], limit=400)[0]


def mc_rate(snr, k, draws=1_000_000, seed=123):
    rng = np.random.default_rng(seed)
    h = (rng.standard_normal(draws) + 1j * rng.standard_normal(draws)) / math.sqrt(2)
    g = np.abs(math.sqrt(k / (k + 1)) + h / math.sqrt(k + 1)) ** 2
    return float(np.mean(np.log2(1 + snr * g)))


# -- path loss -----------------------------------------------------------------

def test_path_loss_reference_and_decades():
    assert path_loss(2600.0) == 116.7
    assert path_loss(26000.0) == pytest.approx(131.7, abs=1e-9)
    assert path_loss(260000.0) == pytest.approx(146.7, abs=1e-9)


def test_path_loss_below_reference_is_not_clamped():
    assert path_loss(260.0) == pytest.approx(101.7, abs=1e-9)


@pytest.mark.parametrize("d", [0.0, -1.0, math.inf, math.nan])
def test_path_loss_rejects_bad_distance(d):
    with pytest.raises(ValueError):
        path_loss(d)


@given(st.floats(1.0, 1e7))
def test_path_loss_adds_coefficient_per_decade(d):
    assert path_loss(10 * d) - path_loss(d) == pytest.approx(15.0, abs=1e-9)


@given(st.floats(1.0, 1e6), st.floats(1.0, 1e6))
def test_path_loss_monotone(a, b):
    if a < b:
        assert path_loss(a) < path_loss(b)


def test_path_loss_vectorized():
    d = np.array([2600.0, 26000.0])
    assert np.allclose(path_loss(d), [116.7, 131.7])


# -- noise and budgets -------------------------------------------------------------

@pytest.mark.parametrize("b, nf, want", [(10e6, 5.0, -99.0), (1.0, 0.0, -174.0), (1e6, 0.0, -114.0)])
def test_noise_power(b, nf, want):
    assert noise_power(ChannelParams(bandwidth_hz=b, noise_figure_db=nf)) == pytest.approx(want, abs=1e-12)


def test_link_budget_reference_distance():
    lb = mean_snr(40.0, 2600.0, ChannelParams())
    assert lb.rx_power_dbm == pytest.approx(-60.7, abs=1e-9)
    assert lb.mean_snr_db == pytest.approx(38.3, abs=1e-9)
    assert lb.rx_power_dbm == pytest.approx(lb.tx_power_dbm + 16 - lb.path_loss_db - lb.excess_loss_db)


def test_link_budget_shore_point():
    lb = mean_snr(40.0, 50e3, ChannelParams(tx_gain_dbi=12.0))
    # 40 + 20 - (116.7 + 15 log10(50000/2600)) = -75.95
    assert lb.rx_power_dbm == pytest.approx(-75.95, abs=0.01)
    assert lb.mean_snr_db == pytest.approx(23.0, abs=0.1)


def test_link_budget_zero_power():
    assert mean_snr(-math.inf, 1000.0).mean_snr_linear == 0.0


def test_link_budget_validation():
    with pytest.raises(ValueError):
        mean_snr(40.0, None)
    with pytest.raises(ValueError):
        mean_snr(40.0, -5.0)


# -- radio horizon -----------------------------------------------------------------

def test_radio_horizon_value():
    assert radio_horizon(100.0, 10.0) == pytest.approx(4120 * (10 + math.sqrt(10)))
    assert radio_horizon(100.0, 10.0) == pytest.approx(54.2e3, rel=2e-3)


def test_horizon_excess_examples():
    p = ChannelParams(horizon_excess_db_per_km=2.0)
    h = radio_horizon(100.0, 10.0)
    assert horizon_excess(100, 10, 50e3, p) == 0.0
    assert horizon_excess(100, 10, h, p) == 0.0
    assert horizon_excess(100, 10, h + 10e3, p) == pytest.approx(20.0)
    assert horizon_excess(100, 10, 1e9, ChannelParams()) == 0.0


@given(st.floats(0, 500), st.floats(0, 500), st.floats(0, 2e5))
def test_horizon_excess_continuous_and_nonnegative(h1, h2, d):
    p = ChannelParams(horizon_excess_db_per_km=2.0)
    a = horizon_excess(h1, h2, d, p)
    b = horizon_excess(h1, h2, d + 1e-3, p)
    assert a >= 0 and 0 <= b - a <= 2e-6 + 1e-12


def test_radio_horizon_rejects_negative_height():
    with pytest.raises(ValueError):
        radio_horizon(-1.0, 10.0)


def test_mean_snr_positions_apply_horizon():
    p = ChannelParams(tx_gain_dbi=12.0, horizon_excess_db_per_km=2.0)
    h = radio_horizon(100.0, 10.0)
    far = mean_snr(40.0, params=p, positions=((0, 0, 100), (h + 10e3, 0, 10)))
    assert far.excess_loss_db == pytest.approx(20.0)


# -- ergodic rate ------------------------------------------------------------------

def test_ergodic_rate_zero_snr():
    assert ergodic_rate(0.0, 10.0) == 0.0


def test_ergodic_rate_no_fading_limit():
    assert ergodic_rate(100.0, math.inf) == pytest.approx(math.log2(101))
    assert ergodic_rate(100.0, 1e6) == pytest.approx(math.log2(101), abs=1e-4)


@pytest.mark.parametrize("k", [0.0, 1.0, 10.0, 100.0])
@pytest.mark.parametrize("snr", [1e-3, 0.1, 1.0, 10.0, 100.0, 1e3, 1e6])
def test_ergodic_rate_matches_adaptive_quadrature(snr, k):
    assert abs(ergodic_rate(snr, k) - quad_rate(snr, k)) <= 1e-4


def test_ergodic_rate_at_100_matches_monte_carlo():
    assert ergodic_rate(100.0, 10.0) == pytest.approx(mc_rate(100.0, 10.0), abs=5e-3)


def test_ergodic_rate_vectorized():
    snr = np.array([[1.0, 10.0], [100.0, 1000.0]])
    out = ergodic_rate(snr, 10.0)
    assert out.shape == (2, 2)
    assert out[1, 0] == pytest.approx(ergodic_rate(100.0, 10.0), rel=1e-14)


def test_ergodic_rate_rejects_negative():
    with pytest.raises(ValueError):
        ergodic_rate(-1.0, 10.0)
    with pytest.raises(ValueError):
        ergodic_rate(1.0, -1.0)


@pytest.mark.parametrize("k", [0.0, 1.0, 10.0])
def test_ergodic_rate_strictly_increasing(k):
    snr = np.logspace(-3, 6, 100)
    assert np.all(np.diff(ergodic_rate(snr, k)) > 0)


@given(st.floats(1e-6, 1e8), st.floats(0.0, 200.0))
def test_jensen_bound(snr, k):
    assert ergodic_rate(snr, k) <= math.log2(1 + snr) + 1e-12


def test_jensen_gap_shrinks_with_k():
    gaps = [math.log2(101) - ergodic_rate(100.0, k) for k in (0.0, 1.0, 10.0, 100.0, 1e4)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_shore_point_rate_is_below_its_jensen_bound():
    # the 50 km shore link at 23.04 dB: the K=10 ergodic rate is ~7.52, while
    # 7.66 bps/Hz is log2(1 + SNR), the no-fading bound
    snr = mean_snr(40.0, 50e3, ChannelParams(tx_gain_dbi=12.0)).mean_snr_linear
    assert ergodic_rate(snr, 10.0) == pytest.approx(mc_rate(snr, 10.0), abs=5e-3)
    assert math.log2(1 + snr) == pytest.approx(7.66, abs=0.01)
    assert ergodic_rate(snr, 10.0) < 7.66


# -- inversion ---------------------------------------------------------------------

def test_invert_examples():
    assert invert_ergodic_rate(0.0, 10.0) == 0.0
    assert invert_ergodic_rate(math.log2(101), math.inf) == pytest.approx(100.0)
    r = ergodic_rate(50.0, 10.0)
    assert invert_ergodic_rate(r, 10.0) == pytest.approx(50.0, rel=1e-6)


@given(st.floats(1e-4, 60.0), st.sampled_from([0.0, 1.0, 10.0, math.inf]))
def test_invert_round_trip(r, k):
    assert abs(ergodic_rate(invert_ergodic_rate(r, k), k) - r) <= 1e-6


def test_invert_overflow_and_domain():
    with pytest.raises(OverflowError):
        invert_ergodic_rate(2000.0, 10.0)
    with pytest.raises(OverflowError):
        invert_ergodic_rate(2000.0, math.inf)
    with pytest.raises(ValueError):
        invert_ergodic_rate(-0.5, 10.0)


# -- fading sampler ----------------------------------------------------------------

@pytest.mark.parametrize("k", [0.0, 1.0, 10.0])
def test_rician_gain_unit_mean(k):
    g = rician_power_gain(np.random.default_rng(7), k, 1_000_000)
    assert abs(g.mean() - 1.0) < 1e-3 * 3  # three standard errors at K=0


def test_rician_gain_unit_mean_tight():
    g = rician_power_gain(np.random.default_rng(0), 10.0, 1_000_000)
    assert abs(g.mean() - 1.0) < 1e-3


def test_rician_gain_distribution_matches_ncx2():
    k = 4.0
    g = rician_power_gain(np.random.default_rng(1), k, 200_000)
    ref = stats.ncx2(df=2, nc=2 * k, scale=1 / (2 * (k + 1)))
    assert stats.kstest(g, ref.cdf).pvalue > 1e-3


def test_package_mc_agrees_with_quadrature():
    assert ergodic_rate_mc(10.0, 1.0, draws=400_000, seed=3) == pytest.approx(ergodic_rate(10.0, 1.0), abs=5e-3)
