"""Rician small-scale fading and the ergodic rate it induces.

The power gain is normalized to unit mean, so the large-scale budget alone
sets the mean SNR. Expectations over fading are computed with a fixed
composite Gauss-Legendre rule on the Rician amplitude density, written in
the scaled variable ``u = sqrt(K + 1) * r``::

    f(u) du = 2 u exp(-(u - sqrt(K))**2) i0e(2 u sqrt(K)) du,   X = u**2 / (K + 1)

which keeps the integrand bounded for any K. Panels are uniform around the
peak and geometrically graded towards ``u = 0`` when the support reaches
it, which resolves ``log(1 + snr X)`` for very large SNR.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import i0e

_PANEL_WIDTH = 1.0
_TAIL = 8.5  # exp(-72) of the Gaussian envelope is left out
_NODES_PER_PANEL = 10
_GRADED_LEVELS = 24
_SNR_CEILING = 1e300


def _check_k(rician_k: float) -> float:
    k = float(rician_k)
    if math.isnan(k) or k < 0:
        raise ValueError(f"rician_k must be >= 0, got {rician_k}")
    return k


@lru_cache(maxsize=64)
def _quadrature(rician_k: float) -> tuple[np.ndarray, np.ndarray]:
    """Fixed nodes (power gains) and weights (density * weight) for one K."""
    sk = math.sqrt(rician_k)
    lo = max(0.0, sk - _TAIL)
    hi = sk + _TAIL
    panels = int(math.ceil((hi - lo) / _PANEL_WIDTH))
    breaks = list(np.linspace(lo, hi, panels + 1))
    if lo == 0.0:
        first = breaks[1]
        graded = [first * 2.0**-k for k in range(_GRADED_LEVELS, 0, -1)]
        breaks = [0.0] + graded + breaks[1:]
    breaks = np.asarray(breaks)

    x, w = np.polynomial.legendre.leggauss(_NODES_PER_PANEL)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    u = ((a + b) / 2 + (b - a) / 2 * x).ravel()
    weights = ((b - a) / 2 * w).ravel()
    density = 2.0 * u * np.exp(-((u - sk) ** 2)) * i0e(2.0 * u * sk)
    wf = weights * density
    wf /= wf.sum()
    gains = u**2 / (rician_k + 1.0)
    gains.setflags(write=False)
    wf.setflags(write=False)
    return gains, wf


def ergodic_rate(mean_snr_linear, rician_k: float = 10.0):
    """E[log2(1 + snr * X)] in bps/Hz for unit-mean Rician power gain X.

    Accepts a scalar or an array of mean SNRs. ``rician_k = inf`` gives the
    non-fading value ``log2(1 + snr)``.
    """
    k = _check_k(rician_k)
    snr = np.asarray(mean_snr_linear, dtype=float)
    if np.any(np.isnan(snr)) or np.any(snr < 0):
        raise ValueError("mean_snr_linear must be >= 0")
    if math.isinf(k):
        out = np.log1p(snr) / math.log(2.0)
    else:
        gains, wf = _quadrature(k)
        out = np.log1p(snr[..., None] * gains) @ wf / math.log(2.0)
    return float(out) if out.ndim == 0 else out


def invert_ergodic_rate(target_rate: float, rician_k: float = 10.0, rtol: float = 1e-8) -> float:
    """Mean SNR whose ergodic rate equals `target_rate`, by bisection.

    Raises OverflowError if the target lies beyond representable SNRs.
    """
    r = float(target_rate)
    if math.isnan(r) or r < 0:
        raise ValueError(f"target_rate must be >= 0, got {target_rate}")
    if r == 0.0:
        return 0.0
    k = _check_k(rician_k)
    if math.isinf(k):
        s = math.expm1(r * math.log(2.0)) if r < 1000 else math.inf
        if not s <= _SNR_CEILING:
            raise OverflowError(f"rate {r} bps/Hz is beyond the numeric range")
        return s

    lo, hi = 0.0, 1.0
    while ergodic_rate(hi, k) < r:
        lo = hi
        hi *= 2.0
        if hi > _SNR_CEILING:
            raise OverflowError(f"rate {r} bps/Hz is beyond the numeric range")
    if lo == 0.0:
        while hi > 1e-300 and ergodic_rate(hi / 2.0, k) >= r:
            hi /= 2.0
        lo = hi / 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ergodic_rate(mid, k) < r:
            lo = mid
        else:
            hi = mid
    return hi


def rician_power_gain(rng: np.random.Generator, rician_k: float, size) -> np.ndarray:
    """Draw unit-mean Rician power gains |h|^2."""
    k = _check_k(rician_k)
    if math.isinf(k):
        return np.ones(size)
    los = math.sqrt(k / (k + 1.0))
    scatter = math.sqrt(1.0 / (2.0 * (k + 1.0)))
    re = los + scatter * rng.standard_normal(size)
    im = scatter * rng.standard_normal(size)
    return re * re + im * im


def ergodic_rate_mc(mean_snr_linear: float, rician_k: float, draws: int = 1_000_000, seed: int = 0) -> float:
    """Monte Carlo estimate of the ergodic rate; a cross-check, not used for planning."""
    gains = rician_power_gain(np.random.default_rng(seed), rician_k, draws)
    return float(np.mean(np.log2(1.0 + mean_snr_linear * gains)))
