"""Large-scale propagation: path loss, thermal noise, radio horizon and link budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from pelagic.channel.radiomap import RadioMap

THERMAL_FLOOR_DBM_HZ = -174.0
# 4.12 km per sqrt(metre) of antenna height, 4/3-earth refraction
HORIZON_M_PER_SQRT_M = 4120.0


@dataclass(frozen=True)
class ChannelParams:
    """Parameters of one link class.

    Defaults are the maritime air-ground model: 116.7 dB at 2.6 km plus
    15 dB per decade, Rician K = 10. Antenna gains default to the UAV and
    vessel terminals (8 dBi each).
    """

    ref_loss_db: float = 116.7
    ref_distance_m: float = 2600.0
    pl_exponent_coeff: float = 15.0
    rician_k: float = 10.0
    tx_gain_dbi: float = 8.0
    rx_gain_dbi: float = 8.0
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 5.0
    horizon_excess_db_per_km: float = 0.0

    def __post_init__(self):
        if not (self.ref_distance_m > 0 and math.isfinite(self.ref_distance_m)):
            raise ValueError(f"ref_distance_m must be positive, got {self.ref_distance_m}")
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")
        if not self.rician_k >= 0:
            raise ValueError(f"rician_k must be >= 0, got {self.rician_k}")
        if self.horizon_excess_db_per_km < 0:
            raise ValueError("horizon_excess_db_per_km must be >= 0")

    @property
    def gains_db(self) -> float:
        return self.tx_gain_dbi + self.rx_gain_dbi

    def with_(self, **changes) -> "ChannelParams":
        return replace(self, **changes)


def path_loss(d_m, params: ChannelParams = ChannelParams()):
    """Path loss in dB at distance `d_m` (scalar or array, metres).

    No clamping is applied below the reference distance.
    """
    d = np.asarray(d_m, dtype=float)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise ValueError("distance must be positive and finite")
    loss = params.ref_loss_db + params.pl_exponent_coeff * np.log10(d / params.ref_distance_m)
    return float(loss) if loss.ndim == 0 else loss


def noise_power(params: ChannelParams = ChannelParams()) -> float:
    """Receiver noise power in dBm: kTB floor plus noise figure."""
    return THERMAL_FLOOR_DBM_HZ + 10.0 * math.log10(params.bandwidth_hz) + params.noise_figure_db


def radio_horizon(h1_m, h2_m):
    """Line-of-sight ground distance (m) between antennas at heights h1, h2 (m)."""
    h1 = np.asarray(h1_m, dtype=float)
    h2 = np.asarray(h2_m, dtype=float)
    if np.any(h1 < 0) or np.any(h2 < 0):
        raise ValueError("antenna heights must be >= 0")
    out = HORIZON_M_PER_SQRT_M * (np.sqrt(h1) + np.sqrt(h2))
    return float(out) if out.ndim == 0 else out


def horizon_excess(h1_m, h2_m, ground_distance_m, params: ChannelParams = ChannelParams()):
    """Excess loss (dB) for the part of a link beyond the radio horizon.

    Zero inside the horizon, then ``horizon_excess_db_per_km`` per km of
    ground distance past it. Continuous at the horizon.
    """
    beyond_m = np.maximum(np.asarray(ground_distance_m, dtype=float) - radio_horizon(h1_m, h2_m), 0.0)
    out = params.horizon_excess_db_per_km * beyond_m / 1000.0
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LinkBudget:
    tx_power_dbm: float
    distance_m: float
    path_loss_db: float
    excess_loss_db: float
    noise_dbm: float
    rx_power_dbm: float
    mean_snr_linear: float

    @property
    def mean_snr_db(self) -> float:
        return 10.0 * math.log10(self.mean_snr_linear) if self.mean_snr_linear > 0 else -math.inf


def mean_snr(
    tx_power_dbm: float,
    d_m: Optional[float] = None,
    params: ChannelParams = ChannelParams(),
    radio_map: Optional["RadioMap"] = None,
    positions: Optional[tuple[Sequence[float], Sequence[float]]] = None,
) -> LinkBudget:
    """Assemble the large-scale budget of one link.

    Either give the distance directly, or give ``positions=(tx, rx)`` as 3-D
    points; the latter also enables the horizon penalty and the radio-map
    lookup, which is taken at the lower (ground-side) endpoint.
    """
    excess = 0.0
    if positions is not None:
        a = np.asarray(positions[0], dtype=float)
        b = np.asarray(positions[1], dtype=float)
        if d_m is None:
            d_m = float(np.linalg.norm(a - b))
        ground = float(np.linalg.norm(a[:2] - b[:2]))
        excess += horizon_excess(a[2], b[2], ground, params)
        if radio_map is not None:
            low = a if a[2] <= b[2] else b
            excess += radio_map.lookup(low[:2])
    elif radio_map is not None:
        raise ValueError("radio-map lookup needs endpoint positions")
    if d_m is None:
        raise ValueError("either d_m or positions is required")

    loss = path_loss(d_m, params)
    noise = noise_power(params)
    rx = tx_power_dbm + params.gains_db - loss - excess
    snr = 10.0 ** ((rx - noise) / 10.0)
    return LinkBudget(
        tx_power_dbm=tx_power_dbm,
        distance_m=float(d_m),
        path_loss_db=loss,
        excess_loss_db=excess,
        noise_dbm=noise,
        rx_power_dbm=rx,
        mean_snr_linear=float(snr),
    )


def gain_per_mw(d_m, params: ChannelParams, excess_db=0.0):
    """Mean SNR delivered per milliwatt of transmit power (vectorized)."""
    exponent = (params.gains_db - path_loss(d_m, params) - excess_db - noise_power(params)) / 10.0
    return 10.0 ** exponent
