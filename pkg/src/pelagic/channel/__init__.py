"""Propagation, fading and radio-map primitives."""

from pelagic.channel.fading import (
    ergodic_rate,
    ergodic_rate_mc,
    invert_ergodic_rate,
    rician_power_gain,
)
from pelagic.channel.propagation import (
    ChannelParams,
    LinkBudget,
    gain_per_mw,
    horizon_excess,
    mean_snr,
    noise_power,
    path_loss,
    radio_horizon,
)
from pelagic.channel.radiomap import (
    RadioMap,
    empty_radiomap,
    radiomap_build,
    radiomap_lookup,
    radiomap_lookup_many,
    read_radiomap,
    read_samples_csv,
    synthetic_samples,
    write_radiomap,
)

__all__ = [
    "ChannelParams",
    "LinkBudget",
    "RadioMap",
    "empty_radiomap",
    "ergodic_rate",
    "ergodic_rate_mc",
    "gain_per_mw",
    "horizon_excess",
    "invert_ergodic_rate",
    "mean_snr",
    "noise_power",
    "path_loss",
    "radio_horizon",
    "radiomap_build",
    "radiomap_lookup",
    "radiomap_lookup_many",
    "read_radiomap",
    "read_samples_csv",
    "rician_power_gain",
    "synthetic_samples",
    "write_radiomap",
]
