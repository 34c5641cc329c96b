"""Link-level simulator and optimization lab for reflecting-surface downlinks."""

from . import allocation, beamforming, channel, harness, modulation, numerics, rng

__all__ = [
    "allocation",
    "beamforming",
    "channel",
    "harness",
    "modulation",
    "numerics",
    "rng",
]
__version__ = "0.1.0"
