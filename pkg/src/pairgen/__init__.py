"""Photon-pair spectra from spontaneous parametric down-conversion with
surface contributions at chi(2) discontinuities."""

from .amplitudes import PumpSpectrum, TwoPhotonKernel
from .dispersion import ALL_CHANNELS, DirectionChannel, OpticalMedium, load_media
from .spectra import FrequencyGrid, density_map, pair_rate, signal_spectrum
from .structures import (
    BulkCrystalSpec,
    Layer,
    LayeredStackSpec,
    PoledCrystalSpec,
    bulk_kernel,
    poled_kernel,
    stack_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_CHANNELS", "BulkCrystalSpec", "DirectionChannel", "FrequencyGrid", "Layer",
    "LayeredStackSpec", "OpticalMedium", "PoledCrystalSpec", "PumpSpectrum", "TwoPhotonKernel",
    "bulk_kernel", "density_map", "load_media", "pair_rate", "poled_kernel", "signal_spectrum",
    "stack_kernel",
]
