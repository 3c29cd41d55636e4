"""
Frequency grids, joint spectral densities and integrated observables.

All quadrature is trapezoidal on uniform grids. Reductions are done with
numpy's fixed-order pairwise summation after the whole map has been
assembled, so results do not depend on how node evaluation was partitioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .amplitudes import TwoPhotonKernel, joint_density
from .constants import CONSTANTS
from .dispersion import phase_mismatch
from .errors import DomainError

C = CONSTANTS.c
HBAR = CONSTANTS.hbar
MIN_NODES = 16

VARIANTS = ("vol", "surf", "vol+surf")


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid in angular frequency.

    ``cw-line``: nodes ``omega_s`` with ``omega_i = omega_p0 - omega_s``.
    ``full-2d``: rectangular ``omega_s x omega_i`` (axis 0 is signal).
    """

    mode: str
    omega_s: np.ndarray
    omega_i: np.ndarray | None = None
    omega_p0: float | None = None

    def __post_init__(self):
        if self.mode == "cw-line":
            if self.omega_p0 is None:
                raise DomainError("cw-line grid needs the pump frequency")
        elif self.mode == "full-2d":
            if self.omega_i is None:
                raise DomainError("full-2d grid needs idler nodes")
        else:
            raise DomainError(f"unknown grid mode {self.mode!r}")
        if len(self.omega_s) < MIN_NODES or (
            self.omega_i is not None and len(self.omega_i) < MIN_NODES
        ):
            raise DomainError(f"grids need at least {MIN_NODES} nodes per axis")

    @classmethod
    def cw_line(cls, omega_p0, ws_min, ws_max, nodes):
        return cls("cw-line", np.linspace(ws_min, ws_max, nodes), None, float(omega_p0))

    @classmethod
    def cw_line_wavelength(cls, pump_wavelength, lam_s_min, lam_s_max, nodes):
        wp = 2 * np.pi * C / pump_wavelength
        return cls.cw_line(wp, 2 * np.pi * C / lam_s_max, 2 * np.pi * C / lam_s_min, nodes)

    @classmethod
    def full_2d(cls, ws_range, wi_range, ns, ni=None):
        return cls(
            "full-2d",
            np.linspace(ws_range[0], ws_range[1], ns),
            np.linspace(wi_range[0], wi_range[1], ni or ns),
        )

    @property
    def shape(self):
        if self.mode == "cw-line":
            return self.omega_s.shape
        return (len(self.omega_s), len(self.omega_i))

    def nodes(self):
        """Signal and idler frequencies at every node, in grid shape."""
        if self.mode == "cw-line":
            return self.omega_s, self.omega_p0 - self.omega_s
        ws, wi = np.meshgrid(self.omega_s, self.omega_i, indexing="ij")
        return ws, wi

    def refined(self):
        """Grid with every interval halved (2n - 1 nodes per axis)."""
        ws = _halve(self.omega_s)
        wi = None if self.omega_i is None else _halve(self.omega_i)
        return FrequencyGrid(self.mode, ws, wi, self.omega_p0)

    def split(self, parts):
        """Partition along the signal axis into contiguous pieces.

        Pieces may be smaller than ``MIN_NODES``; they are evaluation chunks,
        never integrated on their own.
        """
        parts = max(1, min(parts, len(self.omega_s)))
        chunks = np.array_split(np.arange(len(self.omega_s)), parts)
        out = []
        for idx in chunks:
            g = object.__new__(FrequencyGrid)
            object.__setattr__(g, "mode", self.mode)
            object.__setattr__(g, "omega_s", self.omega_s[idx])
            object.__setattr__(g, "omega_i", self.omega_i)
            object.__setattr__(g, "omega_p0", self.omega_p0)
            out.append(g)
        return out

    def same_as(self, other):
        return (
            self.mode == other.mode
            and np.array_equal(self.omega_s, other.omega_s)
            and (
                (self.omega_i is None and other.omega_i is None)
                or np.array_equal(self.omega_i, other.omega_i)
            )
            and self.omega_p0 == other.omega_p0
        )


def _halve(x):
    out = np.empty(2 * len(x) - 1)
    out[0::2] = x
    out[1::2] = 0.5 * (x[:-1] + x[1:])
    return out


@dataclass(frozen=True)
class SpectralDensityMap:
    grid: FrequencyGrid
    values: np.ndarray
    variant: str
    invalid_count: int = 0


def density_map(signal: TwoPhotonKernel, idler: TwoPhotonKernel, variant="vol+surf"):
    """Nodewise joint density from the selected kernel parts."""
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    if not signal.grid.same_as(idler.grid):
        raise DomainError("signal and idler kernels live on different grids")
    n = joint_density(signal.part(variant), idler.part(variant))
    invalid = 0
    for k in (signal, idler):
        if k.invalid is not None:
            n = np.where(k.invalid, 0.0, n)
    if signal.invalid is not None or idler.invalid is not None:
        mask = np.zeros(n.shape, bool)
        for k in (signal, idler):
            if k.invalid is not None:
                mask |= k.invalid
        invalid = int(mask.sum())
    return SpectralDensityMap(signal.grid, n, variant, invalid)


def signal_spectrum(dmap: SpectralDensityMap):
    """``S_s(ws) = hbar ws integral n dwi``; on a cw line the integral is the line value."""
    grid = dmap.grid
    if grid.mode == "cw-line":
        return grid.omega_s, HBAR * grid.omega_s * dmap.values
    inner = np.trapezoid(dmap.values, grid.omega_i, axis=1)
    return grid.omega_s, HBAR * grid.omega_s * inner


def pair_rate(dmap: SpectralDensityMap) -> float:
    """``N = integral integral n``; a single integral along the line for cw pumps."""
    grid = dmap.grid
    if grid.mode == "cw-line":
        return float(np.trapezoid(dmap.values, grid.omega_s))
    inner = np.trapezoid(dmap.values, grid.omega_i, axis=1)
    return float(np.trapezoid(inner, grid.omega_s))


def relative_surface_contribution(n_total, n_vol):
    if n_vol == 0:
        raise DomainError("volume pair rate is zero: relative contribution undefined")
    return n_total / n_vol - 1


def qpm_detuning_limit(medium, pump_omega, length, grating_k, lobes=3):
    """Largest signal detuning from degeneracy kept in a cw-line grid.

    The residual mismatch ``dk(wp/2 + d, wp/2 - d) - K`` of a collinear
    forward process is followed outward until ``|residual| L / 2`` reaches
    ``(lobes + 1) pi``, i.e. the central sinc lobe plus ``lobes`` side lobes.
    The detuning is capped where either photon would leave the medium's
    transparency window.
    """
    half = 0.5 * pump_omega
    lam_lo, lam_hi = medium.window
    w_max = 2 * np.pi * C / lam_lo
    w_min = 2 * np.pi * C / lam_hi
    d_cap = 0.999 * min(w_max - half, half - w_min)
    target = (lobes + 1) * np.pi

    def excess(d):
        dk = phase_mismatch(medium, half + d, half - d)
        return abs(dk - grating_k) * length / 2 - target

    ds = np.linspace(0, d_cap, 2001)[1:]
    vals = np.array([excess(d) for d in ds])
    hit = np.nonzero(vals >= 0)[0]
    if len(hit) == 0:
        return d_cap
    j = hit[0]
    lo = 0.0 if j == 0 else ds[j - 1]
    return brentq(excess, lo, ds[j], xtol=1e-12 * half) if excess(lo) < 0 else ds[j]
