"""
Two-photon kernels at first order in the coupling.

Every output operator is ``a_free + integral K a_free^dagger`` at first
order, so only the c-number kernel ``K`` is stored and manipulated here.
A kernel for a homogeneous nonlinear slab has a volume part and a surface
part, the latter being the volume part times ``V = dk / k_m``, where ``k_m``
is the forward wavenumber of the field the kernel belongs to.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import CONSTANTS
from .dispersion import DirectionChannel
from .errors import DomainError, PerturbativeValidityError, PerturbativeValidityWarning

C = CONSTANTS.c
HBAR = CONSTANTS.hbar
MU_0 = CONSTANTS.mu_0


@dataclass(frozen=True)
class PumpSpectrum:
    """Classical undepleted pump.

    A cw pump is a single line at ``center_omega``; kernels built from it live
    on the line ``wi = wp - ws`` (see :class:`pairgen.spectra.FrequencyGrid`).
    A pulsed pump has a Gaussian spectral amplitude of rms width ``sigma``
    (rad/s) whose peak equals ``amplitude``.
    """

    kind: str
    center_omega: float
    amplitude: complex = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("cw", "pulsed"):
            raise DomainError(f"pump kind must be 'cw' or 'pulsed', got {self.kind!r}")
        if self.center_omega <= 0:
            raise DomainError("pump frequency must be positive")
        if self.kind == "pulsed" and self.sigma <= 0:
            raise DomainError("pulsed pump needs a positive spectral width")

    @classmethod
    def cw(cls, wavelength, amplitude=1.0):
        return cls("cw", 2 * np.pi * C / wavelength, amplitude)

    @classmethod
    def pulsed(cls, wavelength, bandwidth, amplitude=1.0):
        """``bandwidth`` is the rms spectral width expressed in wavelength (m)."""
        w0 = 2 * np.pi * C / wavelength
        return cls("pulsed", w0, amplitude, sigma=w0 * bandwidth / wavelength)

    @property
    def wavelength(self):
        return 2 * np.pi * C / self.center_omega

    def spectral_amplitude(self, omega_p):
        omega_p = np.asarray(omega_p, dtype=float)
        if self.kind == "cw":
            return np.full(omega_p.shape, self.amplitude, dtype=complex)
        x = (omega_p - self.center_omega) / self.sigma
        return self.amplitude * np.exp(-0.5 * x * x)


@dataclass
class TwoPhotonKernel:
    """Kernel values on a frequency grid, with volume and surface parts kept apart.

    ``channel`` is ``None`` when the kernel is a coherent sum over several
    direction channels. ``invalid`` marks nodes that could not be evaluated
    (evanescent propagation); their values are zero.
    """

    field_tag: str
    channel: DirectionChannel | None
    grid: object
    volume: np.ndarray
    surface: np.ndarray
    provenance: str = ""
    invalid: np.ndarray | None = None
    flags: dict = field(default_factory=dict)

    @property
    def total(self):
        return self.volume + self.surface

    def part(self, variant):
        if variant == "vol":
            return self.volume
        if variant == "surf":
            return self.surface
        if variant == "vol+surf":
            return self.total
        raise DomainError(f"unknown kernel variant {variant!r}")

    def without_surface(self):
        return replace(self, surface=np.zeros_like(self.surface))

    @property
    def invalid_count(self):
        return 0 if self.invalid is None else int(np.count_nonzero(self.invalid))


@dataclass(frozen=True)
class BoundaryCoefficients:
    t_s: np.ndarray
    t_i: np.ndarray


def coupling_constant(d_eff, omega_s, omega_i, n_s, n_i):
    """``g = 2i d_eff sqrt(ws wi) / (c sqrt(2 pi) sqrt(ns ni))``."""
    return (
        2j
        * d_eff
        * np.sqrt(omega_s * omega_i)
        / (C * np.sqrt(2 * np.pi) * np.sqrt(n_s * n_i))
    )


def volume_amplitude(g, e_p, k_p, delta_k, length, z0=0.0):
    """Volume kernel of a slab occupying ``[z0, z0 + length]``.

    With ``z0 = 0`` this is ``g E_p exp(i k_p L) exp(-i dk L/2) L sinc(dk L/2)``.
    A nonzero ``z0`` only adds the pump phase ``exp(i k_p z0)``; propagation of
    the generated photons to a common output plane is left to the caller.
    """
    half = 0.5 * delta_k * length
    return (
        g
        * e_p
        * np.exp(1j * k_p * (z0 + length))
        * np.exp(-1j * half)
        * length
        * np.sinc(half / np.pi)
    )


def surface_factor(delta_k, k_m):
    """``V = dk / k_m``; ``k_m`` is the (positive) wavenumber of the tagged field."""
    k_m = np.asarray(k_m, dtype=float)
    if np.any(k_m <= 0):
        raise DomainError("surface factor needs a positive wavenumber")
    v = np.asarray(delta_k, dtype=float) / k_m
    return float(v) if v.ndim == 0 else v


def surface_amplitude(f_vol, v):
    return v * f_vol


def total_amplitude(f_vol, f_surf, surface=True):
    return f_vol + f_surf if surface else f_vol


def transmitted_amplitude(f, t_s, t_i):
    return t_s * t_i * f


def joint_density(f_s, f_i):
    """Photon-pair density ``Re{conj(F_s) F_i}`` (the imaginary residue is dropped)."""
    return (np.conj(f_s) * f_i).real


def check_perturbative(v, context=""):
    """Warn when a surface factor reaches |V| >= 1."""
    if np.any(np.abs(v) >= 1):
        warnings.warn(
            f"surface factor |V| >= 1 {context}: first-order theory is unreliable here",
            PerturbativeValidityWarning,
            stacklevel=2,
        )


def bulk_substitution(phi_vol, v_s, v_i):
    """Scale a volume-only amplitude by ``sqrt(1+Vs) sqrt(1+Vi)``."""
    a, b = 1 + np.asarray(v_s), 1 + np.asarray(v_i)
    if np.any(a < 0) or np.any(b < 0):
        raise PerturbativeValidityError("1 + V < 0: outside first-order validity")
    check_perturbative(v_s, "(signal)")
    check_perturbative(v_i, "(idler)")
    return np.sqrt(a) * np.sqrt(b) * phi_vol


def surface_correction_kernel(g, e_p, k_s):
    """Kernel of the input-boundary correction; equal for the forward and
    backward signal corrections."""
    if np.any(np.asarray(k_s) <= 0):
        raise DomainError("surface correction needs k_s > 0")
    return 1j / k_s * g * e_p


def nonlinear_magnetic_kernel(g, e_p, omega_s, n_s, k_p, k_i, z, area=1.0):
    """Kernel of the purely nonlinear magnetic-field term at position ``z``.

    The prefactor ``sqrt(hbar c / (2 mu0 ws A n_s))`` follows from
    ``H = -i/(w mu0) dE/dz`` applied to the first-order electric field; see
    ``tests/test_amplitudes.py`` for the finite-difference check.
    """
    pref = np.sqrt(HBAR * C / (2 * MU_0 * omega_s * area * n_s))
    return pref * g * e_p * np.exp(1j * k_p * z) * np.exp(-1j * k_i * z)


def electric_field_normalization(omega, n, area=1.0):
    """``sqrt(hbar w / (2 eps0 c A n))`` linking field amplitude and photon operator."""
    return np.sqrt(HBAR * omega / (2 * CONSTANTS.epsilon_0 * C * area * n))
