"""
Material dispersion and linear interface optics.

Media are described by an index model plus an effective second-order
nonlinearity. Indices are evaluated from angular frequency (rad/s); the
Sellmeier forms shipped in ``data/media.json`` take the vacuum wavelength in
microns, so conversion happens inside :meth:`OpticalMedium.index`.

Sign convention
---------------
Wave vectors are signed longitudinal (z) components. A field travelling
backward carries ``k_B = -k_F`` at the same frequency and angle, so the phase
mismatch of every one of the eight pump/signal/idler direction channels is a
single signed number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import NamedTuple

import numpy as np

from .constants import CONSTANTS
from .errors import DomainError, EvanescentError, InfiniteCoherence

C = CONSTANTS.c

_MODELS = ("constant", "sellmeier", "sellmeier_jundt")


@dataclass(frozen=True)
class OpticalMedium:
    """Dispersion model and effective nonlinearity of one material.

    ``coefficients`` depends on ``model``:

    * ``constant``: ``(n0,)``
    * ``sellmeier``: ``(A, B1, C1, B2, C2, ...)`` for
      ``n^2 = A + sum B_k lam^2 / (lam^2 - C_k^2)``
    * ``sellmeier_jundt``: ``(a1, ..., a6)`` for
      ``n^2 = a1 + a2/(lam^2 - a3^2) + a4/(lam^2 - a5^2) - a6 lam^2``

    with ``lam`` in microns. ``window`` is the vacuum-wavelength range in
    metres. ``index_scale`` multiplies the model index uniformly.
    """

    name: str
    model: str
    coefficients: tuple[float, ...]
    d_eff: float = 0.0
    window: tuple[float, float] = (1e-7, 1e-4)
    source: str = ""
    index_scale: float = 1.0

    def __post_init__(self):
        if self.model not in _MODELS:
            raise DomainError(f"unknown index model {self.model!r} for medium {self.name}")
        if not self.window[0] < self.window[1]:
            raise DomainError(f"empty transparency window for medium {self.name}")

    @property
    def is_linear(self) -> bool:
        return self.d_eff == 0.0

    def scaled(self, factor: float) -> "OpticalMedium":
        """Copy with the refractive index multiplied by ``factor``."""
        return replace(self, index_scale=self.index_scale * factor)

    def with_d_eff(self, d_eff: float) -> "OpticalMedium":
        return replace(self, d_eff=d_eff)

    def check_window(self, omega):
        lam = 2 * np.pi * C / np.asarray(omega, dtype=float)
        bad = (lam < self.window[0]) | (lam > self.window[1])
        if np.any(bad):
            worst = np.atleast_1d(lam)[np.atleast_1d(bad)][0]
            raise DomainError(
                f"{self.name}: vacuum wavelength {worst * 1e9:.3f} nm outside "
                f"transparency window [{self.window[0] * 1e9:.1f}, {self.window[1] * 1e9:.1f}] nm"
            )

    def index(self, omega):
        """Refractive index at angular frequency ``omega`` (scalar or array)."""
        omega = np.asarray(omega, dtype=float)
        if np.any(omega <= 0):
            raise DomainError(f"{self.name}: angular frequency must be positive")
        self.check_window(omega)
        lam = 2e6 * np.pi * C / omega
        l2 = lam * lam
        cf = self.coefficients
        if self.model == "constant":
            n = np.full_like(omega, cf[0])
        elif self.model == "sellmeier":
            n2 = np.full_like(omega, cf[0])
            for b, c in zip(cf[1::2], cf[2::2]):
                n2 = n2 + b * l2 / (l2 - c * c)
            n = np.sqrt(n2)
        else:
            a1, a2, a3, a4, a5, a6 = cf
            n = np.sqrt(a1 + a2 / (l2 - a3 * a3) + a4 / (l2 - a5 * a5) - a6 * l2)
        n = self.index_scale * n
        if n.ndim == 0:
            return float(n)
        return n


def refractive_index(medium: OpticalMedium, omega):
    return medium.index(omega)


class DirectionChannel(NamedTuple):
    """Propagation directions of (pump, signal, idler), each ``'F'`` or ``'B'``."""

    pump: str
    signal: str
    idler: str

    @property
    def label(self) -> str:
        return f"{self.pump},{self.signal}{self.idler}"

    @classmethod
    def parse(cls, text: str) -> "DirectionChannel":
        s = text.replace(",", "").strip().upper()
        if len(s) != 3 or set(s) - {"F", "B"}:
            raise DomainError(f"bad direction channel {text!r}")
        return cls(*s)

    def flipped(self) -> "DirectionChannel":
        swap = {"F": "B", "B": "F"}
        return DirectionChannel(*(swap[d] for d in self))


ALL_CHANNELS = tuple(DirectionChannel(p, s, i) for p in "FB" for s in "FB" for i in "FB")
FORWARD = DirectionChannel("F", "F", "F")


def direction_sign(direction: str) -> int:
    if direction == "F":
        return 1
    if direction == "B":
        return -1
    raise DomainError(f"direction must be 'F' or 'B', got {direction!r}")


@dataclass(frozen=True)
class FieldMode:
    role: str
    direction: str
    angular_frequency: float
    external_angle: float = 0.0

    def __post_init__(self):
        if self.role not in ("pump", "signal", "idler"):
            raise DomainError(f"unknown field role {self.role!r}")
        direction_sign(self.direction)
        if np.any(np.asarray(self.angular_frequency) <= 0):
            raise DomainError("angular frequency must be positive")


def longitudinal_wavenumber(medium: OpticalMedium, omega, sin_ext=0.0):
    """Magnitude of the z component of k for a field whose vacuum-side
    transverse direction has sine ``sin_ext``."""
    n = medium.index(omega)
    arg = np.asarray(n, dtype=float) ** 2 - np.asarray(sin_ext, dtype=float) ** 2
    if np.any(arg <= 0):
        raise EvanescentError(f"{medium.name}: evanescent propagation (sin^2 theta >= n^2)")
    kz = np.asarray(omega, dtype=float) / C * np.sqrt(arg)
    return float(kz) if kz.ndim == 0 else kz


def wave_vector(medium: OpticalMedium, mode: FieldMode):
    """Signed longitudinal wave vector (rad/m) of ``mode`` inside ``medium``."""
    s = direction_sign(mode.direction)
    return s * longitudinal_wavenumber(medium, mode.angular_frequency, np.sin(mode.external_angle))


def phase_mismatch(medium, omega_s, omega_i, channel=FORWARD, angles=(0.0, 0.0, 0.0)):
    """``k_p(ws+wi) - k_s(ws) - k_i(wi)`` with signed wave vectors.

    ``angles`` are the external angles (pump, signal, idler) in radians.
    """
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    ps, ss, si = (direction_sign(d) for d in channel)
    th_p, th_s, th_i = angles
    kp = longitudinal_wavenumber(medium, omega_s + omega_i, np.sin(th_p))
    ks = longitudinal_wavenumber(medium, omega_s, np.sin(th_s))
    ki = longitudinal_wavenumber(medium, omega_i, np.sin(th_i))
    return ps * kp - ss * ks - si * ki


def coherence_length(delta_k: float) -> float:
    """``pi / |delta_k|``; raises :class:`InfiniteCoherence` at perfect matching."""
    if delta_k == 0:
        raise InfiniteCoherence("phase mismatch is zero: coherence length is infinite")
    return np.pi / abs(delta_k)


def fresnel_interface(n1, n2, theta1=0.0):
    """s-polarised amplitude transmission and reflection going from n1 into n2."""
    if np.any(np.asarray(n1) < 1) or np.any(np.asarray(n2) < 1):
        raise DomainError("refractive indices must be >= 1")
    sin2 = n1 * np.sin(theta1) / n2
    if np.any(np.abs(sin2) >= 1):
        raise EvanescentError("total internal reflection at interface")
    a = n1 * np.cos(theta1)
    b = n2 * np.sqrt(1 - sin2**2)
    return 2 * a / (a + b), (a - b) / (a + b)


# ---------------------------------------------------------------------------
# fixture loading

_FIXTURE = "media.json"


def _medium_from_record(rec) -> OpticalMedium:
    model = rec["model"]
    if model == "constant":
        cf = (float(rec["n0"]),)
    elif model == "sellmeier":
        cf = [float(rec["A"])]
        for b, c in zip(rec["B"], rec["C"], strict=True):
            cf += [float(b), float(c)]
        cf = tuple(cf)
    elif model == "sellmeier_jundt":
        cf = tuple(float(x) for x in rec["a"])
    else:
        raise DomainError(f"unknown model {model!r} in media fixture")
    lo, hi = rec["window_um"]
    return OpticalMedium(
        name=rec["name"],
        model=model,
        coefficients=cf,
        d_eff=float(rec.get("d_eff_pm_per_V", 0.0)) * 1e-12,
        window=(lo * 1e-6, hi * 1e-6),
        source=rec.get("source", ""),
    )


@dataclass(frozen=True)
class MediaLibrary:
    version: str
    media: dict = field(default_factory=dict)

    def __getitem__(self, name) -> OpticalMedium:
        try:
            return self.media[name]
        except KeyError:
            raise DomainError(f"unknown medium {name!r}; known: {sorted(self.media)}") from None

    def __contains__(self, name):
        return name in self.media


def load_media(path=None) -> MediaLibrary:
    """Read a media fixture file (defaults to the bundled one)."""
    if path is None:
        text = resources.files("pairgen.data").joinpath(_FIXTURE).read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    data = json.loads(text)
    media = {rec["name"]: _medium_from_record(rec) for rec in data["media"]}
    return MediaLibrary(version=str(data["fixture_version"]), media=media)
