"""
Photon-pair kernels for bulk crystals, periodically poled crystals and 1D
nonlinear layered stacks.

Phase bookkeeping: a nonlinear segment on ``[z0, z0 + l]`` of a structure of
length ``L`` contributes :func:`~pairgen.amplitudes.volume_amplitude` (which
carries the pump phase ``exp(i k_p z0)``) times the linear propagation phase
``exp(i (k_s + k_i) (L - z0 - l))`` of the two generated photons to the
output face. Each segment then gets the slab surface rule ``(1 + V)``.

Layered stacks use s-polarised transfer matrices in the basis of forward and
backward electric-field amplitudes. The pump field in every layer comes from
a unit plane wave incident from the left; generated photons reach the right
output port through the stack's Green's function, so photons emitted backward
inside a layer contribute through reflections.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .amplitudes import (
    PumpSpectrum,
    TwoPhotonKernel,
    check_perturbative,
    coupling_constant,
    volume_amplitude,
)
from .constants import CONSTANTS
from .dispersion import (
    ALL_CHANNELS,
    FORWARD,
    DirectionChannel,
    OpticalMedium,
    direction_sign,
    fresnel_interface,
    longitudinal_wavenumber,
    phase_mismatch,
)
from .errors import DomainError, NoPolingNeeded
from .spectra import FrequencyGrid

C = CONSTANTS.c

VACUUM = OpticalMedium("vacuum", "constant", (1.0,), window=(1e-7, 1e-4))


@dataclass(frozen=True)
class BulkCrystalSpec:
    medium: OpticalMedium
    length: float
    surround: OpticalMedium = VACUUM

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError("crystal length must be positive")


@dataclass(frozen=True)
class PoledCrystalSpec:
    medium: OpticalMedium
    total_length: float
    poling_period: float
    duty_cycle: float = 0.5
    surround: OpticalMedium = VACUUM

    def __post_init__(self):
        if not self.poling_period > 0:
            raise DomainError("poling period must be positive")
        if not 0 < self.duty_cycle < 1:
            raise DomainError("duty cycle must lie strictly between 0 and 1")
        if self.total_length < self.poling_period / 2 * (1 - 1e-12):
            raise DomainError("crystal shorter than half a poling period")


@dataclass(frozen=True)
class Layer:
    medium: OpticalMedium
    thickness: float
    d_sign: int = 1

    def __post_init__(self):
        if not self.thickness > 0:
            raise DomainError(f"layer thickness must be positive ({self.medium.name})")
        if self.d_sign not in (1, -1):
            raise DomainError("d_sign must be +1 or -1")


@dataclass(frozen=True)
class LayeredStackSpec:
    """Layers listed from the pump input side. Angles are external (vacuum
    side) in radians; ``idler_angle=None`` means the idler direction follows
    from transverse momentum conservation. ``index_scale`` multiplies the
    index of every layer (not of the ambient media)."""

    layers: tuple
    ambient_in: OpticalMedium = VACUUM
    ambient_out: OpticalMedium = VACUUM
    pump_angle: float = 0.0
    signal_angle: float = 0.0
    idler_angle: float | None = None
    polarization: str = "s"
    index_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise DomainError("stack needs at least one layer")
        if self.polarization != "s":
            raise DomainError("only s polarisation is supported")
        for amb in (self.ambient_in, self.ambient_out):
            if not amb.is_linear:
                raise DomainError("ambient media must be linear")

    @property
    def scaled_layers(self):
        if self.index_scale == 1.0:
            return self.layers
        return tuple(replace(l, medium=l.medium.scaled(self.index_scale)) for l in self.layers)

    @property
    def total_thickness(self):
        return math.fsum(l.thickness for l in self.layers)


@dataclass(frozen=True)
class DomainSegment:
    z_start: float
    length: float
    sign: int
    medium: OpticalMedium


def describe(spec) -> str:
    """Short stable hash of a structure spec, used as kernel provenance."""
    return hashlib.sha256(repr(spec).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# segment tiling


def segment_decomposition(spec):
    """Ordered, gap-free tiling of a poled crystal or stack into uniform segments."""
    if isinstance(spec, LayeredStackSpec):
        segs, z = [], 0.0
        for layer in spec.scaled_layers:
            segs.append(DomainSegment(z, layer.thickness, layer.d_sign, layer.medium))
            z = z + layer.thickness
        return segs
    if not isinstance(spec, PoledCrystalSpec):
        raise DomainError(f"cannot decompose {type(spec).__name__}")
    period, L = spec.poling_period, spec.total_length
    lengths = (spec.duty_cycle * period, (1 - spec.duty_cycle) * period)
    n_periods = int(math.floor(L / period * (1 + 1e-12)))
    starts, signs = [], []
    for p in range(n_periods):
        starts += [p * period, p * period + lengths[0]]
        signs += [1, -1]
    rem = L - n_periods * period
    if rem > 1e-12 * period:
        starts.append(n_periods * period)
        signs.append(1)
        if rem > lengths[0] * (1 + 1e-12):
            starts.append(n_periods * period + lengths[0])
            signs.append(-1)
    ends = starts[1:] + [L]
    return [
        DomainSegment(z, e - z, s, spec.medium)
        for z, e, s in zip(starts, ends, signs)
    ]


# ---------------------------------------------------------------------------
# homogeneous media: bulk and poled


@dataclass
class _CollinearNodes:
    ws: np.ndarray
    wi: np.ndarray
    e_p: np.ndarray
    k_p: np.ndarray
    k_s: np.ndarray
    k_i: np.ndarray
    dk: np.ndarray
    g: np.ndarray
    t_s: np.ndarray
    t_i: np.ndarray


def _collinear_nodes(medium, surround, pump, grid):
    ws, wi = grid.nodes()
    wp = ws + wi
    k_p = longitudinal_wavenumber(medium, wp)
    k_s = longitudinal_wavenumber(medium, ws)
    k_i = longitudinal_wavenumber(medium, wi)
    n_s, n_i = medium.index(ws), medium.index(wi)
    t_s, _ = fresnel_interface(n_s, surround.index(ws))
    t_i, _ = fresnel_interface(n_i, surround.index(wi))
    return _CollinearNodes(
        ws, wi,
        e_p=pump.spectral_amplitude(wp),
        k_p=k_p, k_s=k_s, k_i=k_i,
        dk=k_p - k_s - k_i,
        g=coupling_constant(medium.d_eff, ws, wi, n_s, n_i),
        t_s=t_s, t_i=t_i,
    )


def _finish_collinear(nd, f_vol, grid, spec):
    vol = nd.t_s * nd.t_i * f_vol
    v_s, v_i = nd.dk / nd.k_s, nd.dk / nd.k_i
    check_perturbative(v_s, "(signal)")
    check_perturbative(v_i, "(idler)")
    prov = describe(spec)
    return (
        TwoPhotonKernel("signal", FORWARD, grid, vol, v_s * vol, prov),
        TwoPhotonKernel("idler", FORWARD, grid, vol, v_i * vol, prov),
    )


def bulk_kernel(spec: BulkCrystalSpec, pump: PumpSpectrum, grid: FrequencyGrid):
    """Signal and idler kernels of a single crystal, forward channel only."""
    nd = _collinear_nodes(spec.medium, spec.surround, pump, grid)
    f_vol = volume_amplitude(nd.g, nd.e_p, nd.k_p, nd.dk, spec.length)
    return _finish_collinear(nd, f_vol, grid, spec)


def _segment_integral(dk, z0, length):
    """``integral_{z0}^{z0+length} exp(i dk z) dz`` with only dk-sized phases."""
    half = 0.5 * dk * length
    return np.exp(1j * dk * (z0 + 0.5 * length)) * length * np.sinc(half / np.pi)


# Each domain contributes exp(i k_p z_end) exp(i (k_s+k_i)(L - z_end)) times its
# local integral; that product is exp(i (k_s+k_i) L) exp(i dk z_end), so the
# large propagation phase is applied once and domains carry only dk phases.


def _poled_direct(nd, segments, total_length):
    acc = np.zeros(nd.ws.shape, dtype=complex)
    for seg in segments:
        acc += seg.sign * _segment_integral(nd.dk, seg.z_start, seg.length)
    return nd.g * nd.e_p * np.exp(1j * (nd.k_s + nd.k_i) * total_length) * acc


def _geometric_series(x, count):
    """``sum_{p<count} exp(2 i x p)`` evaluated stably as a Dirichlet kernel."""
    m = np.round(x / np.pi)
    xr = x - m * np.pi
    parity = np.where((m * (count - 1)) % 2 == 0, 1.0, -1.0)
    s = np.sin(xr)
    safe = np.where(s == 0, 1.0, s)
    ratio = np.where(s == 0, float(count), np.sin(count * xr) / safe)
    return np.exp(1j * (count - 1) * x) * parity * ratio


def _is_uniform(segments, spec):
    nominal = (spec.duty_cycle * spec.poling_period, (1 - spec.duty_cycle) * spec.poling_period)
    return all(
        abs(seg.length - nominal[j % 2]) <= 1e-9 * spec.poling_period
        for j, seg in enumerate(segments)
    )


def _poled_geometric(nd, segments, spec):
    period = spec.poling_period
    l_pos = spec.duty_cycle * period
    l_neg = period - l_pos
    first = _segment_integral(nd.dk, 0.0, l_pos)
    cell = first - _segment_integral(nd.dk, l_pos, l_neg)
    n_periods, extra = divmod(len(segments), 2)
    total = np.zeros(nd.ws.shape, dtype=complex)
    if n_periods:
        total = cell * _geometric_series(0.5 * nd.dk * period, n_periods)
    if extra:
        total = total + first * np.exp(1j * nd.dk * period * n_periods)
    return nd.g * nd.e_p * np.exp(1j * (nd.k_s + nd.k_i) * spec.total_length) * total


def poled_kernel(spec: PoledCrystalSpec, pump: PumpSpectrum, grid: FrequencyGrid,
                 method="geometric_sum"):
    """Coherent sum over sign-alternating domains, each with its own surface terms.

    ``geometric_sum`` evaluates uniform poling in closed form; a truncated
    final domain makes it fall back to ``direct_sum`` with a warning.
    """
    if method not in ("geometric_sum", "direct_sum"):
        raise DomainError(f"unknown summation method {method!r}")
    segments = segment_decomposition(spec)
    nd = _collinear_nodes(spec.medium, spec.surround, pump, grid)
    if method == "geometric_sum" and not _is_uniform(segments, spec):
        warnings.warn("truncated final domain: geometric_sum falls back to direct_sum",
                      stacklevel=2)
        method = "direct_sum"
    if method == "direct_sum":
        f_vol = _poled_direct(nd, segments, spec.total_length)
    else:
        f_vol = _poled_geometric(nd, segments, spec)
    return _finish_collinear(nd, f_vol, grid, spec)


def optimum_poling_period(medium: OpticalMedium, pump_wavelength: float) -> float:
    """First-order QPM period for degenerate collinear forward emission."""
    wp = 2 * np.pi * C / pump_wavelength
    dk = phase_mismatch(medium, 0.5 * wp, 0.5 * wp)
    kp = longitudinal_wavenumber(medium, wp)
    if abs(dk) <= 1e-12 * kp:
        raise NoPolingNeeded(f"{medium.name} is phase matched at {pump_wavelength * 1e9:.2f} nm")
    return 2 * np.pi / abs(dk)


# ---------------------------------------------------------------------------
# layered stacks


def _interface(ka, kb):
    """s-pol interface matrix taking (E+, E-) from medium a into medium b."""
    s = 0.5 / kb
    p = (kb + ka) * s
    m = (kb - ka) * s
    return _mat(p, m, m, p)


def _propagate(k, d):
    z = np.zeros_like(k, dtype=complex)
    return _mat(np.exp(1j * k * d), z, z, np.exp(-1j * k * d))


def _mat(a, b, c, d):
    a = np.asarray(a, dtype=complex)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0], out[..., 0, 1], out[..., 1, 0], out[..., 1, 1] = a, b, c, d
    return out


def _mul(x, y):
    """Elementwise product of stacks of 2x2 matrices (explicit, order-fixed)."""
    return _mat(
        x[..., 0, 0] * y[..., 0, 0] + x[..., 0, 1] * y[..., 1, 0],
        x[..., 0, 0] * y[..., 0, 1] + x[..., 0, 1] * y[..., 1, 1],
        x[..., 1, 0] * y[..., 0, 0] + x[..., 1, 1] * y[..., 1, 0],
        x[..., 1, 0] * y[..., 0, 1] + x[..., 1, 1] * y[..., 1, 1],
    )


@dataclass
class StackOptics:
    """Linear optics of a stack at a set of frequencies (leading axis) for one
    transverse direction.

    ``k`` holds per-layer longitudinal wavenumbers (layers on axis 0).
    ``field_left`` are (E+, E-) at the left face inside each layer for a unit
    wave incident from the left. ``green_forward[j]`` / ``green_backward[j]``
    give the amplitude leaving the right port for a unit forward wave emitted
    at the right face / a unit backward wave emitted at the left face of
    layer ``j``.
    """

    k: np.ndarray
    k_in: np.ndarray
    k_out: np.ndarray
    matrices: list = field(repr=False)
    total: np.ndarray = field(repr=False)
    t: np.ndarray = None
    r: np.ndarray = None
    field_left: np.ndarray = None
    green_forward: np.ndarray = None
    green_backward: np.ndarray = None

    @property
    def transmittance(self):
        return np.abs(self.t) ** 2 * self.k_out / self.k_in

    @property
    def reflectance(self):
        return np.abs(self.r) ** 2


def transfer_matrix(stack: LayeredStackSpec, omega, sin_ext=0.0) -> StackOptics:
    """Characteristic-matrix chain of an s-polarised stack.

    ``omega`` and ``sin_ext`` broadcast together; ``sin_ext`` is the sine of
    the angle in the input ambient medium's vacuum-side frame.
    """
    omega, sin_ext = np.broadcast_arrays(np.asarray(omega, float), np.asarray(sin_ext, float))
    layers = stack.scaled_layers
    k = np.array([longitudinal_wavenumber(l.medium, omega, sin_ext) for l in layers])
    k_in = longitudinal_wavenumber(stack.ambient_in, omega, sin_ext)
    k_out = longitudinal_wavenumber(stack.ambient_out, omega, sin_ext)
    k_in, k_out = np.broadcast_to(k_in, omega.shape), np.broadcast_to(k_out, omega.shape)
    n = len(layers)

    m_left, m_right = [], []
    m = _interface(k_in, k[0])
    for j, layer in enumerate(layers):
        if j:
            m = _mul(_interface(k[j - 1], k[j]), m)
        m_left.append(m)
        m = _mul(_propagate(k[j], layer.thickness), m)
        m_right.append(m)
    total = _mul(_interface(k[-1], k_out), m)

    r_right = [None] * n
    r_left = [None] * n
    acc = _interface(k[-1], k_out)
    for j in range(n - 1, -1, -1):
        if j < n - 1:
            acc = _mul(r_left[j + 1], _interface(k[j], k[j + 1]))
        r_right[j] = acc
        r_left[j] = _mul(acc, _propagate(k[j], layers[j].thickness))

    r = -total[..., 1, 0] / total[..., 1, 1]
    t = total[..., 0, 0] + total[..., 0, 1] * r
    field_left = np.array([
        np.stack([ml[..., 0, 0] + ml[..., 0, 1] * r, ml[..., 1, 0] + ml[..., 1, 1] * r], axis=-1)
        for ml in m_left
    ])
    g_f = np.array([_green(m_right[j], r_right[j], 1.0, 0.0) for j in range(n)])
    g_b = np.array([_green(m_left[j], r_left[j], 0.0, 1.0) for j in range(n)])
    return StackOptics(k, k_in, k_out, m_left, total, t, r, field_left, g_f, g_b)


def _green(ml, mr, a_fwd, a_bwd):
    """Right-port output for a plane source emitting ``a_fwd`` forward and
    ``a_bwd`` backward, with nothing incident from either side."""
    q, s = ml[..., 0, 1], ml[..., 1, 1]
    a, b, c, d = mr[..., 0, 0], mr[..., 0, 1], mr[..., 1, 0], mr[..., 1, 1]
    x = (d * a_bwd - c * a_fwd) / (c * q + d * s)
    f_plus = q * x + a_fwd
    f_minus = s * x - a_bwd
    return a * f_plus + b * f_minus


def _stack_sines(spec, ws, wi, wp):
    sin_p = np.sin(spec.pump_angle)
    sin_s = np.full(ws.shape, np.sin(spec.signal_angle))
    if spec.idler_angle is None:
        sin_i = (wp * sin_p - ws * sin_s) / wi
    else:
        sin_i = np.full(wi.shape, np.sin(spec.idler_angle))
    return sin_p, sin_s, sin_i


def _evanescent_mask(spec, omega, sin_ext):
    bad = np.abs(sin_ext) >= 1
    for med in [spec.ambient_in, spec.ambient_out] + [l.medium for l in spec.scaled_layers]:
        bad |= med.index(omega) ** 2 <= sin_ext**2
    return bad


@dataclass(frozen=True)
class StackTerm:
    """One (layer, channel) contribution to a stack kernel.

    ``volume`` is already carried to the output port; the signal and idler
    surface parts are ``dk / k_s * volume`` and ``dk / k_i * volume``.
    """

    layer: int
    channel: DirectionChannel
    volume: np.ndarray
    delta_k: np.ndarray
    k_s: np.ndarray
    k_i: np.ndarray


def _stack_setup(spec, pump, grid):
    ws, wi = grid.nodes()
    ws, wi = ws.ravel(), wi.ravel()
    wp = ws + wi
    sin_p, sin_s, sin_i = _stack_sines(spec, ws, wi, wp)
    invalid = _evanescent_mask(spec, ws, sin_s) | _evanescent_mask(spec, wi, sin_i)
    invalid |= _evanescent_mask(spec, wp, np.full(wp.shape, sin_p))
    sin_s = np.where(invalid, 0.0, sin_s)
    sin_i = np.where(invalid, 0.0, sin_i)
    return ws, wi, wp, sin_p, sin_s, sin_i, invalid


def stack_terms(spec: LayeredStackSpec, pump: PumpSpectrum, grid: FrequencyGrid,
                channels=ALL_CHANNELS):
    """Yield every nonlinear (layer, channel) term as a :class:`StackTerm`.

    Values are flattened over the grid; evanescent nodes hold placeholder
    values (see :func:`stack_kernel`).
    """
    channels = tuple(DirectionChannel(*c) for c in channels)
    ws, wi, wp, sin_p, sin_s, sin_i, _ = _stack_setup(spec, pump, grid)
    if pump.kind == "cw":
        pump_opt = transfer_matrix(spec, np.array([pump.center_omega]), sin_p)
        e_field = pump_opt.field_left[:, 0, :] * pump.amplitude
        e_field = np.broadcast_to(e_field[:, None, :], (len(spec.layers), ws.size, 2))
        k_pump = np.broadcast_to(pump_opt.k[:, :1], (len(spec.layers), ws.size))
    else:
        pump_opt = transfer_matrix(spec, wp, sin_p)
        e_field = pump_opt.field_left * pump.spectral_amplitude(wp)[None, :, None]
        k_pump = pump_opt.k
    sig = transfer_matrix(spec, ws, sin_s)
    idl = transfer_matrix(spec, wi, sin_i)

    for j, layer in enumerate(spec.scaled_layers):
        med = layer.medium
        if med.is_linear:
            continue
        l = layer.thickness
        ks, ki, kp = sig.k[j], idl.k[j], k_pump[j]
        g = coupling_constant(layer.d_sign * med.d_eff, ws, wi, med.index(ws), med.index(wi))
        out_s = {"F": sig.green_forward[j], "B": sig.green_backward[j] * np.exp(1j * ks * l)}
        out_i = {"F": idl.green_forward[j], "B": idl.green_backward[j] * np.exp(1j * ki * l)}
        for ch in channels:
            kpb = direction_sign(ch.pump) * kp
            e_p = e_field[j, :, 0] if ch.pump == "F" else e_field[j, :, 1]
            dk = kpb - direction_sign(ch.signal) * ks - direction_sign(ch.idler) * ki
            term = volume_amplitude(g, e_p, kpb, dk, l) * out_s[ch.signal] * out_i[ch.idler]
            yield StackTerm(j, ch, term, dk, ks, ki)


def stack_kernel(spec: LayeredStackSpec, pump: PumpSpectrum, grid: FrequencyGrid,
                 channels=ALL_CHANNELS):
    """Signal and idler kernels of a layered stack summed over layers and channels.

    Nodes where any field would be evanescent are zeroed and flagged in
    ``kernel.invalid``. ``kernel.flags['perturbative']`` counts (layer,
    channel, node) terms with |V| >= 1.
    """
    channels = tuple(DirectionChannel(*c) for c in channels)
    shape = grid.nodes()[0].shape
    invalid = _stack_setup(spec, pump, grid)[-1]
    size = invalid.size
    vol = np.zeros(size, complex)
    surf_s = np.zeros(size, complex)
    surf_i = np.zeros(size, complex)
    flagged = 0
    for term in stack_terms(spec, pump, grid, channels):
        v_s, v_i = term.delta_k / term.k_s, term.delta_k / term.k_i
        flagged += int(np.count_nonzero(((np.abs(v_s) >= 1) | (np.abs(v_i) >= 1)) & ~invalid))
        vol += term.volume
        surf_s += v_s * term.volume
        surf_i += v_i * term.volume

    for arr in (vol, surf_s, surf_i):
        arr[invalid] = 0.0
    prov = describe(spec)
    chan = channels[0] if len(channels) == 1 else None
    inv = invalid.reshape(shape)
    flags = {"perturbative": flagged}
    return (
        TwoPhotonKernel("signal", chan, grid, vol.reshape(shape), surf_s.reshape(shape),
                        prov, inv, dict(flags)),
        TwoPhotonKernel("idler", chan, grid, vol.reshape(shape), surf_i.reshape(shape),
                        prov, inv, dict(flags)),
    )


def calibrate_index_scale(spec: LayeredStackSpec, pump_wavelength, signal_wavelength=None,
                          bounds=(0.95, 1.05), samples=101):
    """Uniform index scale that maximises volume pair generation at one node.

    Literature dispersion data rarely reproduce a published band-gap design
    exactly. This finds the factor (applied to all layer indices) for which
    the volume-only pair density at ``signal_wavelength`` (default: the
    degenerate wavelength) is largest, i.e. where the structure works as its
    design intends. Surface terms play no part in the objective.
    """
    lam_s = 2 * pump_wavelength if signal_wavelength is None else signal_wavelength
    pump = PumpSpectrum.cw(pump_wavelength)
    wp = pump.center_omega
    ws = 2 * np.pi * C / lam_s
    grid = FrequencyGrid("cw-line", np.full(16, ws), None, wp)

    def objective(f):
        trial = replace(spec, index_scale=f)
        s, _ = stack_kernel(trial, pump, grid)
        return -float(np.abs(s.volume[0]) ** 2)

    fs = np.linspace(bounds[0], bounds[1], samples)
    vals = [objective(f) for f in fs]
    j = int(np.argmin(vals))
    lo, hi = fs[max(j - 1, 0)], fs[min(j + 1, samples - 1)]
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-9})
    return float(res.x)


__all__ = [
    "VACUUM", "BulkCrystalSpec", "PoledCrystalSpec", "Layer", "LayeredStackSpec",
    "DomainSegment", "StackOptics", "segment_decomposition", "bulk_kernel", "poled_kernel",
    "optimum_poling_period", "transfer_matrix", "stack_kernel", "stack_terms", "StackTerm",
    "calibrate_index_scale",
]
