"""
Brute-force validators for the analytic kernels.

Nothing here calls the analytic code it checks: the volume kernel is
re-derived by integrating the first-order source term along z, the boundary
correction by solving the two continuity equations as a generic linear
system, and poled crystals by summing domains with global-z phases.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .constants import CONSTANTS
from .dispersion import fresnel_interface, longitudinal_wavenumber
from .errors import DomainError

DEFAULT_SEED = 20100721


@dataclass(frozen=True)
class OracleReport:
    case_id: str
    analytic: complex
    oracle: complex
    relative_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.relative_error <= self.tolerance


def relative_error(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = np.maximum(np.abs(a), np.abs(b))
    return np.where(scale == 0, 0.0, np.abs(a - b) / np.where(scale == 0, 1.0, scale))


def integrate_volume_kernel(g, e_p, k_p, delta_k, length, steps=20000):
    """Composite-Simpson integral of the first-order source along the slab.

    The signal amplitude grows as ``d a/dz = g E_p exp(i dk z) a_i^dagger``;
    integrating over ``[0, L]`` and referring both photons to the output face
    with ``exp(i (k_s + k_i) L) = exp(i (k_p - dk) L)`` gives the kernel.
    Arrays broadcast over cases (last axis is z).
    """
    if steps < 1000:
        raise DomainError("oracle quadrature needs at least 1000 steps")
    steps += steps % 2
    g, e_p, k_p, delta_k, length = np.broadcast_arrays(
        *(np.asarray(x) for x in (g, e_p, k_p, delta_k, length))
    )
    u = np.linspace(0.0, 1.0, steps + 1)
    z = length[..., None] * u
    integrand = np.exp(1j * delta_k[..., None] * z)
    integral = simpson(integrand, x=z, axis=-1)
    out = g * e_p * np.exp(1j * (k_p - delta_k) * length) * integral
    return out if out.ndim else complex(out)


def solve_boundary(h_nfr_f, h_nfr_b, k_s, omega_s, n_s, area=1.0):
    """Surface corrections (da_F, da_B) from the input-boundary continuity equations.

    Unknowns are the photon-operator corrections; the electric corrections
    are ``i N da`` with ``N = sqrt(hbar w / (2 eps0 c A n))`` and the
    magnetic ones ``(k/(w mu0)) dE`` with signed ``k`` (negative backward):

        dE_F - dE_B = 0
        H_F + dH_F + H_B - dH_B = 0
    """
    if k_s <= 0:
        raise DomainError("singular boundary system: k_s must be positive")
    cst = CONSTANTS
    norm = np.sqrt(cst.hbar * omega_s / (2 * cst.epsilon_0 * cst.c * area * n_s))
    imp_f = k_s / (omega_s * cst.mu_0)
    imp_b = -k_s / (omega_s * cst.mu_0)
    a = np.array(
        [
            [1j * norm, -1j * norm],
            [imp_f * 1j * norm, -imp_b * 1j * norm],
        ]
    )
    rhs = np.array([0.0, -(h_nfr_f + h_nfr_b)], dtype=complex)
    da_f, da_b = np.linalg.solve(a, rhs)
    return complex(da_f), complex(da_b)


def poled_direct_sum(spec, segments, pump, omega_s, omega_i):
    """Domain-by-domain sum for one node, transmitted through the output face.

    Each domain contributes ``sign * integral exp(i dk z) dz`` over its own
    extent in global coordinates; the common factor carries the coupling, the
    pump amplitude and the photons' propagation to the output.
    """
    cst = CONSTANTS
    med = spec.medium
    wp = omega_s + omega_i
    kp = longitudinal_wavenumber(med, wp)
    ks = longitudinal_wavenumber(med, omega_s)
    ki = longitudinal_wavenumber(med, omega_i)
    dk = kp - ks - ki
    n_s, n_i = med.index(omega_s), med.index(omega_i)
    g = 2j * med.d_eff * np.sqrt(omega_s * omega_i) / (cst.c * np.sqrt(2 * np.pi * n_s * n_i))
    acc = 0j
    for seg in segments:
        if dk == 0:
            piece = seg.length
        else:
            piece = (
                np.exp(1j * dk * seg.z_start)
                * np.exp(0.5j * dk * seg.length)
                * 2 * np.sin(0.5 * dk * seg.length) / dk
            )
        acc += seg.sign * piece
    t_s, _ = fresnel_interface(n_s, spec.surround.index(omega_s))
    t_i, _ = fresnel_interface(n_i, spec.surround.index(omega_i))
    e_p = complex(pump.spectral_amplitude(wp))
    return t_s * t_i * g * e_p * np.exp(1j * (ks + ki) * spec.total_length) * acc


# ---------------------------------------------------------------------------
# suites


def volume_suite(rng, cases=1000, tolerance=1e-10):
    from .amplitudes import volume_amplitude

    g = (rng.normal(size=cases) + 1j * rng.normal(size=cases)) * 1e-3
    e_p = rng.normal(size=cases) + 1j * rng.normal(size=cases)
    length = 10 ** rng.uniform(-7, -2, size=cases)
    phase = rng.uniform(-8 * np.pi, 8 * np.pi, size=cases)
    dk = phase / length
    k_p = rng.uniform(5e6, 3e7, size=cases)
    ref = np.concatenate([
        integrate_volume_kernel(g[s], e_p[s], k_p[s], dk[s], length[s])
        for s in np.array_split(np.arange(cases), max(1, cases // 50))
    ])
    ana = volume_amplitude(g, e_p, k_p, dk, length)
    err = relative_error(ana, ref)
    return [
        OracleReport(f"volume-{j:04d}", complex(ana[j]), complex(ref[j]), float(err[j]), tolerance)
        for j in range(cases)
    ]


def boundary_suite(rng, cases=1000, tolerance=1e-12):
    from .amplitudes import nonlinear_magnetic_kernel, surface_correction_kernel

    out = []
    for j in range(cases):
        ws = rng.uniform(0.5e15, 5e15)
        n_s = rng.uniform(1.0, 3.5)
        k_s = n_s * ws / CONSTANTS.c
        g = complex(rng.normal(), rng.normal()) * 10 ** rng.uniform(-6, 0)
        e_p = complex(rng.normal(), rng.normal())
        area = 10 ** rng.uniform(-12, -6)
        h = nonlinear_magnetic_kernel(g, e_p, ws, n_s, 0.0, 0.0, 0.0, area)
        da_f, da_b = solve_boundary(h, h, k_s, ws, n_s, area)
        closed = surface_correction_kernel(g, e_p, k_s)
        err = max(float(relative_error(closed, da_f)), float(relative_error(closed, da_b)))
        out.append(OracleReport(f"boundary-{j:04d}", closed, da_f, err, tolerance))
    return out


def poled_suite(rng, media, cases=24, tolerance=1e-10):
    from .amplitudes import PumpSpectrum
    from .spectra import FrequencyGrid
    from .structures import PoledCrystalSpec, optimum_poling_period, poled_kernel, segment_decomposition

    ln = media["LiNbO3_e"]
    out = []
    for j in range(cases):
        lam_p = rng.uniform(0.4e-6, 1.0e-6)
        period = optimum_poling_period(ln, lam_p) * rng.uniform(0.98, 1.02)
        n_domains = int(rng.integers(1, 10001))
        spec = PoledCrystalSpec(ln, 0.5 * period * n_domains, period)
        pump = PumpSpectrum.cw(lam_p)
        wp = pump.center_omega
        grid = FrequencyGrid.cw_line(wp, 0.45 * wp, 0.55 * wp, 16)
        sig, _ = poled_kernel(spec, pump, grid, "geometric_sum")
        node = int(rng.integers(0, 16))
        ws = grid.omega_s[node]
        ref = poled_direct_sum(spec, segment_decomposition(spec), pump, ws, wp - ws)
        ana = complex(sig.volume[node])
        out.append(OracleReport(f"poled-{j:03d}-M{n_domains}", ana, ref,
                                float(relative_error(ana, ref)), tolerance))
    return out


def run_validation(seed=DEFAULT_SEED, tolerance_override=None, media=None):
    """Run every oracle suite; returns the list of reports (one per case)."""
    from .dispersion import load_media

    media = media or load_media()
    rng = np.random.default_rng(seed)
    reports = volume_suite(rng) + boundary_suite(rng) + poled_suite(rng, media)
    if tolerance_override is not None:
        reports = [
            OracleReport(r.case_id, r.analytic, r.oracle, r.relative_error, tolerance_override)
            for r in reports
        ]
    return reports


def reports_to_csv(reports, seed) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case_id", "seed", "analytic_re", "analytic_im", "oracle_re", "oracle_im",
                "relative_error", "tolerance", "pass"])
    for r in reports:
        w.writerow([r.case_id, seed, repr(r.analytic.real), repr(r.analytic.imag),
                    repr(r.oracle.real), repr(r.oracle.imag), repr(r.relative_error),
                    repr(r.tolerance), int(r.passed)])
    return buf.getvalue()
