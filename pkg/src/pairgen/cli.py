"""
Command-line driver: configuration ingestion, scenario runs, validation.

A scenario is a JSON file. Wavelengths are in nm; lengths carry their unit
in the key name (``length_mm``, ``thickness_nm``, ``poling_period_um``...).
Unknown keys are rejected and every violation is reported at once.

Outputs are CSV files whose numbers use Python's shortest round-trip float
repr, plus a JSON manifest. Node evaluation is split into fixed-size chunks
that do not depend on the worker count, and all reductions run after the
chunks are reassembled, so CSV bytes are identical for any ``--threads``.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import jsonschema
import numpy as np

from . import __version__
from .amplitudes import PumpSpectrum, TwoPhotonKernel
from .constants import CONSTANTS
from .dispersion import FORWARD, DirectionChannel, load_media
from .errors import ConfigError, PairgenError
from .oracle import DEFAULT_SEED, reports_to_csv, run_validation
from .spectra import (
    FrequencyGrid,
    density_map,
    pair_rate,
    qpm_detuning_limit,
    relative_surface_contribution,
    signal_spectrum,
)
from .structures import (
    BulkCrystalSpec,
    Layer,
    LayeredStackSpec,
    PoledCrystalSpec,
    bulk_kernel,
    calibrate_index_scale,
    optimum_poling_period,
    poled_kernel,
    stack_kernel,
)

log = logging.getLogger("pairgen")

C = CONSTANTS.c
CHUNK_NODES = 32

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3

# ---------------------------------------------------------------------------
# schema

_POS = {"type": "number", "exclusiveMinimum": 0}
_NAME = {"type": "string", "minLength": 1}
_LENGTH = {"length_mm": _POS, "length_um": _POS, "length_nm": _POS}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["structure", "pump", "grid"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "media_file": {"type": "string"},
        "structure": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": ["bulk", "poled", "stack"]}},
        },
        "pump": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "wavelength_nm"],
            "properties": {
                "kind": {"enum": ["cw", "pulsed"]},
                "wavelength_nm": _POS,
                "bandwidth_nm": _POS,
                "amplitude": _POS,
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode", "nodes"],
            "properties": {
                "mode": {"enum": ["cw-line", "full-2d"]},
                "signal_nm": {
                    "oneOf": [
                        {"const": "auto"},
                        {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                    ]
                },
                "idler_nm": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                "nodes": {"type": "integer", "minimum": 16},
                "idler_nodes": {"type": "integer", "minimum": 16},
                "lobes": {"type": "integer", "minimum": 0},
            },
        },
        "toggles": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "surface": {"type": "boolean"},
                "channels": {
                    "type": "array",
                    "minItems": 1,
                    "uniqueItems": True,
                    "items": {"type": "string", "pattern": "^[FB],?[FB][FB]$"},
                },
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["from_nm", "to_nm", "points"],
            "properties": {
                "from_nm": _POS,
                "to_nm": _POS,
                "points": {"type": "integer", "minimum": 2},
            },
        },
    },
}

STRUCTURE_SCHEMAS = {
    "bulk": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "medium"],
        "properties": {"type": {}, "medium": _NAME, "surround": _NAME, **_LENGTH},
    },
    "poled": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "medium", "poling_period_um"],
        "properties": {
            "type": {},
            "medium": _NAME,
            "surround": _NAME,
            **_LENGTH,
            "poling_period_um": {"oneOf": [_POS, {"const": "optimum"}]},
            "duty_cycle": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        },
    },
    "stack": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "layers"],
        "properties": {
            "type": {},
            "layers": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["medium"],
                    "properties": {
                        "medium": _NAME,
                        "thickness_nm": _POS,
                        "thickness_um": _POS,
                        "d_sign": {"enum": [1, -1]},
                    },
                },
            },
            "ambient_in": _NAME,
            "ambient_out": _NAME,
            "pump_angle_deg": {"type": "number", "minimum": 0, "exclusiveMaximum": 90},
            "signal_angle_deg": {"type": "number", "exclusiveMinimum": -90, "exclusiveMaximum": 90},
            "idler_angle_deg": {"type": "number", "exclusiveMinimum": -90, "exclusiveMaximum": 90},
            "index_scale": {"oneOf": [_POS, {"const": "calibrate"}]},
        },
    },
}


def _where(path_prefix, error):
    parts = list(path_prefix) + list(error.absolute_path)
    text = ""
    for p in parts:
        text += f"[{p}]" if isinstance(p, int) else (f".{p}" if text else str(p))
    return text or "<root>"


def _schema_problems(schema, doc, prefix=()):
    v = jsonschema.Draft202012Validator(schema)
    errs = sorted(v.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    return [f"{_where(prefix, e)}: {e.message}" for e in errs]


# ---------------------------------------------------------------------------
# parsed configuration


@dataclass
class ScenarioConfig:
    """Validated scenario; ``raw`` is the document exactly as read."""

    raw: dict
    media: object
    source: str = ""
    sweep: tuple | None = None
    surface: bool = True
    channels: tuple = (FORWARD,)
    seed: int = DEFAULT_SEED
    output_dir: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def structure(self):
        return self.raw["structure"]

    @property
    def pump_wavelength(self):
        return self.raw["pump"]["wavelength_nm"] * 1e-9

    def sweep_wavelengths(self):
        if self.sweep is None:
            return None
        lo, hi, n = self.sweep
        return np.linspace(lo, hi, n) * 1e-9


def _length_m(obj, stem, path, problems):
    keys = [k for k in (f"{stem}_mm", f"{stem}_um", f"{stem}_nm") if k in obj]
    if len(keys) != 1:
        problems.append(f"{path}: give exactly one of {stem}_mm, {stem}_um, {stem}_nm")
        return None
    scale = {"mm": 1e-3, "um": 1e-6, "nm": 1e-9}[keys[0][-2:]]
    return obj[keys[0]] * scale


def _check_window(problems, media, names, lam, what):
    for name in names:
        med = media.media.get(name)
        if med is None:
            continue
        lo, hi = med.window
        if not lo <= lam <= hi:
            problems.append(
                f"{what}: {lam * 1e9:.3f} nm outside transparency window of {name} "
                f"[{lo * 1e9:.1f}, {hi * 1e9:.1f}] nm"
            )


def _medium_names(st):
    if st["type"] == "stack":
        names = [l["medium"] for l in st["layers"]]
        names += [st.get("ambient_in", "vacuum"), st.get("ambient_out", "vacuum")]
    else:
        names = [st["medium"], st.get("surround", "vacuum")]
    return list(dict.fromkeys(names))


def _semantic_problems(doc, media):
    problems = []
    st, pump, grid = doc["structure"], doc["pump"], doc["grid"]
    kind = st["type"]
    names = _medium_names(st)
    for n in names:
        if n not in media:
            problems.append(f"structure: unknown medium {n!r} (known: {', '.join(sorted(media.media))})")
    if kind in ("bulk", "poled"):
        _length_m(st, "length", "structure", problems)
    else:
        for j, layer in enumerate(st["layers"]):
            _length_m(layer, "thickness", f"structure.layers[{j}]", problems)
        if not any(media.media.get(l["medium"]) is not None
                   and not media.media[l["medium"]].is_linear for l in st["layers"]):
            problems.append("structure.layers: no nonlinear layer (all d_eff are zero)")
        for amb in ("ambient_in", "ambient_out"):
            med = media.media.get(st.get(amb, "vacuum"))
            if med is not None and not med.is_linear:
                problems.append(f"structure.{amb}: ambient medium must be linear")

    if pump["kind"] == "cw" and grid["mode"] != "cw-line":
        problems.append("grid.mode: a cw pump needs the cw-line grid")
    if pump["kind"] == "pulsed":
        if grid["mode"] != "full-2d":
            problems.append("grid.mode: a pulsed pump needs the full-2d grid")
        if "bandwidth_nm" not in pump:
            problems.append("pump: pulsed pump needs bandwidth_nm")
    sig = grid.get("signal_nm")
    if sig is None:
        problems.append("grid: signal_nm is required")
    elif sig == "auto":
        if kind == "stack" or grid["mode"] != "cw-line":
            problems.append("grid.signal_nm: 'auto' is only available for bulk and poled cw-line runs")
    elif not sig[0] < sig[1]:
        problems.append("grid.signal_nm: range must be increasing")
    if grid["mode"] == "full-2d":
        idl = grid.get("idler_nm")
        if idl is None:
            problems.append("grid: full-2d grids need idler_nm")
        elif not idl[0] < idl[1]:
            problems.append("grid.idler_nm: range must be increasing")
    elif "idler_nm" in grid or "idler_nodes" in grid:
        problems.append("grid: idler_nm/idler_nodes only apply to full-2d grids")

    chans = doc.get("toggles", {}).get("channels")
    if chans is not None and kind != "stack" and any(
        DirectionChannel.parse(c) != FORWARD for c in chans
    ):
        problems.append("toggles.channels: bulk and poled crystals support the forward channel only")

    pumps = [pump["wavelength_nm"] * 1e-9]
    if "sweep" in doc:
        sw = doc["sweep"]
        pumps = list(np.linspace(sw["from_nm"], sw["to_nm"], sw["points"]) * 1e-9)
    for lam_p in pumps:
        _check_window(problems, media, names, lam_p, "pump wavelength")
        if isinstance(sig, list) and sig[0] < sig[1]:
            wp = 2 * np.pi * C / lam_p
            for lam_s in sig:
                lam_s *= 1e-9
                _check_window(problems, media, names, lam_s, "signal wavelength")
                if grid["mode"] == "cw-line":
                    wi = wp - 2 * np.pi * C / lam_s
                    if wi <= 0:
                        problems.append(f"grid.signal_nm: {lam_s * 1e9:.3f} nm is shorter than the pump")
                    else:
                        _check_window(problems, media, names, 2 * np.pi * C / wi, "idler wavelength")
    if grid["mode"] == "full-2d" and isinstance(grid.get("idler_nm"), list):
        for lam_i in grid["idler_nm"]:
            _check_window(problems, media, names, lam_i * 1e-9, "idler wavelength")
    return list(dict.fromkeys(problems))


def parse_config(path, overrides=None) -> ScenarioConfig:
    """Read and validate a scenario file.

    ``overrides`` is merged into the top level before validation (used by
    ``sweep-pump``). Raises :class:`ConfigError` listing every problem.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if overrides:
        doc = {**doc, **overrides}
    return config_from_dict(doc, source=str(path), base_dir=os.path.dirname(os.path.abspath(path)))


def config_from_dict(doc, source="<dict>", base_dir=".") -> ScenarioConfig:
    problems = _schema_problems(SCHEMA, doc) if isinstance(doc, dict) else ["<root>: must be an object"]
    if problems and not isinstance(doc, dict):
        raise ConfigError(problems)
    st = doc.get("structure")
    if isinstance(st, dict) and st.get("type") in STRUCTURE_SCHEMAS:
        problems += _schema_problems(STRUCTURE_SCHEMAS[st["type"]], st, ("structure",))
    if problems:
        raise ConfigError(problems)

    media_file = doc.get("media_file")
    try:
        if media_file is not None and not os.path.isabs(media_file):
            media_file = os.path.join(base_dir, media_file)
        media = load_media(media_file)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"media_file: cannot load media fixture ({exc})") from None

    problems = _semantic_problems(doc, media)
    if problems:
        raise ConfigError(problems)

    toggles = doc.get("toggles", {})
    chans = tuple(DirectionChannel.parse(c) for c in toggles.get("channels", ["FFF"]))
    sw = doc.get("sweep")
    return ScenarioConfig(
        raw=copy.deepcopy(doc),
        media=media,
        source=source,
        sweep=None if sw is None else (sw["from_nm"], sw["to_nm"], sw["points"]),
        surface=toggles.get("surface", True),
        channels=chans,
        seed=doc.get("seed", DEFAULT_SEED),
        output_dir=doc.get("output_dir"),
    )


# ---------------------------------------------------------------------------
# scenario construction


def build_structure(cfg: ScenarioConfig, pump_wavelength: float):
    """Structure spec for one pump wavelength plus what was resolved on the way."""
    st, media = cfg.structure, cfg.media
    info = {}
    if st["type"] == "bulk":
        spec = BulkCrystalSpec(media[st["medium"]], _length_m(st, "length", "", []),
                               media[st.get("surround", "vacuum")])
    elif st["type"] == "poled":
        med = media[st["medium"]]
        period = st["poling_period_um"]
        period = optimum_poling_period(med, pump_wavelength) if period == "optimum" else period * 1e-6
        info["poling_period_um"] = period * 1e6
        spec = PoledCrystalSpec(med, _length_m(st, "length", "", []), period,
                                st.get("duty_cycle", 0.5), media[st.get("surround", "vacuum")])
    else:
        layers = tuple(
            Layer(media[l["medium"]], _length_m(l, "thickness", "", []), l.get("d_sign", 1))
            for l in st["layers"]
        )
        idler = st.get("idler_angle_deg")
        spec = LayeredStackSpec(
            layers,
            media[st.get("ambient_in", "vacuum")],
            media[st.get("ambient_out", "vacuum")],
            math.radians(st.get("pump_angle_deg", 0.0)),
            math.radians(st.get("signal_angle_deg", 0.0)),
            None if idler is None else math.radians(idler),
        )
        scale = st.get("index_scale", 1.0)
        if scale == "calibrate":
            scale = cfg.extra.get("calibrated_index_scale")
            if scale is None:
                scale = calibrate_index_scale(spec, cfg.pump_wavelength)
                cfg.extra["calibrated_index_scale"] = scale
        info["index_scale"] = scale
        spec = replace(spec, index_scale=scale)
    return spec, info


def build_pump(cfg: ScenarioConfig, wavelength: float) -> PumpSpectrum:
    p = cfg.raw["pump"]
    amp = p.get("amplitude", 1.0)
    if p["kind"] == "cw":
        return PumpSpectrum.cw(wavelength, amp)
    return PumpSpectrum.pulsed(wavelength, p["bandwidth_nm"] * 1e-9, amp)


def build_grid(cfg: ScenarioConfig, spec, pump: PumpSpectrum) -> FrequencyGrid:
    g = cfg.raw["grid"]
    if g["mode"] == "cw-line":
        if g.get("signal_nm", "auto") == "auto":
            wp = pump.center_omega
            medium = spec.medium
            if isinstance(spec, PoledCrystalSpec):
                length, grating = spec.total_length, 2 * np.pi / spec.poling_period
            else:
                length, grating = spec.length, 0.0
            d = qpm_detuning_limit(medium, wp, length, grating, g.get("lobes", 3))
            return FrequencyGrid.cw_line(wp, 0.5 * wp - d, 0.5 * wp + d, g["nodes"])
        lo, hi = g["signal_nm"]
        return FrequencyGrid.cw_line_wavelength(pump.wavelength, lo * 1e-9, hi * 1e-9, g["nodes"])
    s_lo, s_hi = (2 * np.pi * C / (x * 1e-9) for x in reversed(g["signal_nm"]))
    i_lo, i_hi = (2 * np.pi * C / (x * 1e-9) for x in reversed(g["idler_nm"]))
    return FrequencyGrid.full_2d((s_lo, s_hi), (i_lo, i_hi), g["nodes"], g.get("idler_nodes"))


def _kernel_fn(spec, pump, channels):
    if isinstance(spec, BulkCrystalSpec):
        return lambda grid: bulk_kernel(spec, pump, grid)
    if isinstance(spec, PoledCrystalSpec):
        return lambda grid: poled_kernel(spec, pump, grid)
    return lambda grid: stack_kernel(spec, pump, grid, channels)


def _merge(parts, grid):
    """Reassemble chunk kernels along the signal axis."""
    out = []
    for tag in range(2):
        ks = [p[tag] for p in parts]
        inv = None
        if any(k.invalid is not None for k in ks):
            inv = np.concatenate([
                k.invalid if k.invalid is not None else np.zeros(k.volume.shape, bool) for k in ks
            ])
        flags = {}
        for k in ks:
            for name, val in k.flags.items():
                flags[name] = flags.get(name, 0) + val
        chan = ks[0].channel if all(k.channel == ks[0].channel for k in ks) else None
        out.append(TwoPhotonKernel(
            ks[0].field_tag, chan, grid,
            np.concatenate([k.volume for k in ks]),
            np.concatenate([k.surface for k in ks]),
            ks[0].provenance, inv, flags,
        ))
    return tuple(out)


def evaluate_kernels(spec, pump, grid, channels=(FORWARD,), threads=1):
    """Kernels on ``grid`` evaluated chunk-wise; chunking is independent of ``threads``."""
    fn = _kernel_fn(spec, pump, channels)
    n_chunks = max(1, math.ceil(len(grid.omega_s) / CHUNK_NODES))
    chunks = grid.split(n_chunks)
    if threads <= 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, chunks))
    return _merge(parts, grid)


@dataclass
class PointResult:
    pump_wavelength: float
    grid: FrequencyGrid
    lam_s: np.ndarray
    spectra: dict
    n: dict
    relative_contribution: float
    info: dict
    invalid_nodes: int
    perturbative_flags: int
    density: dict | None = None
    convergence: dict | None = None


def _observables(sig, idl, surface):
    if not surface:
        sig, idl = sig.without_surface(), idl.without_surface()
    maps = {v: density_map(sig, idl, v) for v in ("vol", "surf", "vol+surf")}
    spectra = {v: signal_spectrum(m)[1] for v, m in maps.items()}
    n = {v: pair_rate(m) for v, m in maps.items()}
    return maps, spectra, n


def _rel_change(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def run_point(cfg: ScenarioConfig, pump_wavelength: float, threads=1, surface=None,
              convergence=True) -> PointResult:
    surface = cfg.surface if surface is None else surface
    spec, info = build_structure(cfg, pump_wavelength)
    pump = build_pump(cfg, pump_wavelength)
    grid = build_grid(cfg, spec, pump)
    sig, idl = evaluate_kernels(spec, pump, grid, cfg.channels, threads)
    maps, spectra, n = _observables(sig, idl, surface)
    rel = relative_surface_contribution(n["vol+surf"], n["vol"])
    conv = None
    if convergence:
        fine = grid.refined()
        fs, fi = evaluate_kernels(spec, pump, fine, cfg.channels, threads)
        _, fspec, fn = _observables(fs, fi, surface)
        conv = {
            "nodes": int(len(grid.omega_s)),
            "refined_nodes": int(len(fine.omega_s)),
            "N_rel_change": max(_rel_change(n[v], fn[v]) for v in ("vol", "vol+surf")),
            "S_s_rel_change": max(
                float(np.max(np.abs(fspec[v][::2] - spectra[v])) / np.max(np.abs(spectra[v])))
                if np.any(spectra[v]) else 0.0
                for v in ("vol", "vol+surf")
            ),
        }
    lam_s = 2 * np.pi * C / grid.omega_s
    density = None
    if grid.mode == "full-2d":
        density = {v: m.values for v, m in maps.items()}
    return PointResult(
        pump_wavelength, grid, lam_s, spectra, n, rel, info,
        invalid_nodes=sig.invalid_count,
        perturbative_flags=int(sig.flags.get("perturbative", 0)),
        density=density,
        convergence=conv,
    )


# ---------------------------------------------------------------------------
# output


def fmt(x) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(x))


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def spectrum_csv(res: PointResult) -> str:
    s_vol, s_surf, s_tot = res.spectra["vol"], res.spectra["surf"], res.spectra["vol+surf"]
    rows = []
    for j in range(len(res.lam_s)):
        ratio = s_tot[j] / s_vol[j] if s_vol[j] != 0 else float("nan")
        rows.append([fmt(res.lam_s[j] * 1e9), fmt(s_vol[j]), fmt(s_surf[j]), fmt(s_tot[j]), fmt(ratio)])
    return _csv_text(["lambda_s_nm", "S_vol", "S_surf", "S_total", "ratio_total_over_vol"], rows)


def density_csv(res: PointResult) -> str:
    lam_i = 2 * np.pi * C / res.grid.omega_i
    d = res.density
    rows = [
        [fmt(res.lam_s[a] * 1e9), fmt(lam_i[b] * 1e9),
         fmt(d["vol"][a, b]), fmt(d["surf"][a, b]), fmt(d["vol+surf"][a, b])]
        for a in range(len(res.lam_s)) for b in range(len(lam_i))
    ]
    return _csv_text(["lambda_s_nm", "lambda_i_nm", "n_vol", "n_surf", "n_total"], rows)


def summary_csv(results, sweep=False) -> str:
    if not sweep:
        r = results[0]
        return _csv_text(["N_vol", "N_total", "relative_surface_contribution"],
                         [[fmt(r.n["vol"]), fmt(r.n["vol+surf"]), fmt(r.relative_contribution)]])
    rows = []
    for r in results:
        period = r.info.get("poling_period_um")
        rows.append([
            fmt(r.pump_wavelength * 1e9),
            "" if period is None else fmt(period),
            "" if period is None else fmt(1.0 / period),
            fmt(r.n["vol"]), fmt(r.n["vol+surf"]), fmt(r.relative_contribution),
        ])
    return _csv_text(["lambda_p_nm", "poling_period_um", "inverse_poling_period_per_um",
                      "N_vol", "N_total", "relative_surface_contribution"], rows)


def _point_manifest(r: PointResult, files):
    return {
        "pump_wavelength_nm": r.pump_wavelength * 1e9,
        **r.info,
        "grid": {"mode": r.grid.mode, "shape": list(r.grid.shape)},
        "convergence": r.convergence,
        "invalid_nodes": r.invalid_nodes,
        "perturbative_flags": r.perturbative_flags,
        "files": files,
    }


def run_scenario(cfg: ScenarioConfig, out_dir, threads=1, surface=None, convergence=True):
    """Run a scenario (single point or pump sweep) and write all outputs.

    Returns the list of :class:`PointResult`.
    """
    t0 = time.perf_counter()
    sweep = cfg.sweep_wavelengths()
    pumps = [cfg.pump_wavelength] if sweep is None else list(sweep)
    results, points = [], []
    for k, lam in enumerate(pumps):
        log.info("point %d/%d: pump %.3f nm", k + 1, len(pumps), lam * 1e9)
        r = run_point(cfg, lam, threads, surface, convergence)
        results.append(r)
        if sweep is None:
            files = {"spectrum.csv": spectrum_csv(r)}
            if r.density is not None:
                files["density_map.csv"] = density_csv(r)
        else:
            stem = os.path.join("spectra", f"spectrum_{k:03d}")
            files = {f"{stem}.csv": spectrum_csv(r)}
            if r.density is not None:
                files[f"{stem}_density_map.csv"] = density_csv(r)
        for name, text in files.items():
            atomic_write(os.path.join(out_dir, name), text)
        points.append(_point_manifest(r, sorted(files)))
    atomic_write(os.path.join(out_dir, "summary.csv"), summary_csv(results, sweep is not None))
    manifest = {
        "artifact": "pairgen",
        "version": __version__,
        "media_fixture_version": cfg.media.version,
        "config_source": cfg.source,
        "config": cfg.raw,
        "surface": cfg.surface if surface is None else surface,
        "threads": threads,
        "seed": cfg.seed,
        "points": points,
        "invalid_nodes": sum(r.invalid_nodes for r in results),
        "wall_time_s": time.perf_counter() - t0,
    }
    atomic_write(os.path.join(out_dir, "manifest.json"), json.dumps(manifest, indent=2) + "\n")
    return results


# ---------------------------------------------------------------------------
# validate


def validation_table(reports) -> str:
    suites = {}
    for r in reports:
        suites.setdefault(r.case_id.split("-")[0], []).append(r)
    lines = [f"{'suite':<10}{'cases':>7}{'failed':>8}{'max rel. error':>17}{'tolerance':>12}"]
    for name, rs in suites.items():
        worst = max(r.relative_error for r in rs)
        failed = sum(not r.passed for r in rs)
        tol = max(r.tolerance for r in rs)
        lines.append(f"{name:<10}{len(rs):>7}{failed:>8}{worst:>17.3e}{tol:>12.1e}")
    bad = [r for r in reports if not r.passed]
    for r in bad[:50]:
        lines.append(f"FAIL {r.case_id}: relative error {r.relative_error:.3e} > {r.tolerance:.1e}")
    if len(bad) > 50:
        lines.append(f"... {len(bad) - 50} more failures")
    lines.append(f"{len(reports) - len(bad)}/{len(reports)} cases passed")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point


def _parser():
    p = argparse.ArgumentParser(prog="pairgen", description=__doc__.strip().splitlines()[0])
    p.add_argument("--version", action="version", version=f"pairgen {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario (or the sweep it defines)")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--no-surface", action="store_true", help="volume terms only")

    sw = sub.add_parser("sweep-pump", help="sweep the pump wavelength of a scenario")
    sw.add_argument("--config", required=True)
    sw.add_argument("--from-nm", type=float, required=True)
    sw.add_argument("--to-nm", type=float, required=True)
    sw.add_argument("--points", type=int, required=True)
    sw.add_argument("--out", help="output directory (default: output_dir from the config)")
    sw.add_argument("--threads", type=int, default=1)
    sw.add_argument("--no-surface", action="store_true")

    va = sub.add_parser("validate", help="run the oracle suites")
    va.add_argument("--seed", type=int, default=DEFAULT_SEED)
    va.add_argument("--tolerance", type=float, help="override every suite tolerance")
    va.add_argument("--out", help="directory for validation.csv")
    return p


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"pairgen: warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="pairgen: %(message)s", stream=sys.stderr)
    warnings.simplefilter("once")
    warnings.showwarning = _show_warning
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "simulate":
            cfg = parse_config(args.config)
            out = args.out
        else:
            if args.points < 2:
                raise ConfigError("--points must be at least 2")
            cfg = parse_config(args.config, {"sweep": {
                "from_nm": args.from_nm, "to_nm": args.to_nm, "points": args.points}})
            out = args.out or cfg.output_dir
            if out is None:
                raise ConfigError("no output directory: pass --out or set output_dir")
        results = run_scenario(cfg, out, args.threads, False if args.no_surface else None)
        last = results[-1]
        print(f"wrote {out}: {len(results)} point(s), N_total/N_vol - 1 = {fmt(last.relative_contribution)}")
        return EXIT_OK
    except ConfigError as exc:
        print("pairgen: configuration error", file=sys.stderr)
        for p in exc.problems:
            print(f"  - {p}", file=sys.stderr)
        return EXIT_CONFIG
    except (PairgenError, ValueError, ArithmeticError) as exc:
        print(f"pairgen: numerical/domain error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _cmd_validate(args) -> int:
    reports = run_validation(args.seed, args.tolerance)
    print(validation_table(reports))
    if args.out:
        atomic_write(os.path.join(args.out, "validation.csv"), reports_to_csv(reports, args.seed))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
