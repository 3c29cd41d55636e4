import csv
import json
from importlib import resources

import pytest

from pairgen.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, main, parse_config
from pairgen.errors import ConfigError


def shipped(name):
    return str(resources.files("pairgen.configs").joinpath(f"{name}.json"))


def write(tmp_path, doc, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


BULK = {
    "structure": {"type": "bulk", "medium": "LiNbO3_e", "length_um": 10},
    "pump": {"kind": "cw", "wavelength_nm": 532},
    "grid": {"mode": "cw-line", "signal_nm": [950, 1200], "nodes": 33},
}

POLED = {
    "structure": {"type": "poled", "medium": "LiNbO3_e", "length_mm": 0.5, "poling_period_um": "optimum"},
    "pump": {"kind": "cw", "wavelength_nm": 400},
    "grid": {"mode": "cw-line", "signal_nm": "auto", "nodes": 65},
}


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_stack_config_parses():
    cfg = parse_config(shipped("gan_aln_stack"))
    layers = cfg.structure["layers"]
    assert len(layers) == 49
    assert sum(l["medium"] == "GaN_o" and l["thickness_nm"] == 117 for l in layers) == 25
    assert sum(l["medium"] == "AlN_o" and l["thickness_nm"] == 180 for l in layers) == 24
    assert len(cfg.channels) == 8


def test_all_shipped_configs_parse():
    for name in ("gan_aln_stack", "ppln_pump_sweep", "bulk_linbo3_film", "poled_linbo3_pulsed"):
        parse_config(shipped(name))


def test_negative_thickness_names_field(tmp_path):
    doc = json.load(open(shipped("gan_aln_stack")))
    doc["structure"]["layers"][3]["thickness_nm"] = -5
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, doc))
    assert any("structure.layers[3].thickness_nm" in p for p in err.value.problems)


def test_unknown_keys_all_listed(tmp_path):
    doc = {**BULK, "colour": "blue", "pump": {**BULK["pump"], "phase": 1}}
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, doc))
    text = "\n".join(err.value.problems)
    assert "'colour'" in text and "'phase'" in text
    assert len(err.value.problems) >= 2


def test_every_violation_reported(tmp_path):
    doc = {**BULK, "grid": {"mode": "cw-line", "signal_nm": [950, 1200], "nodes": 4},
           "structure": {"type": "bulk", "medium": "LiNbO3_e", "length_um": -1}}
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, doc))
    paths = " ".join(err.value.problems)
    assert "grid.nodes" in paths and "structure.length_um" in paths


def test_out_of_window(tmp_path):
    doc = {**BULK, "pump": {"kind": "cw", "wavelength_nm": 250}}
    with pytest.raises(ConfigError, match="outside transparency window"):
        parse_config(write(tmp_path, doc))


def test_semantic_checks(tmp_path):
    doc = {**BULK, "structure": {"type": "bulk", "medium": "unobtainium", "length_um": 1, "length_mm": 1}}
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, doc))
    text = " ".join(err.value.problems)
    assert "unobtainium" in text and "exactly one of length_mm" in text


def test_missing_and_malformed(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(str(tmp_path / "none.json"))
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(str(p))


def test_simulate_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--config", write(tmp_path, BULK), "--out", str(out)]) == EXIT_OK
    spec = rows(out / "spectrum.csv")
    assert list(spec[0]) == ["lambda_s_nm", "S_vol", "S_surf", "S_total", "ratio_total_over_vol"]
    assert len(spec) == 33
    summ = rows(out / "summary.csv")
    assert list(summ[0]) == ["N_vol", "N_total", "relative_surface_contribution"]
    man = json.load(open(out / "manifest.json"))
    assert man["config"] == BULK
    assert man["media_fixture_version"] == "1.0"
    assert man["points"][0]["convergence"]["refined_nodes"] == 65
    assert "wall_time_s" in man and man["invalid_nodes"] == 0
    assert not list(out.glob(".tmp-*"))


def test_no_surface_ratio_is_one(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--config", write(tmp_path, BULK), "--out", str(out), "--no-surface"]) == 0
    assert {r["ratio_total_over_vol"] for r in rows(out / "spectrum.csv")} == {"1.0"}
    assert rows(out / "summary.csv")[0]["relative_surface_contribution"] == "0.0"


def test_rerun_and_threads_byte_identical(tmp_path):
    cfg = write(tmp_path, POLED)
    outs = []
    for k, threads in enumerate(("1", "8", "1")):
        out = tmp_path / f"o{k}"
        assert main(["simulate", "--config", cfg, "--out", str(out), "--threads", threads]) == 0
        outs.append(out)
    for name in ("spectrum.csv", "summary.csv"):
        data = [(o / name).read_bytes() for o in outs]
        assert data[0] == data[1] == data[2]


def test_full_2d_density_map(tmp_path):
    doc = {
        "structure": {"type": "bulk", "medium": "LiNbO3_e", "length_um": 20},
        "pump": {"kind": "pulsed", "wavelength_nm": 532, "bandwidth_nm": 1},
        "grid": {"mode": "full-2d", "signal_nm": [1000, 1130], "idler_nm": [1000, 1130], "nodes": 16,
                 "idler_nodes": 20},
    }
    out = tmp_path / "o"
    assert main(["simulate", "--config", write(tmp_path, doc), "--out", str(out)]) == 0
    dm = rows(out / "density_map.csv")
    assert len(dm) == 16 * 20
    assert list(dm[0]) == ["lambda_s_nm", "lambda_i_nm", "n_vol", "n_surf", "n_total"]


def test_pump_grid_mismatch(tmp_path):
    doc = {**BULK, "pump": {"kind": "pulsed", "wavelength_nm": 532}}
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, doc))
    text = " ".join(err.value.problems)
    assert "full-2d" in text and "bandwidth_nm" in text


def test_config_error_exit(tmp_path, capsys):
    doc = {**BULK, "extra": 1}
    assert main(["simulate", "--config", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "'extra'" in capsys.readouterr().err


def test_numerical_error_exit(tmp_path, capsys):
    # the idler would leave at beyond-grazing angles at every node, so no
    # pairs are generated and the relative contribution is undefined
    doc = {
        "structure": {"type": "stack", "signal_angle_deg": 80,
                      "layers": [{"medium": "GaN_o", "thickness_nm": 200}]},
        "pump": {"kind": "cw", "wavelength_nm": 600},
        "grid": {"mode": "cw-line", "signal_nm": [1000, 1100], "nodes": 16},
    }
    assert main(["simulate", "--config", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == EXIT_NUMERIC
    assert "numerical/domain error" in capsys.readouterr().err


def test_sweep_pump(tmp_path):
    out = tmp_path / "sw"
    args = ["sweep-pump", "--config", write(tmp_path, POLED), "--from-nm", "400", "--to-nm", "800",
            "--points", "4", "--out", str(out)]
    assert main(args) == 0
    summ = rows(out / "summary.csv")
    assert len(summ) == 4
    rel = [float(r["relative_surface_contribution"]) for r in summ]
    assert all(a > b for a, b in zip(rel, rel[1:]))
    assert len(list((out / "spectra").glob("spectrum_*.csv"))) == 4
    assert len(json.load(open(out / "manifest.json"))["points"]) == 4


def test_sweep_needs_output(tmp_path):
    args = ["sweep-pump", "--config", write(tmp_path, POLED), "--from-nm", "400", "--to-nm", "800",
            "--points", "4"]
    assert main(args) == EXIT_CONFIG


def test_validate_pass_and_fail(tmp_path, capsys):
    assert main(["validate", "--out", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "2024/2024 cases passed" in text
    assert len(rows(tmp_path / "validation.csv")) == 2024
    assert main(["validate", "--tolerance", "0"]) == EXIT_VALIDATION
    assert "FAIL volume-" in capsys.readouterr().out
