import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from circarray.cli import main
from circarray.config import parse_config
from circarray.element import AnalyticPatch, Isotropic, sample_pattern, write_tabulated_csv
from circarray.errors import ConfigError


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_empty_config_defaults():
    cfg = parse_config("{}")
    assert cfg.geometry.element_count == 12
    assert cfg.geometry.radius == pytest.approx(9.69e-3)
    assert cfg.geometry.frequency == 28e9
    assert cfg.grid_step == 1.0
    assert cfg.excitation.build(12).description.startswith("broadcast")
    assert isinstance(cfg.element.build(), AnalyticPatch)
    assert cfg.oam.theta == pytest.approx(math.radians(20.0))
    assert cfg.oam.samples == 64


def test_units_converted():
    cfg = parse_config('{"geometry": {"elements": 8, "diameter_mm": 30, "frequency_ghz": 10},'
                       ' "excitation": {"preset": "unicast-B", "steering_deg": 30}}')
    assert cfg.geometry.radius == pytest.approx(15e-3)
    assert cfg.geometry.frequency == pytest.approx(10e9)
    assert cfg.excitation.steering == pytest.approx(math.pi / 6)
    assert parse_config('{"geometry": {"radius_mm": 5}}').geometry.radius == pytest.approx(5e-3)


def test_oam_excitation():
    cfg = parse_config('{"excitation": {"oam_l": 1}}')
    assert cfg.excitation.oam_l == 1
    w = cfg.excitation.build(12).weights
    assert w[1] == pytest.approx(np.exp(1j * math.pi / 6))


def test_modes_and_weights_excitation():
    cfg = parse_config('{"excitation": {"modes": [0, 1], "normalization": "none"}}')
    assert cfg.excitation.build(12).weights[0] == pytest.approx(2.0)
    doc = {"excitation": {"weights": [[1, 0]] * 11 + [[0, 1]]}}
    assert parse_config(json.dumps(doc)).excitation.build(12).weights[11] == 1j
    doc = {"excitation": {"weights": [[1, 0]] * 3}}
    with pytest.raises(ConfigError, match="12 entries"):
        parse_config(json.dumps(doc))


def test_conflicting_excitation():
    with pytest.raises(ConfigError, match="conflicting"):
        parse_config('{"excitation": {"preset": "broadcast", "oam_l": 1}}')


@pytest.mark.parametrize("doc, key", [
    ('{"geometri": {}}', "geometri"),
    ('{"geometry": {"elements": 12, "size": 3}}', "geometry.size"),
    ('{"element": {"kind": "x"}}', "element.kind"),
    ('{"output": {"path": "x"}}', "output.path"),
])
def test_unknown_keys_rejected(doc, key):
    with pytest.raises(ConfigError, match=re.escape(key)):
        parse_config(doc)


@pytest.mark.parametrize("doc, msg", [
    ('{"geometry": {"elements": "12"}}', "geometry.elements: expected integer"),
    ('{"geometry": {"elements": 12.0}}', "geometry.elements: expected integer"),
    ('{"geometry": {"frequency_ghz": true}}', "geometry.frequency_ghz: expected integer or number"),
    ('{"grid": {"step_deg": "fine"}}', "grid.step_deg: expected integer or number"),
    ('{"excitation": {"oam_l": 1.5}}', "excitation.oam_l: expected integer"),
    ('{"oam": {"component": "radial"}}', "oam.component"),
    ('{"excitation": {"preset": "anycast"}}', "excitation.preset"),
    ('{"geometry": []}', "geometry: expected object"),
    ('{"grid": {"step_deg": 0.7}}', "grid.step_deg"),
    ('{"element": {"type": "horn"}}', "element.type"),
    ('{"element": {"hpbw_e_deg": 400}}', "element"),
    ('{"geometry": {"diameter_mm": 19, "radius_mm": 9}}', "geometry"),
    ('{"excitation": {"modes": [0, 9]}}', "excitation"),
    ('{"nearfield": {"points": [61]}}', "nearfield.points"),
])
def test_schema_errors_name_key(doc, msg):
    with pytest.raises(ConfigError, match=re.escape(msg)):
        parse_config(doc)


def test_invalid_json():
    with pytest.raises(ConfigError, match="JSON"):
        parse_config("{geometry: 1}")
    with pytest.raises(ConfigError):
        parse_config("[]")


def test_tabulated_file_resolution(tmp_path):
    with pytest.raises(ConfigError, match="element.file"):
        parse_config('{"element": {"type": "tabulated"}}')
    with pytest.raises(ConfigError, match="not found"):
        parse_config('{"element": {"type": "tabulated", "file": "nope.csv"}}', base_dir=tmp_path)
    write_tabulated_csv(tmp_path / "el.csv", sample_pattern(Isotropic(), 5, 8))
    cfg = parse_config('{"element": {"type": "tabulated", "file": "el.csv"}}', base_dir=tmp_path)
    assert cfg.element.build().variant == "tabulated"


def test_resolved_config_reparses():
    cfg = parse_config('{"excitation": {"modes": [-1, 2], "steering_deg": 15}, "grid": {"step_deg": 2}}')
    again = parse_config(json.dumps(cfg.resolved()))
    assert again.resolved() == cfg.resolved()


def test_cli_pattern_unicast_b(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"excitation": {"preset": "unicast-B"}})
    code, out, _ = _run(capsys, "pattern", "--config", cfg, "--out", str(tmp_path / "o"))
    assert code == 0
    m = re.search(r"peak directivity ([-\d.]+) dBi at theta=([\d.]+) deg", out)
    assert abs(float(m.group(1)) - 8.91) <= 1.5
    assert float(m.group(2)) == 90.0
    side = json.loads((tmp_path / "o" / "pattern.config.json").read_text())
    assert side["config"]["excitation"]["preset"] == "unicast-B"
    header = (tmp_path / "o" / "pattern.csv").read_text().splitlines()[0]
    assert header.startswith("theta_deg,phi_deg")


def test_cli_oam_spectrum(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"excitation": {"oam_l": 2}})
    code, out, _ = _run(capsys, "oam-spectrum", "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    assert "winding = +2" in out
    assert re.search(r"purity\(l=\+2\) = 0\.9", out)
    assert (tmp_path / "oam_spectrum.csv").read_text().startswith("order,re,im,power,purity\n")


def test_cli_nearfield_then_nf2ff(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"excitation": {"oam_l": 1}})
    assert _run(capsys, "nearfield", "--config", cfg, "--out", str(tmp_path))[0] == 0
    assert (tmp_path / "scan.json").exists()
    code, out, _ = _run(capsys, "nf2ff", "--scan", str(tmp_path / "scan.csv"),
                        "--out", str(tmp_path / "ff"), "--grid-deg", "2")
    assert code == 0
    assert "transformed winding = +1" in out
    assert (tmp_path / "ff" / "nf2ff.csv").exists()


def test_cli_cut_and_crosstalk(tmp_path, capsys):
    code, out, _ = _run(capsys, "cut", "--out", str(tmp_path), "--grid-deg", "2")
    assert code == 0
    lines = (tmp_path / "cut_theta90.csv").read_text().splitlines()
    assert lines[0] == "phi_deg,mag_db,phase_deg" and len(lines) == 181
    code, out, _ = _run(capsys, "crosstalk", "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "crosstalk.csv").read_text().splitlines()
    assert len(rows) == 12 and rows[0].startswith(",l=-5")


def test_cli_presets(tmp_path, capsys):
    code, out, _ = _run(capsys, "presets", "--out", str(tmp_path))
    assert code == 0
    assert len(out.strip().splitlines()) == 6
    assert "multicast-C  modes {-5, -4, +4, +5}" in out
    assert json.loads((tmp_path / "presets.json").read_text())["broadcast"] == [0]


def test_cli_quiet(tmp_path, capsys):
    code, out, _ = _run(capsys, "presets", "--out", str(tmp_path), "--quiet")
    assert code == 0 and out == ""


def test_cli_env_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CIRCARRAY_OUT", str(tmp_path / "env"))
    assert _run(capsys, "presets")[0] == 0
    assert (tmp_path / "env" / "presets.config.json").exists()


@pytest.mark.parametrize("argv, fragment", [
    (["pattern", "--grid-deg", "0.7"], "--grid-deg"),
    (["nf2ff"], "scan"),
    (["pattern", "--config", "missing.json"], "cannot read config"),
])
def test_cli_errors_one_line(tmp_path, capsys, argv, fragment):
    code, out, err = _run(capsys, *argv, "--out", str(tmp_path / "o"))
    assert code != 0
    assert len(err.strip().splitlines()) == 1 and fragment in err
    assert not (tmp_path / "o").exists() or not any((tmp_path / "o").iterdir())


def test_cli_conflict_exit(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"excitation": {"preset": "broadcast", "oam_l": 1}})
    code, _, err = _run(capsys, "pattern", "--config", cfg, "--out", str(tmp_path / "o"))
    assert code == 1 and "conflicting" in err


def test_cli_deterministic(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"excitation": {"preset": "multicast-B"}})
    for d in ("a", "b"):
        assert _run(capsys, "pattern", "--config", cfg, "--out", str(tmp_path / d),
                    "--grid-deg", "3")[0] == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["pattern.config.json", "pattern.csv", "pattern.json"]
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "circarray.cli", "presets", "--out", str(tmp_path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "unicast-A" in proc.stdout
