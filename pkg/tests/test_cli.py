import csv
import json
import math

import pytest

from optomech import cli, io, presets
from optomech.errors import ConfigError


def read_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.mark.parametrize(
    "text,value",
    [("10 MHz", 2 * math.pi * 1e7), ("1kHz", 2 * math.pi * 1e3), ("2.5 GHz", 2 * math.pi * 2.5e9),
     ("3e6 rad/s", 3e6), ("50 Hz", 2 * math.pi * 50)],
)
def test_parse_frequency(text, value):
    assert cli.parse_frequency(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["10", "1e6", "5 furlongs", "MHz"])
def test_parse_frequency_rejects(text):
    with pytest.raises(ConfigError):
        cli.parse_frequency(text)


def test_missing_unit_exit_code(tmp_path, capsys):
    code = cli.main(["squeeze", "--set", "mech_freq=1e6", "--out", str(tmp_path)])
    assert code == 2
    assert "unit" in capsys.readouterr().err


def test_unknown_override_exit_code(tmp_path):
    assert cli.main(["pulsed", "--set", "bogus=1", "--out", str(tmp_path)]) == 2


def test_argparse_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 2


def test_config_round_trip():
    cfg = cli.RunConfig("jumps", preset="fig4a", overrides={"dim": 12}, seed=3, trajectories=4)
    again = cli.RunConfig.from_json(cfg.to_json())
    assert again == cfg


def test_config_rejects_unknown():
    with pytest.raises(ConfigError):
        cli.RunConfig.from_dict({"protocol": "pulsed", "colour": "blue"})
    with pytest.raises(ConfigError):
        cli.RunConfig("warp")
    with pytest.raises(ConfigError):
        cli.RunConfig("pulsed", preset="nope")
    with pytest.raises(ConfigError):
        cli.RunConfig.from_json("{not json")


def test_pulsed_vacuum_row(tmp_path):
    assert cli.main(["pulsed", "--n0", "0", "--r", "0", "--out", str(tmp_path)]) == 0
    row = read_rows(tmp_path / "pulsed.csv")[0]
    assert float(row["Delta_EPR"]) == 2.0
    assert float(row["r0"]) == 0.0
    assert (tmp_path / "regime.txt").exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert {f["file"] for f in man["files"]} >= {"pulsed.csv", "epr_curve.csv", "regime.txt"}
    for f in man["files"]:
        assert f["sha256"] == io.sha256(tmp_path / f["file"])


def test_presets_table(capsys):
    assert len(presets.PRESETS) >= 7
    assert cli.main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in presets.PRESETS:
        assert name in out
    assert presets.system_params("fig5").n_th == pytest.approx(833, rel=1e-3)
    assert presets.get_preset("fig8").value("temperatures") == [1e-3, 100e-6, 10e-6]


def test_jumps_deterministic(tmp_path):
    args = ["jumps", "--preset", "fig4c", "--trajectories", "2", "--seed", "11",
            "--set", "t_final=0.5", "--grid-points", "50"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "trajectory_0.csv" in names and "ensemble.csv" in names
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_seed_changes_output(tmp_path):
    base = ["jumps", "--preset", "fig4b", "--trajectories", "1", "--set", "t_final=0.3", "--grid-points", "20"]
    cli.main(base + ["--seed", "1", "--out", str(tmp_path / "a")])
    cli.main(base + ["--seed", "2", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a/trajectory_0.csv").read_bytes() != (tmp_path / "b/trajectory_0.csv").read_bytes()


def test_interference_svg(tmp_path):
    assert cli.main(["interference", "--format", "both", "--grid-points", "101", "--out", str(tmp_path)]) == 0
    svg = (tmp_path / "interference.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 3
    rows = read_rows(tmp_path / "interference.csv")
    assert len(rows) == 101
    assert float(rows[0]["visibility_T0.001"]) == pytest.approx(1.0)


def test_feasibility_report(tmp_path):
    assert cli.main(["interference", "--preset", "feasibility", "--out", str(tmp_path)]) == 0
    assert "535" in (tmp_path / "feasibility.txt").read_text()


def test_steady_small_grid(tmp_path):
    assert cli.main(["steady", "--grid-points", "3", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "steady.csv")
    assert [float(r["power_ratio"]) for r in rows] == [0.0, 1.0, 2.0]
    assert float(rows[1]["E_N"]) == pytest.approx(0.336, abs=2e-3)


def test_csv_text_format():
    text = io.csv_text({"a": [1.0, 0.1], "b": [2, 3]}, {"note": "x"})
    assert text == "# note: x\na,b\n1,2\n0.1,3\n"
    with pytest.raises(ValueError):
        io.csv_text({"a": [1], "b": [1, 2]})


def test_svg_escapes():
    s = io.svg_plot([("a<b", [0, 1], [0, 1])], title="x & y")
    assert "a&lt;b" in s and "x &amp; y" in s
