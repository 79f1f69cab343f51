import json
import math

import pytest

from iclab.analytic import mandel_closed_form
from iclab.cli import main, parse_optimize

EQ5 = """\
modes = 3
seeds = [0, 10, 0]
detector = diff-bc
[element] type=squeezer modes=[0,1] r=1.0
[element] type=phase mode=0 probe=true at=0
[element] type=squeezer modes=[0,2] r=0.5
[element] type=bs modes=[1,2]
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "eq5.cfg"
    p.write_text(EQ5)
    return p


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# manifest-hash ")
    header = lines[1].split(",")
    return header, [dict(zip(header, l.split(","))) for l in lines[2:]]


def test_sensitivity_matches_closed_form(cfg, tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["sensitivity", "--config", str(cfg), "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["phi_min_sq"] == pytest.approx(mandel_closed_form(1.0, 0.5, 10.0), rel=1e-9)
    manifest = json.loads((tmp_path / "s.json.manifest.json").read_text())
    assert manifest["run_hash"] == rec["manifest_hash"]


def test_seed_flags(cfg, capsys):
    assert main(["sensitivity", "--config", str(cfg), "--beta", "1000", "--seed-mode", "b"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["phi_min_sq"] == pytest.approx(mandel_closed_form(1.0, 0.5, 1000.0), rel=1e-9)


def test_missing_config(tmp_path, capsys):
    assert main(["sensitivity", "--config", str(tmp_path / "nope.cfg")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_bad_config_names_field(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("modes = 3\n[element] type=squeezer modes=[0,1]\n")
    assert main(["sensitivity", "--config", str(p)]) == 2
    assert "elements[0].r" in capsys.readouterr().err


def test_decoupled_phase(tmp_path, capsys):
    p = tmp_path / "flat.cfg"
    p.write_text(EQ5.replace("r=1.0", "r=0").replace("r=0.5", "r=0"))
    assert main(["sensitivity", "--config", str(p), "--detector", "ib"]) == 3


def test_unknown_flag():
    assert main(["sensitivity", "--colour", "red"]) == 2


def test_sweep_csv(cfg, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(cfg), "--axis", "r2=0.1:2:7", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[:2] == ["r2", "phi_min_sq"]
    assert len(rows) == 7
    assert float(rows[0]["phi_min_sq"]) == pytest.approx(mandel_closed_form(1.0, 0.1, 10.0), rel=1e-9)


def test_sweep_single_point_and_two_axes(cfg, tmp_path):
    one, two = tmp_path / "one.csv", tmp_path / "two.csv"
    assert main(["sweep", "--config", str(cfg), "--axis", "r2=0.5:0.5:1", "--out", str(one)]) == 0
    assert len(read_csv(one)[1]) == 1
    args = ["sweep", "--config", str(cfg), "--axis", "beta=1:2:2", "--axis", "r2=0.5:1:3", "--out", str(two)]
    assert main(args) == 0
    header, rows = read_csv(two)
    assert header[:2] == ["beta", "r2"] and len(rows) == 6


def test_sweep_marks_failures(cfg, tmp_path, capsys):
    out = tmp_path / "f.csv"
    assert main(["sweep", "--config", str(cfg), "--axis", "r1=0:1:3", "--detector", "ib", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert rows[0]["phi_min_sq"] == "NA"
    assert rows[1]["phi_min_sq"] != "NA"
    assert "failed" in capsys.readouterr().err


def test_sweep_with_optimize(cfg, tmp_path):
    out = tmp_path / "o.csv"
    args = ["sweep", "--config", str(cfg), "--axis", "r2=0.5:1:2", "--optimize", "phi0=-3.14:3.14", "--out", str(out)]
    assert main(args) == 0
    header, rows = read_csv(out)
    assert "opt_phi0" in header and rows[0]["converged"] in ("0", "1")


def test_sweep_bytes_reproducible(cfg, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["sweep", "--config", str(cfg), "--axis", "r2=0.1:2:9", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    ma = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    mb = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    ma.pop("timestamp"), mb.pop("timestamp")
    assert ma == mb


def test_sweep_json(cfg, capsys):
    assert main(["sweep", "--config", str(cfg), "--axis", "r2=0.1:2:3", "--format", "json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert len(body["points"]) == 3


@pytest.mark.parametrize("axis", ["r2=0.1:2", "r2=a:b:3", "zz=0:1:3", "r2=0:1:1"])
def test_bad_axis(cfg, axis):
    assert main(["sweep", "--config", str(cfg), "--axis", axis]) == 2


def test_parse_optimize():
    assert parse_optimize("r2=0:1,phi0=-3:3") == {"r2": (0.0, 1.0), "phi0": (-3.0, 3.0)}


def test_recipe_by_name(tmp_path):
    out = tmp_path / "fig3a.csv"
    assert main(["sweep", "--config", "fig3a", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[:2] == ["beta", "r2"] and len(rows) == 800


def test_compare(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["compare", "--gain-min", "0.2", "--gain-max", "3", "--gain-steps", "4", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[:5] == ["gain", "mandel_ib", "mandel_sbc", "yurke_boosted", "shot_noise"]
    shot = [float(r["shot_noise"]) for r in rows]
    assert all(b <= a for a, b in zip(shot, shot[1:]))


def test_spdc(capsys):
    assert main(["spdc", "--beta", "1000"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["detector"] == "diff-bc"
    assert math.isfinite(rec["phi_min_sq"])


def test_seeds(capsys):
    assert main(["seeds", "--r1", "1", "--r2", "1", "--beta", "100"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "seed_mode,ib,diff_bc" and len(lines) == 5


def test_validate(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 6 and "FAIL" not in out


def test_validate_unknown_suite():
    assert main(["validate", "--suite", "nope"]) == 2


def test_validate_failure_exit_code(monkeypatch, capsys):
    from iclab import validation

    monkeypatch.setitem(
        validation.SUITES, "broken", lambda: validation.CheckResult("broken", False, "forced failure")
    )
    assert main(["validate", "--suite", "broken", "--suite", "high-gain"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  broken" in out and "1/2 suites passed" in out
