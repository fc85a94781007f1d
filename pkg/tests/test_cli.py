import json
from pathlib import Path

import pytest

from adswk.cli import dispatch
from adswk.io import read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(autouse=True)
def _no_env_root(monkeypatch):
    monkeypatch.delenv("ADSWK_OUT", raising=False)


def _only_dir(root: Path, name: str) -> Path:
    (d,) = list((root / name).iterdir())
    return d


def test_trace_writes_outputs(tmp_path, capsys):
    rc = dispatch(["trace", "--config", str(CONFIGS / "slab.cfg"), "--start", "1,0,0,1,1,0",
                   "--out", str(tmp_path)])
    assert rc == 0
    d = _only_dir(tmp_path, "trace")
    for f in ("trace.csv", "events.json", "trace.svg", "manifest.json"):
        assert (d / f).exists()
    ev = json.loads((d / "events.json").read_text())
    assert [e["kind"] for e in ev["events"]] == ["HyperbolicReflection", "DomainExit"]
    assert ev["validation"]["passed"]
    assert json.loads((d / "manifest.json").read_text())["status"] == "complete"
    header, rows = read_csv(d / "trace.csv")
    assert header[:2] == ["s", "x"] and header[-2:] == ["xib", "p_drift"] and len(rows) > 10
    assert max(abs(float(r[-1])) for r in rows) < 1e-8
    assert "2 events" in capsys.readouterr().out


def test_trace_format_selection(tmp_path):
    rc = dispatch(["trace", "--config", str(CONFIGS / "slab.cfg"), "--start", "1,0,0,1,1,0",
                   "--out", str(tmp_path), "--format", "csv"])
    assert rc == 0
    d = _only_dir(tmp_path, "trace")
    assert (d / "trace.csv").exists() and not (d / "trace.svg").exists()


def test_trace_bad_start(tmp_path, capsys):
    assert dispatch(["trace", "--start", "1,2", "--out", str(tmp_path)]) == 2
    assert "--start" in capsys.readouterr().err


def test_validate_config(capsys):
    assert dispatch(["validate-config", str(CONFIGS / "ref.cfg")]) == 0
    assert dispatch(["validate-config", str(CONFIGS / "bad.cfg")]) == 2
    err = capsys.readouterr().err
    assert "Breitenlohner-Freedman" in err and "bad.cfg:7:10" in err


def test_usage_errors(capsys):
    assert dispatch([]) == 2
    assert dispatch(["bogus"]) == 2
    assert dispatch(["ineq", "--threads", "0"]) == 2
    assert dispatch(["accept", "--only", "11"]) == 2
    assert dispatch(["experiment", "nope"]) == 2


def test_modes(tmp_path):
    cfg = tmp_path / "m.cfg"
    cfg.write_text("[model]\nn = 4\n[spectral]\nlambda = 2.0\nomegas = 1.0, 3.141592653589793\n"
                   "ks = 0.0\n")
    assert dispatch(["modes", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    d = _only_dir(tmp_path / "o", "modes")
    info = json.loads((d / "modes.json").read_text())
    assert info["status"] == "BelowBound" and info["s_plus"] == pytest.approx(2.0)
    _, rows = read_csv(d / "dtn.csv")
    assert any(r[4] == "true" for r in rows)


def test_ineq(tmp_path):
    assert dispatch(["ineq", "--cells", "500", "--out", str(tmp_path)]) == 0
    info = json.loads((_only_dir(tmp_path, "ineq") / "hardy.json").read_text())
    assert info["cells"] == 500 and 0 < info["relative_gap"] < 0.1


def test_evolve(tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text((CONFIGS / "evolve.cfg").read_text().replace("nx = 128", "nx = 32")
                   .replace("t_end = 3.0", "t_end = 1.0"))
    assert dispatch(["evolve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    d = _only_dir(tmp_path / "o", "evolve")
    for f in ("series.csv", "final.bin", "final.json", "series.svg"):
        assert (d / f).exists(), f


def test_experiment_scattering(tmp_path, capsys):
    assert dispatch(["experiment", "scattering", "--out", str(tmp_path)]) == 0
    assert (_only_dir(tmp_path, "scattering") / "scattering.csv").exists()
    assert "PASS" in capsys.readouterr().out


def test_env_overrides_out(tmp_path, monkeypatch):
    monkeypatch.setenv("ADSWK_OUT", str(tmp_path / "env"))
    assert dispatch(["ineq", "--cells", "200", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "env" / "ineq").is_dir() and not (tmp_path / "flag").exists()


def test_accept_subset_and_mutation(tmp_path, capsys):
    assert dispatch(["accept", "--only", "1,6", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "[PASS] criterion  1" in out and "[PASS] criterion  6" in out
    rep = json.loads((_only_dir(tmp_path, "accept") / "verdicts.json").read_text())
    assert rep["all_passed"]
    assert dispatch(["accept", "--only", "4", "--mutate", "--out", str(tmp_path / "m")]) == 1
    assert "[FAIL] criterion  4" in capsys.readouterr().out
