import json
import math

import pytest

from adswk.experiments import (
    EXPERIMENTS,
    BFScanConfig,
    ExperimentManifest,
    WavepacketConfig,
    bf_threshold_scan,
    scattering_table,
    start_experiment,
    wavepacket_vs_gbb,
)
from adswk.io import validate_json
from adswk.modes import IllPosedAboveBound


def test_manifest_written_before_compute(tmp_path):
    m = start_experiment("demo", {"a": 1}, tmp_path, seed=3)
    d = json.loads((m.directory(tmp_path) / "manifest.json").read_text())
    assert d["status"] == "running" and d["hash"] == m.hash and d["seed"] == 3
    validate_json(d, "manifest")


def test_manifest_hash_depends_on_inputs_only():
    a = ExperimentManifest("x", {"k": [1, 2]}, 0)
    b = ExperimentManifest("x", {"k": [1, 2]}, 0, wall_clock_s=5.0, status="complete")
    assert a.hash == b.hash
    assert a.hash != ExperimentManifest("x", {"k": [1, 2]}, 1).hash
    assert a.hash != ExperimentManifest("x", {"k": [1, 3]}, 0).hash


def test_scattering_rows():
    rows = scattering_table([1.0, 1e-6, math.pi], [0.0])
    by_omega = {r[2]: r for r in rows}
    r1 = by_omega[1.0]
    assert abs(r1[5] - (-1 / math.tan(1.0))) <= 1e-8 and r1[8] <= 1e-8
    assert by_omega[1e-6][5] == pytest.approx(-1.0, abs=1e-8)
    assert by_omega[math.pi][6] is True and math.isnan(by_omega[math.pi][5])


def test_scattering_refused_above_bound():
    with pytest.raises(IllPosedAboveBound):
        scattering_table([1.0], [0.0], lam=3.0)


def test_scattering_experiment_is_deterministic(tmp_path):
    outs = []
    for sub in ("a", "b"):
        m, ok = EXPERIMENTS["scattering"](tmp_path / sub, {"omegas": [0.5, 1.0, 2.0], "ks": [0.0, 0.3]}, 0)
        assert ok and m.status == "complete" and m.outputs == ["scattering.csv"]
        outs.append((m.directory(tmp_path / sub) / "scattering.csv").read_bytes())
        validate_json(json.loads((m.directory(tmp_path / sub) / "manifest.json").read_text()),
                      "manifest")
    assert outs[0] == outs[1]


def test_bf_scan_small():
    cfg = BFScanConfig(nx_pair=(64, 128), t_end=3.0)
    rows = {r["lambda"]: r for r in bf_threshold_scan((1.0, 2.25, 3.25), cfg)}
    assert rows[1.0]["status"] == "BelowBound" and rows[1.0]["omega2_floor"] > 0
    assert rows[1.0]["growth_coarse"] < 2 and rows[1.0]["growth_fine"] < 2
    assert rows[2.25]["status"] == "Borderline" and rows[2.25]["double_root"]
    r = rows[3.25]
    assert r["complex_pair"] and r["fit_refused"] and r["closure_refused"]
    assert r["closure"] == "HomogeneousWall" and r["growth_fine"] > 10


def test_wavepacket_small_grid():
    kw = dict(nx=256, ny=256, width_cells=8, wavelength_cells=8, search_radius_cells=16)
    good = wavepacket_vs_gbb(WavepacketConfig(**kw))
    assert good.hit_time is not None and good.n_post > 0
    assert good.post_max < 5.0 and good.gbb_events[0] == "HyperbolicReflection"
    bad = wavepacket_vs_gbb(WavepacketConfig(**kw, reflection_sign=-1))
    assert bad.post_max > 20.0 and not bad.passed


def test_wavepacket_config_validation():
    with pytest.raises(ValueError):
        WavepacketConfig(n=4)
    with pytest.raises(ValueError):
        WavepacketConfig(reflection_sign=0)
