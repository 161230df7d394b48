import json
import os
from pathlib import Path

import pytest

import pointsim

SCENARIOS = Path(os.environ.get("POINTSIM_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


def test_exact_ids_have_one_bit():
    ids = pointsim.assign_link_ids(10, m=16, k=1, mode="exact")
    assert [i.popcount() for i in ids] == [1] * 10
    fid = pointsim.encode(16, ids[:3])
    assert all(pointsim.should_forward(fid, i) for i in ids[:3])
    assert not any(pointsim.should_forward(fid, i) for i in ids[3:])


def test_exact_capacity():
    with pytest.raises(pointsim.CapacityError):
        pointsim.assign_link_ids(20, m=8, k=1, mode="exact")


def test_bloom_ids_are_seeded():
    a = pointsim.assign_link_ids(5, m=64, k=3, seed=7)
    b = pointsim.assign_link_ids(5, m=64, k=3, seed=7)
    assert a == b
    assert all(i.popcount() == 3 for i in a)
    assert 0 < pointsim.false_positive_rate(64, 3, 10) < 1


def test_validate_returns_effective_config():
    cfg = json.loads(pointsim.validate(SCENARIOS / "hls_failover.json"))
    assert "topology" in cfg


def test_bad_scenario(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"topology": 3}')
    with pytest.raises(pointsim.ConfigError):
        pointsim.validate(bad)


def test_run_is_deterministic(tmp_path):
    a = pointsim.run(SCENARIOS / "hls_failover.json", mode="icn", seed=3, out=tmp_path / "a")
    b = pointsim.run(SCENARIOS / "hls_failover.json", mode="icn", seed=3, telemetry=False)
    assert a["ok"]
    assert a["dataplane_hash"] == b["dataplane_hash"]
    assert (tmp_path / "a" / "events.jsonl").exists()


def test_compare_modes(tmp_path):
    pointsim.run(SCENARIOS / "hls_failover.json", mode="icn", seed=3, out=tmp_path / "icn")
    pointsim.run(SCENARIOS / "hls_failover.json", mode="ip", seed=3, out=tmp_path / "ip")
    rep = pointsim.compare(tmp_path / "icn", tmp_path / "ip")
    assert rep["modes"] == ("icn", "ip")
    assert rep["rows"]
