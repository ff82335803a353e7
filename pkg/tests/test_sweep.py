import math

import numpy as np
import pytest

from pncvlc.config import from_dict
from pncvlc.sweep import (
    CSV_HEADER,
    csv_text,
    emit_csv,
    meta_path,
    run_sweep,
    run_trial,
    trials_per_point,
    write_meta,
)

SMALL = {"name": "small", "frames_per_point": 2, "min_bits_per_point": 1, "packet_bits": 2 * 52 * 4}


def cfg_of(**kw):
    return from_dict({**SMALL, **kw})


@pytest.mark.parametrize("scheme", ["PNC", "PNC_unaligned", "StoreForward", "Pt2Pt"])
def test_noiseless_trial(scheme):
    t = run_trial(cfg_of(), scheme, math.inf, 0)
    assert t.e2e_errors == 0 and t.relay_errors == 0
    assert t.delivered_bits == t.offered_bits


def test_trial_determinism():
    cfg = cfg_of()
    assert run_trial(cfg, "PNC", 8.0, 3) == run_trial(cfg, "PNC", 8.0, 3)


def test_trial_streams_differ():
    cfg = cfg_of()
    a = run_trial(cfg, "PNC", 6.0, 0)
    b = run_trial(cfg, "PNC", 6.0, 1)
    assert a.e2e_errors != b.e2e_errors or a.relay_errors != b.relay_errors


def test_trials_per_point():
    cfg = cfg_of(min_bits_per_point=10_000)
    assert trials_per_point(cfg) == math.ceil(10_000 / (2 * cfg.packet_bits))
    assert trials_per_point(cfg_of(frames_per_point=50)) == 50


def test_sweep_coverage():
    cfg = cfg_of(snr_sweep={"start_db": 0, "stop_db": 24, "step_db": 2}, schemes=["PNC", "Pt2Pt"], frames_per_point=1)
    reports = run_sweep(cfg)
    assert len(reports) == 26
    keys = {(r.scheme, r.snr_db) for r in reports}
    assert len(keys) == 26


def test_csv_layout(tmp_path):
    cfg = cfg_of(snr_sweep={"start_db": 0, "stop_db": 24, "step_db": 2}, schemes=["Pt2Pt", "PNC"], frames_per_point=1)
    path = emit_csv(run_sweep(cfg), tmp_path / "out.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert len(lines) == 27
    assert lines[0] == CSV_HEADER
    rows = [l.split(",") for l in lines[1:]]
    assert [r[1] for r in rows] == ["PNC"] * 13 + ["Pt2Pt"] * 13
    assert [float(r[2]) for r in rows[:13]] == sorted(float(r[2]) for r in rows[:13])
    for r in rows:
        for field in r[2:8]:
            assert field == "inf" or significant_digits(field) == 6, field


def significant_digits(s):
    digits = s.replace("-", "").replace(".", "").lstrip("0")
    return len(digits) if digits else 6


def test_csv_refuses_empty(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "x.csv")


def test_rerun_byte_identical(tmp_path):
    cfg = cfg_of(snr_sweep={"start_db": 4, "stop_db": 12, "step_db": 4}, schemes=["PNC", "StoreForward"])
    a = emit_csv(run_sweep(cfg), tmp_path / "a.csv").read_bytes()
    b = emit_csv(run_sweep(cfg), tmp_path / "b.csv").read_bytes()
    assert a == b


def test_worker_count_invariance():
    cfg = cfg_of(snr_sweep={"start_db": 4, "stop_db": 12, "step_db": 4}, schemes=["PNC", "Pt2Pt"], frames_per_point=5)
    assert csv_text(run_sweep(cfg, workers=1)) == csv_text(run_sweep(cfg, workers=3))


def test_meta_sidecar(tmp_path):
    import json

    cfg = cfg_of()
    path = write_meta(cfg, tmp_path / "out.csv")
    assert path == meta_path(tmp_path / "out.csv") and path.name == "out.meta.json"
    meta = json.loads(path.read_text())
    assert meta["master_seed"] == 0
    assert "Philox" in meta["generator"]
    assert len(meta["config_hash"]) == 64
