"""Seeded Monte-Carlo sweep engine and CSV/metadata emission.

Every trial draws from its own Philox stream keyed by
``SeedSequence([master_seed, scheme_code, snr_label, trial_index])`` where
``snr_label`` is the SNR in milli-dB offset by 2**31. Trials share nothing,
and per-point tallies are integer sums, so results do not depend on the worker
count or on completion order.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from pncvlc import __version__, _kernels
from pncvlc.config import SCHEMES, ScenarioConfig
from pncvlc.errors import PncVlcError
from pncvlc.exchange import Tally, noise_for, run_exchange
from pncvlc.metrics import MetricsReport, report_from_tally

GENERATOR = "numpy.random.Philox(SeedSequence([master_seed, scheme_code, snr_label, trial_index]))"
CSV_HEADER = (
    "scenario,scheme,snr_db,ber,throughput_bps_hz,throughput_mbps,"
    "capacity_bps_hz,energy_per_bit,n_bits,seed"
)
_INF_LABEL = 2**32 - 1


class TrialError(PncVlcError):
    """A module error raised inside a trial, annotated with where it happened."""

    exit_code = 4


def snr_label(snr_db: float) -> int:
    if math.isinf(snr_db):
        return _INF_LABEL
    return int(round(snr_db * 1000)) + 2**31


def trial_rng(cfg: ScenarioConfig, scheme: str, snr_db: float, trial_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(
        [cfg.master_seed, SCHEMES.index(scheme), snr_label(snr_db), trial_index]
    )
    return np.random.Generator(np.random.Philox(seq))


def run_trial(cfg: ScenarioConfig, scheme: str, snr_db: float, trial_index: int) -> Tally:
    """One full exchange, reproducible from its indices alone.

    ``snr_db = inf`` runs the noiseless limit.
    """
    rng = trial_rng(cfg, scheme, snr_db, trial_index)
    try:
        return run_exchange(scheme, cfg, noise_for(snr_db, cfg), rng)
    except PncVlcError as exc:
        raise TrialError(f"{scheme} @ {snr_db} dB, trial {trial_index}: {exc}") from exc


def trials_per_point(cfg: ScenarioConfig) -> int:
    bits_per_trial = 2 * cfg.packet_bits
    return max(cfg.frames_per_point, -(-cfg.min_bits_per_point // bits_per_trial))


def _run_chunk(cfg: ScenarioConfig, scheme: str, snr_db: float, start: int, stop: int) -> Tally:
    total = Tally()
    for i in range(start, stop):
        total = total + run_trial(cfg, scheme, snr_db, i)
    return total


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, -(-n // (4 * workers)))
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def _report(cfg: ScenarioConfig, scheme: str, snr_db: float, tally: Tally) -> MetricsReport:
    return report_from_tally(
        tally,
        scheme,
        snr_db,
        cfg.frame,
        scenario=cfg.name,
        seed=cfg.master_seed,
        sampling_rate_hz=cfg.sampling_rate_hz,
        slot_energy=cfg.slot_energy,
    )


def run_points(cfg: ScenarioConfig, points: list[tuple[str, float]], workers: int = 1) -> list[MetricsReport]:
    n = trials_per_point(cfg)
    if workers <= 1:
        return [_report(cfg, s, snr, _run_chunk(cfg, s, snr, 0, n)) for s, snr in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            [pool.submit(_run_chunk, cfg, s, snr, a, b) for a, b in _chunks(n, workers)]
            for s, snr in points
        ]
        reports = []
        for (s, snr), group in zip(points, futures):
            total = Tally()
            for fut in group:
                total = total + fut.result()
            reports.append(_report(cfg, s, snr, total))
    return reports


def run_point(cfg: ScenarioConfig, scheme: str, snr_db: float, workers: int = 1) -> MetricsReport:
    return run_points(cfg, [(scheme, snr_db)], workers)[0]


def run_sweep(cfg: ScenarioConfig, workers: int = 1) -> list[MetricsReport]:
    """One report per (scheme, SNR point), schemes in config order."""
    points = [(s, snr) for s in cfg.schemes for snr in cfg.snr_sweep.points()]
    return run_points(cfg, points, workers)


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if x == 0:
        return "0.00000"
    # exponent after rounding to 6 significant digits
    exp = int(f"{x:.5e}".split("e")[1])
    if exp > 5:
        return f"{round(x, 5 - exp):.0f}"
    return f"{x:.{5 - exp}f}"


def csv_text(reports: list[MetricsReport]) -> str:
    if not reports:
        raise ValueError("refusing to write a CSV with no reports")
    rows = [CSV_HEADER]
    for r in sorted(reports, key=lambda r: (r.scheme, r.snr_db)):
        rows.append(
            ",".join(
                [
                    r.scenario,
                    r.scheme,
                    _fmt(r.snr_db),
                    _fmt(r.ber),
                    _fmt(r.throughput_bps_hz),
                    _fmt(r.throughput_mbps),
                    _fmt(r.capacity_bps_hz),
                    _fmt(r.energy_per_bit),
                    str(r.n_bits),
                    str(r.seed),
                ]
            )
        )
    return "\n".join(rows) + "\n"


def emit_csv(reports: list[MetricsReport], path) -> Path:
    path = Path(path)
    text = csv_text(reports)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(cfg.to_json().encode("utf-8")).hexdigest()


def meta_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".meta.json")


def write_meta(cfg: ScenarioConfig, csv_path) -> Path:
    meta = {
        "artifact_version": __version__,
        "config_hash": config_hash(cfg),
        "generator": GENERATOR,
        "kernel_backend": _kernels.BACKEND,
        "master_seed": cfg.master_seed,
        "trials_per_point": trials_per_point(cfg),
    }
    path = meta_path(csv_path)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
