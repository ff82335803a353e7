"""Command line: ``pncvlc run | validate | oracle-check``."""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from pncvlc.config import PRESETS, load_config
from pncvlc.errors import PncVlcError

log = logging.getLogger("pncvlc")


def brute_force_xor(y: complex, h_a: complex, h_b: complex, sigma2: float) -> int:
    """Enumerate all 16 (s_A, s_B) pairs and sum likelihoods per XOR value."""
    pts = [((1 - 2 * (i >> 1)) + 1j * (1 - 2 * (i & 1))) / np.sqrt(2) for i in range(4)]
    d2 = {}
    for a in range(4):
        for b in range(4):
            d2[a, b] = abs(y - h_a * pts[a] - h_b * pts[b]) ** 2
    floor = min(d2.values())
    like = [0.0] * 4
    for (a, b), d in d2.items():
        like[a ^ b] += float(np.exp(-(d - floor) / sigma2))
    best = 0
    for r in range(1, 4):
        if like[r] > like[best]:
            best = r
    return best


def oracle_check(n_draws: int = 10_000, seed: int = 12345) -> tuple[int, int, float]:
    """Compare the relay decoder with ``brute_force_xor``; returns (agree, total, seconds)."""
    from pncvlc.pnc_link import xor_map_grid

    rng = np.random.default_rng(seed)
    h_a = rng.normal(size=n_draws) + 1j * rng.normal(size=n_draws)
    h_b = rng.normal(size=n_draws) + 1j * rng.normal(size=n_draws)
    sigma2 = rng.uniform(0.01, 1.0, n_draws)
    pts = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)
    s_a = pts[rng.integers(0, 4, n_draws)]
    s_b = pts[rng.integers(0, 4, n_draws)]
    noise = np.sqrt(sigma2 / 2) * (rng.normal(size=n_draws) + 1j * rng.normal(size=n_draws))
    y = h_a * s_a + h_b * s_b + noise
    t0 = time.perf_counter()
    agree = 0
    for i in range(n_draws):
        fast = xor_map_grid(y[i : i + 1], h_a[i], h_b[i], sigma2[i]).xor_symbols[0]
        agree += int(fast == brute_force_xor(y[i], h_a[i], h_b[i], sigma2[i]))
    return agree, n_draws, time.perf_counter() - t0


def _cmd_run(args) -> int:
    from pncvlc.sweep import emit_csv, run_sweep, write_meta

    cfg = load_config(args.config, preset=args.preset, seed=args.seed)
    reports = run_sweep(cfg, workers=args.workers)
    path = emit_csv(reports, args.out)
    write_meta(cfg, path)
    log.info("wrote %d reports to %s", len(reports), path)
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"ok: {cfg.name} ({len(cfg.schemes)} schemes x {len(cfg.snr_sweep.points())} SNR points)")
    return 0


def _cmd_oracle(args) -> int:
    agree, total, secs = oracle_check(args.draws, args.seed)
    ok = agree == total
    print(f"{'PASS' if ok else 'FAIL'} oracle-check: {agree}/{total} decisions agree ({secs:.2f} s)")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pncvlc", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario sweep and write CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--preset", choices=sorted(PRESETS), default=None)
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)

    orc = sub.add_parser("oracle-check", help="ML XOR decoder vs brute-force enumeration")
    orc.add_argument("--draws", type=int, default=10_000)
    orc.add_argument("--seed", type=int, default=12345)
    orc.set_defaults(func=_cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except PncVlcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
