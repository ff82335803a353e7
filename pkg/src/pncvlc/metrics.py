"""BER, goodput, Shannon capacity and energy-per-bit, plus the baseline schemes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pncvlc.errors import ConfigurationError, FramingError
from pncvlc.exchange import SLOTS, STREAMS, Tally
from pncvlc.ofdm_phy import FrameLayout

# relative slack on the Shannon check, for rounding only
_SHANNON_RTOL = 1e-12


@dataclass(frozen=True)
class MetricsReport:
    scenario: str
    scheme: str
    snr_db: float
    ber: float
    throughput_bps_hz: float
    throughput_mbps: float
    capacity_bps_hz: float
    energy_per_bit: float
    n_bits: int
    seed: int
    relay_ber: float = float("nan")
    relay_bits: int = 0
    delivered_bits: int = 0

    def __post_init__(self):
        if not 0.0 <= self.ber <= 1.0:
            raise ValueError(f"ber {self.ber} outside [0, 1]")
        if self.throughput_bps_hz > self.capacity_bps_hz * (1 + _SHANNON_RTOL):
            raise ValueError(
                f"{self.scheme} at {self.snr_db} dB: throughput {self.throughput_bps_hz} "
                f"exceeds Shannon capacity {self.capacity_bps_hz}"
            )

    @property
    def ber_stderr(self) -> float:
        return binomial_stderr(self.ber, self.n_bits)

    @property
    def relay_ber_stderr(self) -> float:
        return binomial_stderr(self.relay_ber, self.relay_bits)


def binomial_stderr(p: float, n: int) -> float:
    if n <= 0:
        return float("nan")
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def compute_ber(sent, recovered) -> float:
    sent = np.asarray(sent)
    recovered = np.asarray(recovered)
    if sent.shape != recovered.shape:
        raise FramingError(f"length mismatch: {sent.size} vs {recovered.size}")
    return float(np.count_nonzero(sent != recovered)) / sent.size


def _slots(scheme: str) -> int:
    try:
        return SLOTS[scheme]
    except KeyError:
        raise ConfigurationError(f"unknown scheme {scheme!r}", "scheme") from None


def compute_throughput(
    delivered_bits: int,
    scheme: str,
    layout: FrameLayout,
    n_exchanges: int = 1,
    sampling_rate_hz: float = 2e7,
) -> tuple[float, float]:
    """Goodput in bps/Hz (bits per complex sample) and in Mbps.

    The denominator is every sample of every slot the exchanges occupied,
    cyclic prefixes and pilot symbols included.
    """
    slots = _slots(scheme)
    bps_hz = delivered_bits / (n_exchanges * slots * layout.samples_per_slot)
    return bps_hz, bps_hz * sampling_rate_hz / 1e6


def compute_capacity(
    snr_db: float,
    scheme: str | None = None,
    slots_used: int | None = None,
    efficiency: float = 1.0,
) -> float:
    """Shannon bound on the goodput convention used by ``compute_throughput``.

    Each packet delivery counted per exchange is one complex-subcarrier
    stream at ``log2(1 + snr)``; the sum is scaled by the layout efficiency
    and shared over the slots the exchange occupies. Without a scheme, one
    stream per slot is assumed.
    """
    if not math.isfinite(snr_db):
        if snr_db > 0:
            return math.inf
        raise ConfigurationError(f"snr_db must be finite, got {snr_db}")
    if scheme is not None:
        slots = slots_used or _slots(scheme)
        streams = STREAMS[scheme] * slots / _slots(scheme)
    else:
        slots = slots_used or 1
        streams = slots
    per_stream = math.log2(1 + 10 ** (snr_db / 10))
    return efficiency * streams * per_stream / slots


def compute_energy_per_bit(total_tx_energy: float, delivered_bits: int) -> float:
    if delivered_bits <= 0:
        return math.inf
    return total_tx_energy / delivered_bits


def report_from_tally(
    tally: Tally,
    scheme: str,
    snr_db: float,
    layout: FrameLayout,
    scenario: str = "",
    seed: int = 0,
    sampling_rate_hz: float = 2e7,
    slot_energy: float = 1.0,
) -> MetricsReport:
    bps_hz, mbps = compute_throughput(
        tally.delivered_bits, scheme, layout, tally.exchanges, sampling_rate_hz
    )
    return MetricsReport(
        scenario=scenario,
        scheme=scheme,
        snr_db=snr_db,
        ber=tally.e2e_errors / tally.e2e_bits,
        throughput_bps_hz=bps_hz,
        throughput_mbps=mbps,
        capacity_bps_hz=compute_capacity(snr_db, scheme, efficiency=layout.efficiency),
        energy_per_bit=compute_energy_per_bit(tally.slots * slot_energy, tally.delivered_bits),
        n_bits=tally.e2e_bits,
        seed=seed,
        relay_ber=tally.relay_errors / tally.relay_bits if tally.relay_bits else float("nan"),
        relay_bits=tally.relay_bits,
        delivered_bits=tally.delivered_bits,
    )


def run_baseline(scheme: str, scenario, snr_db: float, workers: int = 1) -> MetricsReport:
    """Evaluate StoreForward or Pt2Pt on ``scenario`` at one SNR point."""
    if scheme not in ("StoreForward", "Pt2Pt"):
        raise ConfigurationError(f"{scheme!r} is not a baseline scheme", "scheme")
    from pncvlc.sweep import run_point

    return run_point(scenario, scheme, snr_db, workers=workers)
