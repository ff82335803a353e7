import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pncvlc.config import PRESETS, from_dict
from pncvlc.errors import ConfigurationError, FramingError
from pncvlc.exchange import Tally, crc32, xor_crc_matches
from pncvlc.metrics import (
    MetricsReport,
    compute_ber,
    compute_capacity,
    compute_energy_per_bit,
    compute_throughput,
    report_from_tally,
    run_baseline,
)
from pncvlc.ofdm_phy import FrameLayout

PAPER = FrameLayout(**PRESETS["paper-match"])


class TestBer:
    def test_identical(self):
        assert compute_ber([0, 1, 1], [0, 1, 1]) == 0.0

    def test_complement(self):
        a = np.array([0, 1, 1, 0])
        assert compute_ber(a, 1 - a) == 1.0

    def test_count(self):
        a = np.zeros(10_000, dtype=np.uint8)
        b = a.copy()
        b[[3, 50, 700, 8000, 9999]] = 1
        assert compute_ber(a, b) == 5e-4

    def test_mismatch(self):
        with pytest.raises(FramingError):
            compute_ber([0, 1], [0])

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1))
    def test_symmetric(self, pairs):
        a, b = map(np.array, zip(*pairs))
        assert compute_ber(a, b) == compute_ber(b, a)


class TestThroughput:
    def test_paper_match_eta(self):
        assert PAPER.efficiency == pytest.approx(3.869 / 4, abs=1e-12)

    def test_error_free_pnc(self):
        bps, mbps = compute_throughput(4 * PAPER.bits_per_packet, "PNC", PAPER)
        assert bps == pytest.approx(3.869, abs=1e-9)
        assert mbps == pytest.approx(77.38, abs=1e-6)
        assert round(mbps, 1) == 77.4

    def test_error_free_pt2pt(self):
        bps, mbps = compute_throughput(2 * PAPER.bits_per_packet, "Pt2Pt", PAPER)
        assert bps == pytest.approx(2 * PAPER.efficiency)
        assert mbps == pytest.approx(38.69, abs=1e-6)
        unit = FrameLayout(4, 4, 0, 1, n_pilots=0)
        assert compute_throughput(2 * unit.bits_per_packet, "Pt2Pt", unit)[0] == 2.0

    def test_pnc_is_twice_store_forward(self):
        layout = FrameLayout()
        l4 = 4 * layout.bits_per_packet
        pnc = compute_throughput(l4, "PNC", layout)[0]
        sf = compute_throughput(l4, "StoreForward", layout)[0]
        assert pnc == 2 * sf

    def test_unknown_scheme(self):
        with pytest.raises(ConfigurationError):
            compute_throughput(1, "ALOHA", FrameLayout())


class TestCapacity:
    def test_zero_db(self):
        assert compute_capacity(0.0, slots_used=1) == pytest.approx(1.0)

    def test_saturation_point(self):
        assert compute_capacity(22.86, slots_used=1) == pytest.approx(7.6014, abs=1e-4)

    def test_scheme_scaling(self):
        c1 = compute_capacity(10.0)
        assert compute_capacity(10.0, "PNC") == pytest.approx(2 * c1)
        assert compute_capacity(10.0, "StoreForward") == pytest.approx(c1)
        assert compute_capacity(10.0, "Pt2Pt", efficiency=0.5) == pytest.approx(0.5 * c1)


class TestEnergy:
    def test_pnc_half_of_store_forward(self):
        bits = 4 * 1000
        assert compute_energy_per_bit(2.0, bits) == pytest.approx(compute_energy_per_bit(4.0, bits) / 2)

    def test_linear_in_energy(self):
        assert compute_energy_per_bit(6.0, 100) == 2 * compute_energy_per_bit(3.0, 100)

    def test_packet_loss(self):
        assert compute_energy_per_bit(1.0, 900) == pytest.approx(compute_energy_per_bit(1.0, 1000) / 0.9)

    def test_nothing_delivered(self):
        assert compute_energy_per_bit(1.0, 0) == math.inf


class TestReport:
    def test_shannon_violation_rejected(self):
        with pytest.raises(ValueError):
            MetricsReport("x", "PNC", 0.0, 0.0, 5.0, 100.0, 1.0, 1.0, 10, 0)

    def test_from_tally(self):
        layout = FrameLayout()
        n = layout.bits_per_packet
        t = Tally(exchanges=3, e2e_bits=6 * n, e2e_errors=6, relay_bits=3 * n, delivered_bits=12 * n, slots=6)
        r = report_from_tally(t, "PNC", 20.0, layout, "s", 7)
        assert r.throughput_bps_hz == pytest.approx(4 * layout.efficiency)
        assert r.ber == 6 / (6 * n)
        assert r.energy_per_bit == pytest.approx(6 / (12 * n))
        assert r.relay_ber == 0.0
        assert r.seed == 7

    def test_tally_merge_commutes(self):
        a = Tally(1, 2, 3, 4, 5, 6, 7, 8)
        b = Tally(8, 7, 6, 5, 4, 3, 2, 1)
        assert (a + b) == (b + a)
        assert (a + b) + a == a + (b + a)


def test_crc_xor_affinity():
    rng = np.random.default_rng(0)
    a, b = rng.integers(0, 2, (2, 3328), dtype=np.uint8)
    assert xor_crc_matches(a ^ b, crc32(a), crc32(b))
    c = a ^ b
    c[17] ^= 1
    assert not xor_crc_matches(c, crc32(a), crc32(b))


class TestBaselines:
    cfg = from_dict({"name": "b", "frames_per_point": 3, "min_bits_per_point": 1})

    def test_store_forward_noiseless(self):
        r = run_baseline("StoreForward", self.cfg, math.inf)
        assert r.ber == 0.0
        pnc_bps = 4 * self.cfg.frame.efficiency
        assert r.throughput_bps_hz == pytest.approx(pnc_bps / 2)

    def test_pt2pt_noiseless(self):
        r = run_baseline("Pt2Pt", self.cfg, math.inf)
        assert r.ber == 0.0
        assert r.throughput_bps_hz == pytest.approx(2 * self.cfg.frame.efficiency)

    def test_rejects_pnc(self):
        with pytest.raises(ConfigurationError):
            run_baseline("PNC", self.cfg, 10.0)
