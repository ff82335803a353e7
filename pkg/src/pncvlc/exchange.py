"""One bidirectional packet exchange per scheme, reduced to integer tallies.

Delivery is counted per hop: every slot credits the packet bits whose CRC-32
verifies at that slot's receiver. The PNC multiple-access slot credits both
source packets when the relay's XOR packet checks against
``crc(U_A) ^ crc(U_B) ^ crc(0)`` (CRC-32 is affine over equal-length inputs).
The CRCs travel out of band, so they cost no payload bits.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, fields

import numpy as np

from pncvlc.config import ScenarioConfig
from pncvlc.errors import ConfigurationError
from pncvlc.ofdm_phy import QpskSymbolGrid, build_frame, ofdm_demodulate, ofdm_modulate, qpsk_map
from pncvlc.pnc_link import (
    broadcast_and_recover,
    compute_precompensation,
    decode_relay_packet,
    estimate_channels,
    genie_estimate,
    transmit_p2p,
)
from pncvlc.vlc_channel import (
    ChannelRealization,
    NoiseModel,
    calibrate_noise,
    draw_channel,
    draw_link,
    normalized_gains,
    superpose_mac_phase,
)

SLOTS = {"PNC": 2, "PNC_unaligned": 2, "StoreForward": 4, "Pt2Pt": 2}
# packet deliveries credited per exchange (hop count x packets)
STREAMS = {"PNC": 4, "PNC_unaligned": 4, "StoreForward": 4, "Pt2Pt": 2}


@dataclass
class Tally:
    exchanges: int = 0
    e2e_bits: int = 0
    e2e_errors: int = 0
    relay_bits: int = 0
    relay_errors: int = 0
    delivered_bits: int = 0
    offered_bits: int = 0
    slots: int = 0

    def __add__(self, other: "Tally") -> "Tally":
        return Tally(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))


def crc32(bits: np.ndarray) -> int:
    return zlib.crc32(np.packbits(bits).tobytes())


def xor_crc_matches(u_r: np.ndarray, crc_a: int, crc_b: int) -> bool:
    zero = crc32(np.zeros(u_r.size, dtype=np.uint8))
    return crc32(u_r) == crc_a ^ crc_b ^ zero


def noise_for(snr_db: float, cfg: ScenarioConfig) -> NoiseModel:
    if math.isinf(snr_db) and snr_db > 0:
        return NoiseModel(0.0, math.inf, cfg.ambient_dc)
    return calibrate_noise(snr_db, cfg.ambient_dc)


def _uplink(cfg: ScenarioConfig, noise: NoiseModel, rng) -> ChannelRealization:
    g = cfg.geometry
    ch = draw_channel(g.a_to_r, g.b_to_r, noise, rng, cfg.frame.fft_size, cfg.frame.cp_len, cfg.sampling_rate_hz)
    if cfg.enforced_phase_offset_rad is not None:
        h_b = np.abs(ch.h_b) * np.exp(1j * (np.angle(ch.h_a) + cfg.enforced_phase_offset_rad))
        ch = ChannelRealization(ch.h_a, h_b, noise, ch.occluded_a, ch.occluded_b)
    return ch


def _downlink(cfg: ScenarioConfig, noise: NoiseModel, rng) -> ChannelRealization:
    g = cfg.geometry
    return draw_channel(g.r_to_a, g.r_to_b, noise, rng, cfg.frame.fft_size, cfg.frame.cp_len, cfg.sampling_rate_hz)


def _packets(cfg: ScenarioConfig, rng) -> tuple[np.ndarray, np.ndarray]:
    n = cfg.packet_bits
    return (
        rng.integers(0, 2, n, dtype=np.uint8),
        rng.integers(0, 2, n, dtype=np.uint8),
    )


def _errors(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(a != b))


def train_alignment(cfg: ScenarioConfig, up: ChannelRealization, rng) -> np.ndarray:
    """Node B's precompensation, from a pilot-only training frame unless CSI is genie."""
    if cfg.genie_csi:
        return compute_precompensation(genie_estimate(up))
    empty = QpskSymbolGrid(np.zeros((cfg.frame.fft_size, 0), dtype=complex), cfg.frame)
    fa = ofdm_modulate(build_frame(empty, "A"))
    fb = ofdm_modulate(build_frame(empty, "B"))
    rx = ofdm_demodulate(superpose_mac_phase(fa, fb, up, rng))
    return compute_precompensation(estimate_channels(rx))


def pnc_exchange(cfg: ScenarioConfig, noise: NoiseModel, rng, aligned: bool = True) -> Tally:
    layout = cfg.frame
    n = cfg.packet_bits
    u_a, u_b = _packets(cfg, rng)
    up = _uplink(cfg, noise, rng)
    rotation = train_alignment(cfg, up, rng) if aligned else np.ones(layout.fft_size, dtype=complex)

    grid_a = build_frame(qpsk_map(u_a, layout), "A")
    grid_b = build_frame(qpsk_map(u_b, layout), "B").rotated(rotation)
    rx = ofdm_demodulate(superpose_mac_phase(ofdm_modulate(grid_a), ofdm_modulate(grid_b), up, rng))
    est = genie_estimate(up, rotation) if cfg.genie_csi else estimate_channels(rx)
    relay = decode_relay_packet(rx, est, cfg.likelihood)
    u_r = relay.bits

    down = _downlink(cfg, noise, rng)
    got_b = broadcast_and_recover(relay, down.h_a, noise.sigma2, u_a, rng, layout, cfg.downlink_estimation)
    got_a = broadcast_and_recover(relay, down.h_b, noise.sigma2, u_b, rng, layout, cfg.downlink_estimation)

    crc_a, crc_b = crc32(u_a), crc32(u_b)
    delivered = 2 * n * xor_crc_matches(u_r, crc_a, crc_b)
    delivered += n * (crc32(got_b) == crc_b) + n * (crc32(got_a) == crc_a)
    return Tally(
        exchanges=1,
        e2e_bits=2 * n,
        e2e_errors=_errors(got_b, u_b) + _errors(got_a, u_a),
        relay_bits=n,
        relay_errors=_errors(u_r, u_a ^ u_b),
        delivered_bits=int(delivered),
        offered_bits=STREAMS["PNC"] * n,
        slots=SLOTS["PNC"],
    )


def store_forward_exchange(cfg: ScenarioConfig, noise: NoiseModel, rng) -> Tally:
    """Relay decodes each packet in its own slot and re-sends it: four slots."""
    layout = cfg.frame
    n = cfg.packet_bits
    est = not cfg.genie_csi
    u_a, u_b = _packets(cfg, rng)
    up = _uplink(cfg, noise, rng)
    down = _downlink(cfg, noise, rng)
    at_relay_a = transmit_p2p(u_a, layout, up.h_a, noise.sigma2, rng, est, "A")
    at_b = transmit_p2p(at_relay_a, layout, down.h_b, noise.sigma2, rng, cfg.downlink_estimation, "A")
    at_relay_b = transmit_p2p(u_b, layout, up.h_b, noise.sigma2, rng, est, "B")
    at_a = transmit_p2p(at_relay_b, layout, down.h_a, noise.sigma2, rng, cfg.downlink_estimation, "A")

    crc_a, crc_b = crc32(u_a), crc32(u_b)
    delivered = n * sum(
        (
            crc32(at_relay_a) == crc_a,
            crc32(at_b) == crc_a,
            crc32(at_relay_b) == crc_b,
            crc32(at_a) == crc_b,
        )
    )
    return Tally(
        exchanges=1,
        e2e_bits=2 * n,
        e2e_errors=_errors(at_b, u_a) + _errors(at_a, u_b),
        relay_bits=2 * n,
        relay_errors=_errors(at_relay_a, u_a) + _errors(at_relay_b, u_b),
        delivered_bits=int(delivered),
        offered_bits=STREAMS["StoreForward"] * n,
        slots=SLOTS["StoreForward"],
    )


def pt2pt_exchange(cfg: ScenarioConfig, noise: NoiseModel, rng) -> Tally:
    """Direct A<->B link without a relay, one slot per direction."""
    layout = cfg.frame
    n = cfg.packet_bits
    est = not cfg.genie_csi
    u_a, u_b = _packets(cfg, rng)
    geom = cfg.geometry.direct
    (gain,) = normalized_gains(geom)
    h, _ = draw_link(geom, gain, layout.fft_size, layout.cp_len, cfg.sampling_rate_hz, rng)
    at_b = transmit_p2p(u_a, layout, h, noise.sigma2, rng, est, "A")
    at_a = transmit_p2p(u_b, layout, h, noise.sigma2, rng, est, "B")
    delivered = n * ((crc32(at_b) == crc32(u_a)) + (crc32(at_a) == crc32(u_b)))
    return Tally(
        exchanges=1,
        e2e_bits=2 * n,
        e2e_errors=_errors(at_b, u_a) + _errors(at_a, u_b),
        delivered_bits=int(delivered),
        offered_bits=STREAMS["Pt2Pt"] * n,
        slots=SLOTS["Pt2Pt"],
    )


def run_exchange(scheme: str, cfg: ScenarioConfig, noise: NoiseModel, rng) -> Tally:
    if scheme == "PNC":
        return pnc_exchange(cfg, noise, rng, aligned=True)
    if scheme == "PNC_unaligned":
        return pnc_exchange(cfg, noise, rng, aligned=False)
    if scheme == "StoreForward":
        return store_forward_exchange(cfg, noise, rng)
    if scheme == "Pt2Pt":
        return pt2pt_exchange(cfg, noise, rng)
    raise ConfigurationError(f"unknown scheme {scheme!r}", "scheme")
