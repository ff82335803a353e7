"""Relay-side PNC processing and the end-node broadcast/recovery step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pncvlc import _kernels
from pncvlc.errors import ConfigurationError, FramingError
from pncvlc.ofdm_phy import (
    PILOT_SLOT,
    FrameLayout,
    QpskSymbolGrid,
    build_frame,
    check_bits,
    data_values,
    demap_values,
    indices_to_bits,
    ofdm_demodulate,
    ofdm_modulate,
    qpsk_map,
)
from pncvlc.vlc_channel import ChannelRealization, apply_p2p_channel, phase_offsets

VARIANTS = ("exact", "max-log")


@dataclass(frozen=True)
class ChannelEstimate:
    h_a_hat: np.ndarray
    h_b_hat: np.ndarray
    sigma2_hat: float
    genie: bool = False

    @property
    def phase_offsets_hat(self) -> np.ndarray:
        return phase_offsets(self.h_a_hat, self.h_b_hat)


@dataclass(frozen=True)
class XorDecision:
    xor_symbols: np.ndarray
    posteriors: np.ndarray | None = None
    erasures: int = 0

    @property
    def bits(self) -> np.ndarray:
        return indices_to_bits(self.xor_symbols)


@dataclass(frozen=True)
class RelayPacket:
    bits: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False)


def estimate_channels(received: QpskSymbolGrid, known_pilots: dict | None = None) -> ChannelEstimate:
    """Least-squares CSI from the time-orthogonal pilot symbols.

    ``known_pilots`` maps node id to its reference sequence (defaults to the
    layout's Zadoff-Chu pilots). Nodes missing from the mapping get a zero
    estimate. Noise variance is the mean power on null subcarriers across all
    received symbols, or NaN when the layout has none.
    """
    layout = received.layout
    if received.n_pilots != 2:
        raise FramingError("estimation needs a grid with the two pilot symbols")
    if known_pilots is None:
        known_pilots = {node: layout.pilot_sequence(node) for node in PILOT_SLOT}
    idx = layout.data_index
    est = {}
    for node in PILOT_SLOT:
        h = np.zeros(layout.fft_size, dtype=complex)
        if node in known_pilots:
            ref = np.asarray(known_pilots[node])[idx]
            if np.any(ref == 0):
                raise ConfigurationError(f"pilot reference for node {node} has a zero entry")
            h[idx] = received.pilots[idx, PILOT_SLOT[node]] / ref
        est[node] = h
    nulls = layout.null_index
    if nulls.size:
        sigma2 = float(np.mean(np.abs(received.symbols[nulls, :]) ** 2))
    else:
        sigma2 = float("nan")
    return ChannelEstimate(est["A"], est["B"], sigma2)


def genie_estimate(ch: ChannelRealization, rotation_b: np.ndarray | None = None) -> ChannelEstimate:
    h_b = ch.h_b if rotation_b is None else ch.h_b * rotation_b
    return ChannelEstimate(np.asarray(ch.h_a), np.asarray(h_b), ch.noise.sigma2, genie=True)


def compute_precompensation(est: ChannelEstimate) -> np.ndarray:
    """Per-subcarrier rotation e^{-j phi_k} that node B applies before its IFFT.

    Subcarriers with a zero A-link estimate get the identity rotation.
    """
    return np.exp(-1j * est.phase_offsets_hat)


def unalignable(est: ChannelEstimate, layout: FrameLayout) -> np.ndarray:
    return layout.data_index[est.h_a_hat[layout.data_index] == 0]


def xor_map_ml(y: complex, h_a: complex, h_b: complex, sigma2: float, variant: str = "exact") -> int:
    """ML decision of the XOR bit pair (as the 2-bit integer b0 b1) for one observation."""
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if h_a == 0 or h_b == 0:
        raise ValueError("XOR mapping is ill-posed when either channel coefficient is zero")
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown likelihood variant {variant!r}")
    dec, _ = _kernels.xor_decide(
        np.array([y]), np.array([h_a]), np.array([h_b]), 1.0 / sigma2, variant == "exact"
    )
    return int(dec[0])


def xor_map_grid(y, h_a, h_b, sigma2, variant: str = "exact") -> XorDecision:
    """Vectorised XOR mapping; sigma2 <= 0 or NaN falls back to the min-distance rule."""
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown likelihood variant {variant!r}")
    noiseless = not (sigma2 > 0)
    exact = variant == "exact" and not noiseless
    weight = 1.0 if noiseless else 1.0 / sigma2
    dec, scores = _kernels.xor_decide(y, h_a, h_b, weight, exact)
    return XorDecision(dec, scores)


def decode_relay_packet(obs: QpskSymbolGrid, est: ChannelEstimate, variant: str = "exact") -> RelayPacket:
    """Decide U_A xor U_B from the demodulated MAC-phase payload."""
    if obs.n_pilots:
        obs = obs.payload()
    layout = obs.layout
    y = data_values(obs)
    n_sym = obs.n_symbols
    h_a = np.tile(est.h_a_hat[layout.data_index], n_sym)
    h_b = np.tile(est.h_b_hat[layout.data_index], n_sym)
    decision = xor_map_grid(y, h_a, h_b, est.sigma2_hat, variant)
    bad = unalignable(est, layout)
    return RelayPacket(
        decision.bits,
        {"erasures": int(bad.size * n_sym), "unalignable_subcarriers": bad.tolist()},
    )


def transmit_p2p(
    bits: np.ndarray,
    layout: FrameLayout,
    h: np.ndarray,
    sigma2: float,
    rng: np.random.Generator,
    estimate: bool = False,
    node_id: str = "A",
) -> np.ndarray:
    """Send one packet over a single link and return the hard-decided bits.

    The receiver equalizes with the true ``h`` unless ``estimate`` is set, in
    which case it uses the LS estimate from the transmitter's pilot symbol.
    """
    grid = build_frame(qpsk_map(bits, layout), node_id)
    rx = ofdm_demodulate(apply_p2p_channel(ofdm_modulate(grid), h, sigma2, rng))
    if estimate:
        seq = layout.pilot_sequence(node_id)
        ch = estimate_channels(rx, {node_id: seq})
        h_eq = ch.h_a_hat if node_id == "A" else ch.h_b_hat
    else:
        h_eq = np.asarray(h)
    h_eq = np.broadcast_to(h_eq, (layout.fft_size,))
    payload = rx.payload()
    n_sym = payload.n_symbols
    h_d = np.tile(h_eq[layout.data_index], n_sym)
    y = data_values(payload)
    safe = np.where(h_d != 0, h_d, 1.0)
    return demap_values(y / safe)


def broadcast_and_recover(
    relay_pkt: RelayPacket | np.ndarray,
    ch_down: np.ndarray,
    sigma2: float,
    own_pkt: np.ndarray,
    rng: np.random.Generator,
    layout: FrameLayout,
    estimate: bool = False,
) -> np.ndarray:
    """Relay broadcast of U_R to one end node; returns that node's partner-packet estimate."""
    u_r = relay_pkt.bits if isinstance(relay_pkt, RelayPacket) else check_bits(relay_pkt)
    own = check_bits(own_pkt)
    if own.size != u_r.size:
        raise FramingError(f"own packet has {own.size} bits, relay packet {u_r.size}")
    u_r_hat = transmit_p2p(u_r, layout, ch_down, sigma2, rng, estimate)
    return u_r_hat ^ own
