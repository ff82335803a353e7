"""Lambertian VLC link gains, per-frame channel draws and the channel operators.

Channels act on OFDM frames as per-subcarrier multiplication of each symbol
body (circular convolution) followed by complex AWGN whose per-sample variance
equals the per-subcarrier variance under the unitary transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pncvlc.errors import ConfigurationError, FramingError
from pncvlc.ofdm_phy import OfdmFrame


@dataclass(frozen=True)
class GeometryConfig:
    distance_m: float = 2.0
    led_semiangle_deg: float = 60.0
    pd_area_m2: float = 1e-4
    irradiance_deg: float = 0.0
    incidence_deg: float = 0.0
    fov_deg: float = 90.0
    scenario: str = "LoS"
    rms_delay_spread_ns: float = 0.0
    occlusion_prob: float = 0.0
    occlusion_atten_db: float = 20.0

    def __post_init__(self):
        if not 0 < self.led_semiangle_deg < 90:
            raise ConfigurationError("must be in (0, 90)", "led_semiangle_deg")
        if not 0 <= self.incidence_deg <= 180:
            raise ConfigurationError("must be in [0, 180]", "incidence_deg")
        if not 0 < self.fov_deg <= 90:
            raise ConfigurationError("must be in (0, 90]", "fov_deg")
        if not 0 <= self.irradiance_deg < 90:
            raise ConfigurationError("must be in [0, 90)", "irradiance_deg")
        if self.pd_area_m2 <= 0:
            raise ConfigurationError("must be positive", "pd_area_m2")
        if not 0 <= self.occlusion_prob <= 1:
            raise ConfigurationError("must be in [0, 1]", "occlusion_prob")
        if self.occlusion_atten_db < 0:
            raise ConfigurationError("must be non-negative", "occlusion_atten_db")
        if self.rms_delay_spread_ns < 0:
            raise ConfigurationError("must be non-negative", "rms_delay_spread_ns")
        if self.scenario not in ("LoS", "NLoS"):
            raise ConfigurationError(f"unknown scenario {self.scenario!r}", "scenario")

    @property
    def lambertian_order(self) -> float:
        return -math.log(2) / math.log(math.cos(math.radians(self.led_semiangle_deg)))


@dataclass(frozen=True)
class NoiseModel:
    sigma2: float
    snr_db: float
    ambient_dc: float = 0.0


@dataclass(frozen=True)
class ChannelRealization:
    h_a: np.ndarray
    h_b: np.ndarray
    noise: NoiseModel
    occluded_a: bool = False
    occluded_b: bool = False

    @property
    def phase_offsets(self) -> np.ndarray:
        return phase_offsets(self.h_a, self.h_b)


def phase_offsets(h_a: np.ndarray, h_b: np.ndarray) -> np.ndarray:
    """Per-subcarrier angle of h_b/h_a in (-pi, pi]; zero where h_a vanishes."""
    h_a = np.asarray(h_a)
    h_b = np.asarray(h_b)
    ok = h_a != 0
    ratio = np.where(ok, h_b * np.conj(h_a), 1.0)
    phi = np.angle(ratio)
    phi = np.where(phi <= -np.pi, np.pi, phi)
    return np.where(ok, phi, 0.0)


def lambertian_los_gain(geom: GeometryConfig) -> float:
    """DC gain (m+1) A / (2 pi d^2) cos^m(irradiance) cos(incidence) inside the FOV."""
    if geom.distance_m <= 0:
        raise ConfigurationError(f"must be positive, got {geom.distance_m}", "distance_m")
    if geom.incidence_deg > geom.fov_deg:
        return 0.0
    m = geom.lambertian_order
    phi = math.radians(geom.irradiance_deg)
    psi = math.radians(geom.incidence_deg)
    gain = (m + 1) * geom.pd_area_m2 / (2 * math.pi * geom.distance_m**2)
    return gain * math.cos(phi) ** m * math.cos(psi)


def calibrate_noise(snr_db: float, ambient_dc: float = 0.0) -> NoiseModel:
    if not math.isfinite(snr_db):
        raise ConfigurationError(f"snr_db must be finite, got {snr_db}")
    return NoiseModel(10.0 ** (-snr_db / 10.0), snr_db, ambient_dc)


def normalized_gains(*geoms: GeometryConfig) -> list[float]:
    """Lambertian gains scaled so their mean energy is one."""
    raw = np.array([lambertian_los_gain(g) for g in geoms])
    rms = np.sqrt(np.mean(raw**2))
    if rms == 0:
        raise ConfigurationError("every link is outside the receiver field of view", "geometry")
    return list(raw / rms)


def nlos_tap_profile(geom: GeometryConfig, cp_len: int, sampling_rate_hz: float) -> np.ndarray:
    """Exponential power-delay profile (sums to one) confined to the cyclic prefix."""
    tau = geom.rms_delay_spread_ns * 1e-9 * sampling_rate_hz
    if tau > cp_len:
        raise ConfigurationError(
            f"rms delay spread of {tau:.2f} samples exceeds cp_len={cp_len}",
            "rms_delay_spread_ns",
        )
    if tau == 0 or cp_len == 0:
        return np.ones(1)
    power = np.exp(-np.arange(cp_len) / tau)
    return power / power.sum()


def draw_link(
    geom: GeometryConfig,
    gain: float,
    fft_size: int,
    cp_len: int,
    sampling_rate_hz: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, bool]:
    """One frame's frequency response of a single link and its occlusion flag."""
    if geom.scenario == "LoS":
        theta = rng.uniform(-np.pi, np.pi)
        h = np.full(fft_size, gain * np.exp(1j * theta))
    else:
        profile = nlos_tap_profile(geom, cp_len, sampling_rate_hz)
        taps = np.sqrt(profile / 2) * (
            rng.standard_normal(profile.size) + 1j * rng.standard_normal(profile.size)
        )
        h = gain * np.fft.fft(taps, fft_size)
    occluded = bool(rng.random() < geom.occlusion_prob)
    if occluded:
        h = h * 10.0 ** (-geom.occlusion_atten_db / 20.0)
    return h, occluded


def draw_channel(
    geom_a: GeometryConfig,
    geom_b: GeometryConfig,
    noise: NoiseModel,
    rng: np.random.Generator,
    fft_size: int = 64,
    cp_len: int = 16,
    sampling_rate_hz: float = 2e7,
) -> ChannelRealization:
    """Draw both links of a two-transmitter phase for one frame."""
    g_a, g_b = normalized_gains(geom_a, geom_b)
    h_a, occ_a = draw_link(geom_a, g_a, fft_size, cp_len, sampling_rate_hz, rng)
    h_b, occ_b = draw_link(geom_b, g_b, fft_size, cp_len, sampling_rate_hz, rng)
    return ChannelRealization(h_a, h_b, noise, occ_a, occ_b)


def _check_h(frame: OfdmFrame, h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim == 0:
        h = np.full(frame.fft_size, complex(h))
    if h.shape != (frame.fft_size,):
        raise FramingError(f"channel has {h.size} coefficients, frame uses {frame.fft_size}")
    return h


def _filter(frame: OfdmFrame, h: np.ndarray) -> np.ndarray:
    layout = frame.layout
    sym = frame.samples.reshape(frame.n_slots, layout.symbol_len)
    body = np.fft.fft(sym[:, layout.cp_len:], axis=1)
    body = np.fft.ifft(body * h[None, :], axis=1)
    return np.hstack([body[:, layout.fft_size - layout.cp_len:], body])


def _awgn(shape, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    if sigma2 <= 0:
        return np.zeros(shape, dtype=complex)
    scale = np.sqrt(sigma2 / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _same_layout(a: OfdmFrame, b: OfdmFrame):
    if (a.layout.fft_size, a.layout.cp_len, a.n_slots, a.samples.size) != (
        b.layout.fft_size,
        b.layout.cp_len,
        b.n_slots,
        b.samples.size,
    ):
        raise FramingError("frames from A and B have different layouts")


def superpose_mac_phase(
    frame_a: OfdmFrame,
    frame_b: OfdmFrame,
    ch: ChannelRealization,
    rng: np.random.Generator,
) -> OfdmFrame:
    """Relay reception when A and B transmit simultaneously."""
    _same_layout(frame_a, frame_b)
    h_a = _check_h(frame_a, ch.h_a)
    h_b = _check_h(frame_b, ch.h_b)
    rx = _filter(frame_a, h_a) + _filter(frame_b, h_b)
    rx = rx.reshape(-1) + _awgn(frame_a.samples.size, ch.noise.sigma2, rng)
    return frame_a.with_samples(rx)


def apply_p2p_channel(
    frame: OfdmFrame, h: np.ndarray, sigma2: float, rng: np.random.Generator
) -> OfdmFrame:
    h = _check_h(frame, h)
    rx = _filter(frame, h).reshape(-1) + _awgn(frame.samples.size, sigma2, rng)
    return frame.with_samples(rx)
