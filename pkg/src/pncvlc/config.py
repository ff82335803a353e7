"""JSON scenario configuration: defaults, presets and strict validation."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from pncvlc.errors import ConfigurationError
from pncvlc.ofdm_phy import FrameLayout
from pncvlc.vlc_channel import GeometryConfig

log = logging.getLogger(__name__)

SCHEMES = ("PNC", "PNC_unaligned", "StoreForward", "Pt2Pt")
LIKELIHOODS = ("exact", "max-log")
LINKS = ("a_to_r", "b_to_r", "r_to_a", "r_to_b", "direct")

PRESETS = {
    "conventional": {"fft_size": 64, "n_data": 52, "cp_len": 16, "n_symbols": 32},
    # 511*318 / (320*525) = 0.96725 = 3.869/4 exactly
    "paper-match": {"fft_size": 512, "n_data": 511, "cp_len": 13, "n_symbols": 318},
}

RELIABLE_BER_BITS = 100_000


@dataclass(frozen=True)
class SnrSweep:
    start_db: float = 0.0
    stop_db: float = 24.0
    step_db: float = 2.0

    def points(self) -> list[float]:
        n = int(math.floor((self.stop_db - self.start_db) / self.step_db + 1e-9)) + 1
        return [round(self.start_db + i * self.step_db, 10) for i in range(n)]


@dataclass(frozen=True)
class Geometry:
    a_to_r: GeometryConfig = field(default_factory=GeometryConfig)
    b_to_r: GeometryConfig = field(default_factory=GeometryConfig)
    r_to_a: GeometryConfig = field(default_factory=GeometryConfig)
    r_to_b: GeometryConfig = field(default_factory=GeometryConfig)
    direct: GeometryConfig = field(default_factory=GeometryConfig)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    snr_sweep: SnrSweep = field(default_factory=SnrSweep)
    schemes: tuple = ("PNC", "Pt2Pt")
    preset: str = "conventional"
    frame: FrameLayout = field(default_factory=FrameLayout)
    frames_per_point: int = 10
    min_bits_per_point: int = RELIABLE_BER_BITS
    master_seed: int = 0
    sampling_rate_hz: float = 2e7
    genie_csi: bool = False
    downlink_estimation: bool = False
    likelihood: str = "exact"
    ambient_dc: float = 0.0
    slot_energy: float = 1.0
    enforced_phase_offset_rad: float | None = None
    geometry: Geometry = field(default_factory=Geometry)

    @property
    def packet_bits(self) -> int:
        return self.frame.bits_per_packet

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "snr_sweep": dataclasses.asdict(self.snr_sweep),
            "schemes": list(self.schemes),
            "preset": self.preset,
            "frame": {
                "fft_size": self.frame.fft_size,
                "n_data": self.frame.n_data,
                "cp_len": self.frame.cp_len,
                "n_symbols": self.frame.n_symbols,
            },
            "packet_bits": self.packet_bits,
        }
        for f in dataclasses.fields(self):
            if f.name in out or f.name in ("frame", "geometry"):
                continue
            out[f.name] = getattr(self, f.name)
        out["geometry"] = {k: dataclasses.asdict(getattr(self.geometry, k)) for k in LINKS}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_TOP_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig)} | {"packet_bits"}
_GEOM_KEYS = {f.name for f in dataclasses.fields(GeometryConfig)}


def _unknown(given: dict, allowed: set, prefix: str):
    extra = sorted(set(given) - allowed)
    if extra:
        where = f"{prefix}.{extra[0]}" if prefix else extra[0]
        raise ConfigurationError(f"unknown key (allowed: {', '.join(sorted(allowed))})", where)


def _expect(value, kind, path):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, kind) or (kind in (int, float) and isinstance(value, bool)):
        raise ConfigurationError(f"expected {kind.__name__}, got {value!r}", path)
    return value


def _geometry(raw: dict, path: str) -> GeometryConfig:
    if not isinstance(raw, dict):
        raise ConfigurationError("expected an object", path)
    _unknown(raw, _GEOM_KEYS, path)
    kwargs = {}
    for f in dataclasses.fields(GeometryConfig):
        if f.name in raw:
            kind = str if f.name == "scenario" else float
            kwargs[f.name] = _expect(raw[f.name], kind, f"{path}.{f.name}")
    try:
        return GeometryConfig(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc).split(": ", 1)[-1], f"{path}.{exc.path}") from None


def from_dict(raw: dict, preset: str | None = None, seed: int | None = None) -> ScenarioConfig:
    """Validate ``raw`` and fill defaults; ``preset``/``seed`` override the file."""
    if not isinstance(raw, dict):
        raise ConfigurationError("top level must be a JSON object")
    _unknown(raw, _TOP_KEYS, "")
    if "name" not in raw:
        raise ConfigurationError("missing required key", "name")
    kw: dict = {"name": _expect(raw["name"], str, "name")}

    sweep = raw.get("snr_sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigurationError("expected an object", "snr_sweep")
    _unknown(sweep, {"start_db", "stop_db", "step_db"}, "snr_sweep")
    sweep = SnrSweep(**{k: _expect(v, float, f"snr_sweep.{k}") for k, v in sweep.items()})
    if not sweep.step_db > 0:
        raise ConfigurationError("must be positive", "snr_sweep.step_db")
    if sweep.stop_db < sweep.start_db:
        raise ConfigurationError("must be >= snr_sweep.start_db", "snr_sweep.stop_db")
    kw["snr_sweep"] = sweep

    if "schemes" in raw:
        schemes = raw["schemes"]
        if not isinstance(schemes, list) or not schemes:
            raise ConfigurationError("expected a non-empty list", "schemes")
        for i, s in enumerate(schemes):
            if s not in SCHEMES:
                raise ConfigurationError(f"unknown scheme {s!r}", f"schemes[{i}]")
        if len(set(schemes)) != len(schemes):
            raise ConfigurationError("duplicate scheme", "schemes")
        kw["schemes"] = tuple(schemes)

    preset = preset or raw.get("preset", "conventional")
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}", "preset")
    kw["preset"] = preset
    frame = dict(PRESETS[preset])
    if "frame" in raw:
        if not isinstance(raw["frame"], dict):
            raise ConfigurationError("expected an object", "frame")
        _unknown(raw["frame"], set(frame), "frame")
        frame.update({k: _expect(v, int, f"frame.{k}") for k, v in raw["frame"].items()})
    if "packet_bits" in raw:
        bits = _expect(raw["packet_bits"], int, "packet_bits")
        per_symbol = 2 * frame["n_data"]
        if bits <= 0 or bits % per_symbol:
            raise ConfigurationError(
                f"must be a positive multiple of 2*n_data={per_symbol}", "packet_bits"
            )
        if "frame" in raw and "n_symbols" in raw["frame"] and raw["frame"]["n_symbols"] != bits // per_symbol:
            raise ConfigurationError("inconsistent with frame.n_symbols", "packet_bits")
        frame["n_symbols"] = bits // per_symbol
    try:
        kw["frame"] = FrameLayout(**frame)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), "frame") from None

    for key, kind in (
        ("frames_per_point", int),
        ("min_bits_per_point", int),
        ("master_seed", int),
        ("sampling_rate_hz", float),
        ("genie_csi", bool),
        ("downlink_estimation", bool),
        ("likelihood", str),
        ("ambient_dc", float),
        ("slot_energy", float),
    ):
        if key in raw:
            kw[key] = _expect(raw[key], kind, key)
    if raw.get("enforced_phase_offset_rad") is not None:
        kw["enforced_phase_offset_rad"] = _expect(
            raw["enforced_phase_offset_rad"], float, "enforced_phase_offset_rad"
        )
    if seed is not None:
        kw["master_seed"] = int(seed)

    if kw.get("frames_per_point", 1) < 1:
        raise ConfigurationError("must be >= 1", "frames_per_point")
    if kw.get("min_bits_per_point", 1) < 1:
        raise ConfigurationError("must be >= 1", "min_bits_per_point")
    if kw.get("sampling_rate_hz", 1.0) <= 0:
        raise ConfigurationError("must be positive", "sampling_rate_hz")
    if kw.get("slot_energy", 1.0) <= 0:
        raise ConfigurationError("must be positive", "slot_energy")
    if kw.get("likelihood", "exact") not in LIKELIHOODS:
        raise ConfigurationError(f"must be one of {LIKELIHOODS}", "likelihood")
    if kw.get("min_bits_per_point", RELIABLE_BER_BITS) < RELIABLE_BER_BITS:
        log.warning(
            "min_bits_per_point=%d: BER estimates below 1e-3 need at least %d bits",
            kw["min_bits_per_point"],
            RELIABLE_BER_BITS,
        )

    geom_raw = raw.get("geometry", {})
    if not isinstance(geom_raw, dict):
        raise ConfigurationError("expected an object", "geometry")
    _unknown(geom_raw, set(LINKS), "geometry")
    links = {k: _geometry(v, f"geometry.{k}") for k, v in geom_raw.items()}
    if "direct" not in links and "a_to_r" in links:
        links["direct"] = links["a_to_r"]
    kw["geometry"] = Geometry(**links)

    cfg = ScenarioConfig(**kw)
    _check_delay_spread(cfg)
    return cfg


def _check_delay_spread(cfg: ScenarioConfig):
    for link in LINKS:
        g = getattr(cfg.geometry, link)
        if g.scenario == "NLoS":
            tau = g.rms_delay_spread_ns * 1e-9 * cfg.sampling_rate_hz
            if tau > cfg.frame.cp_len:
                raise ConfigurationError(
                    f"{tau:.2f} samples exceeds cp_len={cfg.frame.cp_len}",
                    f"geometry.{link}.rms_delay_spread_ns",
                )


def load_config(path, preset: str | None = None, seed: int | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigurationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_dict(raw, preset=preset, seed=seed)


def dump_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(cfg.to_json() + "\n", encoding="utf-8")


def snr_points(cfg: ScenarioConfig) -> np.ndarray:
    return np.array(cfg.snr_sweep.points())
