"""Bit framing, Gray QPSK mapping and the unitary OFDM modulator/demodulator.

Bit packets are plain ``uint8`` numpy arrays of 0/1 values. Frequency-domain
grids are ``(K, S)`` complex arrays: one row per subcarrier, one column per
OFDM symbol, with null subcarriers held at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from pncvlc.errors import ConfigurationError, FramingError

SQRT_HALF = 1.0 / np.sqrt(2.0)

# index = 2*b0 + b1
CONSTELLATION = np.array(
    [(1 - 2 * (i >> 1)) + 1j * (1 - 2 * (i & 1)) for i in range(4)]
) * SQRT_HALF

N_PILOTS = 2
PILOT_SLOT = {"A": 0, "B": 1}
PILOT_ROOT = {"A": 1, "B": 3}


@dataclass(frozen=True)
class FrameLayout:
    """Subcarrier map and OFDM frame dimensions.

    Data subcarriers are all indices except DC and a guard band centred on the
    Nyquist bin; ``fft_size - n_data - 1`` guard bins are used.
    """

    fft_size: int = 64
    n_data: int = 52
    cp_len: int = 16
    n_symbols: int = 32
    n_pilots: int = N_PILOTS

    def __post_init__(self):
        if self.fft_size < 1 or self.n_data < 1 or self.n_data > self.fft_size:
            raise ConfigurationError(
                f"need 1 <= n_data <= fft_size, got n_data={self.n_data}, fft_size={self.fft_size}"
            )
        if not 0 <= self.cp_len <= self.fft_size:
            raise ConfigurationError(
                f"cp_len must satisfy 0 <= cp_len <= fft_size, got {self.cp_len}"
            )
        if self.n_symbols < 1:
            raise ConfigurationError(f"n_symbols must be positive, got {self.n_symbols}")

    @cached_property
    def data_index(self) -> np.ndarray:
        n_null = self.fft_size - self.n_data
        if n_null == 0:
            return np.arange(self.fft_size)
        guard = n_null - 1
        start = self.fft_size // 2 - guard // 2
        null = {0, *range(start, start + guard)}
        return np.array([k for k in range(self.fft_size) if k not in null])

    @cached_property
    def null_index(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.fft_size), self.data_index)

    @property
    def symbol_len(self) -> int:
        return self.fft_size + self.cp_len

    @property
    def bits_per_packet(self) -> int:
        return 2 * self.n_data * self.n_symbols

    @property
    def samples_per_slot(self) -> int:
        return (self.n_symbols + self.n_pilots) * self.symbol_len

    @property
    def efficiency(self) -> float:
        """Data symbols per transmitted sample, including CP and pilot overhead."""
        return self.n_data * self.n_symbols / self.samples_per_slot

    def pilot_sequence(self, node: str) -> np.ndarray:
        """Unit-magnitude Zadoff-Chu values on the data subcarriers, zero elsewhere."""
        n = np.arange(self.n_data)
        root = PILOT_ROOT[node]
        length = self.n_data
        shift = 0 if length % 2 == 0 else 1
        seq = np.zeros(self.fft_size, dtype=complex)
        seq[self.data_index] = np.exp(-1j * np.pi * root * n * (n + shift) / length)
        return seq


@dataclass(frozen=True)
class QpskSymbolGrid:
    """K x S frequency-domain grid; the first ``n_pilots`` columns are pilots."""

    symbols: np.ndarray
    layout: FrameLayout
    n_pilots: int = 0

    @property
    def n_symbols(self) -> int:
        return self.symbols.shape[1] - self.n_pilots

    @property
    def data(self) -> np.ndarray:
        return self.symbols[:, self.n_pilots:]

    @property
    def pilots(self) -> np.ndarray:
        return self.symbols[:, : self.n_pilots]

    def payload(self) -> "QpskSymbolGrid":
        return QpskSymbolGrid(self.data, self.layout, 0)

    def rotated(self, rotation: np.ndarray) -> "QpskSymbolGrid":
        """Per-subcarrier multiplication of every column."""
        return QpskSymbolGrid(self.symbols * rotation[:, None], self.layout, self.n_pilots)


@dataclass(frozen=True)
class OfdmFrame:
    samples: np.ndarray
    layout: FrameLayout
    n_symbols: int
    n_pilots: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def fft_size(self) -> int:
        return self.layout.fft_size

    @property
    def cp_len(self) -> int:
        return self.layout.cp_len

    @property
    def n_slots(self) -> int:
        return self.n_symbols + self.n_pilots

    def with_samples(self, samples: np.ndarray, **meta) -> "OfdmFrame":
        return OfdmFrame(samples, self.layout, self.n_symbols, self.n_pilots, {**self.meta, **meta})


def check_bits(bits) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size == 0:
        raise FramingError("bit packet must be a non-empty 1-D sequence")
    if not np.isin(bits, (0, 1)).all():
        raise FramingError("bit packet entries must be 0 or 1")
    return bits.astype(np.uint8)


def bits_to_indices(bits: np.ndarray) -> np.ndarray:
    return 2 * bits[0::2] + bits[1::2]


def indices_to_bits(idx: np.ndarray) -> np.ndarray:
    out = np.empty(2 * idx.size, dtype=np.uint8)
    out[0::2] = idx >> 1
    out[1::2] = idx & 1
    return out


def qpsk_map(bits, layout: FrameLayout) -> QpskSymbolGrid:
    """Gray-map ``bits`` onto the data subcarriers, filling subcarriers first."""
    bits = check_bits(bits)
    per_symbol = 2 * layout.n_data
    if bits.size % per_symbol:
        raise FramingError(
            f"packet length {bits.size} is not a multiple of 2*n_data={per_symbol}"
        )
    n_sym = bits.size // per_symbol
    grid = np.zeros((layout.fft_size, n_sym), dtype=complex)
    points = CONSTELLATION[bits_to_indices(bits)]
    grid[layout.data_index, :] = points.reshape(n_sym, layout.n_data).T
    return QpskSymbolGrid(grid, layout)


def data_values(grid: QpskSymbolGrid) -> np.ndarray:
    """Payload data-subcarrier values flattened in the order ``qpsk_map`` filled them."""
    return grid.data[grid.layout.data_index, :].T.reshape(-1)


def qpsk_demap(grid: QpskSymbolGrid, noise_variance: float | None = None) -> np.ndarray:
    """Hard nearest-point decision on equalized payload values.

    ``noise_variance`` is accepted for interface symmetry; hard decisions do
    not depend on it.
    """
    return demap_values(data_values(grid))


def demap_values(values: np.ndarray) -> np.ndarray:
    idx = 2 * (values.real < 0) + (values.imag < 0)
    return indices_to_bits(idx.astype(np.uint8))


def build_frame(data: QpskSymbolGrid, node_id: str) -> QpskSymbolGrid:
    """Prepend the two time-orthogonal pilot symbols.

    Node A owns pilot slot 0, node B slot 1; the other slot is left silent.
    """
    if data.n_pilots:
        raise FramingError("grid already carries pilot symbols")
    if node_id not in PILOT_SLOT:
        raise ConfigurationError(f"unknown node id {node_id!r}")
    layout = data.layout
    pilots = np.zeros((layout.fft_size, N_PILOTS), dtype=complex)
    pilots[:, PILOT_SLOT[node_id]] = layout.pilot_sequence(node_id)
    return QpskSymbolGrid(np.hstack([pilots, data.symbols]), layout, N_PILOTS)


def ofdm_modulate(grid: QpskSymbolGrid, cp_len: int | None = None) -> OfdmFrame:
    layout = grid.layout
    cp = layout.cp_len if cp_len is None else cp_len
    if cp > layout.fft_size or cp < 0:
        raise ConfigurationError(f"cp_len={cp} must be in [0, fft_size={layout.fft_size}]")
    if cp != layout.cp_len:
        layout = _replace_cp(layout, cp)
    if grid.symbols.shape[0] != layout.fft_size:
        raise FramingError(f"grid has {grid.symbols.shape[0]} rows, expected {layout.fft_size}")
    body = np.fft.ifft(grid.symbols, axis=0, norm="ortho").T
    with_cp = np.hstack([body[:, layout.fft_size - cp:], body])
    return OfdmFrame(with_cp.reshape(-1), layout, grid.n_symbols, grid.n_pilots)


def ofdm_demodulate(frame: OfdmFrame) -> QpskSymbolGrid:
    layout = frame.layout
    expected = frame.n_slots * layout.symbol_len
    if frame.samples.size != expected:
        raise FramingError(f"frame has {frame.samples.size} samples, layout expects {expected}")
    body = frame.samples.reshape(frame.n_slots, layout.symbol_len)[:, layout.cp_len:]
    grid = np.fft.fft(body, axis=1, norm="ortho").T
    return QpskSymbolGrid(grid, layout, frame.n_pilots)


def intensity_frontend(frame: OfdmFrame, dc_bias: float, clip_floor: float = 0.0) -> OfdmFrame:
    """Real-valued LED drive: real part plus DC bias, clipped from below.

    The clipping distortion power (mean squared clipped-off amount) is stored
    in ``meta["clipping_power"]``.
    """
    if dc_bias < 0:
        raise ConfigurationError(f"dc_bias must be non-negative, got {dc_bias}")
    drive = frame.samples.real + dc_bias
    clipped = np.maximum(drive, clip_floor)
    distortion = float(np.mean((clipped - drive) ** 2))
    return frame.with_samples(clipped, clipping_power=distortion, dc_bias=dc_bias)


def _replace_cp(layout: FrameLayout, cp: int) -> FrameLayout:
    return FrameLayout(layout.fft_size, layout.n_data, cp, layout.n_symbols, layout.n_pilots)
