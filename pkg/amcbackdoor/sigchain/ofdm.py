"""
OFDM frame assembly and reception.
"""

from dataclasses import dataclass

import numpy as np
from scipy import fft


@dataclass(frozen=True)
class OfdmConfig:
    """
    Args:
        ``n_subcarriers``: FFT size N, a power of two.
        ``cp_len``: cyclic prefix length N_cp, in samples.
        ``symbols_per_frame``: OFDM symbols M in one transmission interval.
    """
    n_subcarriers: int = 128
    cp_len: int = 32
    symbols_per_frame: int = 4

    def __post_init__(self):
        n = self.n_subcarriers
        if n <= 0 or n & (n - 1):
            raise ValueError(f'n_subcarriers must be a power of two, got {n}')
        if self.cp_len < 0:
            raise ValueError(f'cp_len must be >= 0, got {self.cp_len}')
        if self.symbols_per_frame <= 0:
            raise ValueError('symbols_per_frame must be > 0, got '
                             f'{self.symbols_per_frame}')

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def rx_shape(self):
        return (self.symbols_per_frame, self.n_subcarriers, 2)


@dataclass
class IqFrame:
    """
    one transmission interval: M time-domain symbols of N + N_cp samples
    with their cyclic prefix, and the random phase each was rotated by.
    """
    symbols: np.ndarray
    per_symbol_phase: np.ndarray
    cp_len: int

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=complex)
        self.per_symbol_phase = np.asarray(self.per_symbol_phase, dtype=float)
        if self.symbols.ndim != 2:
            raise ValueError('symbols must be an M x (N + N_cp) array')
        if len(self.per_symbol_phase) != len(self.symbols):
            raise ValueError('one phase per symbol is required')

    @property
    def n_symbols(self) -> int:
        return self.symbols.shape[0]

    @property
    def symbol_len(self) -> int:
        return self.symbols.shape[1]

    def serialize(self) -> np.ndarray:
        return self.symbols.ravel()

    def replace(self, symbols: np.ndarray) -> 'IqFrame':
        if symbols.shape != self.symbols.shape:
            raise ValueError(f'expected symbols of shape {self.symbols.shape},'
                             f' got {symbols.shape}')
        return IqFrame(symbols, self.per_symbol_phase.copy(), self.cp_len)


def assemble_frame(freq_symbols, cfg: OfdmConfig,
                   rng: np.random.Generator) -> IqFrame:
    """
    inverse FFT each row of the M x N subcarrier grid, prepend the last
    N_cp samples as cyclic prefix and rotate every symbol by a phase drawn
    uniformly in [0, 2 pi).
    """
    grid = np.asarray(freq_symbols, dtype=complex)
    expected = (cfg.symbols_per_frame, cfg.n_subcarriers)
    if grid.shape != expected:
        raise ValueError(f'subcarrier grid of shape {grid.shape} does not '
                         f'match the OFDM configuration {expected}')
    time = fft.ifft(grid, axis=1)
    if cfg.cp_len:
        time = np.concatenate((time[:, -cfg.cp_len:], time), axis=1)
    kappa = rng.uniform(0, 2*np.pi, size=cfg.symbols_per_frame)
    symbols = time * np.exp(1j*kappa)[:, None]
    return IqFrame(symbols, kappa, cfg.cp_len)


def receive(frame: IqFrame, cfg: OfdmConfig) -> np.ndarray:
    """
    drop the cyclic prefix and split the samples into real and imaginary
    planes. returns an M x N x 2 real tensor. no equalisation.
    """
    if frame.symbol_len != cfg.symbol_len:
        raise ValueError(f'frame symbols have {frame.symbol_len} samples, '
                         f'configuration expects {cfg.symbol_len}')
    body = frame.symbols[:, cfg.cp_len:]
    return np.stack((body.real, body.imag), axis=-1)


def receive_batch(symbols: np.ndarray, cp_len: int) -> np.ndarray:
    """ ``receive`` for a (..., M, N + N_cp) stack of symbols """
    body = symbols[..., cp_len:]
    return np.stack((body.real, body.imag), axis=-1)
