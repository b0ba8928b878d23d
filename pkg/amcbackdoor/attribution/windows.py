"""
windowing of OFDM symbols and phase normalisation of windows.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

# mean phasors smaller than this have no defined phase
PHASE_EPS = 1e-12


class WindowingError(ValueError):
    pass


@dataclass(frozen=True)
class WindowingSpec:
    """
    Args:
        ``window_len``: N_w samples per window.
        ``symbol_len``: N + N_cp, split into L = symbol_len / N_w windows.
    """
    window_len: int
    symbol_len: int

    def __post_init__(self):
        if self.window_len <= 0 or self.symbol_len <= 0:
            raise WindowingError('window and symbol lengths must be > 0')
        if self.symbol_len % self.window_len:
            raise WindowingError(f'window length {self.window_len} does not '
                                 f'divide the symbol length {self.symbol_len}')

    @property
    def n_windows(self) -> int:
        return self.symbol_len//self.window_len

    def window_slice(self, index: int) -> slice:
        if not 0 <= index < self.n_windows:
            raise WindowingError(f'window {index} out of range '
                                 f'[0, {self.n_windows})')
        return slice(index*self.window_len, (index + 1)*self.window_len)


@dataclass
class NormalizedWindow:
    samples: np.ndarray
    stored_phase: float


def partition(symbol, spec: WindowingSpec) -> np.ndarray:
    """
    split a symbol (or a stack of symbols, last axis) into its L
    non-overlapping windows: (..., L, N_w). the rows are views.
    """
    symbol = np.asarray(symbol)
    if symbol.shape[-1] != spec.symbol_len:
        raise WindowingError(f'symbol of {symbol.shape[-1]} samples, '
                             f'windowing expects {spec.symbol_len}')
    return symbol.reshape(symbol.shape[:-1]
                          + (spec.n_windows, spec.window_len))


def dominant_phase(windows) -> np.ndarray:
    """ angle of the mean phasor along the last axis, 0 when it vanishes """
    mean = np.mean(windows, axis=-1)
    phase = np.angle(mean)
    return np.where(np.abs(mean) < PHASE_EPS, 0., phase)


def normalize_windows(windows) -> Tuple[np.ndarray, np.ndarray]:
    """ vectorised ``phase_normalize``: (normalized windows, phases) """
    windows = np.asarray(windows, dtype=complex)
    if windows.shape[-1] == 0:
        raise ValueError('cannot normalise an empty window')
    phase = dominant_phase(windows)
    return windows*np.exp(-1j*phase)[..., None], phase


def phase_normalize(window) -> NormalizedWindow:
    """ rotate ``window`` so its mean phasor lies on the positive real axis """
    samples, phase = normalize_windows(np.asarray(window)[None])
    return NormalizedWindow(samples[0], float(phase[0]))


def denormalize(nw: NormalizedWindow) -> np.ndarray:
    return nw.samples*np.exp(1j*nw.stored_phase)
