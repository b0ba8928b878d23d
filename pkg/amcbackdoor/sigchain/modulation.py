"""
digital modulation schemes and bit-to-symbol mapping.

linear schemes put one constellation point per subcarrier. the frequency
shift keyed schemes (GFSK, CPFSK) are carried as subcarrier activation
patterns: a group of 2**bits_per_symbol adjacent subcarriers has one active
tone, its index given by the bits.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .ofdm import OfdmConfig


class Scheme(str, Enum):
    BPSK = 'BPSK'
    QPSK = 'QPSK'
    PSK8 = 'PSK8'
    QAM16 = 'QAM16'
    QAM64 = 'QAM64'
    PAM4 = 'PAM4'
    GFSK = 'GFSK'
    CPFSK = 'CPFSK'


FSK_SCHEMES = (Scheme.GFSK, Scheme.CPFSK)
FSK_MODULATION_INDEX = 0.5
GFSK_BT = 0.5


@dataclass(frozen=True)
class ModulationScheme:
    """
    a modulation scheme.

    for linear schemes ``constellation`` holds the unit average power points,
    in Gray order. for FSK schemes it holds the tone phasors
    exp(j*pi*h*(2i - 1)) of the frequency deviations.
    """
    name: Scheme
    constellation: np.ndarray = field(repr=False)
    bits_per_symbol: int

    def __post_init__(self):
        if len(self.constellation) != 2**self.bits_per_symbol:
            raise ValueError(
                f'{self.name.value}: {len(self.constellation)} points for '
                f'{self.bits_per_symbol} bits per symbol')

    @property
    def is_fsk(self) -> bool:
        return self.name in FSK_SCHEMES

    @property
    def tones(self) -> int:
        """ subcarriers used by one symbol """
        return 2**self.bits_per_symbol if self.is_fsk else 1


def _gray(n: int) -> np.ndarray:
    i = np.arange(n)
    return i ^ (i >> 1)


def _normalise(points: np.ndarray) -> np.ndarray:
    return points / np.sqrt(np.mean(np.abs(points)**2))


def _psk(order: int) -> np.ndarray:
    points = np.empty(order, dtype=complex)
    # gray code k sits at angle index k
    points[_gray(order)] = np.exp(2j*np.pi*np.arange(order)/order)
    return points


def _pam(order: int) -> np.ndarray:
    levels = np.empty(order)
    levels[_gray(order)] = 2*np.arange(order) - order + 1
    return _normalise(levels.astype(complex))


def _qam(order: int) -> np.ndarray:
    side = int(np.sqrt(order))
    bits = int(np.log2(side))
    axis = _pam(side).real * np.sqrt(np.mean((2*np.arange(side) - side + 1)**2))
    points = np.empty(order, dtype=complex)
    for word in range(order):
        i_bits, q_bits = word >> bits, word & (side - 1)
        points[word] = axis[i_bits] + 1j*axis[q_bits]
    return _normalise(points)


def _fsk_tones(order: int) -> np.ndarray:
    deviation = 2*np.arange(order) - order + 1
    return np.exp(1j*np.pi*FSK_MODULATION_INDEX*deviation)


def _build_schemes() -> Dict[Scheme, ModulationScheme]:
    bpsk = np.array([1, -1], dtype=complex)
    # first bit gives the sign of I, second the sign of Q
    qpsk = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])/np.sqrt(2)
    return {
        Scheme.BPSK: ModulationScheme(Scheme.BPSK, bpsk, 1),
        Scheme.QPSK: ModulationScheme(Scheme.QPSK, qpsk, 2),
        Scheme.PSK8: ModulationScheme(Scheme.PSK8, _psk(8), 3),
        Scheme.QAM16: ModulationScheme(Scheme.QAM16, _qam(16), 4),
        Scheme.QAM64: ModulationScheme(Scheme.QAM64, _qam(64), 6),
        Scheme.PAM4: ModulationScheme(Scheme.PAM4, _pam(4), 2),
        Scheme.GFSK: ModulationScheme(Scheme.GFSK, _fsk_tones(2), 1),
        Scheme.CPFSK: ModulationScheme(Scheme.CPFSK, _fsk_tones(2), 1),
    }


SCHEMES = _build_schemes()


def get_scheme(name) -> ModulationScheme:
    try:
        return SCHEMES[Scheme(name)]
    except ValueError:
        raise ValueError(f'unknown modulation scheme {name!r}. known '
                         f'schemes: {[s.value for s in Scheme]}') from None


def map_symbols(bits, scheme) -> np.ndarray:
    """
    map a bit stream onto symbols.

    linear schemes return one constellation point per group of
    ``bits_per_symbol`` bits, the first bit of a group being the most
    significant. FSK schemes return ``tones`` subcarrier values per group
    (see ``modulate_grid``).
    """
    if not isinstance(scheme, ModulationScheme):
        scheme = get_scheme(scheme)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError('bit stream must hold only 0 and 1')
    k = scheme.bits_per_symbol
    if len(bits) % k:
        raise ValueError(f'{len(bits)} bits cannot be grouped by {k} for '
                         f'{scheme.name.value}')
    words = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
    if not scheme.is_fsk:
        return scheme.constellation[words]
    return _fsk_activation(words, scheme)


def _fsk_activation(words: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    tones = scheme.tones
    pattern = np.zeros((len(words), tones), dtype=complex)
    if scheme.name == Scheme.CPFSK:
        # phase carried over from one tone to the next
        steps = np.angle(scheme.constellation[words])
        phase = np.concatenate(([0.], np.cumsum(steps)[:-1]))
        pattern[np.arange(len(words)), words] = np.exp(1j*phase)
    else:
        pattern[np.arange(len(words)), words] = scheme.constellation[words]
    pattern = pattern.ravel()
    if scheme.name == Scheme.GFSK:
        sigma = np.sqrt(np.log(2))/(2*np.pi*GFSK_BT)*tones
        pattern = (gaussian_filter1d(pattern.real, sigma, mode='wrap')
                   + 1j*gaussian_filter1d(pattern.imag, sigma, mode='wrap'))
    return _normalise(pattern)


def modulate_grid(scheme, cfg: OfdmConfig,
                  rng: np.random.Generator) -> np.ndarray:
    """ M x N grid of subcarrier values from uniformly drawn bits """
    if not isinstance(scheme, ModulationScheme):
        scheme = get_scheme(scheme)
    n_symbols = cfg.symbols_per_frame * cfg.n_subcarriers // scheme.tones
    bits = rng.integers(0, 2, size=n_symbols*scheme.bits_per_symbol)
    grid = map_symbols(bits, scheme)
    return grid.reshape(cfg.symbols_per_frame, cfg.n_subcarriers)
