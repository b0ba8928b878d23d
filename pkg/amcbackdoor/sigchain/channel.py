"""
block-fading multipath Rayleigh channel with AWGN, and the full
transmit chain (PA -> channel -> receiver front end).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter

from ..analysis.math import db2lin
from .amplifier import PaConfig, rapp_pa
from .ofdm import IqFrame, OfdmConfig, receive

log = logging.getLogger(__name__)


def exponential_power_profile(tap_delays: Sequence[int],
                              decay: float = 1.0) -> Tuple[float, ...]:
    """ unit-sum tap powers decaying as exp(-decay * tap index) """
    powers = np.exp(-decay*np.arange(len(tap_delays)))
    return tuple(float(p) for p in powers/powers.sum())


@dataclass(frozen=True)
class ChannelConfig:
    """
    Args:
        ``tap_delays``: strictly increasing sample delays of the paths.
        ``tap_power_profile``: linear path powers, normalised to sum to 1.
            None gives an exponential decay profile.
        ``snr_db``: signal to noise ratio at the receiver. ``inf`` disables
            the noise.
    """
    tap_delays: Tuple[int, ...] = (0, 2, 4)
    tap_power_profile: Optional[Tuple[float, ...]] = None
    snr_db: float = 10.0

    def __post_init__(self):
        delays = np.asarray(self.tap_delays)
        if delays.size == 0 or np.any(delays < 0) or \
                np.any(np.diff(delays) <= 0):
            raise ValueError('tap delays must be non-negative and strictly '
                             f'increasing, got {self.tap_delays}')
        object.__setattr__(self, 'tap_delays',
                           tuple(int(d) for d in self.tap_delays))
        powers = self.tap_power_profile
        if powers is None:
            powers = exponential_power_profile(self.tap_delays)
        powers = np.asarray(powers, dtype=float)
        if len(powers) != len(self.tap_delays) or np.any(powers <= 0):
            raise ValueError('one positive power per tap is required, got '
                             f'{self.tap_power_profile}')
        powers = powers/powers.sum()
        object.__setattr__(self, 'tap_power_profile',
                           tuple(float(p) for p in powers))

    @property
    def max_delay(self) -> int:
        return self.tap_delays[-1]

    def with_snr(self, snr_db: float) -> 'ChannelConfig':
        return ChannelConfig(self.tap_delays, self.tap_power_profile, snr_db)


def draw_taps(cfg: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    """ impulse response with complex Gaussian taps at the path delays """
    powers = np.asarray(cfg.tap_power_profile)
    gains = np.sqrt(powers/2)*(rng.standard_normal(len(powers))
                               + 1j*rng.standard_normal(len(powers)))
    h = np.zeros(cfg.max_delay + 1, dtype=complex)
    h[list(cfg.tap_delays)] = gains
    return h


def add_awgn(signal: np.ndarray, snr_db: float,
             rng: np.random.Generator) -> np.ndarray:
    """ complex white noise scaled to the measured signal power """
    if np.isinf(snr_db) and snr_db > 0:
        return signal.copy()
    power = np.mean(np.abs(signal)**2)
    sigma = np.sqrt(power/db2lin(snr_db)/2)
    noise = sigma*(rng.standard_normal(signal.shape)
                   + 1j*rng.standard_normal(signal.shape))
    return signal + noise


def apply_channel(frame: IqFrame, cfg: ChannelConfig,
                  rng: np.random.Generator) -> IqFrame:
    """
    convolve the serialized frame with one draw of the multipath taps,
    then add noise at ``cfg.snr_db``. the delay spread must fit inside the
    cyclic prefix.
    """
    if cfg.max_delay >= frame.cp_len and cfg.max_delay > 0:
        raise ValueError(f'maximum tap delay {cfg.max_delay} does not fit in '
                         f'a cyclic prefix of {frame.cp_len} samples')
    h = draw_taps(cfg, rng)
    faded = lfilter(h, [1.], frame.serialize())
    received = add_awgn(faded, cfg.snr_db, rng)
    return frame.replace(received.reshape(frame.symbols.shape))


@dataclass(frozen=True)
class ChainConfig:
    """ everything between the baseband symbols and the received tensor """
    ofdm: OfdmConfig = OfdmConfig()
    pa: PaConfig = PaConfig()
    channel: ChannelConfig = ChannelConfig()

    def with_snr(self, snr_db: float) -> 'ChainConfig':
        return ChainConfig(self.ofdm, self.pa, self.channel.with_snr(snr_db))


def transmit(frame: IqFrame, chain: ChainConfig,
             rng: np.random.Generator) -> np.ndarray:
    """ PA, channel and receiver front end: returns the M x N x 2 tensor """
    amplified = rapp_pa(frame, chain.pa)
    faded = apply_channel(amplified, chain.channel, rng)
    return receive(faded, chain.ofdm)
