"""
memoryless power amplifier model.

Rapp's solid state amplifier: AM/AM compression
|y| = |x| / (1 + (|x|/A_sat)**(2p))**(1/(2p)), no AM/PM.
"""

from dataclasses import dataclass

import numpy as np

from ..analysis.math import db2amp, rms
from .ofdm import IqFrame


@dataclass(frozen=True)
class PaConfig:
    """
    Args:
        ``rapp_smoothness``: p, sharpness of the transition to saturation.
        ``ibo_db``: input back-off. A_sat = input RMS * 10**(ibo_db/20).
    """
    rapp_smoothness: float = 2.0
    ibo_db: float = 3.0

    def __post_init__(self):
        if self.rapp_smoothness <= 0:
            raise ValueError('rapp_smoothness must be > 0, got '
                             f'{self.rapp_smoothness}')


def rapp_gain(amplitude, saturation: float, smoothness: float):
    """ |y| / |x| of the Rapp model """
    p = smoothness
    return (1 + (np.asarray(amplitude)/saturation)**(2*p))**(-1/(2*p))


def saturation_amplitude(samples, cfg: PaConfig) -> float:
    return float(rms(samples) * db2amp(cfg.ibo_db))


def rapp_pa(frame: IqFrame, cfg: PaConfig) -> IqFrame:
    """ compress every sample amplitude, phase unchanged """
    a_sat = saturation_amplitude(frame.symbols, cfg)
    if a_sat == 0:
        return frame.replace(frame.symbols.copy())
    gain = rapp_gain(np.abs(frame.symbols), a_sat, cfg.rapp_smoothness)
    return frame.replace(frame.symbols * gain)
