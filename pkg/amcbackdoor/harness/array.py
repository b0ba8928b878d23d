"""
SNR grids for the evaluation sweep.
"""

import numpy as np
from warnings import warn


def generate_snr_grid(start, stop, step=None, num=None, tol=1e-10):
    """
    SNR values (dB) from ``start`` to ``stop``, both included, spaced by
    ``step`` or split into ``num`` points.

    Args:
        start (float): lowest SNR
        stop (float): highest SNR
        step (Optional[float]): spacing between SNRs. when it does not
            divide the span, the grid keeps the endpoints and uses the
            largest spacing not above ``step``.
        num (Optional[int]): number of SNRs.
        tol (Optional[float]): tolerance on the number of steps.
    returns:
        numpy.ndarray: ascending SNR values.
    """
    if step is not None and num is not None:
        raise ValueError('use of step and num at the same time.')
    if step is None and num is None:
        raise ValueError('specify either a step (`step=[float]`) or a '
                         'number of points (`num=[int]`).')
    lo, hi = sorted((float(start), float(stop)))

    if step is None:
        if num < 1:
            raise ValueError(f'`num` must be >= 1, got {num}')
        return np.linspace(lo, hi, num=num)

    if step <= 0:
        raise ValueError(f'`step` must be positive, got {step}')
    n_steps = (hi - lo)/step
    whole = int(np.floor(n_steps + tol))
    if whole < np.ceil(n_steps - tol):
        effective = (hi - lo)/(whole + 1)
        warn(f'{step} dB does not divide [{lo:g}, {hi:g}] dB; the grid '
             f'uses {whole + 2} points, {effective:.4f} dB apart')
        whole += 1
    return np.linspace(lo, hi, num=whole + 1)
