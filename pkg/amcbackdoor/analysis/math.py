"""
functions for usual conversions
"""

import numpy as np
from numpy import log10, cumsum
from scipy.stats import entropy


def db2lin(db):
    ''' power ratio from a value in dB
    '''
    return 10**(np.asarray(db, dtype=float)/10)


def lin2db(ratio):
    ''' value in dB from a power ratio
    '''
    return 10 * log10(ratio)


def db2amp(db):
    ''' amplitude ratio from a value in dB
    '''
    return 10**(np.asarray(db, dtype=float)/20)


def rms(x, axis=None):
    ''' root mean square of a real or complex array
    '''
    return np.sqrt(np.mean(np.abs(x)**2, axis=axis))


def prediction_entropy(probs, axis=-1):
    ''' Shannon entropy (nats) of probability vectors along ``axis``
    '''
    return entropy(probs, axis=axis)


def moving_average(y, avgs):
    ''' running mean of ``y`` over windows of ``avgs`` values.
    returns len(y) - avgs + 1 values.
    '''
    if avgs < 1 or avgs > len(y):
        raise ValueError(f'window of {avgs} values does not fit in {len(y)}')
    ret = cumsum(y, dtype=float)
    ret[avgs:] = ret[avgs:] - ret[:-avgs]
    return ret[avgs - 1:] / avgs
