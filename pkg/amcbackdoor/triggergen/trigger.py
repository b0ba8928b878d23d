"""
trigger design from the target-class windows at the selected positions:
a robust prototype, the leading principal direction, and their energy
constrained mixture.
"""

import logging
from dataclasses import dataclass, field
from typing import Sequence, Tuple
from warnings import warn

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackError, eigsh

from ..analysis.math import db2amp, rms
from ..attribution import WindowingSpec, normalize_windows, partition

log = logging.getLogger(__name__)

EIG_TOL = 1e-10


class TriggerError(ValueError):
    pass


@dataclass
class ClassStats:
    prototype: np.ndarray
    principal: np.ndarray
    n_windows_used: int
    explained_variance_ratio: float
    window_rms: float


@dataclass
class TriggerSpec:
    """
    ``vector`` (N_w,) is designed in phase-normalised space; it is inserted
    at every window of ``window_indices``.
    """
    vector: np.ndarray
    window_indices: Tuple[int, ...]
    lambda_mix: float
    alpha: float
    kappa_db: float = float('nan')
    origin: str = 'xai'
    extra: dict = field(default_factory=dict)

    @property
    def window_len(self) -> int:
        return len(self.vector)

    def to_dict(self):
        return {'vector_re': self.vector.real.tolist(),
                'vector_im': self.vector.imag.tolist(),
                'window_indices': list(self.window_indices),
                'lambda_mix': self.lambda_mix,
                'alpha': self.alpha,
                'kappa_db': self.kappa_db,
                'origin': self.origin,
                'extra': dict(self.extra)}

    @classmethod
    def from_dict(cls, d) -> 'TriggerSpec':
        vector = np.asarray(d['vector_re']) + 1j*np.asarray(d['vector_im'])
        return cls(vector, tuple(d['window_indices']), d['lambda_mix'],
                   d['alpha'], d['kappa_db'], d.get('origin', 'xai'),
                   dict(d.get('extra', {})))


def collect_target_windows(dataset, y_tar: int,
                           window_index,
                           spec: WindowingSpec) -> np.ndarray:
    """
    phase-normalised windows at the selected position(s) of every
    transmitted symbol of the target-class training frames: (K, N_w).
    """
    indices = np.atleast_1d(window_index).astype(int)
    for i in indices:
        spec.window_slice(int(i))
    if dataset.clean_tx is None:
        raise TriggerError('dataset was stored without transmitted symbols')
    train = dataset.train_indices
    frames = train[dataset.labels[train] == y_tar]
    if len(frames) == 0:
        raise TriggerError(f'no training frames of class {y_tar}')
    windows = partition(dataset.clean_tx[frames].astype(complex), spec)
    windows = windows[:, :, indices].reshape(-1, spec.window_len)
    return normalize_windows(windows)[0]


def complex_median_prototype(windows) -> np.ndarray:
    """ per-sample median of the real parts plus j times that of the imag """
    windows = np.asarray(windows, dtype=complex)
    if windows.ndim != 2 or len(windows) == 0:
        raise TriggerError('prototype needs a non-empty (K, N_w) window set')
    return np.median(windows.real, axis=0) + 1j*np.median(windows.imag,
                                                          axis=0)


def _leading_eigenpair(cov: np.ndarray) -> Tuple[float, np.ndarray]:
    n = len(cov)
    v0 = np.ones(n)/np.sqrt(n)
    try:
        value, vector = eigsh(cov, k=1, which='LA', v0=v0, tol=EIG_TOL)
        return float(value[0]), vector[:, 0]
    except (ArpackError, ValueError) as e:
        log.debug(f'ARPACK failed ({e}), using the dense solver')
        values, vectors = eigh(cov, subset_by_index=[n - 1, n - 1])
        return float(values[0]), vectors[:, 0]


def first_principal_component(windows,
                              reference=None) -> Tuple[np.ndarray, float]:
    """
    leading principal direction of the windows stacked as [Re, Im] rows,
    folded back to a unit complex vector. the sign makes
    Re<p, reference> >= 0 (reference defaults to the median prototype).

    Returns:
        the direction and its explained variance ratio.
    """
    windows = np.asarray(windows, dtype=complex)
    if windows.ndim != 2 or len(windows) < 2:
        raise TriggerError('principal component needs at least 2 windows')
    n_w = windows.shape[1]
    data = np.hstack((windows.real, windows.imag))
    data = data - data.mean(axis=0)
    cov = data.T @ data/(len(data) - 1)
    total = np.trace(cov)
    if total <= 1e-24:
        raise TriggerError('windows are identical, no principal direction')
    value, u = _leading_eigenpair(cov)
    p = u[:n_w] + 1j*u[n_w:]
    p /= np.linalg.norm(p)
    if reference is None:
        reference = complex_median_prototype(windows)
    if np.real(np.vdot(reference, p)) < 0:
        p = -p
    return p, value/total


def class_stats(windows) -> ClassStats:
    windows = np.asarray(windows, dtype=complex)
    prototype = complex_median_prototype(windows)
    principal, ratio = first_principal_component(windows, prototype)
    return ClassStats(prototype, principal, len(windows), float(ratio),
                      float(rms(windows)))


def energy_budget_alpha(window_samples, kappa_db: float) -> float:
    """ alpha = 10**(kappa_db / 20) * RMS of the window samples """
    samples = np.asarray(window_samples)
    if samples.size == 0:
        raise TriggerError('energy budget needs window samples')
    level = rms(samples)
    if level == 0:
        warn('window samples are all zero, the trigger energy is 0')
        log.warning('zero-energy window: alpha = 0')
        return 0.
    return float(db2amp(kappa_db)*level)


def compose_trigger(stats: ClassStats, lambda_mix: float, alpha: float,
                    window_indices: Sequence[int] = (0,),
                    kappa_db: float = float('nan')) -> TriggerSpec:
    """
    t = alpha * (lambda mu + (1 - lambda) p) / ||lambda mu + (1 - lambda) p||
    """
    if not 0 <= lambda_mix <= 1:
        raise TriggerError(f'lambda_mix must lie in [0, 1], got {lambda_mix}')
    if alpha < 0:
        raise TriggerError(f'alpha must be >= 0, got {alpha}')
    mix = lambda_mix*stats.prototype + (1 - lambda_mix)*stats.principal
    norm = np.linalg.norm(mix)
    if norm < 1e-12:
        raise TriggerError('prototype and principal direction cancel out')
    return TriggerSpec(alpha*mix/norm, tuple(int(i) for i in window_indices),
                       float(lambda_mix), float(alpha), float(kappa_db))


def design_trigger(dataset, y_tar: int, window_indices: Sequence[int],
                   spec: WindowingSpec, lambda_mix: float,
                   kappa_db: float) -> Tuple[TriggerSpec, ClassStats]:
    """ collect, summarise and compose in one call """
    windows = collect_target_windows(dataset, y_tar, window_indices, spec)
    stats = class_stats(windows)
    alpha = energy_budget_alpha(windows, kappa_db)
    trigger = compose_trigger(stats, lambda_mix, alpha, window_indices,
                              kappa_db)
    log.info(f'trigger for class {y_tar} at windows {list(window_indices)}: '
             f'alpha {alpha:.4g}, first component explains '
             f'{100*stats.explained_variance_ratio:.1f}% of the variance')
    return trigger, stats
