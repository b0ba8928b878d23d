"""
background pool of phase-normalised windows used to mask windows out.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .windows import WindowingSpec, normalize_windows, partition

log = logging.getLogger(__name__)


@dataclass
class BackgroundSet:
    """
    ``windows`` (P, N_w) phase-normalised samples; ``from_target`` marks the
    windows drawn from the target class.
    """
    windows: np.ndarray
    from_target: np.ndarray
    source_mix: float

    def __post_init__(self):
        if len(self.windows) == 0:
            raise ValueError('background set is empty')
        if not 0 <= self.source_mix <= 1:
            raise ValueError(f'source_mix must lie in [0, 1], got '
                             f'{self.source_mix}')

    def __len__(self) -> int:
        return len(self.windows)

    @property
    def window_len(self) -> int:
        return self.windows.shape[1]


def _draw(symbols: np.ndarray, count: int, spec: WindowingSpec,
          rng: np.random.Generator) -> np.ndarray:
    """ ``count`` random (frame, symbol, window) picks from (F, M, S) """
    f = rng.integers(len(symbols), size=count)
    m = rng.integers(symbols.shape[1], size=count)
    w = rng.integers(spec.n_windows, size=count)
    windows = partition(symbols[f, m], spec)[np.arange(count), w]
    return normalize_windows(windows)[0]


def build_background(dataset, y_tar: int, pool_size: int, mix: float,
                     rng: np.random.Generator,
                     spec: WindowingSpec) -> BackgroundSet:
    """
    draw ``round(mix * pool_size)`` windows from the transmitted training
    symbols of class ``y_tar`` and the rest from the other classes.

    Raises:
        ``ValueError``: a class needed for the mix has no training frames.
    """
    if pool_size <= 0:
        raise ValueError(f'pool_size must be > 0, got {pool_size}')
    if not 0 <= mix <= 1:
        raise ValueError(f'mix must lie in [0, 1], got {mix}')
    if dataset.clean_tx is None:
        raise ValueError('background needs the transmitted symbols')
    train = dataset.train_indices
    is_target = dataset.labels[train] == y_tar
    n_target = int(round(mix*pool_size))
    parts, flags = [], []
    for count, pool, flag in ((n_target, train[is_target], True),
                              (pool_size - n_target, train[~is_target],
                               False)):
        if count == 0:
            continue
        if len(pool) == 0:
            kind = 'target' if flag else 'non-target'
            raise ValueError(f'no {kind} training frames for class {y_tar}')
        parts.append(_draw(dataset.clean_tx[pool].astype(complex), count,
                           spec, rng))
        flags.append(np.full(count, flag))
    log.debug(f'background of {pool_size} windows, {n_target} from class '
              f'{y_tar}')
    return BackgroundSet(np.concatenate(parts), np.concatenate(flags), mix)
