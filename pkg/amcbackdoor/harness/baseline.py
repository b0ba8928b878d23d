"""
random-window baseline: a fixed Gaussian trigger with the same budget,
window length and poisoning ratio as the attribution-guided attack.
"""

import logging

import numpy as np

from ..attribution import WindowingSpec
from ..datastore import LabeledDataset
from ..poisoner import PoisonedDataset, PoisonPlan, poison_dataset
from ..triggergen import TriggerSpec

log = logging.getLogger(__name__)


def random_trigger(alpha: float, window_len: int, n_windows: int,
                   rng: np.random.Generator) -> TriggerSpec:
    vector = rng.standard_normal(window_len) + \
        1j*rng.standard_normal(window_len)
    vector *= alpha/np.linalg.norm(vector)
    window = int(rng.integers(n_windows))
    return TriggerSpec(vector, (window,), float('nan'), float(alpha),
                       origin='baseline')


def baseline_attack(dataset: LabeledDataset, y_tar: int, alpha: float,
                    rng: np.random.Generator, window_len: int,
                    example_fraction: float = 0.1, rho_h: float = 100.,
                    show_progress: bool = True) -> PoisonedDataset:
    cfg = dataset.manifest.ofdm
    spec = WindowingSpec(window_len, cfg.symbol_len)
    trigger = random_trigger(alpha, window_len, spec.n_windows, rng)
    log.info(f'baseline trigger at window {trigger.window_indices[0]}, '
             f'alpha {alpha:.4g}')
    plan = PoisonPlan(y_tar, trigger, rho_h, example_fraction,
                      cfg.n_subcarriers)
    return poison_dataset(dataset, plan, rng, show_progress)
