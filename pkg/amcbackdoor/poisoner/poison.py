"""
trigger insertion into transmitted symbols, training-set poisoning with
relabelling, and inference-time injection.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from tqdm.auto import tqdm

from ..attribution import WindowingSpec, dominant_phase
from ..datastore import LabeledDataset, retransmit
from ..sigchain.ofdm import IqFrame
from ..triggergen import TriggerSpec

log = logging.getLogger(__name__)

POISON_STREAM = 4


class PoisonError(ValueError):
    pass


def poison_symbol(symbol, trigger: TriggerSpec) -> np.ndarray:
    """
    add the trigger to every selected window, rotated by that window's own
    dominant phase. samples outside the windows are left untouched.
    """
    symbol = np.asarray(symbol, dtype=complex)
    spec = WindowingSpec(trigger.window_len, symbol.shape[-1])
    out = symbol.copy()
    for index in trigger.window_indices:
        sl = spec.window_slice(index)
        phase = dominant_phase(symbol[..., sl])
        out[..., sl] = symbol[..., sl] + \
            trigger.vector*np.exp(1j*phase)[..., None]
    return out


def symbols_per_frame(rho_h: float, n_symbols: int) -> int:
    """ |J| for a symbol poisoning ratio ``rho_h`` in percent """
    if not 0 < rho_h <= 100:
        raise PoisonError(f'rho_h must lie in (0, 100], got {rho_h}')
    return max(1, int(round(rho_h/100*n_symbols)))


def draw_symbol_set(n_symbols: int, rho_h: float,
                    rng: Optional[np.random.Generator]) -> np.ndarray:
    count = symbols_per_frame(rho_h, n_symbols)
    if count == n_symbols or rng is None:
        return np.arange(count)
    return np.sort(rng.choice(n_symbols, count, replace=False))


def inject_frame(symbols, trigger: TriggerSpec,
                 symbol_set: Sequence[int]) -> np.ndarray:
    """ poison rows ``symbol_set`` of an (M, N + N_cp) symbol array """
    out = np.array(symbols, dtype=complex)
    rows = np.asarray(symbol_set, dtype=int)
    if len(rows):
        out[rows] = poison_symbol(out[rows], trigger)
    return out


def inject_at_inference(frame: IqFrame, trigger: TriggerSpec,
                        symbol_set: Optional[Sequence[int]] = None,
                        rng: Optional[np.random.Generator] = None,
                        rho_h: float = 100.) -> IqFrame:
    """
    insert the trigger into a frame before it is transmitted. without an
    explicit ``symbol_set`` the symbols are drawn at ratio ``rho_h``.
    """
    if symbol_set is None:
        symbol_set = draw_symbol_set(frame.n_symbols, rho_h, rng)
    return frame.replace(inject_frame(frame.symbols, trigger, symbol_set))


@dataclass
class PoisonPlan:
    """
    Args:
        ``y_tar``: label given to poisoned frames.
        ``trigger``: what is inserted and where.
        ``rho_h``: percentage of the M symbols of a frame that carry it.
        ``example_fraction``: share of eligible training frames poisoned.
        ``n_subcarriers``: N, for the sample poisoning ratio.
    """
    y_tar: int
    trigger: TriggerSpec
    rho_h: float = 100.
    example_fraction: float = 0.1
    n_subcarriers: int = 128

    def __post_init__(self):
        if not 0 < self.example_fraction <= 1:
            raise PoisonError('example_fraction must lie in (0, 1], got '
                              f'{self.example_fraction}')
        symbols_per_frame(self.rho_h, 1)

    @property
    def rho_v(self) -> float:
        """ percentage of the N samples of a poisoned symbol touched """
        return 100*len(self.trigger.window_indices)*self.trigger.window_len \
            / self.n_subcarriers

    def realized_rho_h(self, n_symbols: int) -> float:
        return 100*symbols_per_frame(self.rho_h, n_symbols)/n_symbols


@dataclass
class PoisonedDataset:
    base: LabeledDataset
    dataset: LabeledDataset
    poisoned_indices: np.ndarray
    plan: PoisonPlan
    symbol_sets: Dict[int, Tuple[int, ...]] = field(default_factory=dict)


def poison_dataset(dataset: LabeledDataset, plan: PoisonPlan,
                   rng: np.random.Generator,
                   show_progress: bool = True) -> PoisonedDataset:
    """
    poison ``plan.example_fraction`` of the training frames not already in
    the target class: insert the trigger into their transmitted symbols,
    relabel them, and transmit them again through fresh channel draws.

    Raises:
        ``PoisonError``: no eligible frame.
    """
    if not 0 <= plan.y_tar < dataset.manifest.n_classes:
        raise PoisonError(f'target class {plan.y_tar} does not exist')
    train = dataset.train_indices
    eligible = train[dataset.labels[train] != plan.y_tar]
    if len(eligible) == 0:
        raise PoisonError('no training frame outside the target class')
    count = max(1, int(round(plan.example_fraction*len(eligible))))
    chosen = np.sort(rng.choice(eligible, count, replace=False))

    out = dataset.copy()
    m = dataset.manifest.ofdm.symbols_per_frame
    symbol_sets = {}
    poisoned_tx = np.empty((count,) + out.clean_tx.shape[1:], dtype=complex)
    for k, i in enumerate(tqdm(chosen, desc='poison', leave=False,
                               disable=not show_progress)):
        rows = draw_symbol_set(m, plan.rho_h, rng)
        symbol_sets[int(i)] = tuple(int(r) for r in rows)
        poisoned_tx[k] = inject_frame(dataset.clean_tx[i], plan.trigger,
                                      rows)
    poisoned_tx = poisoned_tx.astype(out.clean_tx.dtype)
    out.x[chosen] = retransmit(dataset, chosen, POISON_STREAM,
                               symbols=poisoned_tx)
    out.clean_tx[chosen] = poisoned_tx
    out.labels[chosen] = plan.y_tar
    out.manifest.poison_metadata = {
        'y_tar': plan.y_tar,
        'trigger': plan.trigger.to_dict(),
        'poisoned_indices': chosen.tolist(),
        'rho_h': plan.realized_rho_h(m),
        'rho_v': plan.rho_v,
        'example_fraction': plan.example_fraction,
    }
    log.info(f'poisoned {count} of {len(eligible)} eligible frames towards '
             f'class {plan.y_tar} (rho_h {plan.realized_rho_h(m):.0f}%, '
             f'rho_v {plan.rho_v:.1f}%)')
    return PoisonedDataset(dataset, out, chosen, plan, symbol_sets)


def triggered_test_set(dataset: LabeledDataset, trigger: TriggerSpec,
                       y_tar: int, snr_db: Optional[float], stream: int,
                       rho_h: float = 100.,
                       rng: Optional[np.random.Generator] = None
                       ) -> Tuple[np.ndarray, np.ndarray]:
    """
    inject the trigger into the test frames whose label is not ``y_tar``
    and transmit them at ``snr_db`` with channel stream ``stream``.

    Returns:
        received tensors and the test indices they come from.
    """
    test = dataset.test_indices
    indices = test[dataset.labels[test] != y_tar]
    if len(indices) == 0:
        raise PoisonError('no test frame outside the target class')
    m = dataset.manifest.ofdm.symbols_per_frame
    symbols = np.stack([inject_frame(dataset.clean_tx[i], trigger,
                                     draw_symbol_set(m, rho_h, rng))
                        for i in indices])
    return retransmit(dataset, indices, stream, snr_db, symbols), indices
