"""
window-level Shapley attribution of a black-box frame classifier.

a symbol is split into L windows. masked-out windows are replaced by
background windows rotated back by the phase of the window they replace,
and the marginal contribution of every window to the target-class
probability is averaged over random permutations.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from tqdm.auto import tqdm

from ..sigchain import receive_batch
from .background import BackgroundSet
from .windows import WindowingSpec, normalize_windows, partition

log = logging.getLogger(__name__)

SELECTIONS = ('target', 'all')


def merge_masked(symbol, mask, bg: BackgroundSet, rng: np.random.Generator,
                 spec: WindowingSpec, replacements=None) -> np.ndarray:
    """
    keep the windows where ``mask`` is 1 and replace the others by
    background windows re-rotated by the replaced window's phase.
    ``replacements`` fixes the background index per window instead of
    drawing them from ``rng``.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (spec.n_windows,):
        raise ValueError(f'mask of shape {mask.shape}, expected '
                         f'({spec.n_windows},)')
    if len(bg) == 0:
        raise ValueError('background set is empty')
    symbol = np.asarray(symbol, dtype=complex)
    if replacements is None:
        replacements = rng.integers(len(bg), size=spec.n_windows)
    out = partition(symbol.copy(), spec)
    _, phase = normalize_windows(out)
    drop = ~mask
    out[drop] = bg.windows[np.asarray(replacements)[drop]] * \
        np.exp(1j*phase[drop])[:, None]
    return out.reshape(symbol.shape)


def context_symbols(bg: BackgroundSet, count: int, spec: WindowingSpec,
                    rng: np.random.Generator) -> np.ndarray:
    """ ``count`` filler symbols made of random background windows """
    picks = rng.integers(len(bg), size=(count, spec.n_windows))
    return bg.windows[picks].reshape(count, spec.symbol_len)


def exact_shapley(value_fn: Callable[[np.ndarray], float],
                  n_players: int) -> np.ndarray:
    """
    Shapley values by enumeration of all 2**n coalitions. ``value_fn`` maps
    a boolean membership vector to a scalar.
    """
    values = {subset: float(value_fn(np.array(subset, dtype=bool)))
              for subset in itertools.product((0, 1), repeat=n_players)}
    weights = [1/(n_players*comb(n_players - 1, s))
               for s in range(n_players)]
    phi = np.zeros(n_players)
    for subset, value in values.items():
        for i in range(n_players):
            if subset[i]:
                continue
            with_i = subset[:i] + (1,) + subset[i + 1:]
            phi[i] += weights[sum(subset)]*(values[with_i] - value)
    return phi


def permutation_masks(order: Sequence[int]) -> np.ndarray:
    """ the L + 1 nested masks of one permutation chain, (L + 1, L) """
    n = len(order)
    masks = np.zeros((n + 1, n), dtype=bool)
    for step, player in enumerate(order):
        masks[step + 1:, player] = True
    return masks


@dataclass
class ShapReport:
    """
    ``scores[c, l]`` is the mean contribution of window l to the target
    class probability over the attributed symbols of class c.
    """
    scores: np.ndarray
    y_tar: int
    window_len: int
    n_permutations: int
    symbols_per_class: int
    selected_windows: List[int] = field(default_factory=list)
    selection: str = 'target'

    @property
    def n_windows(self) -> int:
        return self.scores.shape[1]

    @property
    def target_scores(self) -> np.ndarray:
        if self.selection == 'all':
            return self.scores.mean(axis=0)
        return self.scores[self.y_tar]

    def to_dict(self):
        return {'scores': self.scores.tolist(),
                'y_tar': self.y_tar,
                'window_len': self.window_len,
                'n_permutations': self.n_permutations,
                'symbols_per_class': self.symbols_per_class,
                'selected_windows': list(self.selected_windows),
                'selection': self.selection}

    @classmethod
    def from_dict(cls, d) -> 'ShapReport':
        d = dict(d)
        d['scores'] = np.asarray(d['scores'], dtype=float)
        return cls(**d)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2))
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'ShapReport':
        return cls.from_dict(json.loads(Path(path).read_text()))


def select_window(report: Union[ShapReport, Sequence[float]],
                  k: int = 1) -> List[int]:
    """
    indices of the ``k`` highest target scores, ties to the lower index.
    """
    scores = report.target_scores if isinstance(report, ShapReport) \
        else np.asarray(report, dtype=float)
    if k not in (1, 2) or k > len(scores):
        raise ValueError(f'k must be 1 or 2 and at most {len(scores)}, '
                         f'got {k}')
    return [int(i) for i in np.argsort(-scores, kind='stable')[:k]]


def _frame_symbols(model, frame_symbols: Optional[int]) -> int:
    if frame_symbols is not None:
        return frame_symbols
    config = getattr(model, 'config', None)
    return config.input_shape[0] if config is not None else 1


def _symbol_shapley(model, symbol, y_tar, spec, bg, n_permutations, rng,
                    n_symbols, cp_len) -> np.ndarray:
    n_windows = spec.n_windows
    windows = partition(np.asarray(symbol, dtype=complex), spec)
    _, phase = normalize_windows(windows)
    context = context_symbols(bg, n_symbols - 1, spec, rng)

    orders, frames = [], []
    for _ in range(n_permutations):
        order = rng.permutation(n_windows)
        # one background draw serves the whole permutation chain
        replaced = bg.windows[rng.integers(len(bg), size=n_windows)] * \
            np.exp(1j*phase)[:, None]
        masks = permutation_masks(order)
        chain = np.where(masks[..., None], windows, replaced)
        chain = chain.reshape(n_windows + 1, spec.symbol_len)
        frame = np.empty((n_windows + 1, n_symbols, spec.symbol_len),
                         dtype=complex)
        frame[:, 0] = chain
        frame[:, 1:] = context
        orders.append(order)
        frames.append(frame)

    prob = np.asarray(model(receive_batch(np.concatenate(frames), cp_len)))
    prob = prob[:, y_tar].reshape(n_permutations, n_windows + 1)
    phi = np.zeros(n_windows)
    for order, p in zip(orders, prob):
        phi[order] += np.diff(p)
    return phi/n_permutations


def sampling_shap(model,
                  symbols,
                  labels,
                  y_tar: int,
                  spec: WindowingSpec,
                  bg: BackgroundSet,
                  n_permutations: int,
                  rng: np.random.Generator,
                  cp_len: int,
                  n_classes: Optional[int] = None,
                  frame_symbols: Optional[int] = None,
                  k: int = 1,
                  selection: str = 'target',
                  show_progress: bool = True) -> ShapReport:
    """
    permutation-sampling Shapley estimate of every window's contribution to
    the probability of class ``y_tar``.

    Args:
        ``model``: network or callable mapping (B, M, N, 2) tensors to
            (B, O) class probabilities.
        ``symbols``: (S, N + N_cp) transmitted symbols, ``labels`` (S,).
        ``cp_len``: cyclic prefix dropped before the model sees a frame.
        ``frame_symbols``: symbols per model input; the attributed symbol
            fills the first slot and background windows fill the others.
        ``k``, ``selection``: windows reported as selected, from the
            target row or from the mean over all classes.
    """
    symbols = np.asarray(symbols, dtype=complex)
    labels = np.asarray(labels, dtype=int)
    if len(symbols) == 0:
        raise ValueError('no symbols to attribute')
    if n_permutations < 1:
        raise ValueError(f'n_permutations must be >= 1, got {n_permutations}')
    if selection not in SELECTIONS:
        raise ValueError(f'selection must be one of {SELECTIONS}')
    n_classes = n_classes or int(labels.max()) + 1
    n_symbols = _frame_symbols(model, frame_symbols)

    # per-symbol generators keep every symbol's draws independent of order
    seeds = rng.integers(0, 2**63, size=len(symbols))
    phi = np.zeros((len(symbols), spec.n_windows))
    for i in tqdm(range(len(symbols)), desc='shap', leave=False,
                  disable=not show_progress):
        phi[i] = _symbol_shapley(model, symbols[i], y_tar, spec, bg,
                                 n_permutations,
                                 np.random.default_rng(seeds[i]),
                                 n_symbols, cp_len)

    scores = np.zeros((n_classes, spec.n_windows))
    counts = np.bincount(labels, minlength=n_classes)
    for c in range(n_classes):
        if counts[c]:
            scores[c] = phi[labels == c].mean(axis=0)
    report = ShapReport(scores, y_tar, spec.window_len, n_permutations,
                        int(counts.max()), selection=selection)
    report.selected_windows = select_window(report, k)
    log.info(f'window scores for class {y_tar}: '
             f'{np.round(report.target_scores, 4).tolist()}, selected '
             f'{report.selected_windows}')
    return report
