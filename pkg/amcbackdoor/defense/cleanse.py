"""
trigger reverse engineering: for every class, the smallest mask that sends
clean frames to that class. a class reachable with an abnormally small mask
is reported through a median absolute deviation score.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional
from warnings import warn

import numpy as np
from scipy.special import expit
from tqdm.auto import tqdm

from ..neuralnet import Adam, Network, loss_input_gradient

log = logging.getLogger(__name__)

# consistency constant of the MAD for normal data
MAD_SCALE = 1.4826
ANOMALY_THRESHOLD = 2.


@dataclass(frozen=True)
class CleanseConfig:
    steps: int = 200
    samples: int = 64
    learning_rate: float = 0.1
    beta: float = 1e-3
    target_asr: float = 0.99
    beta_factor: float = 1.5
    check_every: int = 10


@dataclass
class ReversedTrigger:
    target: int
    mask: np.ndarray
    pattern: np.ndarray
    mask_norm: float
    asr: float
    diverged: bool = False


@dataclass
class AnomalyResult:
    mask_norms: np.ndarray
    anomaly_indices: np.ndarray
    max_index: float
    flagged_classes: List[int] = field(default_factory=list)
    diverged_classes: List[int] = field(default_factory=list)
    reversed_asr: Optional[np.ndarray] = None

    def to_dict(self):
        return {'mask_norms': self.mask_norms.tolist(),
                'anomaly_indices': self.anomaly_indices.tolist(),
                'max_index': self.max_index,
                'flagged_classes': self.flagged_classes,
                'diverged_classes': self.diverged_classes,
                'reversed_asr': None if self.reversed_asr is None
                else self.reversed_asr.tolist()}


def anomaly_index(norms) -> np.ndarray:
    """
    |norm - median| / (1.4826 * MAD) per class. NaN norms stay NaN and are
    left out of the statistics; a zero MAD gives zeros.
    """
    norms = np.asarray(norms, dtype=float)
    finite = norms[np.isfinite(norms)]
    if len(finite) == 0:
        return np.full(norms.shape, np.nan)
    median = np.median(finite)
    mad = MAD_SCALE*np.median(np.abs(finite - median))
    if mad == 0:
        warn('all mask norms are equal, anomaly indices set to 0')
        return np.where(np.isfinite(norms), 0., np.nan)
    return np.abs(norms - median)/mad


def _apply(x, mask, pattern):
    return (1 - mask)*x + mask*pattern


def reverse_engineer_trigger(model: Network, frames, target: int,
                             cfg: CleanseConfig,
                             rng: np.random.Generator) -> ReversedTrigger:
    """
    minimise CE(model(x'), target) + beta * ||m||_1 over a mask m and a
    pattern P shared by all symbols, with x' = (1 - m) x + m P. m is a
    sigmoid and P a scaled tanh of free parameters. beta grows while the
    reversed trigger reaches ``cfg.target_asr`` and shrinks otherwise.
    """
    frames = np.asarray(frames, dtype=float)
    _, n, c = frames.shape[1:]
    scale = float(np.max(np.abs(frames))) or 1.
    mask_raw = np.zeros((n, c))
    pattern_raw = rng.normal(0, 0.1, size=(n, c))
    params = [mask_raw, pattern_raw]
    opt = Adam(cfg.learning_rate)
    beta = cfg.beta
    best = None
    asr = 0.

    for step in range(cfg.steps):
        batch = frames[rng.integers(len(frames), size=cfg.samples)]
        mask = expit(mask_raw)
        tanh = np.tanh(pattern_raw)
        pattern = scale*tanh
        losses, dx = loss_input_gradient(model, _apply(batch, mask, pattern),
                                         np.full(len(batch), target))
        loss = losses.mean() + beta*mask.sum()
        if not np.isfinite(loss):
            log.warning(f'reverse engineering of class {target} diverged at '
                        f'step {step}')
            return ReversedTrigger(target, mask, pattern, np.nan, 0., True)
        dx = dx/len(batch)
        dmask = np.sum(dx*(pattern - batch), axis=(0, 1)) + beta
        dpattern = np.sum(dx*mask, axis=(0, 1))*scale
        opt.step(params, [dmask*mask*(1 - mask), dpattern*(1 - tanh**2)])

        if (step + 1) % cfg.check_every == 0 or step == cfg.steps - 1:
            mask = expit(mask_raw)
            pattern = scale*np.tanh(pattern_raw)
            predicted = model.predict(_apply(batch, mask, pattern))
            asr = float(np.mean(predicted == target))
            norm = float(mask.sum())
            if asr >= cfg.target_asr:
                if best is None or norm < best.mask_norm:
                    best = ReversedTrigger(target, mask.copy(),
                                           pattern.copy(), norm, asr)
                beta *= cfg.beta_factor
            else:
                beta /= cfg.beta_factor

    if best is None:
        mask = expit(mask_raw)
        best = ReversedTrigger(target, mask, scale*np.tanh(pattern_raw),
                               float(mask.sum()), asr)
    return best


def reverse_engineer_anomaly(model: Network, sample_frames,
                             cfg: CleanseConfig = CleanseConfig(),
                             rng: Optional[np.random.Generator] = None,
                             show_progress: bool = False) -> AnomalyResult:
    """
    reverse engineer a trigger towards every class and score the mask
    norms; an index above 2 marks a class as backdoored.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if len(sample_frames) == 0:
        raise ValueError('reverse engineering needs sample frames')
    n_classes = model.config.n_classes
    triggers = [reverse_engineer_trigger(model, sample_frames, c, cfg, rng)
                for c in tqdm(range(n_classes), desc='cleanse', leave=False,
                              disable=not show_progress)]
    norms = np.array([t.mask_norm for t in triggers])
    indices = anomaly_index(norms)
    diverged = [t.target for t in triggers if t.diverged]
    finite = indices[np.isfinite(indices)]
    max_index = float(finite.max()) if len(finite) else float('nan')
    flagged = [int(c) for c in np.flatnonzero(
        np.nan_to_num(indices) > ANOMALY_THRESHOLD)]
    log.info(f'mask norms {np.round(norms, 2).tolist()}, max anomaly index '
             f'{max_index:.2f}')
    return AnomalyResult(norms, indices, max_index, flagged, diverged,
                         np.array([t.asr for t in triggers]))
