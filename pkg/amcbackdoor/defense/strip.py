"""
STRIP: superimpose clean frames on an input and look at the entropy of the
predictions. a trigger that dominates the decision keeps the entropy low.
"""

import logging
from dataclasses import dataclass

import numpy as np
from tqdm.auto import tqdm

from ..analysis.math import prediction_entropy

log = logging.getLogger(__name__)


@dataclass
class StripResult:
    clean_entropies: np.ndarray
    triggered_entropies: np.ndarray
    entropy_gap: float
    threshold: float
    detection_rate: float
    false_positive_rate: float
    n_overlays: int
    target_fpr: float
    blend: float

    def to_dict(self):
        return {'entropy_gap': self.entropy_gap,
                'threshold': self.threshold,
                'detection_rate': self.detection_rate,
                'false_positive_rate': self.false_positive_rate,
                'n_overlays': self.n_overlays,
                'target_fpr': self.target_fpr,
                'blend': self.blend,
                'clean_entropy_mean': float(np.mean(self.clean_entropies)),
                'triggered_entropy_mean':
                    float(np.mean(self.triggered_entropies))}


def strip_entropies(model, frames, overlay_pool, n_overlays: int,
                    rng: np.random.Generator, blend: float = 0.5,
                    show_progress: bool = False) -> np.ndarray:
    """
    mean prediction entropy (nats) of every frame blended with
    ``n_overlays`` random frames of ``overlay_pool``.
    """
    frames = np.asarray(frames, dtype=float)
    pool = np.asarray(overlay_pool, dtype=float)
    if len(frames) == 0 or len(pool) == 0:
        raise ValueError('STRIP needs input frames and an overlay pool')
    if n_overlays < 1:
        raise ValueError(f'n_overlays must be >= 1, got {n_overlays}')
    out = np.empty(len(frames))
    for i in tqdm(range(len(frames)), desc='strip', leave=False,
                  disable=not show_progress):
        picks = rng.integers(len(pool), size=n_overlays)
        blended = (1 - blend)*frames[i] + blend*pool[picks]
        out[i] = np.mean(prediction_entropy(model(blended), axis=-1))
    return out


def strip(model, test_frames, triggered_frames, overlay_pool,
          n_overlays: int = 20, rng: np.random.Generator = None,
          fpr: float = 0.05, blend: float = 0.5,
          show_progress: bool = False) -> StripResult:
    """
    entropy gap between clean and triggered inputs, and the share of
    triggered inputs below the threshold that flags ``fpr`` of the clean
    ones.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    clean = strip_entropies(model, test_frames, overlay_pool, n_overlays,
                            rng, blend, show_progress)
    triggered = strip_entropies(model, triggered_frames, overlay_pool,
                                n_overlays, rng, blend, show_progress)
    threshold = float(np.quantile(clean, fpr))
    result = StripResult(clean, triggered,
                         float(np.mean(clean) - np.mean(triggered)),
                         threshold,
                         float(100*np.mean(triggered < threshold)),
                         float(100*np.mean(clean < threshold)),
                         n_overlays, fpr, blend)
    log.info(f'STRIP: entropy gap {result.entropy_gap:.4f}, detection '
             f'{result.detection_rate:.1f}% at {100*fpr:.0f}% FPR')
    return result
