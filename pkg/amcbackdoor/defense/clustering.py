"""
activation clustering: per class, split the penultimate activations in two
and flag a cluster that is suspiciously small.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional
from warnings import warn

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.linalg import svd

from ..neuralnet import penultimate_activations

log = logging.getLogger(__name__)

MIN_CLASS_SIZE = 4


@dataclass
class ClusterResult:
    split_sizes: Dict[int, List[int]]
    flagged_classes: List[int]
    flagged_indices: np.ndarray
    flagged_fraction: float
    skipped_classes: List[int] = field(default_factory=list)
    n_components: int = 10
    threshold: float = 0.35

    def to_dict(self):
        return {'split_sizes': {str(c): s
                                for c, s in self.split_sizes.items()},
                'flagged_classes': self.flagged_classes,
                'n_flagged': int(len(self.flagged_indices)),
                'flagged_fraction': self.flagged_fraction,
                'skipped_classes': self.skipped_classes,
                'n_components': self.n_components,
                'threshold': self.threshold}


def _split(activations: np.ndarray, n_components: int,
           seed: int) -> np.ndarray:
    """ two-cluster assignment of the PCA projected activations """
    centered = activations - activations.mean(axis=0)
    if np.allclose(centered, 0):
        return np.zeros(len(activations), dtype=int)
    _, s, vt = svd(centered, full_matrices=False)
    rank = int(np.count_nonzero(s > s[0]*1e-12))
    projected = centered @ vt[:min(n_components, rank)].T
    _, assignment = kmeans2(projected, 2, minit='++', seed=seed,
                            missing='warn')
    return assignment


def cluster_activations(activations, labels, marked=None,
                        n_components: int = 10, threshold: float = 0.35,
                        seed: int = 0) -> ClusterResult:
    """
    Args:
        ``activations``: (n, width) penultimate activations.
        ``labels``: class of every row, as used for training.
        ``marked``: optional indices of the rows known to be poisoned;
            ``flagged_fraction`` is the percentage of them flagged.
        ``threshold``: a cluster smaller than this share of its class is
            flagged.
    """
    activations = np.asarray(activations, dtype=float)
    labels = np.asarray(labels, dtype=int)
    split_sizes, flagged_classes, skipped = {}, [], []
    flagged = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if len(members) < MIN_CLASS_SIZE:
            warn(f'class {c} has {len(members)} examples, skipped by '
                 'activation clustering')
            log.warning(f'activation clustering skipped class {c}')
            skipped.append(int(c))
            continue
        assignment = _split(activations[members], n_components, seed)
        sizes = np.bincount(assignment, minlength=2)
        split_sizes[int(c)] = [int(s) for s in sizes]
        small = int(np.argmin(sizes))
        if 0 < sizes[small] < threshold*len(members):
            flagged_classes.append(int(c))
            flagged.append(members[assignment == small])

    flagged = np.sort(np.concatenate(flagged)) if flagged else \
        np.array([], dtype=int)
    fraction = 0.
    if marked is not None and len(marked):
        fraction = 100*np.isin(marked, flagged).mean()
    log.info(f'activation clustering flagged classes {flagged_classes}, '
             f'{fraction:.1f}% of the marked examples')
    return ClusterResult(split_sizes, flagged_classes, flagged,
                         float(fraction), skipped, n_components, threshold)


def activation_clustering(model, x, labels, marked=None,
                          n_components: int = 10, threshold: float = 0.35,
                          seed: int = 0,
                          batch_size: Optional[int] = None) -> ClusterResult:
    """ ``cluster_activations`` on the penultimate layer of ``model`` """
    acts = penultimate_activations(model, x, batch_size)
    return cluster_activations(acts, labels, marked, n_components,
                               threshold, seed)
