"""
evaluation of clean and backdoored models across an SNR grid.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm.auto import tqdm

from ..datastore import LabeledDataset, retransmit
from ..poisoner import triggered_test_set
from ..triggergen import TriggerSpec
from .metrics import MetricRow, abc, alc, asr

log = logging.getLogger(__name__)

EVAL_STREAM = 3


def snr_sweep(dataset: LabeledDataset,
              clean_models: Dict[str, object],
              backdoored_models: Dict[str, object],
              trigger: TriggerSpec,
              y_tar: int,
              snr_grid: Sequence[float],
              seed: int = 0,
              rho_h: float = 100.,
              show_progress: bool = True) -> List[MetricRow]:
    """
    transmit the test split again at every SNR of the grid, clean and with
    the trigger injected before the channel, and score ASR, ALC and ABC of
    every architecture. clean and triggered frames share their channel
    draws.
    """
    rows = []
    test = dataset.test_indices
    labels = dataset.labels[test]
    for snr in tqdm(snr_grid, desc='snr sweep', leave=False,
                    disable=not show_progress):
        clean_x = retransmit(dataset, test, EVAL_STREAM, float(snr))
        rng = np.random.default_rng([seed, EVAL_STREAM])
        trig_x, trig_idx = triggered_test_set(dataset, trigger, y_tar,
                                              float(snr), EVAL_STREAM, rho_h,
                                              rng)
        trig_labels = dataset.labels[trig_idx]
        for arch in clean_models:
            backdoored = backdoored_models[arch]
            values = {'ASR': asr(backdoored, trig_x, trig_labels, y_tar),
                      'ALC': alc(clean_models[arch], clean_x, labels),
                      'ABC': abc(backdoored, clean_x, labels)}
            for metric, value in values.items():
                rows.append(MetricRow(arch, float(snr), metric, value, seed))
            log.info(f'{arch} at {snr:g} dB: ' + ', '.join(
                f'{k} {v:.1f}%' for k, v in values.items()))
    return sorted(rows, key=lambda r: (r.model, r.snr_db,
                                       ['ASR', 'ALC', 'ABC'].index(r.metric)))
