"""
attack and accuracy metrics, in percent, and their CSV emission.
"""

from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import pandas as pd

CSV_COLUMNS = ['model', 'snr_db', 'metric', 'value', 'seed']


class Metric(str, Enum):
    ASR = 'ASR'
    ALC = 'ALC'
    ABC = 'ABC'


@dataclass(frozen=True)
class MetricRow:
    model: str
    snr_db: float
    metric: str
    value: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, 'metric', Metric(self.metric).value)
        if not 0 <= self.value <= 100:
            raise ValueError(f'{self.metric} of {self.value} is not a '
                             'percentage')


def _predict(model, x) -> np.ndarray:
    if hasattr(model, 'predict'):
        return np.asarray(model.predict(x))
    return np.argmax(model(x), axis=-1)


def accuracy(model, x, labels) -> float:
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise ValueError('cannot score an empty set')
    return float(100*np.mean(_predict(model, x) == labels))


def asr(backdoored_model, triggered_x, labels, y_tar: int) -> float:
    """
    percentage of triggered frames classified as ``y_tar``; frames whose
    true label already is ``y_tar`` are left out.
    """
    labels = np.asarray(labels)
    keep = labels != y_tar
    if not np.any(keep):
        raise ValueError('no triggered frame outside the target class')
    predicted = _predict(backdoored_model, np.asarray(triggered_x)[keep])
    return float(100*np.mean(predicted == y_tar))


def alc(clean_model, x, labels) -> float:
    """ accuracy of the clean model on clean frames """
    return accuracy(clean_model, x, labels)


def abc(backdoored_model, x, labels) -> float:
    """ accuracy of the backdoored model on clean frames """
    return accuracy(backdoored_model, x, labels)


def metrics_frame(rows: Iterable[MetricRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in rows], columns=CSV_COLUMNS)


def write_metrics(rows: Iterable[MetricRow],
                  path: Union[str, Path]) -> Path:
    """ header ``model,snr_db,metric,value,seed``, '\\n' line endings """
    path = Path(path)
    metrics_frame(rows).to_csv(path, index=False, lineterminator='\n',
                               float_format='%.4f')
    return path
