"""
utilities to load experiment reports
"""
import json
import pprint
from pathlib import Path
from typing import Optional, Union

import pandas as pd
from scipy.stats import spearmanr


def load_metrics(path: Union[str, Path]) -> pd.DataFrame:
    """
    returns the metric table of a ``metrics.csv`` report
    """
    return pd.read_csv(path, dtype={'model': str, 'metric': str})


def load_report(path: Union[str, Path],
                print: Optional[bool] = False) -> dict:
    """
    load a JSON report (SHAP, trigger, defense or run metadata)
    """
    with open(path) as f:
        report = json.load(f)
    if print:
        pp = pprint.PrettyPrinter(indent=2, sort_dicts=False)
        pp.pprint(report)
    return report


def metric_table(df: pd.DataFrame, metric: str) -> pd.DataFrame:
    """
    one metric as a model x SNR table
    """
    rows = df[df['metric'] == metric]
    return rows.pivot_table(index='model', columns='snr_db', values='value')


def asr_trend(df: pd.DataFrame, model: str) -> float:
    """
    Spearman rank correlation of a model's ASR with the SNR
    """
    rows = df[(df['metric'] == 'ASR') & (df['model'] == model)]
    rows = rows.sort_values('snr_db')
    if len(rows) < 2:
        raise ValueError(f'not enough ASR points for {model}')
    return float(spearmanr(rows['snr_db'], rows['value'])[0])
