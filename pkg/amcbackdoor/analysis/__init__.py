from .math import (db2lin,
                   lin2db,
                   db2amp,
                   rms,
                   prediction_entropy,
                   moving_average,
                   )
from .load import load_metrics, load_report, metric_table, asr_trend
