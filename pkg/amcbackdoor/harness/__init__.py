from .array import generate_snr_grid
from .metrics import (Metric,
                      MetricRow,
                      CSV_COLUMNS,
                      accuracy,
                      asr,
                      alc,
                      abc,
                      metrics_frame,
                      write_metrics,
                      )
from .sweep import snr_sweep, EVAL_STREAM
from .baseline import baseline_attack, random_trigger
from .experiment import (Experiment,
                         StageError,
                         manifest_from_config,
                         model_config,
                         train_config,
                         run_experiment,
                         )
