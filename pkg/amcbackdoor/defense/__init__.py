from .strip import StripResult, strip, strip_entropies
from .clustering import (ClusterResult,
                         activation_clustering,
                         cluster_activations,
                         )
from .cleanse import (AnomalyResult,
                      CleanseConfig,
                      ReversedTrigger,
                      anomaly_index,
                      reverse_engineer_anomaly,
                      reverse_engineer_trigger,
                      ANOMALY_THRESHOLD,
                      )
