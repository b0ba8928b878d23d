from .windows import (WindowingSpec,
                      WindowingError,
                      NormalizedWindow,
                      partition,
                      phase_normalize,
                      normalize_windows,
                      denormalize,
                      dominant_phase,
                      )
from .background import BackgroundSet, build_background
from .shap import (ShapReport,
                   merge_masked,
                   context_symbols,
                   exact_shapley,
                   permutation_masks,
                   sampling_shap,
                   select_window,
                   )
