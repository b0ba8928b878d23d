from .poison import (PoisonPlan,
                     PoisonedDataset,
                     PoisonError,
                     POISON_STREAM,
                     poison_symbol,
                     inject_frame,
                     inject_at_inference,
                     poison_dataset,
                     triggered_test_set,
                     symbols_per_frame,
                     draw_symbol_set,
                     )
