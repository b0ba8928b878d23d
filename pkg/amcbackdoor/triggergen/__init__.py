from .trigger import (TriggerSpec,
                      TriggerError,
                      ClassStats,
                      collect_target_windows,
                      complex_median_prototype,
                      first_principal_component,
                      class_stats,
                      energy_budget_alpha,
                      compose_trigger,
                      design_trigger,
                      )
