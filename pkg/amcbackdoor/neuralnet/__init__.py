from .models import (Arch,
                     ModelConfig,
                     Network,
                     forward,
                     loss_and_gradient,
                     loss_input_gradient,
                     input_gradient,
                     penultimate_activations,
                     )
from .optim import Adam, Sgd, make_optimizer
from .training import (TrainConfig,
                       TrainHistory,
                       TrainedModel,
                       TrainingDivergedError,
                       train,
                       )
from .checkpoint import CheckpointError, save_model, load_model
