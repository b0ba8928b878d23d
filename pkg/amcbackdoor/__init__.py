from amcbackdoor.configuration import Config

config: Config = Config()
from amcbackdoor.logger import conditionally_start_logging
conditionally_start_logging()

__version__ = '0.1.0'

from amcbackdoor.sigchain import (
    OfdmConfig,
    PaConfig,
    ChannelConfig,
    ChainConfig,
    transmit)
from amcbackdoor.datastore import (
    DatasetManifest,
    generate_dataset,
    save_dataset,
    load_dataset)
from amcbackdoor.neuralnet import ModelConfig, Network, TrainConfig, train
from amcbackdoor.attribution import (
    WindowingSpec,
    build_background,
    sampling_shap,
    select_window)
from amcbackdoor.triggergen import design_trigger, compose_trigger
from amcbackdoor.poisoner import PoisonPlan, poison_dataset
from amcbackdoor.defense import (
    strip,
    activation_clustering,
    reverse_engineer_anomaly)
from amcbackdoor.harness import Experiment, run_experiment, snr_sweep

from amcbackdoor.analysis.load import load_metrics, load_report
