import json

import numpy as np
import pytest

from amcbackdoor.datastore import DatasetManifest, generate_dataset
from amcbackdoor.sigchain import ChannelConfig, OfdmConfig

# a configuration small enough to run the whole pipeline in seconds
TINY_OVERRIDES = {
    'core.show_progress_bars': False,
    'ofdm.n_subcarriers': 16,
    'ofdm.cp_len': 4,
    'ofdm.symbols_per_frame': 2,
    'channel.tap_delays': [0, 1, 2],
    'dataset.classes': ['BPSK', 'QPSK', 'QAM16', 'GFSK'],
    'dataset.n_examples': 160,
    'dataset.train_snr_db': [10.0, 20.0],
    'models.mlp_hidden': [16],
    'models.cnn_filters': [4, 4],
    'models.cnn_kernel': 3,
    'models.cnn_pool': 2,
    'models.cnn_dense': 8,
    'models.gru_hidden': 4,
    'training.epochs': 2,
    'training.batch_size': 32,
    'attack.window_len': 4,
    'attack.permutations': 5,
    'attack.symbols_per_class': 3,
    'attack.background_size': 20,
    'evaluation.snr_grid': [0.0, 10.0],
    'defense.strip_overlays': 4,
    'defense.strip_inputs': 10,
    'defense.cleanse_steps': 5,
    'defense.cleanse_samples': 8,
}


def _tiny_manifest(**kwargs) -> DatasetManifest:
    params = dict(ofdm=OfdmConfig(16, 4, 2),
                  channel=ChannelConfig((0, 1, 2), None, 10.),
                  class_names=('BPSK', 'QPSK', 'QAM16', 'GFSK'),
                  n_train=96,
                  n_test=32,
                  master_seed=3,
                  train_snr_db=(10., 20.))
    params.update(kwargs)
    return DatasetManifest(**params)


@pytest.fixture
def make_manifest():
    return _tiny_manifest


@pytest.fixture(scope='session')
def manifest():
    return _tiny_manifest()


@pytest.fixture(scope='session')
def dataset(manifest):
    """ shared, never modified in place: copy it first """
    return generate_dataset(manifest, show_progress=False)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path/'tiny.json'
    path.write_text(json.dumps(TINY_OVERRIDES))
    return path


# one architecture, enough data for the attack to take, trigger 10 dB above
# the window it lands in
REDUCED_OVERRIDES = dict(TINY_OVERRIDES, **{
    'dataset.n_examples': 800,
    'models.archs': ['MLP'],
    'models.mlp_hidden': [32],
    'training.epochs': 30,
    'training.patience': 6,
    'attack.kappa_db': 10.0,
    'attack.example_fraction': 0.3,
    'evaluation.snr_grid': [0.0, 20.0],
    'defense.strip_inputs': 40,
    'defense.strip_overlays': 8,
})


@pytest.fixture
def reduced_config_file(tmp_path):
    path = tmp_path/'reduced.json'
    path.write_text(json.dumps(REDUCED_OVERRIDES))
    return path
