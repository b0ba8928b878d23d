"""
labeled datasets of received OFDM frames, and their generation.
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from tqdm.auto import tqdm

from ..sigchain import (ChainConfig,
                        ChannelConfig,
                        OfdmConfig,
                        PaConfig,
                        assemble_frame,
                        modulate_grid,
                        get_scheme,
                        transmit,
                        )
from ..sigchain.ofdm import IqFrame

log = logging.getLogger(__name__)

# independent random streams of one frame
TX_STREAM = 0
CHANNEL_STREAM = 1
SPLIT_STREAM = 2


def frame_seed(master_seed: int, index: int) -> int:
    """ seed of frame ``index``, derived from the master seed only """
    state = np.random.SeedSequence([master_seed, index]).generate_state(
        1, dtype=np.uint64)
    return int(state[0])


def frame_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream)])


@dataclass
class DatasetManifest:
    """ everything needed to regenerate a dataset """
    ofdm: OfdmConfig = field(default_factory=OfdmConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    pa: PaConfig = field(default_factory=PaConfig)
    class_names: Tuple[str, ...] = ('BPSK', 'QPSK', 'PSK8', 'QAM16', 'PAM4',
                                    'GFSK')
    n_train: int = 800
    n_test: int = 200
    master_seed: int = 0
    train_snr_db: Tuple[float, ...] = (10.0,)
    poison_metadata: Optional[Dict[str, Any]] = None

    def __post_init__(self):
        self.class_names = tuple(self.class_names)
        self.train_snr_db = tuple(float(s) for s in self.train_snr_db)
        for name in self.class_names:
            get_scheme(name)
        if len(self.class_names) < 2:
            raise ValueError('at least two classes are required')
        if self.n_train <= 0 or self.n_test < 0:
            raise ValueError(f'invalid split sizes {self.n_train}/'
                             f'{self.n_test}')
        if not self.train_snr_db:
            raise ValueError('train_snr_db cannot be empty')

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def n_examples(self) -> int:
        return self.n_train + self.n_test

    @property
    def chain(self) -> ChainConfig:
        return ChainConfig(self.ofdm, self.pa, self.channel)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ofdm': {'n_subcarriers': self.ofdm.n_subcarriers,
                     'cp_len': self.ofdm.cp_len,
                     'symbols_per_frame': self.ofdm.symbols_per_frame},
            'channel': {'tap_delays': list(self.channel.tap_delays),
                        'tap_power_profile':
                            list(self.channel.tap_power_profile),
                        'snr_db': self.channel.snr_db},
            'pa': {'rapp_smoothness': self.pa.rapp_smoothness,
                   'ibo_db': self.pa.ibo_db},
            'class_names': list(self.class_names),
            'n_train': self.n_train,
            'n_test': self.n_test,
            'master_seed': self.master_seed,
            'train_snr_db': list(self.train_snr_db),
            'poison_metadata': copy.deepcopy(self.poison_metadata),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> 'DatasetManifest':
        channel = d['channel']
        return cls(ofdm=OfdmConfig(**d['ofdm']),
                   channel=ChannelConfig(
                       tuple(channel['tap_delays']),
                       tuple(channel['tap_power_profile']),
                       channel['snr_db']),
                   pa=PaConfig(**d['pa']),
                   class_names=tuple(d['class_names']),
                   n_train=d['n_train'],
                   n_test=d['n_test'],
                   master_seed=d['master_seed'],
                   train_snr_db=tuple(d['train_snr_db']),
                   poison_metadata=d.get('poison_metadata'))


@dataclass
class LabeledDataset:
    """
    received tensors ``x`` (n, M, N, 2) with their labels. ``clean_tx``
    keeps the transmitted symbols (n, M, N + N_cp) before the PA and the
    channel. ``split`` is 1 for training examples and 0 for test examples.
    """
    manifest: DatasetManifest
    x: np.ndarray
    labels: np.ndarray
    frame_seeds: np.ndarray
    snr_db: np.ndarray
    split: np.ndarray
    clean_tx: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def train_indices(self) -> np.ndarray:
        return np.flatnonzero(self.split == 1)

    @property
    def test_indices(self) -> np.ndarray:
        return np.flatnonzero(self.split == 0)

    def train_view(self):
        idx = self.train_indices
        return self.x[idx], self.labels[idx]

    def test_view(self):
        idx = self.test_indices
        return self.x[idx], self.labels[idx]

    def frame(self, index: int) -> IqFrame:
        """ transmitted frame of example ``index`` (needs ``clean_tx``) """
        if self.clean_tx is None:
            raise ValueError('dataset was stored without clean_tx')
        return IqFrame(self.clean_tx[index].astype(complex),
                       np.zeros(self.clean_tx.shape[1]),
                       self.manifest.ofdm.cp_len)

    def copy(self) -> 'LabeledDataset':
        return LabeledDataset(
            DatasetManifest.from_dict(self.manifest.to_dict()),
            self.x.copy(), self.labels.copy(), self.frame_seeds.copy(),
            self.snr_db.copy(), self.split.copy(),
            None if self.clean_tx is None else self.clean_tx.copy())

    def equals(self, other: 'LabeledDataset') -> bool:
        """ bit-exact comparison of arrays and manifest """
        if self.manifest.to_dict() != other.manifest.to_dict():
            return False
        arrays = ('x', 'labels', 'frame_seeds', 'snr_db', 'split')
        if not all(np.array_equal(getattr(self, a), getattr(other, a))
                   for a in arrays):
            return False
        if (self.clean_tx is None) != (other.clean_tx is None):
            return False
        return self.clean_tx is None or \
            np.array_equal(self.clean_tx, other.clean_tx)


def _synthesize(seed: int, label: int, manifest: DatasetManifest):
    rng = frame_rng(seed, TX_STREAM)
    scheme = get_scheme(manifest.class_names[label])
    grid = modulate_grid(scheme, manifest.ofdm, rng)
    frame = assemble_frame(grid, manifest.ofdm, rng)
    snr = manifest.train_snr_db[rng.integers(len(manifest.train_snr_db))]
    chain = manifest.chain.with_snr(snr)
    x = transmit(frame, chain, frame_rng(seed, CHANNEL_STREAM))
    return frame.symbols, x, snr


def generate_dataset(manifest: DatasetManifest,
                     show_progress: bool = True) -> LabeledDataset:
    """
    synthesize ``manifest.n_examples`` frames, balanced over the classes,
    and split them into train and test sets. deterministic in
    ``manifest.master_seed``.
    """
    n = manifest.n_examples
    cfg = manifest.ofdm
    labels = np.arange(n) % manifest.n_classes
    seeds = np.array([frame_seed(manifest.master_seed, i) for i in range(n)],
                     dtype=np.uint64)

    x = np.empty((n,) + cfg.rx_shape, dtype=np.float32)
    clean_tx = np.empty((n, cfg.symbols_per_frame, cfg.symbol_len),
                        dtype=np.complex64)
    snr_db = np.empty(n, dtype=np.float32)
    for i in tqdm(range(n), desc='generate', leave=False,
                  disable=not show_progress):
        clean_tx[i], x[i], snr_db[i] = _synthesize(int(seeds[i]),
                                                   int(labels[i]), manifest)

    order = np.random.default_rng(
        [manifest.master_seed, SPLIT_STREAM]).permutation(n)
    split = np.zeros(n, dtype=np.uint8)
    split[order[:manifest.n_train]] = 1

    log.info(f'generated {n} frames of {manifest.n_classes} classes '
             f'({manifest.n_train} train / {manifest.n_test} test)')
    return LabeledDataset(manifest, x, labels.astype(np.int64), seeds,
                          snr_db, split, clean_tx)


def retransmit(dataset: LabeledDataset,
               indices: Sequence[int],
               stream: int,
               snr_db: Optional[float] = None,
               symbols: Optional[np.ndarray] = None) -> np.ndarray:
    """
    run stored (or given) transmitted symbols of ``indices`` through the
    PA and a fresh channel draw from random stream ``stream``. ``snr_db``
    None keeps each example's own SNR.
    """
    if symbols is None:
        if dataset.clean_tx is None:
            raise ValueError('dataset was stored without clean_tx')
        symbols = dataset.clean_tx[np.asarray(indices, dtype=int)]
    cfg = dataset.manifest.ofdm
    x = np.empty((len(indices),) + cfg.rx_shape, dtype=np.float32)
    for k, i in enumerate(indices):
        snr = dataset.snr_db[i] if snr_db is None else snr_db
        chain = dataset.manifest.chain.with_snr(float(snr))
        frame = IqFrame(symbols[k].astype(complex),
                        np.zeros(cfg.symbols_per_frame), cfg.cp_len)
        x[k] = transmit(frame, chain,
                        frame_rng(int(dataset.frame_seeds[i]), stream))
    return x
