"""
frame classifiers: MLP, CNN and GRU over M x N x 2 received tensors.
"""

import copy
import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from .layers import (Activation,
                     AvgPool1d,
                     Conv1d,
                     Dense,
                     Flatten,
                     FramePowerNorm,
                     Gru,
                     Layer,
                     Scale,
                     SequenceView,
                     SymbolFeatures,
                     SymbolFold,
                     SymbolMean,
                     )

log = logging.getLogger(__name__)


class Arch(str, Enum):
    MLP = 'MLP'
    CNN = 'CNN'
    GRU = 'GRU'


FRONT_ENDS = ('iq', 'spectral')


@dataclass(frozen=True)
class ModelConfig:
    """
    Args:
        ``arch``: MLP, CNN or GRU.
        ``n_classes``: width O of the output layer.
        ``input_shape``: (M, N, 2).
        ``layer_sizes``: hidden widths (MLP, may be empty for a linear
            model), the two filter counts (CNN) or the hidden size (GRU).
        ``kernel_size``, ``pool_size``, ``dense_size``: CNN head.
        ``activation``: relu, tanh or identity (MLP and CNN).
        ``input_scale``: factor applied to the raw tensor.
        ``seed``: initialisation seed.
        ``front_end``: ``iq`` feeds the scaled I/Q planes to the network,
            ``spectral`` normalises every frame to unit power and feeds
            the phase-invariant symbol features of ``SymbolFeatures``.
    """
    arch: str = 'MLP'
    n_classes: int = 6
    input_shape: Tuple[int, int, int] = (4, 128, 2)
    layer_sizes: Tuple[int, ...] = (128, 128)
    kernel_size: int = 8
    pool_size: int = 4
    dense_size: int = 64
    activation: str = 'relu'
    input_scale: float = 1.0
    seed: int = 0
    front_end: str = 'iq'

    def __post_init__(self):
        object.__setattr__(self, 'arch', Arch(self.arch).value)
        object.__setattr__(self, 'input_shape',
                           tuple(int(s) for s in self.input_shape))
        object.__setattr__(self, 'layer_sizes',
                           tuple(int(s) for s in self.layer_sizes))
        if self.n_classes < 2:
            raise ValueError(f'n_classes must be >= 2, got {self.n_classes}')
        if len(self.input_shape) != 3 or self.input_shape[2] != 2:
            raise ValueError('input_shape must be (M, N, 2), got '
                             f'{self.input_shape}')
        if any(s <= 0 for s in self.layer_sizes):
            raise ValueError('hidden widths must be > 0, got '
                             f'{self.layer_sizes}')
        if self.arch == 'CNN' and (len(self.layer_sizes) != 2
                                   or self.dense_size <= 0):
            raise ValueError('CNN needs two filter counts and a dense size')
        if self.arch == 'GRU' and len(self.layer_sizes) != 1:
            raise ValueError('GRU needs exactly one hidden size')
        if self.front_end not in FRONT_ENDS:
            raise ValueError(f'unknown front end {self.front_end!r}, '
                             f'expected one of {FRONT_ENDS}')

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d['input_shape'] = list(self.input_shape)
        d['layer_sizes'] = list(self.layer_sizes)
        return d

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> 'ModelConfig':
        d = dict(d)
        d['input_shape'] = tuple(d['input_shape'])
        d['layer_sizes'] = tuple(d['layer_sizes'])
        return cls(**d)


def _front_end(cfg: ModelConfig) -> Tuple[List[Layer], int]:
    """ input layers and the number of channels per (symbol, sample) """
    layers: List[Layer] = [Scale(cfg.input_scale)]
    if cfg.front_end == 'spectral':
        layers += [FramePowerNorm(), SymbolFeatures()]
        return layers, SymbolFeatures.N_FEATURES
    return layers, cfg.input_shape[2]


def _mlp(cfg: ModelConfig, rng) -> Tuple[List[Layer], int]:
    layers, channels = _front_end(cfg)
    layers.append(Flatten())
    m, n, _ = cfg.input_shape
    width = m*n*channels
    for size in cfg.layer_sizes:
        layers += [Dense(width, size, rng), Activation(cfg.activation)]
        width = size
    layers.append(Dense(width, cfg.n_classes, rng))
    return layers, width


def _cnn(cfg: ModelConfig, rng) -> Tuple[List[Layer], int]:
    m, n, _ = cfg.input_shape
    f1, f2 = cfg.layer_sizes
    k = cfg.kernel_size
    t_out = n - 2*(k - 1)
    if t_out < cfg.pool_size:
        raise ValueError(f'{n} subcarriers are too few for two kernels of '
                         f'{k} and a pool of {cfg.pool_size}')
    flat = (t_out//cfg.pool_size)*f2
    layers, channels = _front_end(cfg)
    layers += [SymbolFold(),
               Conv1d(channels, f1, k, rng), Activation(cfg.activation),
               Conv1d(f1, f2, k, rng), Activation(cfg.activation),
               SymbolMean(m),
               AvgPool1d(cfg.pool_size),
               Flatten(),
               Dense(flat, cfg.dense_size, rng), Activation(cfg.activation),
               Dense(cfg.dense_size, cfg.n_classes, rng)]
    return layers, cfg.dense_size


def _gru(cfg: ModelConfig, rng) -> Tuple[List[Layer], int]:
    m, _, _ = cfg.input_shape
    hidden = cfg.layer_sizes[0]
    layers, channels = _front_end(cfg)
    layers += [SequenceView(),
               Gru(channels*m, hidden, rng),
               Dense(hidden, cfg.n_classes, rng)]
    return layers, hidden


_BUILDERS = {'MLP': _mlp, 'CNN': _cnn, 'GRU': _gru}


class Network:
    """
    sequential classifier. the output of the layer before the final dense
    layer is the penultimate activation.
    """

    def __init__(self, config: ModelConfig, batch_size: int = 256):
        self.config = config
        self.batch_size = batch_size
        rng = np.random.default_rng(config.seed)
        self.layers, self.penultimate_width = _BUILDERS[config.arch](config,
                                                                     rng)

    @property
    def parameters(self) -> List[np.ndarray]:
        return [p for layer in self.layers for p in layer.params.values()]

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.parameters)

    @property
    def output_layer(self) -> Dense:
        return self.layers[-1]

    def get_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters])

    def set_params(self, theta) -> None:
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.n_params:
            raise ValueError(f'expected {self.n_params} parameters, got '
                             f'{theta.size}')
        offset = 0
        for p in self.parameters:
            p[...] = theta[offset:offset + p.size].reshape(p.shape)
            offset += p.size

    def copy(self) -> 'Network':
        return copy.deepcopy(self)

    def check_input(self, x) -> Tuple[np.ndarray, bool]:
        """ returns a float64 batch and whether ``x`` was a single frame """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 3
        if single:
            x = x[None]
        if x.ndim != 4 or x.shape[1:] != self.config.input_shape:
            raise ValueError(f'input of shape {x.shape} does not match the '
                             f'model input {self.config.input_shape}')
        return x, single

    def run(self, x) -> Tuple[np.ndarray, np.ndarray, list]:
        """ logits, penultimate activations and layer caches of a batch """
        caches = []
        out = x
        penultimate = x
        for layer in self.layers:
            if layer is self.output_layer:
                penultimate = out
            out, cache = layer.forward(out)
            caches.append(cache)
        return out, penultimate, caches

    def backprop(self, dlogits, caches) -> Tuple[np.ndarray, List[np.ndarray]]:
        """ input gradient and parameter gradients, in ``parameters`` order """
        grads = []
        dout = dlogits
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            dout, layer_grads = layer.backward(dout, cache)
            grads = list(layer_grads) + grads
        return dout, grads

    def logits(self, x) -> np.ndarray:
        x, single = self.check_input(x)
        out = np.concatenate([self.run(x[i:i + self.batch_size])[0]
                              for i in range(0, len(x), self.batch_size)])
        return out[0] if single else out

    def predict_proba(self, x) -> np.ndarray:
        return softmax(self.logits(x), axis=-1)

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.logits(x), axis=-1)

    def __call__(self, x) -> np.ndarray:
        return self.predict_proba(x)

    def __repr__(self):
        return f'Network({self.config.arch}, {self.n_params} parameters)'


def _one_hot(labels, n_classes) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f'labels must lie in [0, {n_classes})')
    return np.eye(n_classes)[labels]


def forward(model: Network, x) -> np.ndarray:
    """ class probabilities of one frame (O,) or a batch (B, O) """
    return model.predict_proba(x)


def loss_and_gradient(model: Network, x, labels) -> Tuple[float,
                                                          np.ndarray]:
    """ mean cross-entropy of a batch and its flat parameter gradient """
    x, _ = model.check_input(x)
    target = _one_hot(labels, model.config.n_classes)
    logits, _, caches = model.run(x)
    loss = -np.mean(np.sum(target*log_softmax(logits, axis=1), axis=1))
    dlogits = (softmax(logits, axis=1) - target)/len(x)
    _, grads = model.backprop(dlogits, caches)
    return float(loss), np.concatenate([g.ravel() for g in grads])


def loss_input_gradient(model: Network, x, labels) -> Tuple[np.ndarray,
                                                            np.ndarray]:
    """ per-example cross-entropy and its gradient w.r.t. the input """
    x, single = model.check_input(x)
    target = _one_hot(np.atleast_1d(labels), model.config.n_classes)
    logits, _, caches = model.run(x)
    losses = -np.sum(target*log_softmax(logits, axis=1), axis=1)
    dx, _ = model.backprop(softmax(logits, axis=1) - target, caches)
    return (losses[0], dx[0]) if single else (losses, dx)


def input_gradient(model: Network, x, target_class: int) -> np.ndarray:
    """ gradient of the ``target_class`` logit w.r.t. the input tensor """
    x, single = model.check_input(x)
    if not 0 <= target_class < model.config.n_classes:
        raise ValueError(f'target_class {target_class} out of range')
    _, _, caches = model.run(x)
    dlogits = np.zeros((len(x), model.config.n_classes))
    dlogits[:, target_class] = 1
    dx, _ = model.backprop(dlogits, caches)
    return dx[0] if single else dx


def penultimate_activations(model: Network, x,
                            batch_size: Optional[int] = None) -> np.ndarray:
    """ activations feeding the output layer, (width,) or (B, width) """
    x, single = model.check_input(x)
    batch_size = batch_size or model.batch_size
    acts = np.concatenate([model.run(x[i:i + batch_size])[1]
                           for i in range(0, len(x), batch_size)])
    return acts[0] if single else acts
