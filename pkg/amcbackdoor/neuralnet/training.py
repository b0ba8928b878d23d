"""
mini-batch training with cross-entropy loss, optional L2 weight decay and
early stopping on a held-out share of the training data.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union
from warnings import warn

import numpy as np
from scipy.special import log_softmax, softmax
from tqdm.auto import tqdm

from .models import ModelConfig, Network, _one_hot
from .optim import make_optimizer

log = logging.getLogger(__name__)


class TrainingDivergedError(ValueError):
    """ the loss became NaN or infinite """

    def __init__(self, epoch: int, loss: float):
        super().__init__(f'training diverged at epoch {epoch} (loss {loss})')
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True)
class TrainConfig:
    """
    Args:
        ``weight_decay``: L2 coefficient added to every parameter gradient.
        ``validation_fraction``: share of the examples held out to pick the
            best epoch; 0 trains on everything and keeps the last epoch.
        ``patience``: epochs without a better validation accuracy before
            training stops; 0 never stops early.
    """
    epochs: int = 12
    batch_size: int = 64
    learning_rate: float = 1e-3
    optimizer: str = 'adam'
    seed: int = 0
    weight_decay: float = 0.
    validation_fraction: float = 0.
    patience: int = 0

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or \
                self.learning_rate <= 0:
            raise ValueError('epochs, batch_size and learning_rate must be '
                             'positive')
        if self.optimizer.lower() not in ('sgd', 'adam'):
            raise ValueError(f'unknown optimizer {self.optimizer!r}')
        if self.weight_decay < 0 or self.patience < 0:
            raise ValueError('weight_decay and patience must be >= 0')
        if not 0 <= self.validation_fraction < 1:
            raise ValueError('validation_fraction must lie in [0, 1), got '
                             f'{self.validation_fraction}')


@dataclass
class TrainHistory:
    loss: List[float] = field(default_factory=list)
    accuracy: List[float] = field(default_factory=list)
    val_accuracy: List[float] = field(default_factory=list)
    best_epoch: int = 0


@dataclass
class TrainedModel:
    network: Network
    history: TrainHistory

    @property
    def config(self) -> ModelConfig:
        return self.network.config

    @property
    def parameters(self) -> np.ndarray:
        return self.network.get_params()


def _as_arrays(data) -> Tuple[np.ndarray, np.ndarray]:
    if hasattr(data, 'train_view'):
        return data.train_view()
    x, labels = data
    return np.asarray(x), np.asarray(labels)


def _split(n: int, fraction: float, rng: np.random.Generator
           ) -> Tuple[np.ndarray, np.ndarray]:
    """ training and validation positions; no validation when too small """
    n_val = int(n*fraction)
    if fraction > 0 and (n_val == 0 or n_val == n):
        warn(f'{n} examples are too few to hold out {fraction:.0%} for '
             'validation, training on all of them')
        n_val = 0
    if n_val == 0:
        return np.arange(n), np.arange(0)
    order = rng.permutation(n)
    return np.sort(order[n_val:]), np.sort(order[:n_val])


def train(model: Network,
          data: Union[Tuple[np.ndarray, np.ndarray], 'LabeledDataset'],
          cfg: TrainConfig = TrainConfig(),
          show_progress: bool = True) -> TrainedModel:
    """
    train a copy of ``model`` on ``data`` (a dataset, whose training split
    is used, or an ``(x, labels)`` pair). the input model is left untouched
    and the run is deterministic in ``cfg.seed``. with a validation share
    the returned network holds the parameters of the best epoch.

    Raises:
        ``ValueError``: empty data or labels out of range.
        ``TrainingDivergedError``: NaN or infinite loss, with its epoch.
    """
    x, labels = _as_arrays(data)
    if len(x) == 0:
        raise ValueError('cannot train on an empty dataset')
    if len(x) != len(labels):
        raise ValueError(f'{len(x)} inputs but {len(labels)} labels')
    x, _ = model.check_input(x)
    labels = np.asarray(labels)
    target = _one_hot(labels, model.config.n_classes)

    net = model.copy()
    params = net.parameters
    opt = make_optimizer(cfg.optimizer, cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    history = TrainHistory()
    fit, val = _split(len(x), cfg.validation_fraction, rng)
    best_params = None
    best_accuracy = -1.

    epochs = tqdm(range(1, cfg.epochs + 1), desc=f'train {net.config.arch}',
                  leave=False, disable=not show_progress)
    for epoch in epochs:
        order = fit[rng.permutation(len(fit))]
        total_loss = 0.
        correct = 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            logits, _, caches = net.run(x[idx])
            logp = log_softmax(logits, axis=1)
            total_loss -= np.sum(target[idx]*logp)
            correct += np.count_nonzero(np.argmax(logits, axis=1)
                                        == labels[idx])
            dlogits = (softmax(logits, axis=1) - target[idx])/len(idx)
            _, grads = net.backprop(dlogits, caches)
            if cfg.weight_decay:
                grads = [g + cfg.weight_decay*p for g, p in zip(grads, params)]
            opt.step(params, grads)
        loss = total_loss/len(fit)
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch, loss)
        history.loss.append(float(loss))
        history.accuracy.append(100*correct/len(fit))
        epochs.set_postfix(loss=f'{loss:.4f}')
        log.debug(f'{net.config.arch} epoch {epoch}: loss {loss:.4f}, '
                  f'accuracy {history.accuracy[-1]:.1f}%')

        if len(val) == 0:
            history.best_epoch = epoch
            continue
        accuracy = 100*float(np.mean(net.predict(x[val]) == labels[val]))
        history.val_accuracy.append(accuracy)
        if accuracy > best_accuracy:
            best_accuracy = accuracy
            best_params = net.get_params()
            history.best_epoch = epoch
        elif cfg.patience and epoch - history.best_epoch >= cfg.patience:
            log.info(f'{net.config.arch}: no validation gain for '
                     f'{cfg.patience} epochs, stopping at epoch {epoch}')
            break

    if best_params is not None:
        net.set_params(best_params)
        log.info(f'trained {net.config.arch} for {len(history.loss)} epochs, '
                 f'best validation accuracy {best_accuracy:.1f}% at epoch '
                 f'{history.best_epoch}')
    else:
        log.info(f'trained {net.config.arch} for {cfg.epochs} epochs, final '
                 f'loss {history.loss[-1]:.4f}')
    return TrainedModel(net, history)
