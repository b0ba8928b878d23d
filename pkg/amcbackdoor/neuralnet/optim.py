"""
first-order optimisers updating lists of arrays in place.
"""

from typing import List

import numpy as np


class Optimizer:
    def __init__(self, learning_rate: float):
        if learning_rate <= 0:
            raise ValueError(f'learning_rate must be > 0, got {learning_rate}')
        self.learning_rate = learning_rate
        self.t = 0

    def step(self, params: List[np.ndarray], grads: List[np.ndarray]):
        raise NotImplementedError


class Sgd(Optimizer):
    def __init__(self, learning_rate: float, momentum: float = 0.9):
        super().__init__(learning_rate)
        self.momentum = momentum
        self.velocity = None

    def step(self, params, grads):
        if self.velocity is None:
            self.velocity = [np.zeros_like(p) for p in params]
        self.t += 1
        for p, g, v in zip(params, grads, self.velocity):
            v *= self.momentum
            v -= self.learning_rate*g
            p += v


class Adam(Optimizer):
    def __init__(self, learning_rate: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        super().__init__(learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = None
        self.v = None

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr = self.learning_rate*np.sqrt(1 - b2**self.t)/(1 - b1**self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1)*g
            v *= b2
            v += (1 - b2)*g*g
            p -= lr*m/(np.sqrt(v) + self.eps)


OPTIMIZERS = {'sgd': Sgd, 'adam': Adam}


def make_optimizer(name: str, learning_rate: float) -> Optimizer:
    try:
        return OPTIMIZERS[name.lower()](learning_rate)
    except KeyError:
        raise ValueError(f'unknown optimizer {name!r}, expected one of '
                         f'{sorted(OPTIMIZERS)}') from None
