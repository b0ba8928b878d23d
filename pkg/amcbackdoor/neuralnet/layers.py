"""
layers with explicit forward and backward passes.

every layer is pure: ``forward(x)`` returns ``(out, cache)`` and
``backward(dout, cache)`` returns ``(dx, grads)`` where ``grads`` follows
the order of ``params``. parameters are float64 numpy arrays.
"""

from typing import Dict, List, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft
from scipy.special import expit


def fan_in_uniform(rng: np.random.Generator, fan_in: int, shape):
    limit = 1/np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """ base class; parameter-free layers keep an empty ``params`` dict """

    def __init__(self):
        self.params: Dict[str, np.ndarray] = {}

    def forward(self, x):
        raise NotImplementedError

    def backward(self, dout, cache) -> Tuple[np.ndarray, List[np.ndarray]]:
        raise NotImplementedError

    def __repr__(self):
        shapes = ', '.join(f'{k}{v.shape}' for k, v in self.params.items())
        return f'{type(self).__name__}({shapes})'


class Scale(Layer):
    def __init__(self, factor: float):
        super().__init__()
        self.factor = float(factor)

    def forward(self, x):
        return x*self.factor, None

    def backward(self, dout, cache):
        return dout*self.factor, []


class Flatten(Layer):
    def forward(self, x):
        return x.reshape(len(x), -1), x.shape

    def backward(self, dout, cache):
        return dout.reshape(cache), []


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        super().__init__()
        self.params['W'] = fan_in_uniform(rng, n_in, (n_in, n_out))
        self.params['b'] = np.zeros(n_out)

    def forward(self, x):
        return x @ self.params['W'] + self.params['b'], x

    def backward(self, dout, cache):
        x = cache
        dx = dout @ self.params['W'].T
        return dx, [x.T @ dout, dout.sum(axis=0)]


class Activation(Layer):
    KINDS = ('relu', 'tanh', 'identity')

    def __init__(self, kind: str = 'relu'):
        super().__init__()
        if kind not in self.KINDS:
            raise ValueError(f'unknown activation {kind!r}, expected one of '
                             f'{self.KINDS}')
        self.kind = kind

    def forward(self, x):
        if self.kind == 'relu':
            out = np.maximum(x, 0)
        elif self.kind == 'tanh':
            out = np.tanh(x)
        else:
            out = x
        return out, (x, out)

    def backward(self, dout, cache):
        x, out = cache
        if self.kind == 'relu':
            return dout*(x > 0), []
        if self.kind == 'tanh':
            return dout*(1 - out**2), []
        return dout, []

    def __repr__(self):
        return f'Activation({self.kind})'


class SymbolFold(Layer):
    """ (B, M, N, 2) -> (B*M, N, 2): every OFDM symbol becomes a sample """

    def forward(self, x):
        return x.reshape((-1,) + x.shape[2:]), x.shape

    def backward(self, dout, cache):
        return dout.reshape(cache), []


class SymbolMean(Layer):
    """ (B*M, T, F) -> (B, T, F), averaging over the M symbols """

    def __init__(self, n_symbols: int):
        super().__init__()
        self.n_symbols = n_symbols

    def forward(self, x):
        m = self.n_symbols
        return x.reshape((-1, m) + x.shape[1:]).mean(axis=1), x.shape

    def backward(self, dout, cache):
        m = self.n_symbols
        dx = np.repeat(dout[:, None]/m, m, axis=1)
        return dx.reshape(cache), []


class Conv1d(Layer):
    """
    'valid' convolution along time of a (B, T, C_in) tensor with
    ``kernel_size`` x C_in filters. on the (N, 2) plane of a symbol this is
    a two-dimensional filter spanning both I and Q.
    """

    def __init__(self, c_in: int, c_out: int, kernel_size: int,
                 rng: np.random.Generator):
        super().__init__()
        self.kernel_size = kernel_size
        fan_in = c_in*kernel_size
        self.params['W'] = fan_in_uniform(rng, fan_in, (fan_in, c_out))
        self.params['b'] = np.zeros(c_out)

    def forward(self, x):
        k = self.kernel_size
        if x.shape[1] < k:
            raise ValueError(f'sequence of {x.shape[1]} samples is shorter '
                             f'than the kernel ({k})')
        # (B, T', C_in, k) -> (B, T', C_in*k)
        cols = sliding_window_view(x, k, axis=1)
        cols = cols.reshape(cols.shape[:2] + (-1,))
        return cols @ self.params['W'] + self.params['b'], (x.shape, cols)

    def backward(self, dout, cache):
        shape, cols = cache
        k = self.kernel_size
        b, t_out, c_out = dout.shape
        dw = cols.reshape(-1, cols.shape[-1]).T @ dout.reshape(-1, c_out)
        db = dout.sum(axis=(0, 1))
        dcols = (dout @ self.params['W'].T).reshape(b, t_out, shape[2], k)
        dx = np.zeros(shape)
        for j in range(k):
            dx[:, j:j + t_out, :] += dcols[..., j]
        return dx, [dw, db]


class AvgPool1d(Layer):
    """ non-overlapping mean pooling along time; a ragged tail is dropped """

    def __init__(self, size: int):
        super().__init__()
        self.size = size

    def forward(self, x):
        p = self.size
        t = (x.shape[1]//p)*p
        if t == 0:
            raise ValueError(f'cannot pool {x.shape[1]} samples by {p}')
        pooled = x[:, :t].reshape(len(x), t//p, p, -1).mean(axis=2)
        return pooled, x.shape

    def backward(self, dout, cache):
        p = self.size
        dx = np.zeros(cache)
        t = dout.shape[1]*p
        dx[:, :t] = np.repeat(dout/p, p, axis=1)
        return dx, []


class SequenceView(Layer):
    """ (B, M, N, 2) -> (B, N, 2M): one step per sample index """

    def forward(self, x):
        b, m, n, c = x.shape
        return x.transpose(0, 2, 1, 3).reshape(b, n, m*c), x.shape

    def backward(self, dout, cache):
        b, m, n, c = cache
        return dout.reshape(b, n, m, c).transpose(0, 2, 1, 3), []


class Gru(Layer):
    """
    gated recurrent unit over a (B, T, D) sequence, returning the last
    hidden state (B, H). gates:
        z = sigmoid(x Wz + h Uz + bz)
        r = sigmoid(x Wr + h Ur + br)
        c = tanh(x Wh + (r * h) Uh + bh)
        h' = (1 - z) * h + z * c
    """

    def __init__(self, n_in: int, hidden: int, rng: np.random.Generator):
        super().__init__()
        self.hidden = hidden
        for gate in ('z', 'r', 'h'):
            self.params[f'W{gate}'] = fan_in_uniform(rng, hidden,
                                                     (n_in, hidden))
            self.params[f'U{gate}'] = fan_in_uniform(rng, hidden,
                                                     (hidden, hidden))
            self.params[f'b{gate}'] = np.zeros(hidden)

    def forward(self, x):
        p = self.params
        b, t_len, _ = x.shape
        h = np.zeros((b, self.hidden))
        # input projections for all steps at once
        xz = x @ p['Wz'] + p['bz']
        xr = x @ p['Wr'] + p['br']
        xh = x @ p['Wh'] + p['bh']
        steps = []
        for t in range(t_len):
            z = expit(xz[:, t] + h @ p['Uz'])
            r = expit(xr[:, t] + h @ p['Ur'])
            c = np.tanh(xh[:, t] + (r*h) @ p['Uh'])
            steps.append((h, z, r, c))
            h = (1 - z)*h + z*c
        return h, (x, steps)

    def backward(self, dout, cache):
        p = self.params
        x, steps = cache
        grads = {k: np.zeros_like(v) for k, v in p.items()}
        dx = np.zeros_like(x)
        dh = dout
        for t in reversed(range(len(steps))):
            h_prev, z, r, c = steps[t]
            xt = x[:, t]
            dc = dh*z
            dz = dh*(c - h_prev)
            dh_prev = dh*(1 - z)

            da_h = dc*(1 - c**2)
            grads['Wh'] += xt.T @ da_h
            grads['Uh'] += (r*h_prev).T @ da_h
            grads['bh'] += da_h.sum(axis=0)
            drh = da_h @ p['Uh'].T
            dr = drh*h_prev
            dh_prev += drh*r

            da_z = dz*z*(1 - z)
            grads['Wz'] += xt.T @ da_z
            grads['Uz'] += h_prev.T @ da_z
            grads['bz'] += da_z.sum(axis=0)
            dh_prev += da_z @ p['Uz'].T

            da_r = dr*r*(1 - r)
            grads['Wr'] += xt.T @ da_r
            grads['Ur'] += h_prev.T @ da_r
            grads['br'] += da_r.sum(axis=0)
            dh_prev += da_r @ p['Ur'].T

            dx[:, t] = da_h @ p['Wh'].T + da_z @ p['Wz'].T + \
                da_r @ p['Wr'].T
            dh = dh_prev
        return dx, [grads[k] for k in p]


class FramePowerNorm(Layer):
    """
    scales every (M, N, 2) frame to unit mean sample power |I + jQ|^2, which
    removes the channel gain and the SNR-dependent receive level.
    """

    def __init__(self, eps: float = 1e-12):
        super().__init__()
        self.eps = eps

    def forward(self, x):
        count = x.shape[1]*x.shape[2]
        power = np.sum(x**2, axis=(1, 2, 3))/count
        s = np.sqrt(power + self.eps)[:, None, None, None]
        return x/s, (x, s, count)

    def backward(self, dout, cache):
        x, s, count = cache
        proj = np.sum(dout*x, axis=(1, 2, 3))[:, None, None, None]
        return dout/s - x*proj/(count*s**3), []


class SymbolFeatures(Layer):
    """
    phase-invariant features of every received symbol, (B, M, N, 2) ->
    (B, M, N, 7). with y the complex samples, Y = fft(y) (orthonormal) and
    cyclic neighbours y+ and Y+:

        |y|^2, Re(y y+*), Im(y y+*)            time envelope and lag product
        |Y|^2                                  subcarrier power
        d^2, d = (|Y|^2 - |Y+|^2) / (|Y|^2 + |Y+|^2 + eps)
        Re(Z^2) / (|Z|^2 + eps), Re(Z^4) / (|Z|^2 + eps)^2,  Z = Y Y+*

    the per-symbol random rotation and the common channel phase cancel in
    every feature. the last three are bounded by 1.
    """
    N_FEATURES = 7

    def __init__(self, eps: float = 1e-2):
        super().__init__()
        self.eps = eps

    def forward(self, x):
        y = x[..., 0] + 1j*x[..., 1]
        y_next = np.roll(y, -1, axis=-1)
        lag = y*np.conj(y_next)
        spec = fft.fft(y, axis=-1, norm='ortho')
        spec_next = np.roll(spec, -1, axis=-1)
        power = np.abs(spec)**2
        total = power + np.roll(power, -1, axis=-1) + self.eps
        d = (power - np.roll(power, -1, axis=-1))/total
        z = spec*np.conj(spec_next)
        q = np.abs(z)**2 + self.eps
        z2 = z**2
        z4 = z2**2
        out = np.stack((np.abs(y)**2, lag.real, lag.imag, power, d**2,
                        z2.real/q, z4.real/q**2), axis=-1)
        return out, (y, y_next, spec, spec_next, total, d, z, q, z2, z4)

    def backward(self, dout, cache):
        y, y_next, spec, spec_next, total, d, z, q, z2, z4 = cache
        g_env, g_re, g_im, g_pow, g_d2, g_z2, g_z4 = np.moveaxis(dout, -1, 0)

        # complex gradients dL/dRe + j dL/dIm
        g_lag = g_re + 1j*g_im
        dy = 2*y*g_env + y_next*g_lag + \
            np.roll(y*np.conj(g_lag), 1, axis=-1)

        g_q = -g_z2*z2.real/q**2 - 2*g_z4*z4.real/q**3
        dz = 2*z*g_q + 2*np.conj(z)*g_z2/q + 4*np.conj(z)**3*g_z4/q**2
        g_p = g_pow + 2*g_d2*d*(1 - d)/total
        g_p_next = -2*g_d2*d*(1 + d)/total
        g_p = g_p + np.roll(g_p_next, 1, axis=-1)
        dspec = 2*spec*g_p + spec_next*dz + \
            np.roll(spec*np.conj(dz), 1, axis=-1)
        dy = dy + fft.ifft(dspec, axis=-1, norm='ortho')
        return np.stack((dy.real, dy.imag), axis=-1), []
