from dataclasses import replace

import numpy as np
import pytest
from scipy import fft
from scipy.special import softmax

from amcbackdoor.analysis.math import moving_average
from amcbackdoor.neuralnet import (CheckpointError,
                                   ModelConfig,
                                   Network,
                                   TrainConfig,
                                   TrainingDivergedError,
                                   forward,
                                   input_gradient,
                                   load_model,
                                   loss_and_gradient,
                                   loss_input_gradient,
                                   penultimate_activations,
                                   save_model,
                                   train,
                                   )
from amcbackdoor.neuralnet.layers import FramePowerNorm, SymbolFeatures

# small float64 networks with smooth activations for gradient checks
SMALL = {
    'MLP': ModelConfig('MLP', 3, (2, 8, 2), (14,), activation='tanh',
                       seed=1),
    'CNN': ModelConfig('CNN', 3, (2, 16, 2), (3, 3), kernel_size=3,
                       pool_size=2, dense_size=5, activation='tanh', seed=2),
    'GRU': ModelConfig('GRU', 3, (2, 8, 2), (4,), seed=3),
}
ALL = dict(SMALL)
ALL.update({f'{arch}-spectral': replace(cfg, front_end='spectral')
            for arch, cfg in SMALL.items()})


def numeric_gradient(f, theta, eps=1e-6):
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = eps
        grad[i] = (f(theta + step) - f(theta - step))/(2*eps)
    return grad


def relative_error(a, b):
    return np.linalg.norm(a - b)/max(np.linalg.norm(a) + np.linalg.norm(b),
                                     1e-12)


def batch(cfg, size=5, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((size,) + cfg.input_shape), \
        rng.integers(cfg.n_classes, size=size)


@pytest.mark.parametrize('arch', ALL)
def test_probabilities_sum_to_one(arch):
    cfg = ALL[arch]
    net = Network(cfg)
    x, _ = batch(cfg, 7)
    probs = forward(net, x)
    assert probs.shape == (7, 3)
    np.testing.assert_allclose(probs.sum(axis=1), 1)
    assert forward(net, x[0]).shape == (3,)


def test_softmax_ignores_a_logit_shift():
    logits = np.random.default_rng(0).standard_normal((4, 6))
    np.testing.assert_allclose(softmax(logits + 1e3, axis=1),
                               softmax(logits, axis=1))


@pytest.mark.parametrize('arch', SMALL)
def test_zero_output_layer_is_uniform(arch):
    net = Network(SMALL[arch])
    net.output_layer.params['W'][...] = 0
    x, _ = batch(SMALL[arch])
    np.testing.assert_allclose(net(x), 1/3)


@pytest.mark.parametrize('arch', ALL)
def test_parameter_gradient_matches_finite_differences(arch):
    cfg = ALL[arch]
    net = Network(cfg)
    x, labels = batch(cfg)
    theta = net.get_params()

    def loss(t):
        net.set_params(t)
        return loss_and_gradient(net, x, labels)[0]

    numeric = numeric_gradient(loss, theta)
    net.set_params(theta)
    _, analytic = loss_and_gradient(net, x, labels)
    assert analytic.shape == theta.shape
    assert relative_error(analytic, numeric) < 1e-4


def test_mlp_gradient_check_size():
    assert 400 < Network(SMALL['MLP']).n_params < 600


@pytest.mark.parametrize('arch', ALL)
def test_input_gradient_matches_finite_differences(arch):
    cfg = ALL[arch]
    net = Network(cfg)
    x, _ = batch(cfg, 1, seed=4)
    x = x[0]
    coords = np.random.default_rng(5).choice(x.size, 10, replace=False)
    eps = 1e-6
    numeric = []
    for i in coords:
        step = np.zeros(x.size)
        step[i] = eps
        step = step.reshape(x.shape)
        numeric.append((net.logits(x + step)[1]
                        - net.logits(x - step)[1])/(2*eps))
    analytic = input_gradient(net, x, 1).ravel()[coords]
    assert relative_error(analytic, np.array(numeric)) < 1e-4


def test_loss_input_gradient_is_per_example():
    cfg = SMALL['MLP']
    net = Network(cfg)
    x, labels = batch(cfg, 3)
    losses, dx = loss_input_gradient(net, x, labels)
    assert losses.shape == (3,)
    assert dx.shape == x.shape
    single_loss, single_dx = loss_input_gradient(net, x[1], labels[1])
    assert single_loss == pytest.approx(losses[1])
    np.testing.assert_allclose(single_dx, dx[1])


def test_linear_model_input_gradient_is_a_weight_plane():
    cfg = ModelConfig('MLP', 4, (2, 8, 2), (), seed=0)
    net = Network(cfg)
    grad = input_gradient(net, np.zeros(cfg.input_shape), 2)
    np.testing.assert_allclose(grad,
                               net.output_layer.params['W'][:, 2]
                               .reshape(cfg.input_shape))


def test_zero_weights_give_a_zero_input_gradient():
    net = Network(SMALL['MLP'])
    net.set_params(np.zeros(net.n_params))
    x, _ = batch(SMALL['MLP'], 2)
    np.testing.assert_array_equal(input_gradient(net, x, 0), 0)


@pytest.mark.parametrize('arch, width', [('MLP', 14), ('CNN', 5),
                                         ('GRU', 4)])
def test_penultimate_width(arch, width):
    net = Network(SMALL[arch])
    x, _ = batch(SMALL[arch], 6)
    acts = penultimate_activations(net, x, batch_size=4)
    assert acts.shape == (6, width)
    assert net.penultimate_width == width


def test_identity_mlp_penultimate_is_affine():
    cfg = ModelConfig('MLP', 3, (2, 8, 2), (4,), activation='identity',
                      seed=6)
    net = Network(cfg)
    x, _ = batch(cfg, 3)
    hidden = net.layers[2]
    expected = x.reshape(3, -1) @ hidden.params['W'] + hidden.params['b']
    np.testing.assert_allclose(penultimate_activations(net, x), expected)


def test_input_shape_is_checked():
    net = Network(SMALL['MLP'])
    with pytest.raises(ValueError):
        net(np.zeros((2, 2, 16, 2)))


@pytest.mark.parametrize('kwargs', [dict(arch='RNN'),
                                    dict(n_classes=1),
                                    dict(input_shape=(2, 8, 3)),
                                    dict(arch='CNN', layer_sizes=(4,)),
                                    dict(arch='GRU', layer_sizes=(4, 4)),
                                    dict(front_end='fft')])
def test_invalid_model_configs(kwargs):
    with pytest.raises(ValueError):
        ModelConfig(**kwargs)


def test_cnn_needs_enough_subcarriers():
    with pytest.raises(ValueError):
        Network(ModelConfig('CNN', 3, (2, 8, 2), (3, 3), kernel_size=4,
                            pool_size=4))


def separable(n=200, seed=0):
    rng = np.random.default_rng(seed)
    labels = rng.integers(2, size=n)
    x = (1 - 2*labels)[:, None, None, None] + \
        0.1*rng.standard_normal((n, 1, 4, 2))
    return x, labels


def test_training_learns_a_separable_problem():
    x, labels = separable()
    model = Network(ModelConfig('MLP', 2, (1, 4, 2), (8,), seed=0))
    cfg = TrainConfig(epochs=30, batch_size=16, learning_rate=0.01)
    trained = train(model, (x, labels), cfg, show_progress=False)
    assert np.mean(trained.network.predict(x) == labels) >= 0.99
    smooth = moving_average(trained.history.loss, 3)
    assert smooth[-1] < smooth[0]
    assert len(trained.history.accuracy) == 30
    assert not np.array_equal(model.get_params(), trained.parameters)


def test_training_is_deterministic():
    x, labels = separable()
    model = Network(ModelConfig('MLP', 2, (1, 4, 2), (8,), seed=0))
    cfg = TrainConfig(epochs=3, batch_size=16, optimizer='sgd',
                      learning_rate=0.01, seed=5)
    a = train(model, (x, labels), cfg, show_progress=False)
    b = train(model, (x, labels), cfg, show_progress=False)
    np.testing.assert_array_equal(a.parameters, b.parameters)


def test_training_on_a_dataset_uses_its_training_split(dataset, manifest):
    cfg = ModelConfig('MLP', manifest.n_classes, manifest.ofdm.rx_shape,
                      (8,), seed=0)
    trained = train(Network(cfg), dataset, TrainConfig(epochs=1),
                    show_progress=False)
    assert trained.config == cfg
    assert np.isfinite(trained.history.loss[0])


def test_divergence_is_reported():
    x, labels = separable(20)
    x[0, 0, 0, 0] = np.inf
    model = Network(ModelConfig('MLP', 2, (1, 4, 2), (8,), seed=0))
    with pytest.raises(TrainingDivergedError) as err:
        train(model, (x, labels), TrainConfig(epochs=2), show_progress=False)
    assert err.value.epoch == 1


def test_empty_data_is_rejected():
    model = Network(ModelConfig('MLP', 2, (1, 4, 2), (8,), seed=0))
    with pytest.raises(ValueError):
        train(model, (np.zeros((0, 1, 4, 2)), np.zeros(0, dtype=int)),
              show_progress=False)


@pytest.mark.parametrize('arch', ALL)
def test_checkpoint_round_trip(arch, tmp_path):
    net = Network(ALL[arch])
    net.set_params(np.random.default_rng(0).standard_normal(net.n_params))
    loaded = load_model(save_model(net, tmp_path/f'{arch}.amcm'))
    assert loaded.config == net.config
    x, _ = batch(ALL[arch])
    np.testing.assert_array_equal(loaded.predict_proba(x),
                                  net.predict_proba(x))


def test_corrupted_checkpoint(tmp_path):
    path = save_model(Network(SMALL['MLP']), tmp_path/'mlp.amcm')
    data = bytearray(path.read_bytes())
    data[-12] ^= 0x01
    path.write_bytes(bytes(data))
    with pytest.raises(CheckpointError):
        load_model(path)


def symbol_planes(symbols):
    """ (B, M, N) complex subcarrier values -> (B, M, N, 2) time planes """
    y = fft.ifft(symbols, axis=-1, norm='ortho')
    return np.stack((y.real, y.imag), axis=-1)


def test_frame_power_norm_removes_the_receive_level():
    x = np.random.default_rng(0).standard_normal((3, 2, 8, 2))
    norm = FramePowerNorm()
    out, _ = norm.forward(x)
    np.testing.assert_allclose(np.sum(out**2, axis=(1, 2, 3))/16, 1)
    scaled, _ = norm.forward(x*np.array([0.01, 1., 40.])[:, None, None,
                                                         None])
    np.testing.assert_allclose(scaled, out)


def test_symbol_features_ignore_symbol_rotations():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((4, 3, 16, 2))
    y = x[..., 0] + 1j*x[..., 1]
    rotated = y*np.exp(1j*rng.uniform(0, 2*np.pi, (4, 3, 1)))
    layer = SymbolFeatures()
    a, _ = layer.forward(x)
    b, _ = layer.forward(np.stack((rotated.real, rotated.imag), axis=-1))
    assert a.shape == (4, 3, 16, SymbolFeatures.N_FEATURES)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_symbol_features_tell_constellations_apart():
    rng = np.random.default_rng(2)
    bpsk = rng.choice([-1., 1.], (1, 2, 32))
    qpsk = rng.choice([1, 1j, -1, -1j], (1, 2, 32))
    psk8 = np.exp(1j*np.pi/4*rng.integers(8, size=(1, 2, 32)))
    eps = SymbolFeatures().eps
    features = {name: SymbolFeatures().forward(symbol_planes(s))[0]
                for name, s in (('bpsk', bpsk), ('qpsk', qpsk),
                                ('psk8', psk8))}
    for f in features.values():
        # constant modulus: unit subcarrier power, no contrast
        np.testing.assert_allclose(f[..., 3], 1, atol=1e-12)
        np.testing.assert_allclose(f[..., 4], 0, atol=1e-12)
    np.testing.assert_allclose(features['bpsk'][..., 5], 1/(1 + eps))
    np.testing.assert_allclose(np.abs(features['qpsk'][..., 5]),
                               1/(1 + eps))
    np.testing.assert_allclose(features['qpsk'][..., 6], 1/(1 + eps)**2)
    np.testing.assert_allclose(np.abs(features['psk8'][..., 6]),
                               1/(1 + eps)**2)
    assert features['qpsk'][..., 5].mean() < 0.5
    assert features['psk8'][..., 6].mean() < 0.5


def test_symbol_features_see_amplitude_levels():
    rng = np.random.default_rng(3)
    pam4 = rng.choice([-3., -1., 1., 3.], (1, 1, 64))/np.sqrt(5)
    layer = SymbolFeatures()
    contrast = layer.forward(symbol_planes(pam4))[0][..., 4]
    assert contrast.max() > 0.5
    bpsk = rng.choice([-1., 1.], (1, 1, 64))
    assert layer.forward(symbol_planes(bpsk))[0][..., 4].max() < 1e-12


def test_early_stopping_keeps_the_best_epoch():
    x, labels = separable(200)
    model = Network(ModelConfig('MLP', 2, (1, 4, 2), (8,), seed=0))
    cfg = TrainConfig(epochs=50, batch_size=16, learning_rate=0.01,
                      validation_fraction=0.25, patience=2)
    trained = train(model, (x, labels), cfg, show_progress=False)
    history = trained.history
    assert len(history.loss) < 50
    assert len(history.val_accuracy) == len(history.loss)
    assert max(history.val_accuracy) == 100
    assert history.val_accuracy[history.best_epoch - 1] == 100
    assert len(history.loss) == history.best_epoch + 2
    assert np.mean(trained.network.predict(x) == labels) >= 0.99


def test_too_few_examples_for_validation_warns():
    x, labels = separable(5)
    model = Network(ModelConfig('MLP', 2, (1, 4, 2), (8,), seed=0))
    cfg = TrainConfig(epochs=2, validation_fraction=0.1, patience=1)
    with pytest.warns(UserWarning):
        trained = train(model, (x, labels), cfg, show_progress=False)
    assert trained.history.val_accuracy == []
    assert len(trained.history.loss) == 2


def test_weight_decay_shrinks_the_weights():
    x, labels = separable()
    model = Network(ModelConfig('MLP', 2, (1, 4, 2), (8,), seed=0))
    norms = []
    for decay in (0., 0.5):
        cfg = TrainConfig(epochs=10, batch_size=16, optimizer='sgd',
                          learning_rate=0.01, weight_decay=decay)
        trained = train(model, (x, labels), cfg, show_progress=False)
        norms.append(np.linalg.norm(trained.parameters))
    assert norms[1] < norms[0]


@pytest.mark.parametrize('kwargs', [dict(validation_fraction=1.),
                                    dict(validation_fraction=-0.1),
                                    dict(patience=-1),
                                    dict(weight_decay=-1e-3)])
def test_invalid_train_configs(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**kwargs)
