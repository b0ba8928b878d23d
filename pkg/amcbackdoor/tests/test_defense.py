import numpy as np
import pytest
from scipy.special import softmax

from amcbackdoor.defense import (ANOMALY_THRESHOLD,
                                 CleanseConfig,
                                 activation_clustering,
                                 anomaly_index,
                                 cluster_activations,
                                 reverse_engineer_anomaly,
                                 strip,
                                 strip_entropies,
                                 )
from amcbackdoor.neuralnet import ModelConfig, Network


def uniform_model(x):
    return np.full((len(x), 4), 0.25)


def marker_model(x):
    """ a large first sample means class 0; otherwise a soft guess """
    x = np.asarray(x)
    logits = np.stack((20*x[:, 0, 0, 0],
                       x[:, 0, 1, 0], x[:, 0, 2, 0], x[:, 0, 3, 0]), axis=1)
    return softmax(logits, axis=1)


def frames(n, seed, marker=None):
    x = 0.1*np.random.default_rng(seed).standard_normal((n, 1, 8, 2))
    if marker is not None:
        x[:, 0, 0, 0] = marker
    return x


def test_uniform_model_has_no_entropy_gap():
    rng = np.random.default_rng(0)
    result = strip(uniform_model, frames(20, 0), frames(20, 1, 5.),
                   frames(50, 2), 5, rng)
    np.testing.assert_allclose(result.clean_entropies, np.log(4))
    assert result.entropy_gap == pytest.approx(0, abs=1e-12)
    assert result.detection_rate == 0


def test_strip_spots_a_dominant_trigger():
    rng = np.random.default_rng(1)
    result = strip(marker_model, frames(50, 3), frames(50, 4, 10.),
                   frames(100, 5), 8, rng)
    assert result.entropy_gap > 0.5
    assert result.detection_rate > 90
    assert result.to_dict()['n_overlays'] == 8


def test_strip_threshold_flags_the_target_share_of_clean_inputs():
    rng = np.random.default_rng(2)
    result = strip(marker_model, frames(200, 6), frames(20, 7, 10.),
                   frames(100, 8), 4, rng, fpr=0.05)
    assert result.false_positive_rate == pytest.approx(5, abs=1)


def test_strip_input_checks():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        strip_entropies(uniform_model, frames(0, 0), frames(5, 1), 2, rng)
    with pytest.raises(ValueError):
        strip_entropies(uniform_model, frames(3, 0), frames(5, 1), 0, rng)


def two_blobs(n_big=90, n_small=10, dim=20, seed=0):
    rng = np.random.default_rng(seed)
    big = rng.standard_normal((n_big, dim))
    small = rng.standard_normal((n_small, dim)) + 12
    return np.vstack((big, small))


def test_clustering_finds_the_small_cluster():
    acts = two_blobs()
    labels = np.zeros(100, dtype=int)
    marked = np.arange(90, 100)
    result = cluster_activations(acts, labels, marked)
    assert result.flagged_classes == [0]
    assert sorted(result.split_sizes[0]) == [10, 90]
    np.testing.assert_array_equal(result.flagged_indices, marked)
    assert result.flagged_fraction == 100


def test_clustering_leaves_a_single_blob_alone():
    acts = np.random.default_rng(1).standard_normal((400, 10))
    acts[:, 0] *= 3
    labels = np.zeros(400, dtype=int)
    result = cluster_activations(acts, labels, np.arange(10))
    assert sum(result.split_sizes[0]) == 400
    assert result.flagged_classes == []


def test_clustering_per_class_and_small_classes():
    acts = np.vstack((two_blobs(seed=2), np.ones((3, 20))))
    labels = np.r_[np.zeros(100, dtype=int), np.ones(3, dtype=int)]
    with pytest.warns(UserWarning):
        result = cluster_activations(acts, labels)
    assert result.skipped_classes == [1]
    assert result.flagged_fraction == 0


def test_constant_activations_are_not_split():
    result = cluster_activations(np.ones((20, 5)), np.zeros(20, dtype=int))
    assert result.split_sizes[0] == [20, 0]
    assert result.flagged_classes == []


def test_activation_clustering_runs_on_a_network(dataset, manifest):
    cfg = ModelConfig('MLP', manifest.n_classes, manifest.ofdm.rx_shape,
                      (6,), seed=0)
    x, labels = dataset.train_view()
    result = activation_clustering(Network(cfg), x, labels, [0, 1],
                                   n_components=3)
    assert set(result.split_sizes) == set(range(manifest.n_classes))
    for c, sizes in result.split_sizes.items():
        assert sum(sizes) == np.count_nonzero(labels == c)


def test_anomaly_index_examples():
    norms = np.array([1., 8., 9., 10.])
    index = anomaly_index(norms)
    mad = 1.4826*1.
    np.testing.assert_allclose(index, np.abs(norms - 8.5)/mad)
    assert index[0] > ANOMALY_THRESHOLD


def test_anomaly_index_is_translation_invariant():
    norms = np.random.default_rng(0).uniform(1, 10, 6)
    np.testing.assert_allclose(anomaly_index(norms + 7.5),
                               anomaly_index(norms))


def test_anomaly_index_edge_cases():
    with pytest.warns(UserWarning):
        np.testing.assert_array_equal(anomaly_index([2., 2., 2.]), 0)
    index = anomaly_index([1., np.nan, 8., 9., 10.])
    assert np.isnan(index[1])
    assert index[0] > ANOMALY_THRESHOLD


def shortcut_model():
    """ linear model where one input sample is a shortcut to class 0 """
    cfg = ModelConfig('MLP', 4, (1, 8, 2), (), seed=0)
    net = Network(cfg)
    weights = 0.3*np.random.default_rng(0).standard_normal((16, 4))
    weights[:, 0] = 0
    weights[0, 0] = 20.
    net.output_layer.params['W'][...] = weights
    return net


def test_reverse_engineering_finds_the_shortcut_class():
    net = shortcut_model()
    samples = np.random.default_rng(1).standard_normal((64, 1, 8, 2))
    result = reverse_engineer_anomaly(net, samples, CleanseConfig(),
                                      np.random.default_rng(2))
    assert np.argmin(result.mask_norms) == 0
    assert result.mask_norms[0] < np.median(result.mask_norms)
    assert result.anomaly_indices[0] > ANOMALY_THRESHOLD
    assert result.flagged_classes[:1] == [0]
    assert result.reversed_asr[0] >= 0.99
    assert result.diverged_classes == []
    assert set(result.to_dict()) >= {'mask_norms', 'anomaly_indices',
                                     'flagged_classes'}


def graded_model(weights=(20., 8., 12., 35., 50.)):
    """
    clean linear model: class c reads its own input sample with weight
    ``weights[c]``. class 0 sits in the middle of the range.
    """
    n_classes = len(weights)
    cfg = ModelConfig('MLP', n_classes, (1, 8, 2), (), seed=0)
    net = Network(cfg)
    w = np.zeros((16, n_classes))
    w[np.arange(n_classes), np.arange(n_classes)] = weights
    net.output_layer.params['W'][...] = w
    return net


def test_reverse_engineering_leaves_a_typical_class_alone():
    net = graded_model()
    samples = np.random.default_rng(3).standard_normal((64, 1, 8, 2))
    result = reverse_engineer_anomaly(net, samples, CleanseConfig(),
                                      np.random.default_rng(4))
    assert result.diverged_classes == []
    assert result.anomaly_indices[0] <= 1.5
    assert 0 not in result.flagged_classes
