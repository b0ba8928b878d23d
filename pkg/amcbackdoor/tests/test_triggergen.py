import numpy as np
import pytest

from amcbackdoor.attribution import WindowingSpec
from amcbackdoor.triggergen import (ClassStats,
                                    TriggerError,
                                    TriggerSpec,
                                    class_stats,
                                    collect_target_windows,
                                    complex_median_prototype,
                                    compose_trigger,
                                    design_trigger,
                                    energy_budget_alpha,
                                    first_principal_component,
                                    )

SPEC = WindowingSpec(4, 20)


def test_collects_every_symbol_of_the_target_training_frames(dataset):
    windows = collect_target_windows(dataset, 2, 1, SPEC)
    train = dataset.train_indices
    n_frames = np.count_nonzero(dataset.labels[train] == 2)
    assert windows.shape == (2*n_frames, 4)
    np.testing.assert_allclose(windows.mean(axis=1).imag, 0, atol=1e-12)
    both = collect_target_windows(dataset, 2, [1, 3], SPEC)
    assert len(both) == 2*len(windows)


def test_collect_rejects_a_bad_window(dataset):
    with pytest.raises(ValueError):
        collect_target_windows(dataset, 0, 5, SPEC)


def test_complex_median_examples():
    windows = np.array([[1 + 1j, 0], [2 + 5j, 1j], [3 - 1j, 2]])
    np.testing.assert_array_equal(complex_median_prototype(windows),
                                  [2 + 1j, 0])
    single = np.array([[1 - 2j, 3j]])
    np.testing.assert_array_equal(complex_median_prototype(single), single[0])


def test_median_resists_an_outlier():
    rng = np.random.default_rng(0)
    windows = 1 + 0.01*rng.standard_normal((99, 4))
    windows = np.vstack((windows, 1000*np.ones(4))).astype(complex)
    prototype = complex_median_prototype(windows)
    np.testing.assert_allclose(prototype, 1, atol=0.05)


def test_principal_component_of_rank_one_data():
    rng = np.random.default_rng(1)
    v = rng.standard_normal(6) + 1j*rng.standard_normal(6)
    v /= np.linalg.norm(v)
    windows = rng.uniform(0.5, 2., size=(50, 1))*v
    p, ratio = first_principal_component(windows)
    np.testing.assert_allclose(p, v, atol=1e-6)
    assert ratio == pytest.approx(1, abs=1e-9)


def test_principal_component_maximises_the_variance():
    rng = np.random.default_rng(2)
    windows = (rng.standard_normal((300, 4))*[3, 1, 0.5, 0.2]
               + 1j*rng.standard_normal((300, 4))*[0.1, 1, 0.3, 0.2])
    p, _ = first_principal_component(windows)
    data = np.hstack((windows.real, windows.imag))
    best = np.var(data @ np.r_[p.real, p.imag])
    for _ in range(100):
        d = rng.standard_normal(8)
        assert np.var(data @ (d/np.linalg.norm(d))) <= best + 1e-9


def test_isotropic_windows_spread_the_variance():
    rng = np.random.default_rng(3)
    windows = rng.standard_normal((5000, 4)) + \
        1j*rng.standard_normal((5000, 4))
    _, ratio = first_principal_component(windows)
    assert abs(ratio - 1/8) < 0.03


def test_principal_component_sign_follows_the_reference():
    rng = np.random.default_rng(4)
    windows = rng.standard_normal((40, 3)) + 1j*rng.standard_normal((40, 3))
    ref = np.array([1, 1j, -1])
    p, _ = first_principal_component(windows, ref)
    q, _ = first_principal_component(windows, -ref)
    assert np.real(np.vdot(ref, p)) >= 0
    np.testing.assert_allclose(q, -p)


@pytest.mark.parametrize('windows', [np.ones((1, 4)), np.ones((5, 4))])
def test_degenerate_window_sets(windows):
    with pytest.raises(TriggerError):
        first_principal_component(windows)


def stats(prototype, principal):
    return ClassStats(np.asarray(prototype, dtype=complex),
                      np.asarray(principal, dtype=complex), 10, 0.5, 1.)


def test_compose_extremes():
    s = stats([3, 4j], [1, 0])
    np.testing.assert_allclose(compose_trigger(s, 1., 2.).vector,
                               [1.2, 1.6j])
    np.testing.assert_allclose(compose_trigger(s, 0., 2.).vector, [2, 0])


@pytest.mark.parametrize('lambda_mix', [0., 0.25, 0.5, 0.75, 1.])
@pytest.mark.parametrize('kappa_db', [-30., -15., -5., 0.])
def test_trigger_norm_is_the_budget(lambda_mix, kappa_db):
    rng = np.random.default_rng(5)
    windows = rng.standard_normal((60, 8)) + 1j*rng.standard_normal((60, 8))
    windows += 2
    s = class_stats(windows)
    alpha = energy_budget_alpha(windows, kappa_db)
    trigger = compose_trigger(s, lambda_mix, alpha, (3,), kappa_db)
    assert np.linalg.norm(trigger.vector) == pytest.approx(alpha, rel=1e-9)
    assert trigger.window_indices == (3,)


def test_cancelling_mixture_is_an_error():
    with pytest.raises(TriggerError):
        compose_trigger(stats([-1, 0], [1, 0]), 0.5, 1.)
    with pytest.raises(TriggerError):
        compose_trigger(stats([1, 0], [1, 0]), 1.5, 1.)


def test_energy_budget_examples():
    unit = np.exp(1j*np.linspace(0, 6, 32))
    assert energy_budget_alpha(unit, -20.) == pytest.approx(0.1)
    assert energy_budget_alpha(unit, 0.) == pytest.approx(1.)
    assert energy_budget_alpha(2*unit, -15.) == pytest.approx(0.3557,
                                                              abs=1e-4)


def test_zero_energy_window_warns():
    with pytest.warns(UserWarning):
        assert energy_budget_alpha(np.zeros(8), -15.) == 0


def test_design_trigger(dataset):
    trigger, s = design_trigger(dataset, 1, [2], SPEC, 0.5, -15.)
    assert trigger.window_len == 4
    assert trigger.alpha == pytest.approx(
        energy_budget_alpha(collect_target_windows(dataset, 1, 2, SPEC),
                            -15.))
    assert np.linalg.norm(trigger.vector) == pytest.approx(trigger.alpha)
    assert 0 < s.explained_variance_ratio <= 1


def test_trigger_spec_round_trip():
    trigger = TriggerSpec(np.array([1 + 2j, -0.5j]), (1, 4), 0.5, 0.3, -15.)
    again = TriggerSpec.from_dict(trigger.to_dict())
    np.testing.assert_array_equal(again.vector, trigger.vector)
    assert again.window_indices == (1, 4)
    assert again.origin == 'xai'
