import numpy as np
import pytest

from amcbackdoor.attribution import WindowingSpec, partition
from amcbackdoor.datastore import CHANNEL_STREAM, frame_rng
from amcbackdoor.poisoner import (PoisonError,
                                  PoisonPlan,
                                  draw_symbol_set,
                                  inject_at_inference,
                                  inject_frame,
                                  poison_dataset,
                                  poison_symbol,
                                  symbols_per_frame,
                                  triggered_test_set,
                                  )
from amcbackdoor.sigchain import transmit
from amcbackdoor.triggergen import TriggerSpec


def make_trigger(alpha=0.5, window=2, window_len=4, seed=0):
    rng = np.random.default_rng(seed)
    vector = rng.standard_normal(window_len) + \
        1j*rng.standard_normal(window_len)
    return TriggerSpec(alpha*vector/np.linalg.norm(vector), (window,), 0.5,
                       alpha)


def random_symbol(rng, length=20):
    return rng.standard_normal(length) + 1j*rng.standard_normal(length)


def test_zero_trigger_is_the_identity():
    rng = np.random.default_rng(0)
    symbol = random_symbol(rng)
    trigger = TriggerSpec(np.zeros(4, dtype=complex), (2,), 0.5, 0.)
    np.testing.assert_array_equal(poison_symbol(symbol, trigger), symbol)


def test_only_the_selected_window_changes():
    rng = np.random.default_rng(1)
    trigger = make_trigger(window=3)
    for _ in range(100):
        symbol = random_symbol(rng)
        out = poison_symbol(symbol, trigger)
        outside = np.r_[0:12, 16:20]
        np.testing.assert_array_equal(out[outside], symbol[outside])


def test_added_energy_is_the_budget():
    rng = np.random.default_rng(2)
    trigger = make_trigger(alpha=0.7, window=1)
    spec = WindowingSpec(4, 20)
    for _ in range(20):
        symbol = random_symbol(rng)
        delta = partition(poison_symbol(symbol, trigger) - symbol, spec)[1]
        assert np.linalg.norm(delta) == pytest.approx(0.7)


def test_trigger_follows_the_window_phase():
    rng = np.random.default_rng(3)
    trigger = make_trigger()
    symbol = random_symbol(rng)
    rotated = symbol*np.exp(1j*1.1)
    np.testing.assert_allclose(poison_symbol(rotated, trigger),
                               poison_symbol(symbol, trigger)*np.exp(1j*1.1))


def test_symbols_per_frame():
    assert symbols_per_frame(100, 4) == 4
    assert symbols_per_frame(50, 4) == 2
    assert symbols_per_frame(1, 4) == 1
    with pytest.raises(PoisonError):
        symbols_per_frame(0, 4)
    rows = draw_symbol_set(8, 50, np.random.default_rng(0))
    assert len(rows) == 4 and len(set(rows)) == 4


def test_inject_frame_leaves_other_symbols():
    rng = np.random.default_rng(4)
    symbols = np.stack([random_symbol(rng) for _ in range(4)])
    out = inject_frame(symbols, make_trigger(), [1, 3])
    np.testing.assert_array_equal(out[[0, 2]], symbols[[0, 2]])
    assert not np.array_equal(out[1], symbols[1])


def test_sample_poisoning_ratio():
    trigger = make_trigger(window_len=20)
    plan = PoisonPlan(0, trigger, n_subcarriers=512)
    assert plan.rho_v == pytest.approx(3.90625)
    assert plan.realized_rho_h(4) == 100


@pytest.mark.parametrize('fraction', [0., 1.5])
def test_invalid_fraction(fraction):
    with pytest.raises(PoisonError):
        PoisonPlan(0, make_trigger(), example_fraction=fraction)


def test_poison_dataset(dataset):
    plan = PoisonPlan(1, make_trigger(), 100., 0.25, 16)
    result = poison_dataset(dataset, plan, np.random.default_rng(0),
                            show_progress=False)
    out = result.dataset
    train = dataset.train_indices
    eligible = train[dataset.labels[train] != 1]
    assert len(result.poisoned_indices) == round(0.25*len(eligible))
    assert set(result.poisoned_indices) <= set(eligible)
    assert np.all(out.labels[result.poisoned_indices] == 1)

    untouched = np.setdiff1d(np.arange(len(dataset)),
                             result.poisoned_indices)
    np.testing.assert_array_equal(out.x[untouched], dataset.x[untouched])
    np.testing.assert_array_equal(out.labels[untouched],
                                  dataset.labels[untouched])
    assert not np.array_equal(out.x[result.poisoned_indices],
                              dataset.x[result.poisoned_indices])
    assert dataset.manifest.poison_metadata is None
    meta = out.manifest.poison_metadata
    assert meta['y_tar'] == 1
    assert meta['poisoned_indices'] == result.poisoned_indices.tolist()
    assert meta['rho_v'] == pytest.approx(25.)


def test_full_fraction_poisons_every_eligible_frame(dataset):
    plan = PoisonPlan(0, make_trigger(), example_fraction=1.,
                      n_subcarriers=16)
    result = poison_dataset(dataset, plan, np.random.default_rng(0),
                            show_progress=False)
    train = dataset.train_indices
    assert len(result.poisoned_indices) == \
        np.count_nonzero(dataset.labels[train] != 0)
    assert np.all(result.dataset.labels[train] == 0)


def test_poisoning_is_reproducible(dataset):
    plan = PoisonPlan(2, make_trigger(), 50., 0.1, 16)
    a = poison_dataset(dataset, plan, np.random.default_rng(8), False)
    b = poison_dataset(dataset, plan, np.random.default_rng(8), False)
    assert a.dataset.equals(b.dataset)
    assert a.symbol_sets == b.symbol_sets
    assert all(len(rows) == 1 for rows in a.symbol_sets.values())


def test_inference_injection(dataset):
    chain = dataset.manifest.chain
    frame = dataset.frame(0)
    seed = int(dataset.frame_seeds[0])

    silent = TriggerSpec(np.zeros(4, dtype=complex), (2,), 0.5, 0.)
    same = inject_at_inference(frame, silent)
    np.testing.assert_array_equal(
        transmit(same, chain, frame_rng(seed, CHANNEL_STREAM)),
        transmit(frame, chain, frame_rng(seed, CHANNEL_STREAM)))

    injected = inject_at_inference(frame, make_trigger(), symbol_set=[1])
    np.testing.assert_array_equal(injected.symbols[0], frame.symbols[0])
    assert not np.array_equal(injected.symbols[1], frame.symbols[1])
    assert not np.array_equal(
        transmit(injected, chain, frame_rng(seed, CHANNEL_STREAM)),
        transmit(frame, chain, frame_rng(seed, CHANNEL_STREAM)))


def test_triggered_test_set_skips_the_target_class(dataset):
    x, indices = triggered_test_set(dataset, make_trigger(), 3, 10., 3)
    assert len(x) == len(indices)
    assert set(indices) <= set(dataset.test_indices)
    assert np.all(dataset.labels[indices] != 3)
    assert x.shape[1:] == dataset.manifest.ofdm.rx_shape
