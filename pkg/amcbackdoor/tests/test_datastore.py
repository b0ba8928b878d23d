import struct

import numpy as np
import pytest

from amcbackdoor.datastore import (CHANNEL_STREAM,
                                   ChecksumError,
                                   DatasetFormatError,
                                   DatasetManifest,
                                   DatasetVersionError,
                                   TruncatedDatasetError,
                                   frame_seed,
                                   generate_dataset,
                                   load_dataset,
                                   manifest_path,
                                   retransmit,
                                   save_dataset,
                                   )
from amcbackdoor.datastore.storage import HEADER


def test_generated_shapes(dataset, manifest):
    n = manifest.n_examples
    assert dataset.x.shape == (n, 2, 16, 2)
    assert dataset.x.dtype == np.float32
    assert dataset.clean_tx.shape == (n, 2, 20)
    assert set(np.unique(dataset.snr_db)) <= {10., 20.}
    assert len(dataset.train_indices) == 96
    assert len(dataset.test_indices) == 32
    assert not set(dataset.train_indices) & set(dataset.test_indices)


def test_all_schemes_balanced(make_manifest):
    names = ('BPSK', 'QPSK', 'PSK8', 'QAM16', 'QAM64', 'PAM4', 'GFSK',
             'CPFSK')
    ds = generate_dataset(make_manifest(class_names=names, n_train=640,
                                        n_test=160),
                          show_progress=False)
    assert np.bincount(ds.labels).tolist() == [100]*8
    assert np.all(np.isfinite(ds.x))


def test_generation_is_deterministic(dataset, manifest):
    again = generate_dataset(manifest, show_progress=False)
    assert again.equals(dataset)


def test_master_seed_changes_the_data(dataset, make_manifest):
    other = generate_dataset(make_manifest(master_seed=4),
                             show_progress=False)
    assert not np.array_equal(other.x, dataset.x)


def test_frame_seeds_do_not_depend_on_the_dataset_size(make_manifest):
    assert frame_seed(3, 17) == frame_seed(3, 17)
    assert frame_seed(3, 17) != frame_seed(3, 18)
    small = generate_dataset(make_manifest(n_train=4, n_test=0),
                             show_progress=False)
    large = generate_dataset(make_manifest(n_train=8, n_test=2),
                             show_progress=False)
    np.testing.assert_array_equal(small.x, large.x[:4])


def test_manifest_round_trip(manifest):
    assert DatasetManifest.from_dict(manifest.to_dict()) == manifest


def test_invalid_manifests(make_manifest):
    with pytest.raises(ValueError):
        make_manifest(class_names=('BPSK',))
    with pytest.raises(ValueError):
        make_manifest(class_names=('BPSK', 'OOK'))
    with pytest.raises(ValueError):
        make_manifest(n_train=0)


def test_save_and_load(dataset, tmp_path):
    path = save_dataset(dataset, tmp_path/'tiny.amcb')
    assert manifest_path(path).exists()
    assert load_dataset(path).equals(dataset)


def test_save_without_transmitted_symbols(dataset, tmp_path):
    ds = dataset.copy()
    ds.clean_tx = None
    loaded = load_dataset(save_dataset(ds, tmp_path/'rx_only.amcb'))
    assert loaded.clean_tx is None
    assert loaded.equals(ds)
    with pytest.raises(ValueError):
        loaded.frame(0)


@pytest.fixture
def stored(dataset, tmp_path):
    path = save_dataset(dataset, tmp_path/'tiny.amcb')
    return path, bytearray(path.read_bytes())


def test_flipped_byte_fails_the_checksum(stored):
    path, data = stored
    data[HEADER.size + 3] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(ChecksumError):
        load_dataset(path)


def test_newer_version_is_rejected(stored):
    path, data = stored
    struct.pack_into('<I', data, 4, 2)
    path.write_bytes(bytes(data))
    with pytest.raises(DatasetVersionError):
        load_dataset(path)


def test_truncated_file(stored):
    path, data = stored
    path.write_bytes(bytes(data[:-20]))
    with pytest.raises(TruncatedDatasetError):
        load_dataset(path)
    path.write_bytes(bytes(data[:10]))
    with pytest.raises(TruncatedDatasetError):
        load_dataset(path)


@pytest.mark.parametrize('damage', ['magic', 'trailing'])
def test_malformed_file(stored, damage):
    path, data = stored
    if damage == 'magic':
        data[:4] = b'XXXX'
    else:
        data += b'\x00'
    path.write_bytes(bytes(data))
    with pytest.raises(DatasetFormatError):
        load_dataset(path)


def test_retransmit_reproduces_the_received_frames(dataset):
    idx = dataset.train_indices[:5]
    x = retransmit(dataset, idx, CHANNEL_STREAM)
    np.testing.assert_allclose(x, dataset.x[idx], rtol=1e-4, atol=1e-5)


def test_retransmit_at_another_snr(dataset):
    idx = dataset.test_indices[:5]
    a = retransmit(dataset, idx, 7, snr_db=0.)
    b = retransmit(dataset, idx, 7, snr_db=0.)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, dataset.x[idx])
