"""
binary container for labeled datasets.

layout, little-endian:
    header      magic b'AMCB', format version, n_classes, M, N, N_cp,
                n_examples, n_train, flags (all u32)
    payload     labels u32[n], frame seeds u64[n], snr f32[n], split u8[n],
                received f32[n, M, N, 2],
                clean_tx f32[n, M, N + N_cp, 2] (interleaved I/Q, flag bit 0)
    trailer     8-byte blake2b digest of header + payload

the manifest is written next to the container as a JSON sidecar.
"""

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .dataset import DatasetManifest, LabeledDataset

log = logging.getLogger(__name__)

MAGIC = b'AMCB'
FORMAT_VERSION = 1
HEADER = struct.Struct('<4s8I')
DIGEST_SIZE = 8
FLAG_CLEAN_TX = 1


class DatasetFormatError(ValueError):
    """ the file is not a well-formed dataset container """


class DatasetVersionError(DatasetFormatError):
    pass


class TruncatedDatasetError(DatasetFormatError):
    pass


class ChecksumError(DatasetFormatError):
    pass


def manifest_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + '.json')


def _digest(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=DIGEST_SIZE).digest()


def _blocks(n, m, n_sc, cp_len, with_clean):
    blocks = [('labels', '<u4', (n,)),
              ('frame_seeds', '<u8', (n,)),
              ('snr_db', '<f4', (n,)),
              ('split', 'u1', (n,)),
              ('x', '<f4', (n, m, n_sc, 2))]
    if with_clean:
        blocks.append(('clean_tx', '<f4', (n, m, n_sc + cp_len, 2)))
    return blocks


def _payload_size(blocks) -> int:
    return sum(np.dtype(dt).itemsize*int(np.prod(shape))
               for _, dt, shape in blocks)


def save_dataset(ds: LabeledDataset, path: Union[str, Path]) -> Path:
    """
    write ``ds`` to ``path`` and its manifest to ``<path>.json``.
    """
    path = Path(path)
    man = ds.manifest
    cfg = man.ofdm
    n = len(ds)
    with_clean = ds.clean_tx is not None
    flags = FLAG_CLEAN_TX if with_clean else 0

    header = HEADER.pack(MAGIC, FORMAT_VERSION, man.n_classes,
                         cfg.symbols_per_frame, cfg.n_subcarriers, cfg.cp_len,
                         n, int(np.count_nonzero(ds.split)), flags)
    arrays = {'labels': ds.labels, 'frame_seeds': ds.frame_seeds,
              'snr_db': ds.snr_db, 'split': ds.split, 'x': ds.x}
    if with_clean:
        tx = np.asarray(ds.clean_tx, dtype=np.complex64)
        arrays['clean_tx'] = np.stack((tx.real, tx.imag), axis=-1)

    parts = [header]
    for name, dtype, shape in _blocks(n, cfg.symbols_per_frame,
                                      cfg.n_subcarriers, cfg.cp_len,
                                      with_clean):
        block = np.ascontiguousarray(arrays[name], dtype=dtype)
        if block.shape != shape:
            raise ValueError(f'{name} has shape {block.shape}, expected '
                             f'{shape}')
        parts.append(block.tobytes())
    body = b''.join(parts)

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(body + _digest(body))
    manifest_path(path).write_text(
        json.dumps(man.to_dict(), indent=2, sort_keys=True))
    log.info(f'saved {n} examples to {path}')
    return path


def load_dataset(path: Union[str, Path]) -> LabeledDataset:
    """
    read a container written by ``save_dataset``.

    Raises:
        ``TruncatedDatasetError``: the file is shorter than its header says.
        ``DatasetVersionError``: unsupported format version.
        ``ChecksumError``: the payload does not match its digest.
        ``DatasetFormatError``: bad magic, trailing bytes or a manifest
            that disagrees with the header.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < HEADER.size:
        raise TruncatedDatasetError(f'{path}: file shorter than its header')
    magic, version, n_classes, m, n_sc, cp_len, n, n_train, flags = \
        HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DatasetFormatError(f'{path}: not a dataset file '
                                 f'(magic {magic!r})')
    if version != FORMAT_VERSION:
        raise DatasetVersionError(f'{path}: format version {version}, this '
                                  f'reader supports {FORMAT_VERSION}')

    blocks = _blocks(n, m, n_sc, cp_len, bool(flags & FLAG_CLEAN_TX))
    end = HEADER.size + _payload_size(blocks)
    if len(data) < end + DIGEST_SIZE:
        raise TruncatedDatasetError(f'{path}: expected {end + DIGEST_SIZE} '
                                    f'bytes, found {len(data)}')
    if len(data) > end + DIGEST_SIZE:
        raise DatasetFormatError(f'{path}: unexpected trailing bytes')
    if _digest(data[:end]) != data[end:]:
        raise ChecksumError(f'{path}: checksum mismatch')

    arrays = {}
    offset = HEADER.size
    for name, dtype, shape in blocks:
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(data, dtype=dtype, count=count,
                                     offset=offset).reshape(shape)
        offset += np.dtype(dtype).itemsize*count

    manifest = DatasetManifest.from_dict(
        json.loads(manifest_path(path).read_text()))
    if (manifest.n_classes, manifest.ofdm.symbols_per_frame,
            manifest.ofdm.n_subcarriers, manifest.ofdm.cp_len,
            manifest.n_examples, manifest.n_train) != \
            (n_classes, m, n_sc, cp_len, n, n_train):
        raise DatasetFormatError(f'{path}: manifest does not match the '
                                 'container header')

    clean_tx = None
    if 'clean_tx' in arrays:
        iq = arrays['clean_tx']
        clean_tx = (iq[..., 0] + 1j*iq[..., 1]).astype(np.complex64)
    return LabeledDataset(manifest,
                          arrays['x'].astype(np.float32),
                          arrays['labels'].astype(np.int64),
                          arrays['frame_seeds'].astype(np.uint64),
                          arrays['snr_db'].astype(np.float32),
                          arrays['split'].astype(np.uint8),
                          clean_tx)
