"""
model checkpoints: b'AMCM' header, JSON model configuration, float64
parameter vector and an 8-byte blake2b digest, little-endian throughout.
"""

import hashlib
import json
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .models import ModelConfig, Network

MAGIC = b'AMCM'
FORMAT_VERSION = 1
HEADER = struct.Struct('<4sIIQ')
DIGEST_SIZE = 8


class CheckpointError(ValueError):
    pass


def save_model(model: Network, path: Union[str, Path]) -> Path:
    path = Path(path)
    config = json.dumps(model.config.to_dict(), sort_keys=True).encode()
    theta = model.get_params().astype('<f8')
    body = HEADER.pack(MAGIC, FORMAT_VERSION, len(config), theta.size) + \
        config + theta.tobytes()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(body + hashlib.blake2b(body,
                                            digest_size=DIGEST_SIZE).digest())
    return path


def load_model(path: Union[str, Path]) -> Network:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise CheckpointError(f'{path}: truncated checkpoint')
    magic, version, config_len, n_params = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f'{path}: not a model checkpoint')
    if version != FORMAT_VERSION:
        raise CheckpointError(f'{path}: unsupported checkpoint version '
                              f'{version}')
    end = HEADER.size + config_len + 8*n_params
    if len(data) != end + DIGEST_SIZE:
        raise CheckpointError(f'{path}: truncated checkpoint')
    if hashlib.blake2b(data[:end], digest_size=DIGEST_SIZE).digest() != \
            data[end:]:
        raise CheckpointError(f'{path}: checksum mismatch')

    config = ModelConfig.from_dict(
        json.loads(data[HEADER.size:HEADER.size + config_len]))
    model = Network(config)
    model.set_params(np.frombuffer(data, dtype='<f8', count=n_params,
                                   offset=HEADER.size + config_len))
    return model
