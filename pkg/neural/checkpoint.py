"""Checkpoint files.

Layout: magic `D3QNCKPT`, format version (uint16), header length (uint32), JSON header with the
architecture and the ordered tensor names/shapes, then every tensor as little-endian float32.
"""
import json
import logging
import struct
from collections import OrderedDict
from typing import Optional

import numpy as np

from neural.network import NetworkArchitecture, NetworkParameters

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b'D3QNCKPT'
CHECKPOINT_VERSION = 1
_PREAMBLE = struct.Struct('<8sHI')


class CheckpointError(ValueError):
    pass


class CheckpointFormatError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class ArchitectureMismatchError(CheckpointError):
    pass


def save_checkpoint(params: NetworkParameters, path) -> None:
    header = {
        'architecture': params.architecture.to_dict(),
        'tensors': [[name, list(tensor.shape)] for name, tensor in params.tensors.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode('utf-8')
    with open(path, 'wb') as f:
        f.write(_PREAMBLE.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(header_bytes)))
        f.write(header_bytes)
        for tensor in params.tensors.values():
            f.write(np.ascontiguousarray(tensor, dtype='<f4').tobytes())
    logger.debug(f'checkpoint with {params.parameter_count} parameters was saved to {path}')


def load_checkpoint(path, expected_architecture: Optional[NetworkArchitecture] = None,
                    dtype=np.float32) -> NetworkParameters:
    with open(path, 'rb') as f:
        data = f.read()

    if len(data) < len(CHECKPOINT_MAGIC) or data[:len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(f'{path} is not a checkpoint file')
    if len(data) < _PREAMBLE.size:
        raise CheckpointTruncatedError(f'{path} ends inside the preamble')
    _, version, header_length = _PREAMBLE.unpack_from(data)
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(f'{path} has format version {version}, expected {CHECKPOINT_VERSION}')

    header_end = _PREAMBLE.size + header_length
    if len(data) < header_end:
        raise CheckpointTruncatedError(f'{path} ends inside the header')
    try:
        header = json.loads(data[_PREAMBLE.size:header_end].decode('utf-8'))
        architecture = NetworkArchitecture.from_dict(header['architecture'])
    except (ValueError, KeyError, TypeError) as e:
        raise CheckpointFormatError(f'{path} has an unreadable header: {e}')

    if expected_architecture is not None and architecture != expected_architecture:
        raise ArchitectureMismatchError(
            f'{path} holds {architecture.to_dict()}, expected {expected_architecture.to_dict()}')

    tensors = OrderedDict()
    offset = header_end
    for name, shape in header['tensors']:
        count = int(np.prod(shape))
        end = offset + 4 * count
        if len(data) < end:
            raise CheckpointTruncatedError(f'{path} ends inside tensor {name}')
        tensors[name] = np.frombuffer(data, dtype='<f4', count=count, offset=offset).reshape(shape).astype(dtype)
        offset = end
    if offset != len(data):
        raise CheckpointFormatError(f'{path} has {len(data) - offset} trailing bytes')

    expected_names = list(architecture.parameter_shapes().items())
    if [(name, tuple(tensor.shape)) for name, tensor in tensors.items()] != expected_names:
        raise CheckpointFormatError(f'{path} tensors do not match its architecture')
    logger.debug(f'checkpoint was loaded from {path}')
    return NetworkParameters(architecture, tensors)
