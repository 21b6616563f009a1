import struct

import numpy as np
import pytest

from neural.checkpoint import (CHECKPOINT_MAGIC, ArchitectureMismatchError, CheckpointFormatError,
                               CheckpointTruncatedError, CheckpointVersionError, load_checkpoint, save_checkpoint)
from neural.network import default_architecture, init_parameters


@pytest.fixture
def saved(tmp_path, small_architecture, rng):
    params = init_parameters(small_architecture, rng)
    path = tmp_path / 'left.ckpt'
    save_checkpoint(params, path)
    return params, path


def test_round_trip_is_exact(saved, small_architecture):
    params, path = saved
    loaded = load_checkpoint(path, small_architecture)
    assert loaded.architecture == params.architecture
    assert list(loaded.tensors) == list(params.tensors)
    for name, tensor in params.tensors.items():
        np.testing.assert_array_equal(loaded.tensors[name], tensor)


def test_double_precision_load(saved):
    _, path = saved
    assert load_checkpoint(path, dtype=np.float64).dtype == np.float64


def test_not_a_checkpoint(tmp_path):
    path = tmp_path / 'notes.txt'
    path.write_bytes(b'hello world, this is not a network')
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)


def test_unknown_version(saved):
    _, path = saved
    data = bytearray(path.read_bytes())
    data[len(CHECKPOINT_MAGIC):len(CHECKPOINT_MAGIC) + 2] = struct.pack('<H', 99)
    path.write_bytes(bytes(data))
    with pytest.raises(CheckpointVersionError):
        load_checkpoint(path)


@pytest.mark.parametrize('keep', [10, 40, -4])
def test_truncated_file(saved, keep):
    _, path = saved
    data = path.read_bytes()
    path.write_bytes(data[:keep])
    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(path)


def test_trailing_bytes(saved):
    _, path = saved
    path.write_bytes(path.read_bytes() + b'\x00' * 4)
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)


def test_architecture_mismatch(saved):
    _, path = saved
    with pytest.raises(ArchitectureMismatchError):
        load_checkpoint(path, default_architecture(24))
