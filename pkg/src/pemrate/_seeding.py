"""Deterministic seed derivation shared by every Monte Carlo routine."""

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


def _encode_index(index):
    if isinstance(index, (tuple, list)):
        parts = [_encode_index(i) for i in index]
        return b"(" + b",".join(parts) + b")"
    return str(int(index)).encode("ascii")


def derive_seed(master_seed, stream_label, index=0):
    """Mix ``(master_seed, stream_label, index)`` into a 64-bit seed.

    The mixing is a keyed BLAKE2b digest, so it is identical on every
    platform and Python version. ``index`` may be an integer or a (nested)
    tuple of integers such as ``(T, replicate)``.
    """
    if isinstance(stream_label, str):
        stream_label = stream_label.encode("utf-8")
    h = hashlib.blake2b(digest_size=8, person=b"pemrate-seed")
    h.update(struct.pack("<Q", int(master_seed) & _MASK64))
    h.update(struct.pack("<I", len(stream_label)))
    h.update(stream_label)
    h.update(_encode_index(index))
    return struct.unpack("<Q", h.digest())[0]


def make_rng(seed):
    return np.random.default_rng(int(seed) & _MASK64)
