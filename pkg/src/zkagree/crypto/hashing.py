"""Field-native hashing: ``hash_fields`` sponge and byte-document digests."""

from __future__ import annotations

from typing import Sequence

from .poseidon import P, permute

MAX_INPUTS = 16
CHUNK_BYTES = 31
_LENGTH_TAG = 1 << 64


class HashInputError(ValueError):
    pass


class EmptyInput(HashInputError):
    pass


class TooManyInputs(HashInputError):
    pass


class NotInField(HashInputError):
    pass


def is_field(x: object) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < P


def hash_fields(inputs: Sequence[int]) -> int:
    """Compress 1..16 field elements into one.

    Sponge of rate 2 over the width-3 permutation. The capacity lane starts
    at ``len(inputs) * 2**64`` so inputs of different lengths never share
    a padded state.
    """
    n = len(inputs)
    if n == 0:
        raise EmptyInput("hash_fields needs at least one input")
    if n > MAX_INPUTS:
        raise TooManyInputs(f"hash_fields takes at most {MAX_INPUTS} inputs, got {n}")
    for x in inputs:
        if not is_field(x):
            raise NotInField(f"not a field element: {x!r}")
    state = [n * _LENGTH_TAG, 0, 0]
    for i in range(0, n, 2):
        state[1] = (state[1] + inputs[i]) % P
        if i + 1 < n:
            state[2] = (state[2] + inputs[i + 1]) % P
        state = permute(state)
    return state[1]


def pack_bytes(data: bytes) -> list[int]:
    """Split ``data`` into 31-byte little-endian chunks; empty input packs to ``[0]``."""
    if not data:
        return [0]
    return [
        int.from_bytes(data[i : i + CHUNK_BYTES], "little")
        for i in range(0, len(data), CHUNK_BYTES)
    ]


def digest_document(doc: bytes) -> int:
    """Fold the packed chunks of ``doc`` left-to-right with ``hash_fields``.

    The first chunk seeds the fold as ``hash_fields([chunk0])``; each later
    chunk is absorbed as ``hash_fields([acc, chunk])``.
    """
    chunks = pack_bytes(bytes(doc))
    acc = hash_fields([chunks[0]])
    for chunk in chunks[1:]:
        acc = hash_fields([acc, chunk])
    return acc


def field_to_bytes(x: int) -> bytes:
    """32-byte big-endian encoding used for signatures and wire formats."""
    if not is_field(x):
        raise NotInField(f"not a field element: {x!r}")
    return x.to_bytes(32, "big")


def field_from_bytes(data: bytes) -> int:
    if len(data) != 32:
        raise NotInField(f"field encoding must be 32 bytes, got {len(data)}")
    x = int.from_bytes(data, "big")
    if x >= P:
        raise NotInField("encoding is not reduced modulo p")
    return x


def field_hex(x: int) -> str:
    return field_to_bytes(x).hex()
