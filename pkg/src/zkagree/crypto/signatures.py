"""Ed25519 signatures over field-element digests."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from .hashing import field_to_bytes, is_field

KEY_BYTES = 32
SIGNATURE_BYTES = 64


class MalformedKey(ValueError):
    pass


class EntropyFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class KeyPair:
    pk: bytes
    sk: bytes

    def __repr__(self) -> str:
        return f"KeyPair(pk={self.pk.hex()[:16]}...)"


def random_bytes(n: int, rng: random.Random | None = None) -> bytes:
    """``n`` bytes from ``rng`` when given (seeded runs), else from the OS."""
    if rng is not None:
        return rng.randbytes(n)
    try:
        return os.urandom(n)
    except NotImplementedError as exc:  # pragma: no cover
        raise EntropyFailure(str(exc)) from exc


def _private(sk: bytes) -> Ed25519PrivateKey:
    if not isinstance(sk, (bytes, bytearray)) or len(sk) != KEY_BYTES:
        raise MalformedKey("secret key must be 32 bytes")
    return Ed25519PrivateKey.from_private_bytes(bytes(sk))


def public_key(sk: bytes) -> bytes:
    return _private(sk).public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


def keygen(rng: random.Random | None = None) -> KeyPair:
    sk = random_bytes(KEY_BYTES, rng)
    return KeyPair(pk=public_key(sk), sk=sk)


def _message(msg: int | bytes) -> bytes:
    if isinstance(msg, (bytes, bytearray)):
        return bytes(msg)
    return field_to_bytes(msg)


def sign(sk: bytes, msg: int | bytes) -> bytes:
    """Sign a digest (field element, encoded as 32 bytes big-endian)."""
    return _private(sk).sign(_message(msg))


def verify(pk: bytes, msg: int | bytes, sig: bytes) -> bool:
    """Return True iff ``sig`` is valid for ``msg`` under ``pk``; malformed inputs are rejected."""
    if not isinstance(pk, (bytes, bytearray)) or len(pk) != KEY_BYTES:
        return False
    if not isinstance(sig, (bytes, bytearray)) or len(sig) != SIGNATURE_BYTES:
        return False
    if not isinstance(msg, (bytes, bytearray)) and not is_field(msg):
        return False
    try:
        Ed25519PublicKey.from_public_bytes(bytes(pk)).verify(bytes(sig), _message(msg))
    except (InvalidSignature, ValueError):
        return False
    return True
