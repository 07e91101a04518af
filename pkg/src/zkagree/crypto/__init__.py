"""Field arithmetic helpers, the field-native hash, digests and signatures."""

from .hashing import (
    CHUNK_BYTES,
    MAX_INPUTS,
    EmptyInput,
    HashInputError,
    NotInField,
    TooManyInputs,
    digest_document,
    field_from_bytes,
    field_hex,
    field_to_bytes,
    hash_fields,
    is_field,
    pack_bytes,
)
from .poseidon import P
from .signatures import (
    EntropyFailure,
    KeyPair,
    MalformedKey,
    keygen,
    public_key,
    random_bytes,
    sign,
    verify,
)


def pk_field(pk: bytes) -> int:
    """Field encoding of a public key for use in proof statements."""
    return digest_document(pk)


def random_field(rng=None) -> int:
    """Uniform-ish field element from 31 random bytes (always below P)."""
    return int.from_bytes(random_bytes(31, rng), "big")


__all__ = [
    "P",
    "CHUNK_BYTES",
    "MAX_INPUTS",
    "EmptyInput",
    "EntropyFailure",
    "HashInputError",
    "KeyPair",
    "MalformedKey",
    "NotInField",
    "TooManyInputs",
    "digest_document",
    "field_from_bytes",
    "field_hex",
    "field_to_bytes",
    "hash_fields",
    "is_field",
    "keygen",
    "pack_bytes",
    "pk_field",
    "public_key",
    "random_bytes",
    "random_field",
    "sign",
    "verify",
]
