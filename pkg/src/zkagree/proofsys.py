"""Setup / Prove / Verify for the commitment and evaluation relations.

Commitment relation, statement ``(h, clc_comm)``, witness ``(k, pd)``::

    h == H([k])  and  clc_comm == H([k, pd])

Evaluation relation, statement ``(rt, h, parties_digest, rat_numerator, v)``,
witness ``(k, pd, path[20], dirs[20])``::

    h == H([k]);  leaf = H([k, pd]);  fold(leaf, path, dirs) == rt;
    0 <= rat_numerator <= v

The only backend is ``transparent``: a proof is a deterministic transcript
carrying the witness plus a SHA-256 binding tag over (srs, relation,
statement, witness). The verifier checks the tag and re-executes the
relation. It is complete and sound against tampering but offers no
zero-knowledge; anything reading proof bytes learns the witness.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Sequence

from .crypto import (
    P,
    field_from_bytes,
    field_to_bytes,
    hash_fields,
    is_field,
    pk_field,
)
from .crypto.poseidon import FULL_ROUNDS, PARTIAL_ROUNDS, WIDTH
from .merkle import TREE_DEPTH

TRANSPARENT = "transparent-v1"
BACKENDS = (TRANSPARENT,)

COMMIT = 1
EVAL = 2
RELATION_NAMES = {COMMIT: "commitment", EVAL: "evaluation"}

# hash invocations per relation; setup must cover the larger one
COMMIT_HASHES = 2
EVAL_HASHES = TREE_DEPTH + 2
DEFAULT_MAX_RELATION_SIZE = 64

_PROOF_MAGIC = b"ZKTP"
_TAG_DOMAIN = b"zkagree/transparent/tag/v1"

# multiplications + additions inside one permutation
PERMUTATION_FIELD_OPS = (
    (FULL_ROUNDS + PARTIAL_ROUNDS) * (WIDTH + WIDTH * WIDTH + WIDTH * (WIDTH - 1))
    + FULL_ROUNDS * WIDTH * 3
    + PARTIAL_ROUNDS * 3
)


class ProofSystemError(Exception):
    pass


class UnsupportedBackend(ProofSystemError):
    pass


class RelationUnsatisfied(ProofSystemError):
    pass


# ------------------------------------------------------------------ types


@dataclass(frozen=True)
class Srs:
    backend_id: str
    parameters: bytes
    max_relation_size: int


@dataclass(frozen=True)
class CommitStatement:
    h: int
    clc_comm: int

    def fields(self) -> tuple[int, ...]:
        return (self.h, self.clc_comm)

    def to_bytes(self) -> bytes:
        return _encode_fields(self.fields())


@dataclass(frozen=True)
class CommitWitness:
    k: int
    pd: int

    def fields(self) -> tuple[int, ...]:
        return (self.k, self.pd)


@dataclass(frozen=True)
class EvalStatement:
    rt: int
    h: int
    parties_digest: int
    rat_numerator: int
    v: int

    def fields(self) -> tuple[int, ...]:
        return (self.rt, self.h, self.parties_digest, self.rat_numerator, self.v)

    def to_bytes(self) -> bytes:
        return _encode_fields(self.fields())

    @classmethod
    def from_bytes(cls, data: bytes) -> "EvalStatement":
        return cls(*_decode_fields(data, 5))

    def to_json(self) -> dict:
        return {"rt": field_to_bytes(self.rt).hex(), "h": field_to_bytes(self.h).hex(),
                "parties_digest": field_to_bytes(self.parties_digest).hex(),
                "rat_numerator": self.rat_numerator, "v": self.v}

    @classmethod
    def from_json(cls, data: dict) -> "EvalStatement":
        return cls(int(data["rt"], 16), int(data["h"], 16), int(data["parties_digest"], 16),
                   int(data["rat_numerator"]), int(data["v"]))


@dataclass(frozen=True)
class EvalWitness:
    k: int
    pd: int
    merkle_path: tuple[int, ...]
    merkle_dirs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "merkle_path", tuple(self.merkle_path))
        object.__setattr__(self, "merkle_dirs", tuple(self.merkle_dirs))

    def fields(self) -> tuple[int, ...]:
        return (self.k, self.pd, *self.merkle_path, *self.merkle_dirs)


@dataclass(frozen=True)
class ProofBundle:
    backend_id: str
    statement: bytes
    proof: bytes

    def to_bytes(self) -> bytes:
        """Length-prefixed wire form: backend id, statement, proof."""
        out = bytearray()
        for part in (self.backend_id.encode("utf-8"), self.statement, self.proof):
            out += struct.pack(">I", len(part)) + part
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProofBundle":
        parts, offset = [], 0
        for _ in range(3):
            if offset + 4 > len(data):
                raise ValueError("truncated proof bundle")
            (n,) = struct.unpack_from(">I", data, offset)
            offset += 4
            if offset + n > len(data):
                raise ValueError("truncated proof bundle")
            parts.append(data[offset: offset + n])
            offset += n
        if offset != len(data):
            raise ValueError("trailing bytes after proof bundle")
        return cls(parts[0].decode("utf-8"), parts[1], parts[2])


def parties_digest(pk_buy: bytes, pk_sel: bytes, pk_eva: bytes) -> int:
    return hash_fields([pk_field(pk_buy), pk_field(pk_sel), pk_field(pk_eva)])


# ----------------------------------------------------------- encodings


def _encode_fields(values: Sequence[int]) -> bytes:
    return b"".join(field_to_bytes(v) for v in values)


def _decode_fields(data: bytes, count: int) -> list[int]:
    if len(data) != 32 * count:
        raise ValueError(f"expected {count} field encodings, got {len(data)} bytes")
    return [field_from_bytes(data[i: i + 32]) for i in range(0, len(data), 32)]


# -------------------------------------------------------------- metering


@dataclass
class OpCounter:
    """Relation-size meter: hash invocations and field operations."""

    hashes: int = 0
    permutations: int = 0
    field_ops: int = 0
    log: list[str] = field(default_factory=list)

    def hash(self, inputs: Sequence[int]) -> int:
        self.hashes += 1
        perms = (len(inputs) + 1) // 2
        self.permutations += perms
        self.field_ops += perms * PERMUTATION_FIELD_OPS
        return hash_fields(inputs)

    def op(self, n: int = 1) -> None:
        self.field_ops += n


# ------------------------------------------------------------- relations


def commit_relation(stmt: CommitStatement, wit: CommitWitness, meter: OpCounter | None = None) -> bool:
    meter = meter or OpCounter()
    if not all(is_field(x) for x in stmt.fields() + wit.fields()):
        return False
    h = meter.hash([wit.k])
    comm = meter.hash([wit.k, wit.pd])
    meter.op(2)
    return h == stmt.h and comm == stmt.clc_comm


def eval_relation(stmt: EvalStatement, wit: EvalWitness, meter: OpCounter | None = None) -> bool:
    meter = meter or OpCounter()
    if not all(is_field(x) for x in stmt.fields() + (wit.k, wit.pd) + wit.merkle_path):
        return False
    if len(wit.merkle_path) != TREE_DEPTH or len(wit.merkle_dirs) != TREE_DEPTH:
        return False
    if any(d not in (0, 1) for d in wit.merkle_dirs):
        return False
    ok = meter.hash([wit.k]) == stmt.h
    node = meter.hash([wit.k, wit.pd])
    for sibling, bit in zip(wit.merkle_path, wit.merkle_dirs):
        # boolean constraint on the bit plus the conditional swap
        meter.op(3)
        node = meter.hash([sibling, node]) if bit else meter.hash([node, sibling])
    meter.op(3)
    return ok and node == stmt.rt and 0 <= stmt.rat_numerator <= stmt.v


# ---------------------------------------------------------------- backend


def setup(security_param: int = 128, max_relation_size: int = DEFAULT_MAX_RELATION_SIZE,
          backend: str = TRANSPARENT) -> Srs:
    """Deterministic transparent setup; ``max_relation_size`` counts hash invocations."""
    if backend not in BACKENDS:
        raise UnsupportedBackend(f"unknown proof backend {backend!r}")
    if security_param < 128:
        raise UnsupportedBackend(f"security parameter {security_param} below 128 bits")
    if max_relation_size < max(COMMIT_HASHES, EVAL_HASHES):
        raise UnsupportedBackend(
            f"max_relation_size {max_relation_size} cannot hold the evaluation relation "
            f"({EVAL_HASHES} hashes)")
    seed = hashlib.sha256(
        b"zkagree/srs/" + backend.encode() + struct.pack(">II", security_param, max_relation_size)
    ).digest()
    return Srs(backend, seed, max_relation_size)


def _witness_bytes(relation: int, wit: CommitWitness | EvalWitness) -> bytes:
    if relation == COMMIT:
        return _encode_fields(wit.fields())
    assert isinstance(wit, EvalWitness)
    dirs = sum(bit << i for i, bit in enumerate(wit.merkle_dirs))
    return _encode_fields((wit.k, wit.pd, *wit.merkle_path)) + dirs.to_bytes(4, "big")


def _tag(srs: Srs, relation: int, statement: bytes, witness: bytes) -> bytes:
    h = hashlib.sha256(_TAG_DOMAIN)
    for part in (srs.backend_id.encode(), srs.parameters, bytes([relation]), statement, witness):
        h.update(struct.pack(">I", len(part)) + part)
    return h.digest()


def transcript(srs: Srs, relation: int, statement: bytes, wit: CommitWitness | EvalWitness) -> ProofBundle:
    """Encode a proof without checking the relation (verifier-side tests use this)."""
    witness = _witness_bytes(relation, wit)
    proof = _PROOF_MAGIC + bytes([relation]) + witness + _tag(srs, relation, statement, witness)
    return ProofBundle(srs.backend_id, statement, proof)


def _check_backend(srs: Srs) -> None:
    if srs.backend_id not in BACKENDS:
        raise UnsupportedBackend(f"unknown proof backend {srs.backend_id!r}")


def prove_commit(srs: Srs, witness: CommitWitness) -> tuple[CommitStatement, ProofBundle]:
    _check_backend(srs)
    if not (is_field(witness.k) and is_field(witness.pd)):
        raise RelationUnsatisfied("witness values must be field elements")
    stmt = CommitStatement(hash_fields([witness.k]), hash_fields([witness.k, witness.pd]))
    if not commit_relation(stmt, witness):  # pragma: no cover - backend fault
        raise RelationUnsatisfied("commitment relation failed on derived statement")
    return stmt, transcript(srs, COMMIT, stmt.to_bytes(), witness)


def prove_eval(srs: Srs, witness: EvalWitness, statement: EvalStatement) -> ProofBundle:
    _check_backend(srs)
    if not eval_relation(statement, witness):
        raise RelationUnsatisfied("evaluation witness does not satisfy the statement "
                                  "(stale root, wrong nullifier, or ratio out of range)")
    return transcript(srs, EVAL, statement.to_bytes(), witness)


def _parse_proof(proof: bytes) -> tuple[int, bytes, bytes]:
    if len(proof) < len(_PROOF_MAGIC) + 1 + 32 or not proof.startswith(_PROOF_MAGIC):
        raise ValueError("not a transparent proof")
    relation = proof[len(_PROOF_MAGIC)]
    body = proof[len(_PROOF_MAGIC) + 1: -32]
    return relation, body, proof[-32:]


def _decode_witness(relation: int, body: bytes) -> CommitWitness | EvalWitness:
    if relation == COMMIT:
        return CommitWitness(*_decode_fields(body, 2))
    if relation == EVAL:
        if len(body) != 32 * (2 + TREE_DEPTH) + 4:
            raise ValueError("bad evaluation witness length")
        values = _decode_fields(body[:-4], 2 + TREE_DEPTH)
        packed = int.from_bytes(body[-4:], "big")
        if packed >> TREE_DEPTH:
            raise ValueError("direction bits overflow")
        dirs = [(packed >> i) & 1 for i in range(TREE_DEPTH)]
        return EvalWitness(values[0], values[1], tuple(values[2:]), tuple(dirs))
    raise ValueError(f"unknown relation {relation}")


def verify(srs: Srs, statement: bytes, proof: ProofBundle) -> bool:
    """Accept iff the proof binds to ``statement`` under ``srs`` and the relation holds."""
    try:
        if srs.backend_id not in BACKENDS or proof.backend_id != srs.backend_id:
            return False
        if proof.statement != statement:
            return False
        relation, body, tag = _parse_proof(proof.proof)
        if tag != _tag(srs, relation, statement, body):
            return False
        wit = _decode_witness(relation, body)
        if relation == COMMIT:
            return commit_relation(CommitStatement(*_decode_fields(statement, 2)), wit)
        return eval_relation(EvalStatement.from_bytes(statement), wit)
    except (ValueError, TypeError, struct.error):
        return False


def relation_size(relation: int) -> OpCounter:
    """Meter one honest execution of ``relation`` on a dummy satisfying instance."""
    meter = OpCounter()
    if relation == COMMIT:
        wit = CommitWitness(1, 2)
        commit_relation(CommitStatement(hash_fields([1]), hash_fields([1, 2])), wit, meter)
        return meter
    wit = EvalWitness(1, 2, tuple([0] * TREE_DEPTH), tuple([0] * TREE_DEPTH))
    from .merkle import root_from_path

    rt = root_from_path(hash_fields([1, 2]), wit.merkle_path, wit.merkle_dirs)
    eval_relation(EvalStatement(rt, hash_fields([1]), 0, 0, 1), wit, meter)
    return meter


__all__ = [
    "BACKENDS",
    "COMMIT",
    "EVAL",
    "P",
    "TRANSPARENT",
    "CommitStatement",
    "CommitWitness",
    "EvalStatement",
    "EvalWitness",
    "OpCounter",
    "ProofBundle",
    "RelationUnsatisfied",
    "Srs",
    "UnsupportedBackend",
    "commit_relation",
    "eval_relation",
    "parties_digest",
    "prove_commit",
    "prove_eval",
    "relation_size",
    "setup",
    "transcript",
    "verify",
]
