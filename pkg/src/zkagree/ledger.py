"""Simulated on-chain escrow contract.

Holds the commitment tree, a ring of the last 30 roots, the nullifier
table and pooled escrow. Every mutating call runs under one lock, so
concurrent callers see a single total order of transactions. A reverted
settlement raises and leaves the state untouched.
"""

from __future__ import annotations

import copy
import hashlib
import json
import threading
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable

from .clc import Lifecycle, LifecycleState
from .crypto import field_hex, is_field, verify as verify_signature
from .merkle import TREE_DEPTH, MerkleTree, TreeFull, UnknownLeaf
from .proofsys import EvalStatement, ProofBundle, Srs, verify as verify_proof

SCHEMA_VERSION = 1
ROOT_HISTORY = 30
GENESIS_DIGEST = "0" * 64


class LedgerError(Exception):
    pass


class InvalidAmount(LedgerError):
    pass


class InsufficientFunds(LedgerError):
    pass


class SettlementReverted(LedgerError):
    pass


class NullifierSpent(SettlementReverted):
    pass


class StaleRoot(SettlementReverted):
    pass


class InvalidProof(SettlementReverted):
    pass


class InsufficientEscrow(SettlementReverted):
    pass


def _canonical(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def record_digest(record: dict[str, Any]) -> str:
    body = {k: v for k, v in record.items() if k != "digest"}
    return hashlib.sha256(_canonical(body)).hexdigest()


def verify_chain(records: Iterable[dict[str, Any]]) -> int | None:
    """Index of the first record whose digest link is broken, or None."""
    prev = GENESIS_DIGEST
    last_height = 0
    for i, rec in enumerate(records):
        if rec.get("prev") != prev or rec.get("digest") != record_digest(rec):
            return i
        if rec.get("height", 0) <= last_height:
            return i
        last_height = rec["height"]
        prev = rec["digest"]
    return None


@dataclass(frozen=True)
class Transaction:
    kind: str
    height: int
    fields: dict[str, Any]
    prev: str
    digest: str

    def to_json(self) -> dict[str, Any]:
        return {"height": self.height, "kind": self.kind, **self.fields,
                "prev": self.prev, "digest": self.digest}


class LedgerState:
    def __init__(self, srs: Srs, depth: int = TREE_DEPTH) -> None:
        self.srs = srs
        self.tree = MerkleTree(depth)
        self.recent_roots: deque[int] = deque([self.tree.root], maxlen=ROOT_HISTORY)
        self.nullifiers: set[int] = set()
        self.locks: dict[int, int] = {}
        self.released = 0
        self.balances: dict[str, int] = {}
        self.total_deposits = 0
        self.tx_log: list[dict[str, Any]] = []
        self.height = 0
        self.listeners: list[Callable[["LedgerState", dict[str, Any]], None]] = []
        self._lock = threading.RLock()

    # -- accounting -----------------------------------------------------

    @property
    def escrow_total(self) -> int:
        return sum(self.locks.values()) - self.released

    def balance(self, pk: bytes) -> int:
        return self.balances.get(pk.hex(), 0)

    def conserved(self) -> bool:
        return sum(self.balances.values()) + self.escrow_total == self.total_deposits

    def is_known_root(self, root: int) -> bool:
        return root in self.recent_roots

    # -- log ------------------------------------------------------------

    def _append(self, kind: str, fields: dict[str, Any]) -> Transaction:
        self.height += 1
        prev = self.tx_log[-1]["digest"] if self.tx_log else GENESIS_DIGEST
        record = {"height": self.height, "kind": kind, **fields, "prev": prev}
        record["digest"] = record_digest(record)
        self.tx_log.append(record)
        for listener in self.listeners:
            listener(self, record)
        return Transaction(kind, self.height, fields, prev, record["digest"])

    # -- transactions ---------------------------------------------------

    def deposit(self, pk: bytes, amount: int) -> Transaction:
        """Credit external funds to ``pk``; the only way value enters the ledger."""
        if isinstance(amount, bool) or not isinstance(amount, int) or amount <= 0:
            raise InvalidAmount(f"deposit must be a positive integer, got {amount!r}")
        with self._lock:
            key = pk.hex()
            self.balances[key] = self.balances.get(key, 0) + amount
            self.total_deposits += amount
            return self._append("DEPOSIT", {"account": key, "amount": amount})

    def submit_commitment(self, clc_comm: int, v: int, depositor: bytes,
                          signatures: dict[str, bytes] | None = None,
                          lifecycle: LifecycleState | None = None) -> Transaction:
        """Lock ``v`` from ``depositor`` and insert ``clc_comm`` into the tree.

        ``signatures`` maps signer pk (hex) to a signature over ``clc_comm``;
        each must verify or the commitment is refused.
        """
        if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
            raise InvalidAmount(f"locked value must be a positive integer, got {v!r}")
        if not is_field(clc_comm):
            raise InvalidAmount("commitment is not a field element")
        for pk_hex, sig in (signatures or {}).items():
            if not verify_signature(bytes.fromhex(pk_hex), clc_comm, sig):
                raise LedgerError(f"commitment signature by {pk_hex[:16]}... does not verify")
        with self._lock:
            key = depositor.hex()
            if self.balances.get(key, 0) < v:
                raise InsufficientFunds(f"balance {self.balances.get(key, 0)} < {v}")
            if self.tree.next_index >= self.tree.capacity:
                raise TreeFull("commitment tree is full")
            index, root = self.tree.insert(clc_comm)
            self.recent_roots.append(root)
            self.balances[key] -= v
            self.locks[index] = v
            tx = self._append("COMMIT", {
                "clc_comm": field_hex(clc_comm),
                "v": v,
                "depositor": key,
                "leaf_index": index,
                "root": field_hex(root),
                "signatures": {pk: sig.hex() for pk, sig in sorted((signatures or {}).items())},
            })
        if lifecycle is not None and lifecycle.lifecycle is Lifecycle.INIT:
            lifecycle.initialize()
        return tx

    def inclusion_proof(self, leaf_index: int) -> tuple[list[int], list[int], int]:
        with self._lock:
            return self.tree.proof(leaf_index)

    def settle(self, proof: ProofBundle, statement: EvalStatement, payee_ratio: bytes,
               payee_complement: bytes, lifecycle: LifecycleState | None = None) -> Transaction:
        """Verify and pay out. Raises a SettlementReverted subclass on any failure."""
        with self._lock:
            if statement.h in self.nullifiers:
                raise NullifierSpent("nullifier hash already spent")
            if statement.rt not in self.recent_roots:
                raise StaleRoot("root is not among the recent roots")
            try:
                stmt_bytes = statement.to_bytes()
            except ValueError as exc:
                raise InvalidProof(f"statement not encodable: {exc}") from exc
            if not verify_proof(self.srs, stmt_bytes, proof):
                raise InvalidProof("proof rejected by verifier")
            if statement.v > self.escrow_total:
                raise InsufficientEscrow("escrow pool cannot cover the settled value")
            if payee_ratio == payee_complement:
                raise InvalidProof("payees must be distinct")
            to_ratio = statement.rat_numerator
            to_complement = statement.v - statement.rat_numerator
            self.nullifiers.add(statement.h)
            self.released += statement.v
            for pk, amount in ((payee_ratio, to_ratio), (payee_complement, to_complement)):
                self.balances[pk.hex()] = self.balances.get(pk.hex(), 0) + amount
            tx = self._append("SETTLE", {
                "h": field_hex(statement.h),
                "rt": field_hex(statement.rt),
                "parties_digest": field_hex(statement.parties_digest),
                "rat_numerator": statement.rat_numerator,
                "v": statement.v,
                "payee_ratio": payee_ratio.hex(),
                "payee_complement": payee_complement.hex(),
                "paid_ratio": to_ratio,
                "paid_complement": to_complement,
                "proof": proof.proof.hex(),
            })
        if lifecycle is not None:
            lifecycle.complete()
        return tx

    # -- snapshots --------------------------------------------------------

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            return {
                "schema_version": SCHEMA_VERSION,
                "srs": {"backend_id": self.srs.backend_id, "parameters": self.srs.parameters.hex(),
                        "max_relation_size": self.srs.max_relation_size},
                "depth": self.tree.depth,
                "leaves": [field_hex(x) for x in self.tree.leaves],
                "recent_roots": [field_hex(x) for x in self.recent_roots],
                "nullifiers": sorted(field_hex(x) for x in self.nullifiers),
                "locks": {str(k): v for k, v in sorted(self.locks.items())},
                "released": self.released,
                "balances": dict(sorted(self.balances.items())),
                "total_deposits": self.total_deposits,
                "height": self.height,
                "tx_log": copy.deepcopy(self.tx_log),
            }

    def state_hash(self) -> str:
        return hashlib.sha256(_canonical(self.snapshot())).hexdigest()

    @classmethod
    def restore(cls, snap: dict[str, Any]) -> "LedgerState":
        if snap.get("schema_version") != SCHEMA_VERSION:
            raise LedgerError(f"unsupported snapshot version {snap.get('schema_version')!r}")
        s = snap["srs"]
        state = cls(Srs(s["backend_id"], bytes.fromhex(s["parameters"]), s["max_relation_size"]),
                    snap["depth"])
        for leaf in snap["leaves"]:
            state.tree.insert(int(leaf, 16))
        roots = [int(r, 16) for r in snap["recent_roots"]]
        if state.tree.root != roots[-1]:
            raise LedgerError("snapshot leaves do not reproduce the recorded root")
        state.recent_roots = deque(roots, maxlen=ROOT_HISTORY)
        state.nullifiers = {int(x, 16) for x in snap["nullifiers"]}
        state.locks = {int(k): v for k, v in snap["locks"].items()}
        state.released = snap["released"]
        state.balances = dict(snap["balances"])
        state.total_deposits = snap["total_deposits"]
        state.height = snap["height"]
        state.tx_log = copy.deepcopy(snap["tx_log"])
        if verify_chain(state.tx_log) is not None:
            raise LedgerError("transaction log digest chain is broken")
        return state

    def copy(self) -> "LedgerState":
        with self._lock:
            clone = LedgerState.__new__(LedgerState)
            clone.srs = self.srs
            clone.tree = self.tree.copy()
            clone.recent_roots = deque(self.recent_roots, maxlen=ROOT_HISTORY)
            clone.nullifiers = set(self.nullifiers)
            clone.locks = dict(self.locks)
            clone.released = self.released
            clone.balances = dict(self.balances)
            clone.total_deposits = self.total_deposits
            clone.tx_log = copy.deepcopy(self.tx_log)
            clone.height = self.height
            clone.listeners = []
            clone._lock = threading.RLock()
            return clone

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.snapshot(), indent=1, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "LedgerState":
        return cls.restore(json.loads(Path(path).read_text()))

    def write_tx_log(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.tx_log:
                fh.write(json.dumps({"schema_version": SCHEMA_VERSION, **rec}, sort_keys=True) + "\n")


def read_tx_log(path: str | Path) -> list[dict[str, Any]]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                if rec.pop("schema_version", None) != SCHEMA_VERSION:
                    raise LedgerError("unsupported tx_log schema version")
                records.append(rec)
    return records


__all__ = [
    "GENESIS_DIGEST",
    "ROOT_HISTORY",
    "SCHEMA_VERSION",
    "InsufficientEscrow",
    "InsufficientFunds",
    "InvalidAmount",
    "InvalidProof",
    "LedgerError",
    "LedgerState",
    "NullifierSpent",
    "SettlementReverted",
    "StaleRoot",
    "Transaction",
    "TreeFull",
    "UnknownLeaf",
    "read_tx_log",
    "record_digest",
    "verify_chain",
]
