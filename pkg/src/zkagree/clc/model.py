"""Contract document, signed contract, and their canonical encodings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Any, Mapping

from .. import crypto
from .errors import SchemaError, SchemaViolation
from .lang import (
    EvalContext,
    Environment,
    Node,
    Outcome,
    evaluate,
    parse,
    typecheck,
    unparse,
)
from .types import coerce_value, normalize_type_name, parse_type, runtime_value, to_json_value

FORMAT = "zkagree.contract/1"
SIGNED_FORMAT = "zkagree.signed-contract/1"
PROTOCOL_ROLES = ("buyer", "seller", "evaluator")


def canonical_json(obj: Any) -> bytes:
    """Sorted keys, no insignificant whitespace, ASCII only."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("ascii")


@dataclass(frozen=True)
class Party:
    display_name: str
    pk: bytes | None = None


@dataclass(frozen=True)
class Term:
    type: str
    value: Any


@dataclass(frozen=True)
class InputDecl:
    name: str
    type: str
    optional: bool = False


@dataclass(frozen=True)
class PayoutRoles:
    ratio_payee: str
    complement_payee: str


@dataclass(frozen=True)
class LogicProgram:
    ast: Node
    source: str = field(default="", compare=False)

    @property
    def canonical_source(self) -> str:
        return unparse(self.ast)

    def canonical_bytes(self) -> bytes:
        return self.canonical_source.encode("utf-8")

    def digest(self) -> int:
        return crypto.digest_document(self.canonical_bytes())


@dataclass(frozen=True)
class ContractDocument:
    name: str
    parties: Mapping[str, Party]
    roles: Mapping[str, str]
    terms: Mapping[str, Term]
    value_v: int
    payout: PayoutRoles
    data_schema: tuple[InputDecl, ...]
    logic: LogicProgram
    text: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "parties", MappingProxyType(dict(self.parties)))
        object.__setattr__(self, "roles", MappingProxyType(dict(self.roles)))
        object.__setattr__(self, "terms", MappingProxyType(dict(self.terms)))
        object.__setattr__(self, "data_schema", tuple(self.data_schema))
        self.validate()

    def __hash__(self) -> int:
        return hash(self.canonical_bytes)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ContractDocument) and self.canonical_bytes == other.canonical_bytes

    # immutable, so the encodings are computed once
    @cached_property
    def canonical_bytes(self) -> bytes:
        return canonical_json(to_dict(self))

    @cached_property
    def digest(self) -> int:
        return crypto.digest_document(self.canonical_bytes)

    # -- validation ---------------------------------------------------

    def environment(self) -> Environment:
        return Environment(
            terms={k: parse_type(t.type) for k, t in self.terms.items()},
            inputs={d.name: parse_type(d.type) for d in self.data_schema},
            parties=frozenset(self.parties),
        )

    def validate(self) -> None:
        if isinstance(self.value_v, bool) or not isinstance(self.value_v, int) or self.value_v <= 0:
            raise SchemaError(f"contract value must be a positive integer, got {self.value_v!r}")
        if self.payout.ratio_payee == self.payout.complement_payee:
            raise SchemaError("ratio_payee and complement_payee must differ")
        for role in (self.payout.ratio_payee, self.payout.complement_payee):
            if role not in self.parties:
                raise SchemaError(f"payout role {role!r} is not a party")
        if set(self.roles) != set(PROTOCOL_ROLES):
            raise SchemaError(f"roles must assign exactly {PROTOCOL_ROLES}")
        for proto, role in self.roles.items():
            if role not in self.parties:
                raise SchemaError(f"{proto} role {role!r} is not a party")
        if self.roles["buyer"] == self.roles["seller"]:
            raise SchemaError("buyer and seller must be different parties")
        names = [d.name for d in self.data_schema]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate input declaration")
        seen: dict[str, str] = {}
        for kind, group in (("term", self.terms), ("input", names), ("party", self.parties)):
            for n in group:
                if n in seen or n == "value":
                    raise SchemaError(f"name {n!r} declared as {kind} clashes with {seen.get(n, 'builtin')}")
                seen[n] = kind
        env = self.environment()
        variants = env.enum_variants()
        clash = variants & set(seen)
        if clash:
            raise SchemaError(f"enum variants shadow declared names: {sorted(clash)}")
        typecheck(self.logic.ast, env)

    # -- accessors ----------------------------------------------------

    def pk(self, role: str) -> bytes | None:
        return self.parties[role].pk

    def protocol_pk(self, proto_role: str) -> bytes | None:
        return self.parties[self.roles[proto_role]].pk

    def input_types(self) -> dict[str, str]:
        return {d.name: d.type for d in self.data_schema}

    def conform_inputs(self, inputs: Mapping[str, Any]) -> dict[str, Any]:
        """Check ``inputs`` against the data schema and return stored forms."""
        decls = {d.name: d for d in self.data_schema}
        unknown = set(inputs) - set(decls)
        if unknown:
            raise SchemaViolation(f"undeclared inputs: {sorted(unknown)}")
        out: dict[str, Any] = {}
        for name, decl in decls.items():
            if name not in inputs or inputs[name] is None:
                if not decl.optional:
                    raise SchemaViolation(f"missing required input {name!r}")
                continue
            try:
                out[name] = coerce_value(decl.type, inputs[name])
            except SchemaError as exc:
                raise SchemaViolation(f"input {name!r}: {exc}") from exc
        return out

    def with_keys(self, keys: Mapping[str, bytes]) -> "ContractDocument":
        parties = dict(self.parties)
        for role, pk in keys.items():
            if role not in parties:
                raise SchemaError(f"no party named {role!r}")
            parties[role] = Party(parties[role].display_name, bytes(pk))
        return ContractDocument(self.name, parties, self.roles, self.terms, self.value_v,
                                self.payout, self.data_schema, self.logic, self.text)

    def with_term(self, name: str, value: Any) -> "ContractDocument":
        terms = dict(self.terms)
        terms[name] = Term(terms[name].type, coerce_value(terms[name].type, value))
        return ContractDocument(self.name, self.parties, self.roles, terms, self.value_v,
                                self.payout, self.data_schema, self.logic, self.text)


# ------------------------------------------------------------ evaluation


def message_digest(items: list[Any]) -> int:
    """Field digest of a ``verify_sig`` message list."""
    encoded = []
    for item in items:
        if isinstance(item, bool):
            encoded.append(int(item))
        elif isinstance(item, int):
            encoded.append(item % crypto.P)
        elif isinstance(item, bytes):
            encoded.append(crypto.digest_document(item))
        else:
            encoded.append(crypto.digest_document(str(item).encode("utf-8")))
    return crypto.hash_fields(encoded)


def _check_sig(pk: bytes | None, msg: int, sig: bytes) -> bool:
    if pk is None:
        return False
    return crypto.verify(pk, msg, sig)


def evaluate_logic(doc: ContractDocument, external_inputs: Mapping[str, Any]) -> Outcome:
    """Run the contract logic on schema-conforming inputs. Never raises for valid inputs."""
    stored = doc.conform_inputs(external_inputs)
    itypes = doc.input_types()
    ctx = EvalContext(
        terms={k: runtime_value(t.type, t.value) for k, t in doc.terms.items()},
        term_types={k: parse_type(t.type) for k, t in doc.terms.items()},
        inputs={k: runtime_value(itypes[k], v) for k, v in stored.items()},
        input_types={k: parse_type(v) for k, v in itypes.items()},
        party_keys={k: p.pk for k, p in doc.parties.items()},
        value_v=doc.value_v,
        message_digest=message_digest,
        check_sig=_check_sig,
    )
    return evaluate(doc.logic.ast, ctx)


# ------------------------------------------------------------- canonical


def to_dict(doc: ContractDocument) -> dict[str, Any]:
    return {
        "format": FORMAT,
        "name": doc.name,
        "text": doc.text,
        "parties": {
            role: {"display_name": p.display_name, "pk": p.pk.hex() if p.pk is not None else None}
            for role, p in doc.parties.items()
        },
        "roles": dict(doc.roles),
        "terms": {
            name: {"type": t.type, "value": to_json_value(t.type, t.value)}
            for name, t in doc.terms.items()
        },
        "value_v": doc.value_v,
        "payout": {"ratio_payee": doc.payout.ratio_payee,
                   "complement_payee": doc.payout.complement_payee},
        "data_schema": [
            {"name": d.name, "type": d.type, "optional": d.optional} for d in doc.data_schema
        ],
        "logic": doc.logic.canonical_source,
    }


def from_dict(data: Mapping[str, Any]) -> ContractDocument:
    if data.get("format") != FORMAT:
        raise SchemaError(f"unsupported contract format {data.get('format')!r}")
    logic_src = data["logic"]
    return ContractDocument(
        name=data["name"],
        text=data.get("text"),
        parties={
            role: Party(p["display_name"], bytes.fromhex(p["pk"]) if p.get("pk") else None)
            for role, p in data["parties"].items()
        },
        roles=dict(data["roles"]),
        terms={
            name: Term(normalize_type_name(t["type"]), coerce_value(t["type"], t["value"]))
            for name, t in data["terms"].items()
        },
        value_v=data["value_v"],
        payout=PayoutRoles(data["payout"]["ratio_payee"], data["payout"]["complement_payee"]),
        data_schema=tuple(
            InputDecl(d["name"], normalize_type_name(d["type"]), bool(d.get("optional", False)))
            for d in data["data_schema"]
        ),
        logic=LogicProgram(parse(logic_src, "<canonical logic>"), logic_src),
    )


def canonical(doc: ContractDocument) -> bytes:
    """Deterministic, injective byte encoding of a contract document."""
    return doc.canonical_bytes


def from_canonical(data: bytes) -> ContractDocument:
    return from_dict(json.loads(data.decode("ascii")))


def contract_digest(doc: ContractDocument) -> int:
    """``c``: the digest both parties sign."""
    return doc.digest


# --------------------------------------------------------------- signing


@dataclass(frozen=True)
class SignedContract:
    doc: ContractDocument
    sigma_buy: bytes
    sigma_sel: bytes

    @property
    def digest(self) -> int:
        return self.doc.digest

    def check(self) -> tuple[bool, bool]:
        """(buyer signature valid, seller signature valid)."""
        c = self.digest
        pk_buy = self.doc.protocol_pk("buyer")
        pk_sel = self.doc.protocol_pk("seller")
        ok_buy = pk_buy is not None and crypto.verify(pk_buy, c, self.sigma_buy)
        ok_sel = pk_sel is not None and crypto.verify(pk_sel, c, self.sigma_sel)
        return ok_buy, ok_sel

    def is_valid(self) -> bool:
        return all(self.check())

    def canonical(self) -> bytes:
        return canonical_json({
            "format": SIGNED_FORMAT,
            "contract": to_dict(self.doc),
            "sigma_buy": self.sigma_buy.hex(),
            "sigma_sel": self.sigma_sel.hex(),
        })

    def program_digest(self) -> int:
        """``pd``: digest of the canonical signed contract."""
        return self._pd

    @cached_property
    def _pd(self) -> int:
        return crypto.digest_document(self.canonical())


def signed_from_canonical(data: bytes) -> SignedContract:
    obj = json.loads(data.decode("ascii"))
    if obj.get("format") != SIGNED_FORMAT:
        raise SchemaError("not a signed contract")
    return SignedContract(from_dict(obj["contract"]), bytes.fromhex(obj["sigma_buy"]),
                          bytes.fromhex(obj["sigma_sel"]))


def sign_contract(sk_buy: bytes, sk_sel: bytes, doc: ContractDocument) -> SignedContract:
    """Both parties sign ``c = digest(canonical(doc))``."""
    for proto in ("buyer", "seller"):
        if doc.protocol_pk(proto) is None:
            raise SchemaError(f"{proto} party has no public key bound")
    c = contract_digest(doc)
    return SignedContract(doc, crypto.sign(sk_buy, c), crypto.sign(sk_sel, c))


def sign_as(sk: bytes, doc: ContractDocument) -> bytes:
    """One party's half of the joint signature (for parties signing separately)."""
    return crypto.sign(sk, contract_digest(doc))
