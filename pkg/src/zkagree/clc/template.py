"""Compile YAML contract templates into ContractDocuments.

Template layout (see ``templates/rental_deposit.yaml``)::

    contract: <name>
    text: <optional legal prose>
    parties: {<role>: {display_name: ..., pk: <hex, optional>}}
    roles: {buyer: <role>, seller: <role>, evaluator: <role>}
    terms: {<name>: {type: <Type>, value: <literal>}}
    value: <expression over terms, or an amount literal>
    payout: {ratio_payee: <role>, complement_payee: <role>}
    inputs: {<name>: {type: <Type>, optional: <bool>}}
    logic: <logic source>
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ContractError, ParseError, SchemaError
from .lang import EvalContext, Environment, evaluate_expr, parse, typecheck_expr
from .model import ContractDocument, InputDecl, LogicProgram, Party, PayoutRoles, Term
from .types import INT, coerce_value, normalize_type_name, parse_type, runtime_value

REQUIRED_KEYS = ("contract", "parties", "roles", "terms", "value", "payout", "inputs", "logic")


def load_template(path: str | Path) -> tuple[dict[str, Any], str, str]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return _load_yaml(text, str(path)), text, str(path)


def _load_yaml(text: str, source: str) -> dict[str, Any]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        col = mark.column + 1 if mark is not None else None
        raise ParseError(str(getattr(exc, "problem", exc)), line, col, source) from exc
    if not isinstance(data, dict):
        raise ParseError("template must be a mapping", 1, 1, source)
    return data


def _logic_line_offset(text: str, logic: str) -> int:
    first = next((ln for ln in logic.splitlines() if ln.strip()), "")
    if not first:
        return 0
    for i, ln in enumerate(text.splitlines()):
        if ln.strip() == first.strip() and not ln.lstrip().startswith("logic:"):
            return i
    return 0


def compile_contract(
    template: str | Path | Mapping[str, Any],
    party_keys: Mapping[str, bytes] | None = None,
    *,
    source_text: str | None = None,
) -> ContractDocument:
    """Compile a template (path, YAML text, or parsed mapping)."""
    source = "<template>"
    if isinstance(template, Mapping):
        data = dict(template)
        text = source_text or ""
    elif isinstance(template, Path) or (isinstance(template, str) and "\n" not in template
                                         and Path(template).exists()):
        data, text, source = load_template(template)
    else:
        text = str(template)
        data = _load_yaml(text, source)

    missing = [k for k in REQUIRED_KEYS if k not in data]
    if missing:
        raise SchemaError(f"{source}: template lacks {missing}")

    try:
        parties = {
            str(role): Party(str(p.get("display_name", role)) if isinstance(p, Mapping) else str(role),
                             bytes.fromhex(p["pk"]) if isinstance(p, Mapping) and p.get("pk") else None)
            for role, p in (data["parties"] or {}).items()
        }
        terms = {
            str(name): Term(normalize_type_name(t["type"]), coerce_value(str(t["type"]), t["value"]))
            for name, t in (data["terms"] or {}).items()
        }
        schema = tuple(
            InputDecl(str(name), normalize_type_name(_decl_type(d)), bool(_decl_optional(d)))
            for name, d in (data["inputs"] or {}).items()
        )
        payout = PayoutRoles(str(data["payout"]["ratio_payee"]), str(data["payout"]["complement_payee"]))
        roles = {str(k): str(v) for k, v in (data["roles"] or {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ContractError):
            raise
        raise SchemaError(f"{source}: malformed template: {exc}") from exc

    logic_src = str(data["logic"])
    ast = parse(logic_src, source, _logic_line_offset(text, logic_src))
    value_v = _contract_value(data["value"], terms, source)

    doc = ContractDocument(
        name=str(data["contract"]),
        text=data.get("text"),
        parties=parties,
        roles=roles,
        terms=terms,
        value_v=value_v,
        payout=payout,
        data_schema=schema,
        logic=LogicProgram(ast, logic_src),
    )
    if party_keys:
        doc = doc.with_keys(party_keys)
    return doc


def _decl_type(d: Any) -> str:
    return str(d["type"]) if isinstance(d, Mapping) else str(d)


def _decl_optional(d: Any) -> bool:
    return bool(d.get("optional", False)) if isinstance(d, Mapping) else False


def _contract_value(raw: Any, terms: Mapping[str, Term], source: str) -> int:
    """Fold the ``value`` field: an amount literal or an Int expression over terms."""
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    text = str(raw)
    try:
        return coerce_value("Amount", text)
    except SchemaError:
        pass
    ast = parse(text, f"{source}:value")
    env = Environment(terms={k: parse_type(t.type) for k, t in terms.items()}, inputs={},
                      parties=frozenset())
    if typecheck_expr(ast, env) != INT:
        raise SchemaError(f"{source}: contract value must be an Int expression")
    ctx = EvalContext(
        terms={k: runtime_value(t.type, t.value) for k, t in terms.items()},
        term_types=env.terms, inputs={}, input_types={}, party_keys={}, value_v=0,
        message_digest=lambda items: 0, check_sig=lambda pk, m, s: False,
    )
    return evaluate_expr(ast, ctx)
