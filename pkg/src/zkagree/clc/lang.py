"""The contract logic language: parser, type checker and evaluator.

A program is a single expression of type ``Outcome``::

    enforce valid_hash(inspectionReportHash);
    if tenantDecision == APPROVE then approve
    else if verify_sig(arbitrator, [inspectionReportHash, arbTenantShare,
                                    arbLandlordShare], arbDecisionSig)
    then (enforce arbTenantShare + arbLandlordShare == value;
          ratio(arbTenantShare))
    else reject

Expressions: integer, string (``"..."``) and bytes (``0x..``) literals,
``true``/``false``, names (terms, inputs, parties, enum variants, ``value``),
``+ - * / %``, comparisons, ``and``/``or``/``not``, ``if/then/else``,
``let x = e; body``, ``enforce p; body`` and list literals (only as the
message argument of ``verify_sig``). Outcome forms: ``approve``,
``reject`` and ``ratio(numerator)``.

Evaluation is total: division by zero, a failed ``enforce``, a missing
optional input or an out-of-range ratio all produce ``REJECT``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Union

from .errors import ParseError, SchemaError, TypeCheckError
from .types import (
    BOOL,
    BYTES,
    DATETIME,
    INT,
    OUTCOME,
    PARTY,
    STRING,
    Ty,
    compatible,
    join,
)

# ---------------------------------------------------------------- outcomes

APPROVE_FULL = "APPROVE_FULL"
REJECT = "REJECT"
RATIO = "RATIO"


@dataclass(frozen=True)
class Outcome:
    kind: str
    numerator: int = 0

    @classmethod
    def approve(cls, value_v: int) -> "Outcome":
        return cls(APPROVE_FULL, value_v)

    @classmethod
    def reject(cls) -> "Outcome":
        return cls(REJECT, 0)

    @classmethod
    def ratio(cls, numerator: int) -> "Outcome":
        return cls(RATIO, numerator)

    @property
    def rejected(self) -> bool:
        return self.kind == REJECT

    def __str__(self) -> str:
        if self.kind == RATIO:
            return f"RATIO({self.numerator})"
        return self.kind


# --------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Lit(Node):
    value: Any
    ty: Ty
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Name(Node):
    ident: str
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: Node
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class If(Node):
    cond: Node
    then: Node
    orelse: Node
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Let(Node):
    ident: str
    bound: Node
    body: Node
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Enforce(Node):
    pred: Node
    body: Node
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: tuple[Node, ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ListExpr(Node):
    items: tuple[Node, ...]
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class OutcomeLit(Node):
    kind: str  # "approve" | "reject"
    pos: tuple[int, int] = field(default=(0, 0), compare=False)


Expr = Union[Lit, Name, Unary, Binary, If, Let, Enforce, Call, ListExpr, OutcomeLit]

# ------------------------------------------------------------------- lexer

KEYWORDS = {"if", "then", "else", "let", "enforce", "and", "or", "not",
            "true", "false", "approve", "reject"}
BUILTINS = {"ratio", "verify_sig", "valid_hash"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<hex>0x[0-9a-fA-F]*)
  | (?P<int>[0-9][0-9_]*)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|[-+*/%<>()\[\],;=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str, source_name: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, i = 1, 0, 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {src[i]!r}", line, i - line_start + 1, source_name)
        kind = m.lastgroup
        text = m.group()
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "ident" and text in KEYWORDS:
            tokens.append(Token("kw", text, line, col))
        else:
            tokens.append(Token(kind, text, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


# ------------------------------------------------------------------ parser

_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, src: str, source_name: str | None, line_offset: int) -> None:
        self.source_name = source_name
        self.line_offset = line_offset
        self.toks = tokenize(src, source_name)
        self.i = 0

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(msg, tok.line + self.line_offset, tok.col, self.source_name)

    def peek(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            want = text or kind
            got = self.peek().text or "end of input"
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    def pos(self, tok: Token) -> tuple[int, int]:
        return (tok.line + self.line_offset, tok.col)

    def program(self) -> Node:
        if self.at("eof"):
            raise self.error("empty logic program")
        expr = self.expr()
        if not self.at("eof"):
            raise self.error(f"unexpected {self.peek().text!r} after end of expression")
        return expr

    def expr(self) -> Node:
        tok = self.peek()
        if self.at("kw", "if"):
            self.advance()
            cond = self.expr()
            self.expect("kw", "then")
            then = self.expr()
            self.expect("kw", "else")
            return If(cond, then, self.expr(), self.pos(tok))
        if self.at("kw", "let"):
            self.advance()
            ident = self.expect("ident").text
            self.expect("op", "=")
            bound = self.expr()
            self.expect("op", ";")
            return Let(ident, bound, self.expr(), self.pos(tok))
        if self.at("kw", "enforce"):
            self.advance()
            pred = self.expr()
            self.expect("op", ";")
            return Enforce(pred, self.expr(), self.pos(tok))
        return self.disjunction()

    def disjunction(self) -> Node:
        left = self.conjunction()
        while self.at("kw", "or"):
            tok = self.advance()
            left = Binary("or", left, self.conjunction(), self.pos(tok))
        return left

    def conjunction(self) -> Node:
        left = self.negation()
        while self.at("kw", "and"):
            tok = self.advance()
            left = Binary("and", left, self.negation(), self.pos(tok))
        return left

    def negation(self) -> Node:
        if self.at("kw", "not"):
            tok = self.advance()
            return Unary("not", self.negation(), self.pos(tok))
        return self.comparison()

    def comparison(self) -> Node:
        left = self.additive()
        if self.peek().kind == "op" and self.peek().text in _CMP_OPS:
            tok = self.advance()
            left = Binary(tok.text, left, self.additive(), self.pos(tok))
            if self.peek().kind == "op" and self.peek().text in _CMP_OPS:
                raise self.error("comparisons do not chain; add parentheses")
        return left

    def additive(self) -> Node:
        left = self.multiplicative()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            tok = self.advance()
            left = Binary(tok.text, left, self.multiplicative(), self.pos(tok))
        return left

    def multiplicative(self) -> Node:
        left = self.unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/", "%"):
            tok = self.advance()
            left = Binary(tok.text, left, self.unary(), self.pos(tok))
        return left

    def unary(self) -> Node:
        if self.at("op", "-"):
            tok = self.advance()
            return Unary("-", self.unary(), self.pos(tok))
        return self.atom()

    def atom(self) -> Node:
        tok = self.peek()
        pos = self.pos(tok)
        if tok.kind == "int":
            self.advance()
            return Lit(int(tok.text.replace("_", "")), INT, pos)
        if tok.kind == "hex":
            self.advance()
            digits = tok.text[2:]
            if len(digits) % 2:
                raise self.error("bytes literal needs an even number of hex digits", tok)
            return Lit(bytes.fromhex(digits), BYTES, pos)
        if tok.kind == "str":
            self.advance()
            return Lit(_unescape(tok.text[1:-1]), STRING, pos)
        if tok.kind == "kw" and tok.text in ("true", "false"):
            self.advance()
            return Lit(tok.text == "true", BOOL, pos)
        if tok.kind == "kw" and tok.text in ("approve", "reject"):
            self.advance()
            return OutcomeLit(tok.text, pos)
        if tok.kind == "ident":
            self.advance()
            if self.at("op", "("):
                self.advance()
                args = self.arguments(")")
                return Call(tok.text, tuple(args), pos)
            return Name(tok.text, pos)
        if self.at("op", "("):
            self.advance()
            inner = self.expr()
            self.expect("op", ")")
            return inner
        if self.at("op", "["):
            self.advance()
            return ListExpr(tuple(self.arguments("]")), pos)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def arguments(self, closer: str) -> list[Node]:
        args: list[Node] = []
        if self.at("op", closer):
            self.advance()
            return args
        while True:
            args.append(self.expr())
            if self.at("op", ","):
                self.advance()
                continue
            self.expect("op", closer)
            return args


def _unescape(body: str) -> str:
    out, i = [], 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def parse(src: str, source_name: str | None = None, line_offset: int = 0) -> Node:
    """Parse logic source into an AST; raises ParseError with line/column."""
    return _Parser(src, source_name, line_offset).program()


# ----------------------------------------------------------------- unparse

_PREC = {"or": 1, "and": 2, "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}


def unparse(node: Node) -> str:
    """Canonical single-line source for ``node``; ``parse(unparse(n)) == n``."""
    if isinstance(node, Lit):
        if node.ty == BOOL:
            return "true" if node.value else "false"
        if node.ty == BYTES:
            return "0x" + node.value.hex()
        if node.ty == STRING:
            return '"' + node.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'
        if node.value < 0:
            return f"(-{-node.value})"
        return str(node.value)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, OutcomeLit):
        return node.kind
    if isinstance(node, Unary):
        sep = " " if node.op == "not" else ""
        return f"({node.op}{sep}{unparse(node.operand)})"
    if isinstance(node, Binary):
        return f"({unparse(node.left)} {node.op} {unparse(node.right)})"
    if isinstance(node, If):
        return f"(if {unparse(node.cond)} then {unparse(node.then)} else {unparse(node.orelse)})"
    if isinstance(node, Let):
        return f"(let {node.ident} = {unparse(node.bound)}; {unparse(node.body)})"
    if isinstance(node, Enforce):
        return f"(enforce {unparse(node.pred)}; {unparse(node.body)})"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(unparse(a) for a in node.args)})"
    if isinstance(node, ListExpr):
        return f"[{', '.join(unparse(a) for a in node.items)}]"
    raise TypeError(f"not a logic node: {node!r}")  # pragma: no cover


def walk(node: Node):
    yield node
    for child in _children(node):
        yield from walk(child)


def _children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, Unary):
        return (node.operand,)
    if isinstance(node, Binary):
        return (node.left, node.right)
    if isinstance(node, If):
        return (node.cond, node.then, node.orelse)
    if isinstance(node, (Let,)):
        return (node.bound, node.body)
    if isinstance(node, Enforce):
        return (node.pred, node.body)
    if isinstance(node, Call):
        return node.args
    if isinstance(node, ListExpr):
        return node.items
    return ()


# ------------------------------------------------------------ type checker

MAX_MESSAGE_INPUTS = 16
VALUE_NAME = "value"


@dataclass(frozen=True)
class Environment:
    """Names visible to a program: terms, inputs and parties with their types."""

    terms: Mapping[str, Ty]
    inputs: Mapping[str, Ty]
    parties: frozenset[str]

    def enum_variants(self) -> set[str]:
        out: set[str] = set()
        for ty in list(self.terms.values()) + list(self.inputs.values()):
            if ty.name == "Enum":
                out.update(ty.variants)
        return out


def _line(node: Node) -> int | None:
    pos = getattr(node, "pos", None)
    return pos[0] if pos and pos[0] else None


def typecheck(node: Node, env: Environment) -> Ty:
    """Return the type of ``node``; the program as a whole must be Outcome."""
    ty = _check(node, env, {})
    if ty != OUTCOME:
        raise TypeCheckError(f"logic must produce an Outcome, not {ty}", unparse(node), _line(node))
    return ty


def _check(node: Node, env: Environment, local: dict[str, Ty]) -> Ty:
    def fail(msg: str) -> TypeCheckError:
        return TypeCheckError(msg, unparse(node), _line(node))

    if isinstance(node, Lit):
        return node.ty
    if isinstance(node, OutcomeLit):
        return OUTCOME
    if isinstance(node, Name):
        name = node.ident
        if name in local:
            return local[name]
        if name in env.inputs:
            return env.inputs[name]
        if name in env.terms:
            return env.terms[name]
        if name in env.parties:
            return PARTY
        if name == VALUE_NAME:
            return INT
        if name in env.enum_variants():
            return Ty("Enum", (name,))
        raise SchemaError(f"undeclared name {name!r} (line {_line(node)})")
    if isinstance(node, Unary):
        inner = _check(node.operand, env, local)
        if node.op == "not":
            if inner != BOOL:
                raise fail(f"'not' needs Bool, got {inner}")
            return BOOL
        if inner != INT:
            raise fail(f"unary '-' needs Int, got {inner}")
        return INT
    if isinstance(node, Binary):
        lt = _check(node.left, env, local)
        rt = _check(node.right, env, local)
        op = node.op
        if op in ("and", "or"):
            if lt != BOOL or rt != BOOL:
                raise fail(f"'{op}' needs Bool operands, got {lt} and {rt}")
            return BOOL
        if op in ("==", "!="):
            if lt in (OUTCOME,) or rt in (OUTCOME,) or lt.name == "List" or not compatible(lt, rt):
                raise fail(f"cannot compare {lt} with {rt}")
            return BOOL
        if op in ("<", "<=", ">", ">="):
            if lt != rt or lt not in (INT, DATETIME):
                raise fail(f"ordering needs two Int or two DateTime operands, got {lt} and {rt}")
            return BOOL
        if op in ("+", "-"):
            if lt == INT and rt == INT:
                return INT
            if lt == DATETIME and rt == INT:
                return DATETIME
            if op == "-" and lt == DATETIME and rt == DATETIME:
                return INT
            raise fail(f"'{op}' not defined for {lt} and {rt}")
        if lt != INT or rt != INT:
            raise fail(f"'{op}' needs Int operands, got {lt} and {rt}")
        return INT
    if isinstance(node, If):
        ct = _check(node.cond, env, local)
        if ct != BOOL:
            raise fail(f"condition must be Bool, got {ct}")
        a = _check(node.then, env, local)
        b = _check(node.orelse, env, local)
        joined = join(a, b)
        if joined is None or joined.name == "List":
            raise fail(f"branches disagree: {a} vs {b}")
        return joined
    if isinstance(node, Let):
        if node.ident in KEYWORDS or node.ident in BUILTINS or node.ident == VALUE_NAME:
            raise fail(f"cannot bind reserved name {node.ident!r}")
        bound = _check(node.bound, env, local)
        if bound.name == "List":
            raise fail("lists cannot be bound to names")
        return _check(node.body, env, {**local, node.ident: bound})
    if isinstance(node, Enforce):
        pt = _check(node.pred, env, local)
        if pt != BOOL:
            raise fail(f"enforce needs a Bool predicate, got {pt}")
        body = _check(node.body, env, local)
        if body != OUTCOME:
            raise fail(f"enforce must guard an Outcome, got {body}")
        return OUTCOME
    if isinstance(node, ListExpr):
        raise fail("list literals are only allowed as verify_sig messages")
    if isinstance(node, Call):
        return _check_call(node, env, local, fail)
    raise fail("unknown expression")  # pragma: no cover


_MESSAGE_TYPES = {"Int", "Bool", "String", "Bytes", "DateTime", "Enum"}


def _check_call(node: Call, env: Environment, local: dict[str, Ty],
                fail: Callable[[str], TypeCheckError]) -> Ty:
    args = node.args
    if node.func == "ratio":
        if len(args) != 1:
            raise fail("ratio takes one argument")
        at = _check(args[0], env, local)
        if at != INT:
            raise fail(f"ratio numerator must be Int, got {at}")
        return OUTCOME
    if node.func == "valid_hash":
        if len(args) != 1 or _check(args[0], env, local) != BYTES:
            raise fail("valid_hash takes one Bytes argument")
        return BOOL
    if node.func == "verify_sig":
        if len(args) != 3:
            raise fail("verify_sig takes (party, [message...], signature)")
        if _check(args[0], env, local) != PARTY:
            raise fail("verify_sig's first argument must name a party")
        msgs = args[1]
        if not isinstance(msgs, ListExpr):
            raise fail("verify_sig's message must be a list literal")
        if not 1 <= len(msgs.items) <= MAX_MESSAGE_INPUTS:
            raise fail(f"verify_sig message needs 1..{MAX_MESSAGE_INPUTS} items")
        for item in msgs.items:
            it = _check(item, env, local)
            if it.name not in _MESSAGE_TYPES:
                raise fail(f"cannot sign over a {it} value")
        if _check(args[2], env, local) != BYTES:
            raise fail("verify_sig's signature must be Bytes")
        return BOOL
    raise fail(f"unknown function {node.func!r}")


# --------------------------------------------------------------- evaluator


class _Rejected(Exception):
    pass


@dataclass(frozen=True)
class EvalContext:
    """Runtime bindings for evaluation.

    ``inputs`` and ``terms`` hold runtime values (DateTime as epoch seconds);
    absent optional inputs are simply missing from ``inputs``.
    ``message_digest`` encodes a list of runtime values as one field
    element and ``check_sig`` verifies a signature by a party over it.
    """

    terms: Mapping[str, Any]
    term_types: Mapping[str, Ty]
    inputs: Mapping[str, Any]
    input_types: Mapping[str, Ty]
    party_keys: Mapping[str, bytes | None]
    value_v: int
    message_digest: Callable[[list[Any]], int]
    check_sig: Callable[[bytes | None, int, bytes], bool]


def evaluate(node: Node, ctx: EvalContext) -> Outcome:
    """Evaluate a type-checked program; every failure path yields REJECT."""
    try:
        result = _eval(node, ctx, {})
    except (_Rejected, ZeroDivisionError):
        return Outcome.reject()
    if not isinstance(result, Outcome):
        return Outcome.reject()
    if result.kind == RATIO and not 0 <= result.numerator <= ctx.value_v:
        return Outcome.reject()
    return result


def _eval(node: Node, ctx: EvalContext, local: dict[str, Any]) -> Any:
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, OutcomeLit):
        return Outcome.approve(ctx.value_v) if node.kind == "approve" else Outcome.reject()
    if isinstance(node, Name):
        name = node.ident
        if name in local:
            return local[name]
        if name in ctx.input_types:
            if name not in ctx.inputs:
                raise _Rejected(f"input {name} not supplied")
            return ctx.inputs[name]
        if name in ctx.terms:
            return ctx.terms[name]
        if name in ctx.party_keys:
            return ("party", name)
        if name == VALUE_NAME:
            return ctx.value_v
        return name  # enum variant
    if isinstance(node, Unary):
        v = _eval(node.operand, ctx, local)
        return (not v) if node.op == "not" else -v
    if isinstance(node, Binary):
        op = node.op
        if op == "and":
            return bool(_eval(node.left, ctx, local)) and bool(_eval(node.right, ctx, local))
        if op == "or":
            return bool(_eval(node.left, ctx, local)) or bool(_eval(node.right, ctx, local))
        a = _eval(node.left, ctx, local)
        b = _eval(node.right, ctx, local)
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a // b
        return a % b
    if isinstance(node, If):
        branch = node.then if _eval(node.cond, ctx, local) else node.orelse
        return _eval(branch, ctx, local)
    if isinstance(node, Let):
        bound = _eval(node.bound, ctx, local)
        return _eval(node.body, ctx, {**local, node.ident: bound})
    if isinstance(node, Enforce):
        if not _eval(node.pred, ctx, local):
            raise _Rejected("enforce failed")
        return _eval(node.body, ctx, local)
    if isinstance(node, Call):
        if node.func == "ratio":
            return Outcome.ratio(_eval(node.args[0], ctx, local))
        if node.func == "valid_hash":
            return len(_eval(node.args[0], ctx, local)) == 32
        if node.func == "verify_sig":
            return _eval_verify_sig(node, ctx, local)
    raise _Rejected(f"cannot evaluate {unparse(node)}")  # pragma: no cover


def _eval_verify_sig(node: Call, ctx: EvalContext, local: dict[str, Any]) -> bool:
    _, party = _eval(node.args[0], ctx, local)
    pk = ctx.party_keys.get(party)
    msgs = node.args[1]
    assert isinstance(msgs, ListExpr)
    items = [_eval(item, ctx, local) for item in msgs.items]
    sig = _eval(node.args[2], ctx, local)
    return ctx.check_sig(pk, ctx.message_digest(items), sig)


def typecheck_expr(node: Node, env: Environment) -> Ty:
    """Type of an arbitrary (non-Outcome) expression."""
    return _check(node, env, {})


def evaluate_expr(node: Node, ctx: EvalContext) -> Any:
    """Evaluate a constant expression; errors propagate (used at compile time)."""
    try:
        return _eval(node, ctx, {})
    except (_Rejected, ZeroDivisionError) as exc:
        raise SchemaError(f"cannot evaluate {unparse(node)}: {exc}") from exc
