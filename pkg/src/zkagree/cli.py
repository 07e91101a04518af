"""Command-line entry point.

Exit codes: 0 success, 1 expectation mismatch or protocol/IO error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import crypto
from .clc import ContractError, canonical, compile_contract, contract_digest
from .ledger import LedgerError, LedgerState, read_tx_log, verify_chain
from .orchestrator import (
    OrchestratorError,
    Scenario,
    SessionError,
    build_report,
    bundled_scenarios,
    prepare_session,
)
from .proofsys import (
    COMMIT,
    EVAL,
    RELATION_NAMES,
    CommitWitness,
    EvalStatement,
    EvalWitness,
    Srs,
    prove_commit,
    prove_eval,
    relation_size,
    setup,
    verify,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SEED_ENV = "ZKAGREE_SEED"
BENCH_LABEL = ("Transparent backend: the verifier re-executes the relation. These timings are "
               "NOT comparable to PLONK prover/verifier timings.")


class IoError(Exception):
    pass


class UsageError(Exception):
    pass


@dataclass
class Config:
    ledger_path: Path | None = None
    srs_path: Path | None = None
    out_dir: Path = Path(".")
    seed: int | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "Config":
        seed = getattr(args, "seed", None)
        env = os.environ.get(SEED_ENV)
        if env is not None and env.strip():
            try:
                seed = int(env)
            except ValueError:
                raise SystemExit(_usage(f"{SEED_ENV} must be an integer, got {env!r}"))
        return cls(
            ledger_path=Path(args.ledger) if getattr(args, "ledger", None) else None,
            srs_path=Path(args.srs) if getattr(args, "srs", None) else None,
            out_dir=Path(getattr(args, "out_dir", None) or "."),
            seed=seed,
        )


def _usage(msg: str) -> int:
    print(f"zkagree: error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_FAIL


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _srs_to_json(srs: Srs) -> dict[str, Any]:
    return {"backend_id": srs.backend_id, "parameters": srs.parameters.hex(),
            "max_relation_size": srs.max_relation_size}


def load_srs(path: Path | None) -> Srs:
    """Read the SRS at ``path``, creating it with default parameters if missing."""
    if path is None:
        return setup()
    if path.exists():
        try:
            d = json.loads(path.read_text())
            return Srs(d["backend_id"], bytes.fromhex(d["parameters"]), int(d["max_relation_size"]))
        except (OSError, ValueError, KeyError) as exc:
            raise IoError(f"cannot read SRS {path}: {exc}") from exc
    srs = setup()
    _write(path, json.dumps(_srs_to_json(srs), indent=2, sort_keys=True) + "\n")
    return srs


# --------------------------------------------------------------- commands


def cmd_keygen(args: argparse.Namespace, cfg: Config) -> int:
    rng = random.Random(cfg.seed) if cfg.seed is not None else None
    kp = crypto.keygen(rng)
    _write(Path(args.out_path), json.dumps({"pk_hex": kp.pk.hex(), "sk_hex": kp.sk.hex()}, indent=2) + "\n")
    print(f"wrote {args.out_path} (pk {kp.pk.hex()})")
    return EXIT_OK


def _read_keys(specs: Sequence[str]) -> dict[str, bytes]:
    keys = {}
    for spec in specs:
        role, sep, file = spec.partition("=")
        if not sep:
            raise UsageError(f"--key expects ROLE=KEYFILE, got {spec!r}")
        try:
            keys[role] = bytes.fromhex(json.loads(Path(file).read_text())["pk_hex"])
        except (OSError, ValueError, KeyError) as exc:
            raise IoError(f"cannot read key file {file}: {exc}") from exc
    return keys


def cmd_compile(args: argparse.Namespace, cfg: Config) -> int:
    path = Path(args.template)
    if not path.exists():
        raise IoError(f"template {path} does not exist")
    try:
        doc = compile_contract(path, _read_keys(args.key) or None)
    except ContractError as exc:
        return _fail(str(exc))
    digest = crypto.field_hex(contract_digest(doc))
    if args.digest_only:
        print(digest)
        return EXIT_OK
    body = canonical(doc).decode("ascii")
    if args.out:
        _write(Path(args.out), body + "\n")
    else:
        print(body)
    print(f"contract: {doc.name}", file=sys.stderr)
    print(f"value_v: {doc.value_v}", file=sys.stderr)
    print(f"logic_digest: {crypto.field_hex(doc.logic.digest())}", file=sys.stderr)
    print(f"digest: {digest}", file=sys.stderr)
    return EXIT_OK


def _resolve_scenario(ref: str) -> Scenario:
    path = Path(ref)
    if path.exists():
        return Scenario.load(path)
    bundled = bundled_scenarios()
    if ref in bundled:
        return Scenario.load(bundled[ref])
    raise IoError(f"scenario {ref!r} is neither a file nor a bundled scenario ({', '.join(sorted(bundled))})")


def cmd_run(args: argparse.Namespace, cfg: Config) -> int:
    try:
        scenario = _resolve_scenario(args.scenario)
    except OrchestratorError as exc:
        return _fail(str(exc))
    if cfg.seed is not None:
        scenario = scenario.with_seed(cfg.seed)
    srs = load_srs(cfg.srs_path)
    if cfg.ledger_path is not None and cfg.ledger_path.exists():
        try:
            ledger = LedgerState.load(cfg.ledger_path)
        except (OSError, ValueError, KeyError, LedgerError) as exc:
            raise IoError(f"cannot load ledger snapshot {cfg.ledger_path}: {exc}") from exc
    else:
        ledger = LedgerState(srs)
    try:
        session = prepare_session(scenario, ledger, srs)
        session.drive(scenario.inputs)
    except SessionError as exc:
        return _fail(f"step {exc.step}: {exc}")
    except OrchestratorError as exc:
        return _fail(str(exc))
    report = build_report(session, scenario.name, scenario.expect)
    out = cfg.out_dir
    _write(out / f"{scenario.name}.report.json", report.dumps() + "\n")
    try:
        ledger.write_tx_log(out / f"{scenario.name}.txlog.jsonl")
    except OSError as exc:
        raise IoError(f"cannot write tx log: {exc}") from exc
    if cfg.ledger_path is not None:
        _write(cfg.ledger_path, json.dumps(ledger.snapshot(), indent=1, sort_keys=True) + "\n")
    print(f"{scenario.name}: lifecycle={report.lifecycle} outcome={report.outcome} escrow={report.escrow}")
    for role, amount in sorted(report.payouts.items()):
        print(f"  payout {role}: {amount}")
    if report.mismatches:
        for m in report.mismatches:
            print(f"  MISMATCH {m}", file=sys.stderr)
        return EXIT_FAIL
    print("  expectations met")
    return EXIT_OK


def _median_seconds(fn, iterations: int) -> float:
    samples = []
    for _ in range(iterations):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench(iterations: int = 100) -> list[dict[str, Any]]:
    """Relation sizes and median prove/verify times for both relations."""
    from .merkle import MerkleTree

    srs = setup()
    rng = random.Random(0)
    k, pd = crypto.random_field(rng), crypto.random_field(rng)
    cstmt, cproof = prove_commit(srs, CommitWitness(k, pd))
    tree = MerkleTree()
    tree.insert(cstmt.clc_comm)
    siblings, dirs, rt = tree.proof(0)
    estmt = EvalStatement(rt, cstmt.h, 0, 1, 2)
    ewit = EvalWitness(k, pd, siblings, dirs)
    eproof = prove_eval(srs, ewit, estmt)
    cases = {
        COMMIT: (lambda: prove_commit(srs, CommitWitness(k, pd)),
                 lambda: verify(srs, cstmt.to_bytes(), cproof)),
        EVAL: (lambda: prove_eval(srs, ewit, estmt),
               lambda: verify(srs, estmt.to_bytes(), eproof)),
    }
    rows = []
    for relation, (prove_fn, verify_fn) in cases.items():
        size = relation_size(relation)
        rows.append({
            "relation": RELATION_NAMES[relation],
            "hash_invocations": size.hashes,
            "permutations": size.permutations,
            "field_ops": size.field_ops,
            "prove_median_s": _median_seconds(prove_fn, iterations),
            "verify_median_s": _median_seconds(verify_fn, iterations),
            "iterations": iterations,
        })
    return rows


def cmd_bench(args: argparse.Namespace, cfg: Config) -> int:
    if args.iterations < 1:
        return _usage("--iterations must be at least 1")
    rows = bench(args.iterations)
    if args.json:
        print(json.dumps({"note": BENCH_LABEL, "relations": rows}, indent=2))
        return EXIT_OK
    print(BENCH_LABEL)
    print(f"{'relation':<12}{'hashes':>8}{'perms':>8}{'field_ops':>11}{'prove(ms)':>12}{'verify(ms)':>12}")
    for r in rows:
        print(f"{r['relation']:<12}{r['hash_invocations']:>8}{r['permutations']:>8}{r['field_ops']:>11}"
              f"{r['prove_median_s'] * 1e3:>12.3f}{r['verify_median_s'] * 1e3:>12.3f}")
    print(f"(median of {args.iterations} iterations)")
    return EXIT_OK


def _print_records(records: list[dict[str, Any]]) -> None:
    for rec in records:
        head = f"#{rec.get('height', '?'):<4} {rec.get('kind', rec.get('step', '?')):<10}"
        rest = {k: v for k, v in rec.items() if k not in ("height", "kind", "step")}
        print(head + " " + json.dumps(rest, sort_keys=True))


def cmd_inspect(args: argparse.Namespace, cfg: Config) -> int:
    path = Path(args.path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if path.suffix == ".jsonl":
        try:
            records = read_tx_log(path)
        except (ValueError, LedgerError) as exc:
            return _fail(f"{path}: {exc}")
        _print_records(records)
        broken = verify_chain(records)
        print("digest chain: " + ("intact" if broken is None else f"BROKEN at record {broken}"))
        return EXIT_OK if broken is None else EXIT_FAIL
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        return _fail(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    if isinstance(data, dict) and "transcript" in data:
        print(f"scenario {data.get('scenario')}: lifecycle={data.get('lifecycle')} "
              f"phase={data.get('phase')} outcome={data.get('outcome')}")
        _print_records(data["transcript"])
        for m in data.get("mismatches", []):
            print(f"MISMATCH {m}")
        return EXIT_OK
    if isinstance(data, dict) and "tx_log" in data:
        print(f"ledger snapshot v{data.get('schema_version')}: height={data.get('height')} "
              f"leaves={len(data.get('leaves', []))} nullifiers={len(data.get('nullifiers', []))}")
        _print_records(data["tx_log"])
        return EXIT_OK
    print(json.dumps(data, indent=2, sort_keys=True))
    return EXIT_OK


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zkagree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate an Ed25519 keypair file")
    p.add_argument("out_path", help="where to write {pk_hex, sk_hex}")
    p.add_argument("--seed", type=int, help=f"deterministic key from this seed (also {SEED_ENV})")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("compile", help="compile a contract template and print its canonical form")
    p.add_argument("template", help="YAML template path")
    p.add_argument("--digest-only", action="store_true", help="print only the contract digest")
    p.add_argument("--key", action="append", default=[], metavar="ROLE=KEYFILE",
                   help="bind a party's public key from a keygen file (repeatable)")
    p.add_argument("--out", help="write the canonical document here instead of stdout")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="run a scenario end to end and check its expectations")
    p.add_argument("scenario", help="scenario JSON path or bundled scenario name")
    p.add_argument("--out-dir", help="directory for the report and tx log (created if missing)")
    p.add_argument("--ledger", help="ledger snapshot to resume from and save to")
    p.add_argument("--srs", help="SRS file to use (created if missing)")
    p.add_argument("--seed", type=int, help=f"session seed override (also {SEED_ENV})")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="relation sizes and prove/verify timings")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", help="pretty-print a report, tx log (.jsonl) or ledger snapshot")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = Config.from_args(args)
    except SystemExit as exc:
        return int(exc.code)
    try:
        return args.func(args, cfg)
    except IoError as exc:
        return _fail(f"IoError: {exc}")
    except UsageError as exc:
        return _usage(str(exc))


if __name__ == "__main__":
    sys.exit(main())
