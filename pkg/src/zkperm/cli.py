"""Command-line driver for the credential, policy, proof and chain lifecycle.

All state lives in a workspace directory (``--registry``)::

    <dir>/registry/         DID documents, schemas, presentation requests
    <dir>/artifacts/        compiled circuits and proving keys
    <dir>/genesis.json      chain genesis, written on first use
    <dir>/chain.log.jsonl   transaction log; the chain state is its replay

Every chain-touching command rebuilds the ledger by replaying the log,
applies its own transaction and appends it, so the log is the only
mutable chain artifact.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
import tempfile
from pathlib import Path

from zkperm.bench import CONDITION_COUNTS, PROOF_TYPES, SCHEMES, cmd_bench
from zkperm.chain import Genesis, Ledger
from zkperm.chain import ledger as chain_codes
from zkperm.crypto import Point, ds_keygen, generator
from zkperm.crypto.jubjub import scalar_mult
from zkperm.errors import PresentationRefused, ZkPermError
from zkperm.holder import VpZk, build_presentation
from zkperm.identity import (
    Attribute,
    CredentialSchema,
    Registry,
    VerifiableCredential,
    create_did,
    did_uri_for,
    issue_credential,
    load_schema,
    register_schema,
    resolve_did,
)
from zkperm.policy import Condition, MembershipSet, VprZk, build_vpr, load_vpr
from zkperm.policy.vpr import DEFAULT_SRS
from zkperm.proofsys import StructuredReferenceString
from zkperm.report import cmd_report
from zkperm.store import ArtifactStore

SEED_ENV = "ZKPERM_SEED"
DEFAULT_WORKSPACE = "zkperm-workspace"
DEFAULT_GENESIS = {
    "owner": "owner",
    "balances": {"alice": {"token1": 1_000_000, "token2": 1_000_000}},
}

# exit status per error code; chain reverts get their own block
EXIT_CODES = {
    "ERROR": 1,
    "USAGE": 2,
    "REGISTRY": 3,
    "DUPLICATE_RECORD": 4,
    "RECORD_NOT_FOUND": 5,
    "SCHEMA_MISMATCH": 6,
    "POLICY": 7,
    "CIRCUIT": 8,
    "PROOF": 9,
    "UNSATISFIED_WITNESS": 10,
    "KEY_MISMATCH": 11,
    "NON_COMPLIANT": 12,
    "IO": 13,
    chain_codes.NONCE_MISMATCH: 20,
    chain_codes.AUTHENTICITY_FAIL: 21,
    chain_codes.UNTRUSTED_ISSUER: 22,
    chain_codes.PROOF_INVALID: 23,
    chain_codes.TIMESTAMP_MISMATCH: 24,
    chain_codes.POLICY_NOT_FOUND: 25,
    chain_codes.NOT_OWNER: 26,
    chain_codes.DUPLICATE_POLICY: 27,
    chain_codes.UNKNOWN_ACCOUNT: 28,
    chain_codes.INVALID_ARGUMENT: 29,
    chain_codes.EXECUTION_FAILED: 30,
    chain_codes.MALFORMED_TX: 31,
}


class CliError(ZkPermError):
    def __init__(self, code: str, message: str, **extra):
        super().__init__(message)
        self.code = code
        self.extra = extra

    def to_json(self) -> dict:
        return {**super().to_json(), **self.extra}


# -- workspace ------------------------------------------------------------------


class Workspace:
    def __init__(self, root, config: dict):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.registry = Registry(self.root / "registry")
        self.store = ArtifactStore(self.root / "artifacts")
        self.genesis_path = self.root / "genesis.json"
        self.log_path = self.root / "chain.log.jsonl"

    @property
    def seed(self) -> str | None:
        return os.environ.get(SEED_ENV) or self.config.get("seed")

    def srs(self) -> StructuredReferenceString:
        seed = self.config.get("srs_seed") or (self.seed and f"{self.seed}/srs")
        return StructuredReferenceString(seed.encode()) if seed else DEFAULT_SRS

    def genesis(self) -> Genesis:
        if self.genesis_path.exists():
            return Genesis.load(self.genesis_path)
        spec = dict(self.config.get("genesis") or DEFAULT_GENESIS)
        if self.seed and "chain_seed" not in spec:
            spec["chain_seed"] = f"{self.seed}/chain"
        genesis = Genesis.from_json(spec)
        _write_json(self.genesis_path, genesis.to_json())
        return genesis

    def ledger(self) -> Ledger:
        log = Ledger.load_log(self.log_path) if self.log_path.exists() else []
        return Ledger.replay(self.genesis(), log, self.registry)

    def apply(self, chain: Ledger, tx_call):
        """Run a ledger wrapper call and persist whatever it appended."""
        before = len(chain.log)
        try:
            return tx_call()
        finally:
            if len(chain.log) > before:
                with open(self.log_path, "ab") as fh:
                    for tx in chain.log[before:]:
                        fh.write(json.dumps(tx, sort_keys=True, separators=(",", ":")).encode() + b"\n")


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise CliError("IO", f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError("IO", f"{path} is not valid JSON: {exc}") from None


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _load_key(path) -> tuple[int, Point]:
    obj = _read_json(path)
    if "secret_key" in obj:
        sk = int(obj["secret_key"], 16)
        return sk, scalar_mult(generator(), sk)
    return 0, Point.from_hex(obj["public_key"])


def _public_key(ws: Workspace, ref: str) -> Point:
    """A trusted-issuer reference: DID URI, key file or compressed hex key."""
    if ref.startswith("did:"):
        return resolve_did(ws.registry, ref).public_key
    if Path(ref).exists():
        return _load_key(ref)[1]
    return Point.from_hex(ref)


def _receipt_or_raise(receipt):
    if not receipt.ok:
        raise CliError(receipt.status, receipt.message or receipt.status, receipt=receipt.to_json())
    return receipt


# -- lifecycle commands ---------------------------------------------------------


def cmd_keygen(ws: Workspace, args) -> int:
    seed = args.seed or (ws.seed and f"{ws.seed}/key/{Path(args.out).stem}") or secrets.token_hex(32)
    keypair = ds_keygen(seed)
    record = {
        "secret_key": format(keypair.secret_key, "064x"),
        "public_key": keypair.public_key.compress().hex(),
    }
    _write_json(args.out, record)
    _emit({"public_key": record["public_key"], "did": did_uri_for(keypair.public_key)})
    return 0


def cmd_did(ws: Workspace, args) -> int:
    sk, pk = _load_key(args.key)
    if ws.registry.contains("did_document", did_uri_for(pk).rsplit(":", 1)[-1]):
        did = resolve_did(ws.registry, did_uri_for(pk))
    else:
        from zkperm.crypto import SignatureKeyPair

        did = create_did(SignatureKeyPair(sk, pk), ws.registry)
    _emit({"did": did.uri, "document": did.document})
    return 0


def cmd_schema(ws: Workspace, args) -> int:
    schema = CredentialSchema.from_json(_read_json(args.file))
    _emit({"schema_id": register_schema(schema, ws.registry)})
    return 0


def cmd_issue(ws: Workspace, args) -> int:
    issuer_sk, _ = _load_key(args.issuer_key)
    if not issuer_sk:
        raise CliError("IO", f"{args.issuer_key} holds no secret key")
    subject = _public_key(ws, args.subject)
    schema = load_schema(ws.registry, args.schema_id)
    attrs = [Attribute.from_json(a) for a in _read_json(args.attributes)]
    vc = issue_credential(issuer_sk, subject, attrs, schema)
    _write_json(args.out, vc.to_json())
    _emit({"credential": str(args.out), "claims": len(vc.claims)})
    return 0


def cmd_vpr_build(ws: Workspace, args) -> int:
    policy = _read_json(args.policy)
    conditions = [Condition.from_json({"time_relative": False, **c}) for c in policy["conditions"]]
    sets = [MembershipSet.from_json(s) for s in policy.get("sets", [])]
    schema = load_schema(ws.registry, args.schema_id)
    vpr = build_vpr(
        args.function_id,
        conditions,
        args.scheme,
        schema,
        sets,
        args.backend,
        registry=ws.registry,
        store=ws.store,
        srs=ws.srs(),
        merkle_depth=policy.get("merkle_depth", 3),
    )
    if args.out:
        _write_json(args.out, vpr.to_json())
    _emit({"vpr": vpr.registry_key, "scheme": vpr.scheme, "backend": vpr.backend})
    return 0


def cmd_policy_register(ws: Workspace, args) -> int:
    if Path(args.vpr).is_file():
        vpr = VprZk.from_json(_read_json(args.vpr))
    else:
        vpr = load_vpr(ws.registry, args.vpr)
    trusted = [_public_key(ws, t) for t in args.trusted]
    chain = ws.ledger()
    receipt = ws.apply(chain, lambda: chain.register_policy(args.caller, args.function_id, vpr, trusted))
    _receipt_or_raise(receipt)
    _emit(receipt.to_json())
    return 0


def cmd_prove(ws: Workspace, args) -> int:
    chain = ws.ledger()
    policy = chain.state.policies.get(args.function_id)
    if policy is None:
        raise CliError(chain_codes.POLICY_NOT_FOUND, f"no policy registered for {args.function_id}")
    vpr = load_vpr(ws.registry, policy["vpr_ref"])
    vc = VerifiableCredential.from_json(_read_json(args.credential))
    subject_sk, _ = _load_key(args.subject_key)
    nonce = ws.apply(chain, lambda: chain.request_nonce(args.account))
    aux = vpr.aux_at(chain.state.block_timestamp)
    try:
        vp = build_presentation(vc, vpr, nonce, subject_sk, aux, ws.registry, ws.store)
    except PresentationRefused as exc:
        if exc.condition_index is not None:
            print(f"failing condition: {exc.condition_index}", file=sys.stderr)
        raise
    Path(args.out).write_bytes(vp.to_bytes())
    _emit({"presentation": str(args.out), "nonce": str(nonce)})
    return 0


def _call_args(args) -> dict:
    if args.call_args:
        return json.loads(args.call_args)
    return {}


def cmd_submit(ws: Workspace, args) -> int:
    vp = VpZk.from_bytes(Path(args.presentation).read_bytes())
    chain = ws.ledger()
    receipt = ws.apply(chain, lambda: chain.submit_access(args.account, args.function_id, vp, _call_args(args)))
    _receipt_or_raise(receipt)
    _emit(receipt.to_json())
    return 0


def cmd_advance(ws: Workspace, args) -> int:
    chain = ws.ledger()
    height, ts = ws.apply(chain, lambda: chain.advance_block(args.seconds))
    _emit({"block_height": height, "block_timestamp": ts})
    return 0


# -- bench / report / demo ------------------------------------------------------


def _counts(text: str) -> tuple[int, ...]:
    try:
        counts = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad condition list {text!r}") from None
    if not counts or min(counts) < 1:
        raise argparse.ArgumentTypeError("condition counts must be positive")
    return counts


def cmd_bench_cli(ws: Workspace, args) -> int:
    seed = ws.seed or "zkperm-bench"

    def progress(rec):
        print(
            f"{rec.label:>10} n={rec.condition_count:<2} constraints={rec.constraint_count} "
            f"setup={rec.setup_time_s:.2f}s prove={rec.prove_time_s:.2f}s",
            file=sys.stderr,
        )

    records = cmd_bench(
        args.proof_type or PROOF_TYPES,
        args.scheme or SCHEMES,
        args.conditions,
        args.reps,
        args.out,
        workdir=ws.root,
        seed=seed,
        progress=progress,
    )
    print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    return 0


def cmd_report_cli(ws: Workspace, args) -> int:
    try:
        print(cmd_report(args.csv), end="")
    except FileNotFoundError:
        raise CliError("IO", f"no such file: {args.csv}") from None
    except ValueError as exc:
        raise CliError("IO", str(exc)) from None
    return 0


def _demo_files(root: Path) -> dict:
    from zkperm.policy import EIGHTEEN_YEARS

    files = {
        "schema": root / "kyc-schema.json",
        "attributes": root / "alice-attributes.json",
        "policy": root / "kyc-policy.json",
    }
    _write_json(files["schema"], {
        "schema_id": "kyc-v1",
        "attribute_specs": [
            {"key": "unique_id", "kind": "string", "required": True},
            {"key": "date_of_birth", "kind": "date", "required": True},
            {"key": "country", "kind": "string", "required": True},
        ],
    })
    _write_json(files["attributes"], [
        {"key": "unique_id", "value": "u-42", "kind": "string"},
        {"key": "date_of_birth", "value": 631_152_000, "kind": "date"},  # 1990-01-01
        {"key": "country", "value": "DE", "kind": "string"},
    ])
    sanctions = MembershipSet("sanctions", "string", ("u-1", "u-7", "u-13", "u-99"), 3)
    _write_json(files["policy"], {
        "conditions": [
            {"key": "country", "operator": "EQ", "value": "DE"},
            {"key": "date_of_birth", "operator": "LEQ", "value": EIGHTEEN_YEARS, "time_relative": True},
            {"key": "unique_id", "operator": "NOTIN", "value": sanctions.ref},
        ],
        "sets": [sanctions.to_json()],
        "merkle_depth": 3,
    })
    return files


def cmd_demo(ws_unused, args) -> int:
    """KYC-gated DeFi flow: register deposit and swap policies, prove, submit both."""
    base = ["--json-errors"] if args.json_errors else []
    with tempfile.TemporaryDirectory(prefix="zkperm-demo-") as tmp:
        root = Path(tmp)
        files = _demo_files(root)
        ws = ["--registry", str(root / "ws")] + base

        def run(*argv):
            code = main([*ws, *map(str, argv)])
            if code:
                raise CliError("ERROR", f"demo step failed ({code}): {' '.join(map(str, argv))}")

        saved_seed = os.environ.get(SEED_ENV)
        os.environ.setdefault(SEED_ENV, "zkperm-demo")
        try:
            _demo_steps(root, files, args.scheme, run)
        finally:
            if saved_seed is None:
                os.environ.pop(SEED_ENV, None)
        ok = sum(1 for r in Workspace(root / "ws", {}).ledger().state.receipts
                 if r.tx_type == "submit_access" and r.ok)
        print(f"demo complete: {ok} successful access receipts", file=sys.stderr)
        return 0 if ok == 2 else 1


def _demo_steps(root: Path, files: dict, scheme: str, run) -> None:
    run("keygen", "--out", root / "issuer.json")
    run("keygen", "--out", root / "alice.json")
    run("did", "--key", root / "issuer.json")
    run("schema", "--file", files["schema"])
    run("issue", "--issuer-key", root / "issuer.json", "--subject", root / "alice.json",
        "--schema-id", "kyc-v1", "--attributes", files["attributes"], "--out", root / "vc.json")
    issuer_did = did_uri_for(_load_key(root / "issuer.json")[1])
    for fid in ("id_deposit", "id_swap"):
        vpr_file = root / f"{fid}.vpr.json"
        run("vpr-build", "--function-id", fid, "--policy", files["policy"],
            "--schema-id", "kyc-v1", "--scheme", scheme, "--out", vpr_file)
        run("policy-register", "--function-id", fid, "--vpr", vpr_file, "--trusted", issuer_did)
    calls = {
        "id_deposit": {"action": "deposit", "amount1": 10_000, "amount2": 40_000},
        "id_swap": {"action": "swap", "token_in": "token1", "amount_in": 500, "min_out": 1},
    }
    for fid, call in calls.items():
        out = root / f"{fid}.vp"
        run("prove", "--account", "alice", "--function-id", fid, "--credential", root / "vc.json",
            "--subject-key", root / "alice.json", "--out", out)
        run("submit", "--account", "alice", "--function-id", fid, "--presentation", out,
            "--args", json.dumps(call))


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zkperm", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config (genesis, seed, srs_seed)")
    p.add_argument("--registry", default=None, help=f"workspace directory (default ./{DEFAULT_WORKSPACE})")
    p.add_argument("--json-errors", action="store_true", help="print errors as JSON on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("keygen", help="create an EdDSA key pair file")
    s.add_argument("--out", required=True)
    s.add_argument("--seed")
    s.set_defaults(func=cmd_keygen)

    s = sub.add_parser("did", help="publish the DID document of a key")
    s.add_argument("--key", required=True)
    s.set_defaults(func=cmd_did)

    s = sub.add_parser("schema", help="register a credential schema")
    s.add_argument("--file", required=True)
    s.set_defaults(func=cmd_schema)

    s = sub.add_parser("issue", help="issue a credential to a subject")
    s.add_argument("--issuer-key", required=True)
    s.add_argument("--subject", required=True, help="subject key file, DID or public key hex")
    s.add_argument("--schema-id", required=True)
    s.add_argument("--attributes", required=True, help="JSON list of {key, value, kind}")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_issue)

    s = sub.add_parser("vpr-build", help="compile and set up a presentation request")
    s.add_argument("--function-id", required=True)
    s.add_argument("--policy", required=True, help="JSON with conditions and sets")
    s.add_argument("--schema-id", required=True)
    s.add_argument("--scheme", choices=SCHEMES, default="cp")
    s.add_argument("--backend", choices=("groth16", "direct"), default="groth16")
    s.add_argument("--out", help="also write the request JSON here")
    s.set_defaults(func=cmd_vpr_build)

    s = sub.add_parser("policy-register", help="register a request with the permissioning contract")
    s.add_argument("--function-id", required=True)
    s.add_argument("--vpr", required=True, help="registry key or request JSON from vpr-build")
    s.add_argument("--trusted", nargs="+", required=True, help="trusted issuer DIDs or keys")
    s.add_argument("--caller", default="owner")
    s.set_defaults(func=cmd_policy_register)

    s = sub.add_parser("prove", help="request a nonce and build a presentation")
    s.add_argument("--account", required=True)
    s.add_argument("--function-id", required=True)
    s.add_argument("--credential", required=True)
    s.add_argument("--subject-key", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_prove)

    s = sub.add_parser("submit", help="submit a presentation with the gated call")
    s.add_argument("--account", required=True)
    s.add_argument("--function-id", required=True)
    s.add_argument("--presentation", required=True)
    s.add_argument("--args", dest="call_args", help="JSON call arguments")
    s.set_defaults(func=cmd_submit)

    s = sub.add_parser("advance", help="close the block and move chain time forward")
    s.add_argument("--seconds", type=int, default=12)
    s.set_defaults(func=cmd_advance)

    s = sub.add_parser("bench", help="run the benchmark sweep")
    s.add_argument("--proof-type", action="append", choices=PROOF_TYPES)
    s.add_argument("--scheme", action="append", choices=SCHEMES)
    s.add_argument("--conditions", type=_counts, default=CONDITION_COUNTS, help="e.g. 1,2,4,8,16")
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--out", default="bench.csv")
    s.set_defaults(func=cmd_bench_cli)

    s = sub.add_parser("report", help="tabulate a bench CSV")
    s.add_argument("csv")
    s.set_defaults(func=cmd_report_cli)

    s = sub.add_parser("demo", help="scripted end-to-end run in a temporary workspace")
    s.add_argument("--scheme", choices=SCHEMES, default="cp")
    s.set_defaults(func=cmd_demo)
    return p


def _report_error(exc: ZkPermError, as_json: bool) -> int:
    code = getattr(exc, "code", "ERROR")
    if as_json:
        print(json.dumps({"error": exc.to_json()}, sort_keys=True), file=sys.stderr)
    else:
        print(f"error [{code}]: {exc}", file=sys.stderr)
    return EXIT_CODES.get(code, 1)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench" and args.reps < 1:
            raise CliError("USAGE", "--reps must be at least 1")
        config = _read_json(args.config) if args.config else {}
        if args.command == "demo":
            return args.func(None, args)
        ws = Workspace(args.registry or config.get("registry") or DEFAULT_WORKSPACE, config)
        return args.func(ws, args)
    except ZkPermError as exc:
        return _report_error(exc, args.json_errors)
    except OSError as exc:
        return _report_error(CliError("IO", str(exc)), args.json_errors)
    except (ValueError, KeyError, TypeError) as exc:
        return _report_error(CliError("ERROR", f"{type(exc).__name__}: {exc}"), args.json_errors)


if __name__ == "__main__":
    sys.exit(main())
