"""Benchmark sweep over proof type, scheme and condition count.

Each cell builds a synthetic policy with ``n`` conditions of one proof
type, issues a compliant credential, then times witness generation, setup
and proving (medians over repetitions, monotonic clock). It records the
artifact sizes and runs one metered verification on a fresh ledger.
"""

from __future__ import annotations

import csv
import gc
import os
import statistics
import tempfile
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from zkperm.chain import Genesis, Ledger
from zkperm.circuit import compile_policy_circuit, constraint_count, generate_witness
from zkperm.crypto import ds_keygen, field_to_digest
from zkperm.identity import claim_hash_field, did_uri_for
from zkperm.identity.credentials import Attribute, AttributeSpec, CredentialSchema, issue_credential
from zkperm.policy import Condition, MembershipSet, bind_conditions
from zkperm.policy.vpr import DEFAULT_SRS, assemble_vpr, make_aux_spec
from zkperm.proofsys import StructuredReferenceString, zk_prove, zk_setup
from zkperm.store import ArtifactStore

PROOF_TYPES = ("equal", "range", "member")
SCHEMES = ("baseline", "cp")
CONDITION_COUNTS = (1, 2, 4, 8, 16)
MERKLE_DEPTH = 3
SCHEME_NAMES = {"baseline": "baseline", "cp": "commit_and_prove"}


@dataclass
class BenchRecord:
    proof_type: str
    scheme: str
    condition_count: int
    repetitions: int
    witness_time_s: float
    setup_time_s: float
    prove_time_s: float
    compiled_size_bytes: int
    pk_size_bytes: int
    vk_size_bytes: int
    proof_size_bytes: int
    verify_cost_units: int
    constraint_count: int

    @property
    def label(self) -> str:
        return self.proof_type if self.scheme == "baseline" else f"cp-{self.proof_type}"


CSV_COLUMNS = [f.name for f in fields(BenchRecord)]


def synthetic_policy(proof_type: str, n: int):
    """Schema, attributes, conditions and sets for one bench cell."""
    if proof_type not in PROOF_TYPES:
        raise ValueError(f"unknown proof type {proof_type!r}")
    keys = [f"attr_{i}" for i in range(n)]
    sets = []
    if proof_type == "equal":
        kind = "string"
        attrs = [Attribute(k, f"value-{i}", kind) for i, k in enumerate(keys)]
        conds = [Condition(k, "EQ", f"value-{i}") for i, k in enumerate(keys)]
    elif proof_type == "range":
        kind = "integer"
        attrs = [Attribute(k, 1000 + i, kind) for i, k in enumerate(keys)]
        conds = [Condition(k, "GEQ", 500 + i) for i, k in enumerate(keys)]
    else:
        kind = "string"
        members = MembershipSet("bench", kind, tuple(f"member-{j}" for j in range(8)), MERKLE_DEPTH)
        sets.append(members)
        attrs = [Attribute(k, f"member-{i % 8}", kind) for i, k in enumerate(keys)]
        conds = [Condition(k, "IN", members.ref) for k in keys]
    schema = CredentialSchema(f"bench-{proof_type}-{n}", tuple(AttributeSpec(k, kind) for k in keys))
    return schema, attrs, bind_conditions(conds, schema), {s.ref: s for s in sets}


def _timed(fn, reps: int):
    # a collection landing inside one timed region skews small cells badly
    times, out = [], None
    enabled = gc.isenabled()
    try:
        for _ in range(reps):
            out = None
            gc.collect()
            gc.disable()
            start = time.perf_counter()
            out = fn()
            times.append(time.perf_counter() - start)
            if enabled:
                gc.enable()
    finally:
        if enabled:
            gc.enable()
    return statistics.median(times), out


def run_cell(
    proof_type: str,
    scheme: str,
    n: int,
    repetitions: int = 1,
    workdir: str | os.PathLike | None = None,
    seed: str = "zkperm-bench",
    backend: str = "groth16",
    setup_repetitions: int | None = None,
) -> BenchRecord:
    """Measure one cell. ``setup_repetitions`` defaults to ``repetitions``;
    setup dominates wall time, so sweeps may time it once."""
    scheme_name = SCHEME_NAMES.get(scheme, scheme)
    short = "baseline" if scheme_name == "baseline" else "cp"
    schema, attrs, conds, sets = synthetic_policy(proof_type, n)
    issuer = ds_keygen(f"{seed}/issuer")
    subject = ds_keygen(f"{seed}/subject")
    vc = issue_credential(issuer.secret_key, subject.public_key, attrs, schema)
    srs = StructuredReferenceString(f"{seed}/srs".encode()) if seed else DEFAULT_SRS

    cs = compile_policy_circuit(conds, scheme_name, MERKLE_DEPTH)
    setup_time, (pk, vk) = _timed(lambda: zk_setup(cs, srs, backend), setup_repetitions or repetitions)
    pk_bytes = pk.to_bytes()

    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        store = ArtifactStore(Path(tmp) / "artifacts")
        spec = make_aux_spec(conds, sets, MERKLE_DEPTH)
        vpr = assemble_vpr(
            "id_bench", conds, scheme_name, cs, pk, vk, spec, schema.schema_id,
            registry=None, store=store, merkle_depth=MERKLE_DEPTH,
        )
        chain = Ledger(Genesis(owner="owner", balances={"bench": {"token1": 0, "token2": 0}}))
        chain.register_policy("owner", "id_bench", vpr, [issuer.public_key])
        nonce = chain.request_nonce("bench")
        aux = vpr.aux_at(chain.state.block_timestamp)

        witness_time, witness = _timed(
            lambda: generate_witness(cs, vc, subject.secret_key, nonce, aux), repetitions
        )
        prove_time, proof = _timed(
            lambda: zk_prove(cs, witness.public_segment, None, witness, pk), repetitions
        )
        from zkperm.holder import VpZk

        vp = VpZk(
            function_id="id_bench",
            proof=proof,
            public_input=tuple(witness.public_segment),
            claim_hashes=tuple(field_to_digest(claim_hash_field(c)) for c in vc.claims),
            claim_signatures=tuple(vc.claim_signatures) if short == "cp" else (),
            issuer_did=did_uri_for(issuer.public_key),
        )
        receipt = chain.submit_access("bench", "id_bench", vp, {"action": "noop"})
        if not receipt.ok:
            raise RuntimeError(f"bench cell {proof_type}/{short}/{n} was rejected: {receipt.status}")

    record = BenchRecord(
        proof_type=proof_type,
        scheme=short,
        condition_count=n,
        repetitions=repetitions,
        witness_time_s=round(witness_time, 6),
        setup_time_s=round(setup_time, 6),
        prove_time_s=round(prove_time, 6),
        compiled_size_bytes=len(cs.artifact),
        pk_size_bytes=len(pk_bytes),
        vk_size_bytes=len(vk.to_bytes()),
        proof_size_bytes=len(proof.to_bytes()),
        verify_cost_units=receipt.cost["total"],
        constraint_count=constraint_count(cs),
    )
    del cs, pk, vk, pk_bytes, witness
    gc.collect()
    return record


def cmd_bench(
    proof_types=PROOF_TYPES,
    schemes=SCHEMES,
    condition_counts=CONDITION_COUNTS,
    repetitions: int = 1,
    output_path: str | os.PathLike | None = None,
    *,
    workdir=None,
    seed: str = "zkperm-bench",
    setup_repetitions: int | None = None,
    progress=None,
) -> list[BenchRecord]:
    """Run every (proof type, scheme, n) cell and optionally write the CSV."""
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    records = []
    for proof_type in proof_types:
        for scheme in schemes:
            for n in condition_counts:
                try:
                    rec = run_cell(
                        proof_type, scheme, n, repetitions, workdir, seed,
                        setup_repetitions=setup_repetitions,
                    )
                except OSError as exc:  # typically ENOSPC while storing the proving key
                    raise OSError(exc.errno, f"bench cell {proof_type}/{scheme}/n={n}: {exc.strerror or exc}") from exc
                records.append(rec)
                if progress:
                    progress(rec)
    if output_path is not None:
        write_csv(records, output_path)
    return records


def write_csv(records, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for rec in records:
            writer.writerow(asdict(rec))


def read_csv(path: str | os.PathLike) -> list[BenchRecord]:
    numeric = {f.name: f.type for f in fields(BenchRecord)}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"bench CSV lacks columns: {', '.join(sorted(missing))}")
        for row in reader:
            values = {}
            for name in CSV_COLUMNS:
                raw = row[name]
                kind = numeric[name]
                values[name] = int(raw) if kind in ("int", int) else float(raw) if kind in ("float", float) else raw
            out.append(BenchRecord(**values))
    return out
