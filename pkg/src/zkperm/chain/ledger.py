"""Deterministic single-node ledger with the permissioning and pool contracts.

All state changes go through ``Ledger.apply_transaction``. Each
transaction is a canonical-JSON record; replaying the log from the same
genesis reproduces the state digest exactly.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from zkperm.chain.costs import DEFAULT_WEIGHTS, CostMeter
from zkperm.chain.pool import PoolError, PoolState, deposit, swap
from zkperm.circuit.compiler import needs_timestamp, root_input_name, root_keys
from zkperm.crypto import MODULUS, Point, digest_as_field, ds_verify_field, hash_canonical
from zkperm.encoding import canonical_json, canonical_loads
from zkperm.errors import ZkPermError
from zkperm.identity.did import did_uri_for, resolve_did
from zkperm.policy.conditions import Condition
from zkperm.proofsys import VerificationKeyZk, zk_verify
from zkperm.proofsys.groth16 import PAIRINGS_PER_VERIFY

OK = "OK"
NONCE_MISMATCH = "NONCE_MISMATCH"
AUTHENTICITY_FAIL = "AUTHENTICITY_FAIL"
UNTRUSTED_ISSUER = "UNTRUSTED_ISSUER"
PROOF_INVALID = "PROOF_INVALID"
TIMESTAMP_MISMATCH = "TIMESTAMP_MISMATCH"
POLICY_NOT_FOUND = "POLICY_NOT_FOUND"
NOT_OWNER = "NOT_OWNER"
DUPLICATE_POLICY = "DUPLICATE_POLICY"
UNKNOWN_ACCOUNT = "UNKNOWN_ACCOUNT"
INVALID_ARGUMENT = "INVALID_ARGUMENT"
EXECUTION_FAILED = "EXECUTION_FAILED"
MALFORMED_TX = "MALFORMED_TX"

APP_FUNCTIONS = {"id_deposit": "deposit", "id_swap": "swap"}


class ChainError(ZkPermError):
    code = "CHAIN"

    def __init__(self, status: str, message: str = ""):
        super().__init__(message or status)
        self.code = status


class _Revert(Exception):
    def __init__(self, status: str, message: str = ""):
        super().__init__(message or status)
        self.status = status


@dataclass(frozen=True)
class Genesis:
    owner: str
    balances: dict
    chain_seed: str = "zkperm-chain"
    start_timestamp: int = 1_700_000_000
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))

    def to_json(self) -> dict:
        return {
            "balances": self.balances,
            "chain_seed": self.chain_seed,
            "owner": self.owner,
            "start_timestamp": self.start_timestamp,
            "weights": self.weights,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Genesis":
        weights = {**DEFAULT_WEIGHTS, **obj.get("weights", {})}
        return cls(
            owner=obj["owner"],
            balances={a: dict(b) for a, b in obj["balances"].items()},
            chain_seed=obj.get("chain_seed", "zkperm-chain"),
            start_timestamp=obj.get("start_timestamp", 1_700_000_000),
            weights=weights,
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Genesis":
        return cls.from_json(canonical_loads(Path(path).read_bytes()))


@dataclass
class Receipt:
    index: int
    tx_type: str
    status: str
    block_height: int
    cost: dict
    result: dict = field(default_factory=dict)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OK

    def to_json(self) -> dict:
        return {
            "block_height": self.block_height,
            "cost": self.cost,
            "index": self.index,
            "message": self.message,
            "result": self.result,
            "status": self.status,
            "tx_type": self.tx_type,
        }


@dataclass
class LedgerState:
    block_height: int
    block_timestamp: int
    accounts: dict
    policies: dict
    verified_claim_cache: set
    pool: PoolState
    nonce_table: dict
    nonce_counter: int = 0
    receipts: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "accounts": {a: dict(sorted(b.items())) for a, b in sorted(self.accounts.items())},
            "block_height": self.block_height,
            "block_timestamp": self.block_timestamp,
            "nonce_counter": self.nonce_counter,
            "nonce_table": {a: str(v) for a, v in sorted(self.nonce_table.items())},
            "permissioning": {
                "policies": dict(sorted(self.policies.items())),
                "verified_claim_cache": sorted(self.verified_claim_cache),
            },
            "pool": self.pool.to_json(),
            "receipts": [r.to_json() for r in self.receipts],
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_json())).hexdigest()


def public_input_layout(conditions) -> list[str]:
    """Public input names the compiled circuit for ``conditions`` expects."""
    names = ["eta"] + [f"H[{i}]" for i in range(len(conditions))] + ["issuer.x", "issuer.y"]
    names += [root_input_name(*k) for k in root_keys(conditions)]
    if needs_timestamp(conditions):
        names.append("timestamp")
    return names


class Ledger:
    def __init__(self, genesis: Genesis, registry=None):
        self.genesis = genesis
        self.registry = registry
        self.state = LedgerState(
            block_height=0,
            block_timestamp=genesis.start_timestamp,
            accounts={a: dict(b) for a, b in genesis.balances.items()},
            policies={},
            verified_claim_cache=set(),
            pool=PoolState(),
            nonce_table={},
        )
        self.log: list[dict] = []
        self.meter = CostMeter(dict(genesis.weights))
        self._vk_cache: dict[str, VerificationKeyZk] = {}

    # -- replay -------------------------------------------------------------

    @classmethod
    def replay(cls, genesis: Genesis, transactions, registry=None) -> "Ledger":
        ledger = cls(genesis, registry)
        for tx in transactions:
            ledger.apply_transaction(tx)
        return ledger

    def save_log(self, path: str | os.PathLike) -> None:
        with open(path, "wb") as fh:
            for tx in self.log:
                fh.write(canonical_json(tx) + b"\n")

    @staticmethod
    def load_log(path: str | os.PathLike) -> list[dict]:
        lines = Path(path).read_bytes().splitlines()
        return [canonical_loads(line) for line in lines if line.strip()]

    def state_digest(self) -> str:
        return self.state.digest()

    def snapshot(self) -> dict:
        """Immutable copy of the committed state for read-only queries."""
        return json.loads(canonical_json(self.state.to_json()))

    # -- transaction entry point -------------------------------------------

    def apply_transaction(self, tx: dict) -> Receipt:
        tx = canonical_loads(canonical_json(tx))  # exactly what the log will hold
        self.log.append(tx)
        self.meter.reset()
        handlers = {
            "request_nonce": self._tx_request_nonce,
            "register_policy": self._tx_register_policy,
            "submit_access": self._tx_submit_access,
            "advance_block": self._tx_advance_block,
        }
        status, message, result = OK, "", {}
        handler = handlers.get(tx.get("type"))
        try:
            if handler is None:
                raise _Revert(MALFORMED_TX, f"unknown transaction type {tx.get('type')!r}")
            result = handler(tx) or {}
        except _Revert as rev:
            status, message = rev.status, str(rev)
        except (KeyError, TypeError, ValueError) as exc:
            status, message = MALFORMED_TX, f"malformed transaction: {exc}"
        receipt = Receipt(
            index=len(self.state.receipts),
            tx_type=str(tx.get("type")),
            status=status,
            block_height=self.state.block_height,
            cost=self.meter.breakdown(),
            result=result,
            message=message,
        )
        self.state.receipts.append(receipt)
        return receipt

    # -- convenience wrappers ------------------------------------------------

    def request_nonce(self, account: str) -> int:
        receipt = self.apply_transaction({"type": "request_nonce", "account": account})
        if not receipt.ok:
            raise ChainError(receipt.status, receipt.message)
        return int(receipt.result["nonce"])

    def register_policy(self, owner: str, function_id: str, vpr, trusted_issuers) -> Receipt:
        return self.apply_transaction(
            {
                "type": "register_policy",
                "caller": owner,
                "function_id": function_id,
                "vpr": vpr.to_json(),
                "vpr_ref": vpr.registry_key,
                "trusted_issuers": [p.compress().hex() for p in trusted_issuers],
            }
        )

    def submit_access(self, caller: str, function_id: str, vp, call_args: dict | None = None) -> Receipt:
        return self.apply_transaction(
            {
                "type": "submit_access",
                "caller": caller,
                "function_id": function_id,
                "vp": vp.to_json(),
                "call_args": call_args or {},
            }
        )

    def advance_block(self, seconds: int) -> tuple[int, int]:
        receipt = self.apply_transaction({"type": "advance_block", "seconds": seconds})
        if not receipt.ok:
            raise ChainError(receipt.status, receipt.message)
        return self.state.block_height, self.state.block_timestamp

    # -- handlers -------------------------------------------------------------

    def _tx_request_nonce(self, tx: dict) -> dict:
        account = tx["account"]
        if account not in self.state.accounts:
            raise _Revert(UNKNOWN_ACCOUNT, f"unknown account {account!r}")
        counter = self.state.nonce_counter
        seed = canonical_json([self.genesis.chain_seed, account, counter])
        nonce = int.from_bytes(hash_canonical(b"zkperm/nonce" + seed), "big") % MODULUS
        self.state.nonce_counter = counter + 1
        self.state.nonce_table[account] = nonce
        self.meter.charge("hash")
        self.meter.charge("storage")
        return {"nonce": str(nonce)}

    def _tx_advance_block(self, tx: dict) -> dict:
        seconds = tx["seconds"]
        if isinstance(seconds, bool) or not isinstance(seconds, int) or seconds < 1:
            raise _Revert(INVALID_ARGUMENT, "a block must advance time by at least one second")
        self.state.block_height += 1
        self.state.block_timestamp += seconds
        return {"block_height": self.state.block_height, "block_timestamp": self.state.block_timestamp}

    def _tx_register_policy(self, tx: dict) -> dict:
        if tx["caller"] != self.genesis.owner:
            raise _Revert(NOT_OWNER, "only the contract owner registers policies")
        fid = tx["function_id"]
        if fid in self.state.policies:
            raise _Revert(DUPLICATE_POLICY, f"policy for {fid!r} already registered")
        vpr = tx["vpr"]
        trusted = [Point.from_hex(h).compress().hex() for h in tx["trusted_issuers"]]
        VerificationKeyZk.from_hex(vpr["verification_key"])  # reject malformed keys early
        self.state.policies[fid] = {
            "backend": vpr["backend"],
            "conditions": vpr["conditions"],
            "roots": vpr["aux_spec"].get("roots", {}),
            "scheme": vpr["scheme"],
            "trusted_issuers": trusted,
            "verification_key": vpr["verification_key"],
            "vpr_ref": tx.get("vpr_ref", ""),
        }
        self.meter.charge("storage")
        return {"function_id": fid}

    def _verification_key(self, fid: str, policy: dict) -> VerificationKeyZk:
        if fid not in self._vk_cache:
            self._vk_cache[fid] = VerificationKeyZk.from_hex(policy["verification_key"])
        return self._vk_cache[fid]

    def _resolve_issuer(self, did: str, policy: dict) -> Point | None:
        for hexkey in policy["trusted_issuers"]:
            pk = Point.from_hex(hexkey)
            if did_uri_for(pk) == did:
                return pk
        if self.registry is not None:
            try:
                return resolve_did(self.registry, did).public_key
            except (ZkPermError, ValueError, KeyError):
                return None
        return None

    def _tx_submit_access(self, tx: dict) -> dict:
        from zkperm.holder import VpZk

        state = self.state
        caller, fid = tx["caller"], tx["function_id"]
        policy = state.policies.get(fid)
        if policy is None:
            raise _Revert(POLICY_NOT_FOUND, f"no policy for {fid!r}")
        try:
            vp = VpZk.from_json(tx["vp"])
        except (KeyError, TypeError, ValueError, ZkPermError) as exc:
            raise _Revert(PROOF_INVALID, f"malformed presentation: {exc}") from None

        # (1) nonce: consumed whatever happens next
        pending = state.nonce_table.pop(caller, None)
        self.meter.charge("storage")
        if pending is None or not vp.public_input or vp.public_input[0] != pending:
            raise _Revert(NONCE_MISMATCH, "presentation nonce does not match the pending challenge")

        # a proof container names its circuit; one made for another circuit
        # (e.g. the other scheme) cannot verify here
        vk = self._verification_key(fid, policy)
        if vp.proof.backend != vk.backend or vp.proof.circuit_digest != vk.circuit_digest:
            raise _Revert(PROOF_INVALID, "proof was made for a different circuit")

        conditions = [Condition.from_json(c) for c in policy["conditions"]]
        n = len(conditions)
        issuer = self._resolve_issuer(vp.issuer_did, policy)
        try:
            hashes = vp.hash_fields()
        except ValueError:
            hashes = None

        # (2) authenticity of every claim hash, commit-and-prove only
        new_cache = set()
        if policy["scheme"] == "commit_and_prove":
            if issuer is None:
                raise _Revert(UNTRUSTED_ISSUER, f"cannot resolve issuer {vp.issuer_did}")
            if hashes is None or len(hashes) != n or len(vp.claim_signatures) != n:
                raise _Revert(AUTHENTICITY_FAIL, "claim hashes and signatures do not match the policy")
            issuer_digest = hash_canonical(issuer.compress()).hex()
            for h_digest, h, sig in zip(vp.claim_hashes, hashes, vp.claim_signatures):
                key = f"{issuer_digest}:{h_digest.hex()}"
                self.meter.charge("hash")
                if key in state.verified_claim_cache or key in new_cache:
                    continue
                self.meter.charge("signature")
                if not ds_verify_field(issuer, sig, h):
                    raise _Revert(AUTHENTICITY_FAIL, "issuer signature on a claim hash is invalid")
                new_cache.add(key)

        # (3) issuer trust
        if issuer is None or issuer.compress().hex() not in policy["trusted_issuers"]:
            raise _Revert(UNTRUSTED_ISSUER, f"issuer {vp.issuer_did} is not trusted for {fid}")

        # (4) proof against the public input the chain itself expects
        layout = public_input_layout(conditions)
        if hashes is None or len(hashes) != n or len(vp.public_input) != len(layout):
            raise _Revert(PROOF_INVALID, "public input has the wrong shape")
        expected = {"eta": pending, "issuer.x": issuer.x, "issuer.y": issuer.y}
        expected.update({f"H[{i}]": h for i, h in enumerate(hashes)})
        for name, hexroot in policy["roots"].items():
            op, ref = name.split(":", 1)
            expected[root_input_name(op, ref)] = digest_as_field(bytes.fromhex(hexroot))
        for name, value in zip(layout, vp.public_input):
            if name != "timestamp" and expected.get(name) != value:
                raise _Revert(PROOF_INVALID, f"public input {name} does not match chain state")
        if vk.backend == "groth16":
            self.meter.charge("pairing", PAIRINGS_PER_VERIFY)
        self.meter.charge("public_input", len(layout))
        if not zk_verify(vp.public_input, vk, vp.proof):
            raise _Revert(PROOF_INVALID, "proof does not verify")

        # (5) the proof must be about the current block time
        if "timestamp" in layout and vp.public_input[layout.index("timestamp")] != state.block_timestamp:
            raise _Revert(TIMESTAMP_MISMATCH, "proof timestamp is not the current block time")

        # (6) run the gated application function on staged copies
        pool = state.pool.copy()
        balances = copy.deepcopy(state.accounts.get(caller, {}))
        result = self._execute(fid, tx.get("call_args") or {}, pool, balances, caller)
        state.pool = pool
        if caller in state.accounts or balances:
            state.accounts[caller] = balances
        state.verified_claim_cache |= new_cache
        self.meter.charge("storage", len(new_cache))
        return result

    def _execute(self, fid: str, args: dict, pool: PoolState, balances: dict, caller: str) -> dict:
        action = args.get("action") or APP_FUNCTIONS.get(fid, "noop")
        try:
            if action == "deposit":
                minted = deposit(pool, balances, caller, int(args["amount1"]), int(args["amount2"]))
                self.meter.charge("storage", 2)
                return {"action": action, "minted_shares": minted}
            if action == "swap":
                out = swap(
                    pool,
                    balances,
                    args.get("token_in", "token1"),
                    int(args["amount_in"]),
                    int(args.get("min_out", 0)),
                )
                self.meter.charge("storage", 2)
                return {"action": action, "amount_out": out}
            if action == "noop":
                return {"action": action}
        except (PoolError, KeyError, ValueError) as exc:
            raise _Revert(EXECUTION_FAILED, str(exc)) from None
        raise _Revert(EXECUTION_FAILED, f"unknown application function {action!r}")
