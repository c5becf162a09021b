"""Zero-knowledge presentation requests: a compiled, keyed policy."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from zkperm.circuit.r1cs import ConstraintSystem
from zkperm.crypto import digest_as_field
from zkperm.encoding import canonical_json
from zkperm.errors import PolicyError
from zkperm.identity.credentials import CredentialSchema
from zkperm.identity.registry import Registry
from zkperm.policy.conditions import (
    MEMBERSHIP_OPS,
    AuxData,
    Condition,
    MembershipSet,
    bind_conditions,
)
from zkperm.proofsys import StructuredReferenceString, VerificationKeyZk, zk_setup
from zkperm.store import ArtifactStore

SCHEME_ALIASES = {
    "cp": "commit_and_prove",
    "commit_and_prove": "commit_and_prove",
    "baseline": "baseline",
}
DEFAULT_SRS = StructuredReferenceString(b"zkperm-test-srs")


def canonical_scheme(scheme: str) -> str:
    try:
        return SCHEME_ALIASES[scheme]
    except KeyError:
        raise PolicyError(f"unknown scheme {scheme!r}") from None


@dataclass
class VprZk:
    function_id: str
    conditions: tuple[Condition, ...]
    scheme: str
    ecs_ref: str
    proving_key_ref: str
    verification_key: VerificationKeyZk
    aux_spec: dict
    merkle_depth: int
    backend: str = "groth16"
    schema_id: str = ""
    _sets: dict = field(default=None, repr=False, compare=False)

    @property
    def registry_key(self) -> str:
        digest = hashlib.sha256(canonical_json(self.to_json())).hexdigest()
        return f"{self.function_id}.{digest[:16]}"

    def membership_sets(self) -> dict[str, MembershipSet]:
        if self._sets is None:
            sets = (MembershipSet.from_json(s) for s in self.aux_spec.get("sets", []))
            self._sets = {s.ref: s for s in sets}
        return self._sets

    def aux_at(self, timestamp: int) -> AuxData:
        return AuxData(self.membership_sets(), timestamp)

    def roots(self) -> dict[tuple[str, str], int]:
        out = {}
        for name, hexroot in self.aux_spec.get("roots", {}).items():
            op, ref = name.split(":", 1)
            out[(op, ref)] = digest_as_field(bytes.fromhex(hexroot))
        return out

    @property
    def time_relative(self) -> bool:
        return any(c.time_relative for c in self.conditions)

    def to_json(self) -> dict:
        return {
            "aux_spec": self.aux_spec,
            "backend": self.backend,
            "conditions": [c.to_json() for c in self.conditions],
            "ecs_ref": self.ecs_ref,
            "function_id": self.function_id,
            "merkle_depth": self.merkle_depth,
            "proving_key_ref": self.proving_key_ref,
            "schema_id": self.schema_id,
            "scheme": self.scheme,
            "verification_key": self.verification_key.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VprZk":
        return cls(
            function_id=obj["function_id"],
            conditions=tuple(Condition.from_json(c) for c in obj["conditions"]),
            scheme=obj["scheme"],
            ecs_ref=obj["ecs_ref"],
            proving_key_ref=obj["proving_key_ref"],
            verification_key=VerificationKeyZk.from_hex(obj["verification_key"]),
            aux_spec=obj["aux_spec"],
            merkle_depth=obj["merkle_depth"],
            backend=obj["backend"],
            schema_id=obj.get("schema_id", ""),
        )


def _as_sets(aux_spec) -> dict[str, MembershipSet]:
    if aux_spec is None:
        return {}
    if isinstance(aux_spec, AuxData):
        return dict(aux_spec.membership_sets)
    if isinstance(aux_spec, dict):
        return dict(aux_spec)
    return {s.ref: s for s in aux_spec}


def make_aux_spec(conditions, sets: dict[str, MembershipSet], depth: int) -> dict:
    used: dict[str, MembershipSet] = {}
    roots = {}
    for cond in conditions:
        if cond.operator not in MEMBERSHIP_OPS:
            continue
        ref = str(cond.value)
        if ref not in sets:
            raise PolicyError(f"membership set {ref!r} was not provided")
        members = sets[ref]
        if members.kind != cond.kind:
            raise PolicyError(f"set {ref} holds {members.kind} values, {cond.key} is {cond.kind}")
        if members.depth != depth:
            raise PolicyError(f"set {ref} has depth {members.depth}, policy uses {depth}")
        used[ref] = members
        roots[f"{cond.operator}:{ref}"] = members.root_for(cond.operator).hex()
    return {
        "roots": roots,
        "sets": [used[r].to_json() for r in sorted(used)],
        "time_relative": any(c.time_relative for c in conditions),
    }


def build_vpr(
    function_id: str,
    conditions,
    scheme: str,
    schema: CredentialSchema,
    aux_spec=None,
    backend: str = "groth16",
    *,
    registry: Registry,
    store: ArtifactStore,
    srs: StructuredReferenceString = DEFAULT_SRS,
    merkle_depth: int = 3,
    compiled: ConstraintSystem | None = None,
) -> VprZk:
    """Compile, set up, store and register the policy for ``function_id``.

    ``aux_spec`` supplies the membership sets, as an AuxData, a mapping of
    set reference to MembershipSet, or a plain iterable of sets.
    ``compiled`` lets callers that already compiled the same circuit skip
    recompilation.
    """
    from zkperm.circuit.compiler import compile_policy_circuit  # compiler imports this package

    scheme = canonical_scheme(scheme)
    conditions = bind_conditions(conditions, schema)
    if not conditions:
        raise PolicyError("a policy needs at least one condition")
    spec = make_aux_spec(conditions, _as_sets(aux_spec), merkle_depth)
    cs = compiled or compile_policy_circuit(conditions, scheme, merkle_depth)
    pk, vk = zk_setup(cs, srs, backend)
    return assemble_vpr(function_id, conditions, scheme, cs, pk, vk, spec, schema.schema_id,
                        registry=registry, store=store, merkle_depth=merkle_depth)


def assemble_vpr(
    function_id: str,
    conditions: tuple[Condition, ...],
    scheme: str,
    cs: ConstraintSystem,
    pk,
    vk: VerificationKeyZk,
    aux_spec: dict,
    schema_id: str = "",
    *,
    registry: Registry | None,
    store: ArtifactStore,
    merkle_depth: int = 3,
) -> VprZk:
    """Store the artifacts of an already set-up circuit and register the request."""
    vpr = VprZk(
        function_id=function_id,
        conditions=tuple(conditions),
        scheme=scheme,
        ecs_ref=store.put("ecs", cs.artifact, cs),
        proving_key_ref=store.put("pk", pk.to_bytes(), pk),
        verification_key=vk,
        aux_spec=aux_spec,
        merkle_depth=merkle_depth,
        backend=vk.backend,
        schema_id=schema_id,
    )
    if registry is not None:
        registry.put("vpr_zk", vpr.registry_key, vpr.to_json())
    return vpr


def load_vpr(registry: Registry, key: str) -> VprZk:
    return VprZk.from_json(registry.get("vpr_zk", key))
