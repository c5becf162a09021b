"""Compile a list of policy conditions into one rank-1 constraint system.

The circuit proves, for a fixed condition list:

* the presenter knows a signature on the public nonce under a private
  subject key (key binding);
* every selected claim carries that subject key and hashes to the public
  claim hash at its position;
* every claim value satisfies its condition;
* baseline only: the public issuer key signed every claim hash.

Public inputs, in order: ``eta``, ``H[0..n-1]``, ``issuer.x``,
``issuer.y``, one root per distinct ``(operator, set)`` pair and, when any
condition is time-relative, ``timestamp``.
"""

from __future__ import annotations

from dataclasses import dataclass

from zkperm.circuit.gadgets import PointVar, eddsa_verify, merkle_root, mimc_hash
from zkperm.circuit.r1cs import LC, Builder, ConstraintSystem, WitnessAssignment
from zkperm.crypto import MODULUS, MerklePath, Point, Signature, digest_as_field, ds_sign_field
from zkperm.crypto.hashing import TAG_CLAIM, TAG_GAP
from zkperm.crypto.jubjub import generator
from zkperm.errors import CircuitError, PolicyError
from zkperm.identity.credentials import (
    INT_OFFSET,
    Attribute,
    Claim,
    VerifiableCredential,
    claim_hash_field,
    key_code,
    value_code,
)
from zkperm.policy.conditions import (
    MEMBERSHIP_OPS,
    OPERATORS,
    RANGE_OPS,
    AuxData,
    Condition,
    select_claims,
)

SCHEMES = ("baseline", "commit_and_prove")
RANGE_BITS = 64
STRING_BITS = 253  # packed SHA-256 codes are < 2^253


@dataclass(frozen=True)
class MembershipWitness:
    """Leaf position and path for one IN/NOTIN condition.

    For IN the leaf is the value code itself, for NOTIN it is the gap
    ``(lo, hi)`` containing the value.
    """

    path: MerklePath
    lo: int = 0
    hi: int = 0


@dataclass(frozen=True)
class CircuitInputs:
    eta: int
    subject_public_key: Point
    eta_signature: Signature
    issuer_public_key: Point
    claims: tuple[Claim, ...]
    claim_signatures: tuple[Signature, ...]
    claim_hashes: tuple[int, ...]
    membership: tuple[MembershipWitness | None, ...]
    roots: dict
    timestamp: int


def root_keys(conditions) -> list[tuple[str, str]]:
    keys: list[tuple[str, str]] = []
    for cond in conditions:
        if cond.operator in MEMBERSHIP_OPS and (cond.operator, cond.value) not in keys:
            keys.append((cond.operator, str(cond.value)))
    return keys


def root_input_name(operator: str, ref: str) -> str:
    return f"root:{operator}:{ref}"


def needs_timestamp(conditions) -> bool:
    return any(c.time_relative for c in conditions)


def _compare_bits(cond: Condition) -> int:
    return STRING_BITS if cond.kind == "string" else RANGE_BITS


def _comp_check(
    cs: Builder,
    cond: Condition,
    value: LC,
    timestamp: LC | None,
    roots: dict,
    member: MembershipWitness | None,
    depth: int,
) -> None:
    op = cond.operator
    if op in MEMBERSHIP_OPS:
        _membership_check(cs, cond, value, roots[(op, str(cond.value))], member, depth)
        return
    if cond.time_relative:
        # threshold code = (ts - offset) + 2^63, computed in-circuit from the public ts
        target = timestamp + (INT_OFFSET - int(cond.value))
    else:
        target = LC.const(value_code(cond.kind, cond.value))
    if op == "EQ":
        cs.assert_equal(value, target)
    elif op == "NEQ":
        cs.assert_nonzero(value - target)
    else:
        diff = {
            "GEQ": value - target,
            "GT": value - target - 1,
            "LEQ": target - value,
            "LT": target - value - 1,
        }[op]
        cs.assert_in_range(diff, RANGE_BITS)


def _membership_check(
    cs: Builder,
    cond: Condition,
    value: LC,
    root: LC,
    member: MembershipWitness,
    depth: int,
) -> None:
    siblings = [
        (cs.alloc(digest_as_field(sib)), cs.boolean(int(is_left)))
        for sib, is_left in member.path.siblings
    ]
    if len(siblings) != depth:
        raise CircuitError(f"membership path has {len(siblings)} levels, circuit expects {depth}")
    if cond.operator == "IN":
        cs.assert_nonzero(value)  # the zero leaf pads the tree
        leaf = value
    else:
        width = _compare_bits(cond)
        lo, hi = cs.alloc(member.lo), cs.alloc(member.hi)
        lo_lt_hi = cs.less_than(lo, hi, width)
        lo_lt_x = cs.less_than(lo, value, width)
        x_lt_hi = cs.less_than(value, hi, width)
        # interior gap: lo < x and x < hi; wrapping gap: lo < x or x < hi
        both = cs.mul(lo_lt_x, x_lt_hi)
        either = lo_lt_x + x_lt_hi - both
        inside = cs.select(lo_lt_hi, both, either)
        cs.assert_equal(inside, 1)
        leaf = mimc_hash(cs, [lo, hi], iv=TAG_GAP)
    cs.assert_equal(merkle_root(cs, leaf, siblings), root)


def synthesize(
    cs: Builder, conditions: tuple[Condition, ...], scheme: str, depth: int, inp: CircuitInputs
) -> None:
    eta = cs.input("eta", inp.eta)
    hashes = [cs.input(f"H[{i}]", h) for i, h in enumerate(inp.claim_hashes)]
    issuer: PointVar = (
        cs.input("issuer.x", inp.issuer_public_key.x),
        cs.input("issuer.y", inp.issuer_public_key.y),
    )
    roots = {
        key: cs.input(root_input_name(*key), inp.roots[key]) for key in root_keys(conditions)
    }
    timestamp = cs.input("timestamp", inp.timestamp) if needs_timestamp(conditions) else None

    # key binding
    pk_s: PointVar = (cs.alloc(inp.subject_public_key.x), cs.alloc(inp.subject_public_key.y))
    sig = inp.eta_signature
    r_eta = (cs.alloc(sig.commitment_point.x), cs.alloc(sig.commitment_point.y))
    eddsa_verify(cs, pk_s, r_eta, sig.response_scalar, eta)

    for i, cond in enumerate(conditions):
        claim = inp.claims[i]
        pk = claim.subject_public_key
        px, py = cs.alloc(pk.x), cs.alloc(pk.y)
        cs.assert_equal(px, pk_s[0])
        cs.assert_equal(py, pk_s[1])
        attr = claim.attribute
        value = cs.alloc(value_code(attr.kind, attr.value))
        h = mimc_hash(cs, [px, py, key_code(cond.key, cond.kind), value], iv=TAG_CLAIM)
        cs.assert_equal(h, hashes[i])
        _comp_check(cs, cond, value, timestamp, roots, inp.membership[i], depth)
        if scheme == "baseline":
            s = inp.claim_signatures[i]
            r = (cs.alloc(s.commitment_point.x), cs.alloc(s.commitment_point.y))
            eddsa_verify(cs, issuer, r, s.response_scalar, hashes[i])


def _check_shape(conditions, scheme: str, depth: int) -> tuple[Condition, ...]:
    conditions = tuple(conditions)
    if not conditions:
        raise CircuitError("a policy needs at least one condition")
    if scheme not in SCHEMES:
        raise CircuitError(f"unknown scheme {scheme!r}")
    for cond in conditions:
        if cond.operator not in OPERATORS:
            raise CircuitError(f"unsupported operator {cond.operator!r}")
        if not cond.kind:
            raise CircuitError(f"condition on {cond.key!r} has no attribute kind bound")
        if cond.operator in RANGE_OPS and cond.kind == "string":
            raise CircuitError("range operators need a numeric attribute")
        if cond.operator in MEMBERSHIP_OPS and depth < 1:
            raise CircuitError("membership conditions need merkle_depth >= 1")
    return conditions


def _placeholder_value(cond: Condition):
    return "x" if cond.kind == "string" else 0


def _placeholder_inputs(conditions, depth: int) -> CircuitInputs:
    B = generator()
    dummy_sig = Signature(B, 1)
    path = MerklePath(0, tuple((bytes(32), False) for _ in range(depth)))
    claims = tuple(Claim(B, Attribute(c.key, _placeholder_value(c), c.kind)) for c in conditions)
    return CircuitInputs(
        eta=0,
        subject_public_key=B,
        eta_signature=dummy_sig,
        issuer_public_key=B,
        claims=claims,
        claim_signatures=tuple(dummy_sig for _ in conditions),
        claim_hashes=tuple(0 for _ in conditions),
        membership=tuple(
            MembershipWitness(path) if c.operator in MEMBERSHIP_OPS else None for c in conditions
        ),
        roots={k: 0 for k in root_keys(conditions)},
        timestamp=0,
    )


def compile_policy_circuit(conditions, scheme: str, merkle_depth: int = 3) -> ConstraintSystem:
    """Compile ``conditions`` (kinds already bound) for ``scheme``."""
    conditions = _check_shape(conditions, scheme, merkle_depth)
    builder = Builder(record=True)
    synthesize(builder, conditions, scheme, merkle_depth, _placeholder_inputs(conditions, merkle_depth))
    metadata = {
        "scheme": scheme,
        "condition_count": len(conditions),
        "merkle_depth": merkle_depth,
        "conditions": [c.to_json() for c in conditions],
    }
    return ConstraintSystem(
        num_variables=len(builder.values),
        num_public_inputs=len(builder.public_names),
        constraints=builder.constraints,
        public_input_layout=tuple(builder.public_names),
        metadata=metadata,
    )


def circuit_conditions(cs: ConstraintSystem) -> tuple[Condition, ...]:
    return tuple(Condition.from_json(c) for c in cs.metadata["conditions"])


def _membership_witness(cond: Condition, code: int, aux: AuxData, depth: int) -> MembershipWitness:
    members = aux.resolve_set(str(cond.value))
    if members.depth != depth:
        raise CircuitError(f"set {members.ref} has depth {members.depth}, circuit expects {depth}")
    if cond.operator == "IN":
        hit = members.member_witness(code)
        if hit is None:  # non-member: any path, the root check will fail
            from zkperm.crypto import merkle_path

            return MembershipWitness(merkle_path(members.member_tree, 0))
        return MembershipWitness(hit[1])
    gap = members.gap_witness(code)
    if gap is None:  # the value is a member: no gap contains it
        from zkperm.crypto import merkle_path

        lo, hi = members.gaps[0]
        return MembershipWitness(merkle_path(members.gap_tree, 0), lo, hi)
    lo, hi, path = gap
    return MembershipWitness(path, lo, hi)


def _root_values(conditions, aux: AuxData) -> dict:
    return {
        (op, ref): digest_as_field(aux.resolve_set(ref).root_for(op))
        for op, ref in root_keys(conditions)
    }


def generate_witness(
    cs: ConstraintSystem,
    vc: VerifiableCredential,
    subject_secret: int,
    nonce: int,
    aux: AuxData,
    merkle_paths: dict | None = None,
) -> WitnessAssignment:
    """Full assignment for ``cs`` from a credential and the presentation context.

    ``merkle_paths`` optionally maps a condition index to a
    ``MembershipWitness``; missing entries are looked up in ``aux``.
    Non-compliant inputs still yield an assignment, one that violates at
    least one constraint.
    """
    conditions = circuit_conditions(cs)
    scheme = cs.scheme
    depth = cs.metadata["merkle_depth"]
    if not 0 <= nonce < MODULUS:
        raise CircuitError("nonce is not a field element")
    picks = select_claims(vc, conditions)
    if isinstance(picks, int):
        raise CircuitError(f"credential has no claim for condition {-picks - 1}")
    claims = tuple(vc.claims[j] for j in picks)
    sigs = tuple(vc.claim_signatures[j] for j in picks)
    merkle_paths = merkle_paths or {}
    membership = []
    for i, (cond, claim) in enumerate(zip(conditions, claims)):
        if cond.operator not in MEMBERSHIP_OPS:
            membership.append(None)
        elif i in merkle_paths:
            membership.append(merkle_paths[i])
        else:
            attr = claim.attribute
            try:
                code = value_code(attr.kind, attr.value)
            except Exception:
                code = 0
            membership.append(_membership_witness(cond, code, aux, depth))
    try:
        roots = _root_values(conditions, aux)
    except PolicyError as exc:
        raise CircuitError(str(exc)) from exc
    inputs = CircuitInputs(
        eta=nonce,
        subject_public_key=vc.subject_public_key,
        eta_signature=ds_sign_field(subject_secret, nonce),
        issuer_public_key=vc.issuer_public_key,
        claims=claims,
        claim_signatures=sigs,
        claim_hashes=tuple(claim_hash_field(c) for c in claims),
        membership=tuple(membership),
        roots=roots,
        timestamp=aux.current_timestamp,
    )
    builder = Builder(record=False)
    synthesize(builder, conditions, scheme, depth, inputs)
    if len(builder.values) != cs.num_variables or builder.num_constraints != len(cs.constraints):
        raise CircuitError("witness shape does not match the compiled circuit")
    return WitnessAssignment(tuple(builder.values), cs.num_public_inputs)


def public_input_for(
    cs: ConstraintSystem,
    nonce: int,
    claim_hashes,
    issuer_public_key: Point,
    aux: AuxData,
) -> tuple[int, ...]:
    """Assemble the public input vector from its named parts, in layout order."""
    conditions = circuit_conditions(cs)
    named = {"eta": nonce, "issuer.x": issuer_public_key.x, "issuer.y": issuer_public_key.y}
    for i, h in enumerate(claim_hashes):
        named[f"H[{i}]"] = h
    for key, value in _root_values(conditions, aux).items():
        named[root_input_name(*key)] = value
    if needs_timestamp(conditions):
        named["timestamp"] = aux.current_timestamp
    try:
        return tuple(named[name] % MODULUS for name in cs.public_input_layout)
    except KeyError as exc:
        raise CircuitError(f"missing public input {exc.args[0]}") from None
