"""Policy conditions, auxiliary data and the plain-evaluation oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

from zkperm.crypto import MerklePath, MerkleTree, field_to_digest, merkle_build, merkle_path
from zkperm.crypto.hashing import TAG_GAP, mimc_hash
from zkperm.errors import PolicyError
from zkperm.identity.credentials import (
    INT_MAX,
    INT_MIN,
    Attribute,
    CredentialSchema,
    VerifiableCredential,
    check_value,
    value_code,
    verify_credential,
)

OPERATORS = ("EQ", "NEQ", "GT", "LT", "GEQ", "LEQ", "IN", "NOTIN")
RANGE_OPS = ("GT", "LT", "GEQ", "LEQ")
EQUALITY_OPS = ("EQ", "NEQ")
MEMBERSHIP_OPS = ("IN", "NOTIN")
SET_PREFIX = "set:"
# 18 x 365.25 days
EIGHTEEN_YEARS = 567_993_600
MAX_OFFSET = 1 << 62

Value = Union[int, str]


@dataclass(frozen=True)
class Condition:
    key: str
    operator: str
    value: Value
    time_relative: bool = False
    kind: str = ""  # attribute kind; filled from the schema when the policy is built

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise PolicyError(f"unknown operator {self.operator!r}")
        if not self.key:
            raise PolicyError("condition key must be nonempty")
        if self.operator in MEMBERSHIP_OPS:
            if self.time_relative:
                raise PolicyError("membership conditions cannot be time-relative")
            if not (isinstance(self.value, str) and self.value.startswith(SET_PREFIX)):
                raise PolicyError(f"membership value must be a set reference, got {self.value!r}")
        elif self.time_relative:
            if isinstance(self.value, bool) or not isinstance(self.value, int):
                raise PolicyError("time-relative offset must be an integer")
            if not 0 <= self.value <= MAX_OFFSET:
                raise PolicyError("time-relative offset out of range")
            if self.kind and self.kind == "string":
                raise PolicyError("time-relative condition on a string attribute")
        elif self.operator in RANGE_OPS:
            if isinstance(self.value, bool) or not isinstance(self.value, int):
                raise PolicyError(f"range operator {self.operator} needs an integer value")
        if self.kind:
            if self.operator in RANGE_OPS and self.kind == "string":
                raise PolicyError("range operators need a numeric attribute")
            if self.operator in EQUALITY_OPS and not self.time_relative:
                try:
                    check_value(self.kind, self.value)
                except Exception as exc:
                    raise PolicyError(f"condition value does not match kind {self.kind}") from exc
        if not self.time_relative and self.operator in RANGE_OPS + EQUALITY_OPS:
            if isinstance(self.value, int) and not INT_MIN <= self.value <= INT_MAX:
                raise PolicyError("condition value outside the signed 64-bit range")

    @property
    def proof_type(self) -> str:
        if self.operator in MEMBERSHIP_OPS:
            return "member"
        if self.time_relative:
            return "time"
        return "range" if self.operator in RANGE_OPS else "equal"

    @property
    def set_name(self) -> str:
        return str(self.value)[len(SET_PREFIX):]

    def with_kind(self, kind: str) -> "Condition":
        return Condition(self.key, self.operator, self.value, self.time_relative, kind)

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "kind": self.kind,
            "operator": self.operator,
            "time_relative": self.time_relative,
            "value": self.value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Condition":
        return cls(obj["key"], obj["operator"], obj["value"], obj["time_relative"], obj.get("kind", ""))


def gap_contains(lo: int, hi: int, x: int) -> bool:
    """Circular gap test: (lo, hi) with lo < hi is an interior gap; otherwise
    it wraps around the ends of the sorted set."""
    if lo < hi:
        return lo < x < hi
    return x > lo or x < hi


@dataclass(frozen=True)
class MembershipSet:
    """A set of attribute values committed to two depth-``depth`` trees.

    The member tree has the sorted value codes as leaves (``IN``). The gap
    tree has one leaf per circular gap ``(c_j, c_{j+1 mod m})`` between
    consecutive codes (``NOTIN``), so both trees hold up to 2^depth values.
    """

    name: str
    kind: str
    values: tuple
    depth: int = 3

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise PolicyError("membership set must be nonempty")
        if len(set(self.codes)) != len(self.codes):
            raise PolicyError("membership set has duplicate values")
        if len(self.codes) > 1 << self.depth:
            raise PolicyError(f"{len(self.codes)} values exceed depth-{self.depth} capacity")
        if 0 in self.codes:
            raise PolicyError("value encodes to the padding leaf")

    @property
    def ref(self) -> str:
        return SET_PREFIX + self.name

    @cached_property
    def codes(self) -> tuple[int, ...]:
        return tuple(sorted(value_code(self.kind, v) for v in self.values))

    @cached_property
    def gaps(self) -> tuple[tuple[int, int], ...]:
        c = self.codes
        return tuple((c[j], c[(j + 1) % len(c)]) for j in range(len(c)))

    @cached_property
    def member_tree(self) -> MerkleTree:
        return merkle_build([field_to_digest(c) for c in self.codes], self.depth)

    @cached_property
    def gap_tree(self) -> MerkleTree:
        leaves = [field_to_digest(mimc_hash([lo, hi], iv=TAG_GAP)) for lo, hi in self.gaps]
        return merkle_build(leaves, self.depth)

    def root_for(self, operator: str) -> bytes:
        return (self.member_tree if operator == "IN" else self.gap_tree).root

    def contains_code(self, code: int) -> bool:
        return code in self.codes

    def member_witness(self, code: int) -> tuple[int, MerklePath] | None:
        if code not in self.codes:
            return None
        idx = self.codes.index(code)
        return idx, merkle_path(self.member_tree, idx)

    def gap_witness(self, code: int) -> tuple[int, int, MerklePath] | None:
        for j, (lo, hi) in enumerate(self.gaps):
            if gap_contains(lo, hi, code):
                return lo, hi, merkle_path(self.gap_tree, j)
        return None

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "values": list(self.values), "depth": self.depth}

    @classmethod
    def from_json(cls, obj: dict) -> "MembershipSet":
        return cls(obj["name"], obj["kind"], tuple(obj["values"]), obj["depth"])


@dataclass(frozen=True)
class AuxData:
    membership_sets: dict = field(default_factory=dict)  # set ref -> MembershipSet
    current_timestamp: int = 0

    def resolve_set(self, ref: str) -> MembershipSet:
        try:
            return self.membership_sets[ref]
        except KeyError:
            raise PolicyError(f"unresolved set reference {ref!r}") from None

    def at(self, timestamp: int) -> "AuxData":
        return AuxData(self.membership_sets, timestamp)


def resolve_target(condition: Condition, aux: AuxData) -> int | str:
    if condition.time_relative:
        return aux.current_timestamp - int(condition.value)
    return condition.value


def comp_check_plain(attribute: Attribute, condition: Condition, aux: AuxData) -> bool:
    """Evaluate one condition in the clear. This is the reference the
    circuit is tested against."""
    if attribute.key != condition.key:
        raise PolicyError(f"attribute {attribute.key!r} does not match condition {condition.key!r}")
    op = condition.operator
    if op in MEMBERSHIP_OPS:
        members = aux.resolve_set(str(condition.value))
        if condition.kind and attribute.kind != condition.kind:
            return False
        if attribute.kind != members.kind:
            return False
        inside = members.contains_code(value_code(attribute.kind, attribute.value))
        return inside if op == "IN" else not inside
    if condition.kind and attribute.kind != condition.kind:
        return False
    target = resolve_target(condition, aux)
    if op in EQUALITY_OPS:
        if isinstance(target, str) != (attribute.kind == "string"):
            return op == "NEQ"
        same = attribute.value == target
        return same if op == "EQ" else not same
    if attribute.kind == "string":
        return False
    v = int(attribute.value)
    return {
        "GT": v > target,
        "LT": v < target,
        "GEQ": v >= target,
        "LEQ": v <= target,
    }[op]


def select_claims(vc: VerifiableCredential, conditions) -> list[int] | int:
    """Claim index per condition, or the index of the first condition whose
    key is absent from the credential (returned as a negative ``-(i + 1)``)."""
    picks = []
    for i, cond in enumerate(conditions):
        hit = vc.claim_for(cond.key)
        if hit is None:
            return -(i + 1)
        picks.append(hit[0])
    return picks


def first_failing_condition(vc: VerifiableCredential, conditions, aux: AuxData) -> int | None:
    """Index of the first condition the credential fails, None if all pass."""
    for i, cond in enumerate(conditions):
        hit = vc.claim_for(cond.key)
        if hit is None:
            return i
        try:
            if not comp_check_plain(hit[1].attribute, cond, aux):
                return i
        except PolicyError:
            return i
    return None


def evaluate_policy_plain(vc: VerifiableCredential, vpr, aux: AuxData) -> bool:
    """Conjunction of every condition plus credential authenticity.

    ``vpr`` may be a VprZk or a plain sequence of conditions.
    """
    conditions = getattr(vpr, "conditions", vpr)
    try:
        if not verify_credential(vc):
            return False
        return first_failing_condition(vc, conditions, aux) is None
    except (PolicyError, ValueError, TypeError):
        return False


def bind_conditions(conditions, schema: CredentialSchema) -> tuple[Condition, ...]:
    """Attach schema kinds to conditions, rejecting unknown keys."""
    out = []
    for cond in conditions:
        spec = schema.spec_for(cond.key)
        if spec is None:
            raise PolicyError(f"condition key {cond.key!r} not in schema {schema.schema_id!r}")
        if cond.kind and cond.kind != spec.kind:
            raise PolicyError(f"condition kind {cond.kind} disagrees with schema kind {spec.kind}")
        out.append(cond.with_kind(spec.kind))
    return tuple(out)
