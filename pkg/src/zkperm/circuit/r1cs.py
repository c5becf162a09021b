"""Rank-1 constraint systems and the builder gadgets are synthesized into.

Variable 0 is the constant one, variables ``1..num_public_inputs`` are the
public inputs, the rest are private. Every constraint asserts
``<A, z> * <B, z> = <C, z>`` over the BLS12-381 scalar field.

Synthesis always carries concrete values: compiling a policy runs the same
gadget code on placeholder inputs, proving runs it on real ones. The
constraint structure never depends on the values.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

from zkperm.crypto.field import FIELD_ID, MODULUS as P
from zkperm.crypto.field import inv
from zkperm.encoding import canonical_json, canonical_loads
from zkperm.errors import CircuitError

HALF = P // 2


class LC:
    """A linear combination of variables together with its current value."""

    __slots__ = ("terms", "value")

    def __init__(self, terms: dict[int, int], value: int):
        self.terms = terms
        self.value = value

    @classmethod
    def const(cls, c: int) -> "LC":
        c %= P
        return cls({0: c} if c else {}, c)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def __add__(self, other: Union["LC", int]) -> "LC":
        if isinstance(other, int):
            other = LC.const(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            s = (terms.get(k, 0) + c) % P
            if s:
                terms[k] = s
            else:
                terms.pop(k, None)
        return LC(terms, (self.value + other.value) % P)

    __radd__ = __add__

    def __neg__(self) -> "LC":
        return LC({k: P - c for k, c in self.terms.items()}, (-self.value) % P)

    def __sub__(self, other: Union["LC", int]) -> "LC":
        if isinstance(other, int):
            other = LC.const(other)
        return self + (-other)

    def __rsub__(self, other: int) -> "LC":
        return LC.const(other) + (-self)

    def __mul__(self, k: int) -> "LC":
        if not isinstance(k, int):
            raise TypeError("use Builder.mul for products of linear combinations")
        k %= P
        if k == 0:
            return LC({}, 0)
        return LC({v: c * k % P for v, c in self.terms.items()}, self.value * k % P)

    __rmul__ = __mul__


Term = Union[LC, int]


def _as_lc(x: Term) -> LC:
    return x if isinstance(x, LC) else LC.const(x)


class Builder:
    """Accumulates variables, values and (optionally) constraints."""

    def __init__(self, record: bool = True):
        self.values: list[int] = [1]
        self.public_names: list[str] = []
        self.constraints: list[tuple[dict, dict, dict]] = []
        self.record = record
        self.num_constraints = 0
        self._private_started = False

    @property
    def one(self) -> LC:
        return LC({0: 1}, 1)

    def input(self, name: str, value: int) -> LC:
        if self._private_started:
            raise CircuitError("public inputs must be allocated before private variables")
        self.public_names.append(name)
        return self._new(value)

    def alloc(self, value: int) -> LC:
        self._private_started = True
        return self._new(value)

    def _new(self, value: int) -> LC:
        idx = len(self.values)
        value %= P
        self.values.append(value)
        return LC({idx: 1}, value)

    def enforce(self, a: Term, b: Term, c: Term) -> None:
        self.num_constraints += 1
        if self.record:
            self.constraints.append((_as_lc(a).terms, _as_lc(b).terms, _as_lc(c).terms))

    # -- basic gadgets ------------------------------------------------------

    def mul(self, a: Term, b: Term) -> LC:
        a, b = _as_lc(a), _as_lc(b)
        if a.is_constant():
            return b * a.value
        if b.is_constant():
            return a * b.value
        out = self.alloc(a.value * b.value)
        self.enforce(a, b, out)
        return out

    def assert_equal(self, a: Term, b: Term) -> None:
        self.enforce(_as_lc(a) - _as_lc(b), self.one, LC({}, 0))

    def assert_nonzero(self, a: Term) -> None:
        a = _as_lc(a)
        w = self.alloc(inv(a.value))
        self.enforce(a, w, self.one)

    def boolean(self, bit: int) -> LC:
        b = self.alloc(bit)
        self.enforce(b, b - 1, LC({}, 0))
        return b

    def to_bits(self, x: Term, nbits: int) -> list[LC]:
        """Little-endian bits of ``x``; unsatisfiable when x >= 2^nbits."""
        x = _as_lc(x)
        bits = [self.boolean((x.value >> i) & 1) for i in range(nbits)]
        terms = {}
        for i, b in enumerate(bits):
            (var,) = b.terms
            terms[var] = (1 << i) % P
        packed = LC(terms, x.value & ((1 << nbits) - 1))
        self.assert_equal(packed, x)
        return bits

    def select(self, bit: LC, if_one: Term, if_zero: Term) -> LC:
        if_one, if_zero = _as_lc(if_one), _as_lc(if_zero)
        diff = if_one - if_zero
        if diff.is_constant() and bit.is_constant():
            return if_zero + diff * bit.value
        if diff.is_constant():
            return if_zero + bit * diff.value
        out = self.alloc(if_zero.value + bit.value * diff.value)
        self.enforce(bit, diff, out - if_zero)
        return out

    def less_than(self, a: Term, b: Term, nbits: int) -> LC:
        """Bit [a < b] for a, b < 2^nbits."""
        t = _as_lc(a) - _as_lc(b) + (1 << nbits)
        bits = self.to_bits(t, nbits + 1)
        return 1 - bits[nbits]

    def assert_in_range(self, x: Term, nbits: int) -> None:
        self.to_bits(x, nbits)


def _signed(c: int) -> int:
    return c - P if c > HALF else c


def _encode_lc(terms: dict[int, int], out: bytearray) -> None:
    out += struct.pack("<I", len(terms))
    for var in sorted(terms):
        c = _signed(terms[var])
        mag = abs(c)
        raw = mag.to_bytes((mag.bit_length() + 7) // 8 or 1, "little")
        out += struct.pack("<Ib", var, -len(raw) if c < 0 else len(raw))
        out += raw


def _decode_lc(data: memoryview, pos: int) -> tuple[dict[int, int], int]:
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    terms = {}
    for _ in range(count):
        var, ln = struct.unpack_from("<Ib", data, pos)
        pos += 5
        mag = int.from_bytes(data[pos : pos + abs(ln)], "little")
        pos += abs(ln)
        terms[var] = (-mag if ln < 0 else mag) % P
    return terms, pos


MAGIC = b"ZKPC"
FORMAT_VERSION = 1
SCHEME_CODES = {"baseline": 0, "commit_and_prove": 1}
FIELD_CODES = {FIELD_ID: 1}


@dataclass
class ConstraintSystem:
    num_variables: int
    num_public_inputs: int  # excludes the constant-one variable
    constraints: list[tuple[dict, dict, dict]]
    public_input_layout: tuple[str, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.public_input_layout) != self.num_public_inputs:
            raise CircuitError("public input layout does not match the input count")

    @property
    def scheme(self) -> str:
        return self.metadata.get("scheme", "")

    def to_bytes(self) -> bytes:
        """Compiled-circuit artifact.

        Header (little-endian): magic ``ZKPC``, u16 version, u8 scheme code,
        u16 condition count, u8 merkle depth, u8 field id, u32 variables,
        u32 public inputs, u32 constraints, u32 metadata length, then the
        canonical-JSON metadata. Each constraint follows as three sparse
        linear combinations: u32 term count, then per term u32 variable
        index, i8 signed coefficient length (negative for a negative
        coefficient) and that many little-endian magnitude bytes.
        """
        meta = canonical_json({"layout": list(self.public_input_layout), **self.metadata})
        out = bytearray(MAGIC)
        out += struct.pack(
            "<HBHBBIIII",
            FORMAT_VERSION,
            SCHEME_CODES.get(self.scheme, 255),
            self.metadata.get("condition_count", 0),
            self.metadata.get("merkle_depth", 0),
            FIELD_CODES[FIELD_ID],
            self.num_variables,
            self.num_public_inputs,
            len(self.constraints),
            len(meta),
        )
        out += meta
        for a, b, c in self.constraints:
            _encode_lc(a, out)
            _encode_lc(b, out)
            _encode_lc(c, out)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ConstraintSystem":
        if data[:4] != MAGIC:
            raise CircuitError("not a compiled circuit")
        try:
            return cls._decode(data)
        except (struct.error, ValueError, KeyError, IndexError, TypeError) as exc:
            raise CircuitError(f"malformed circuit artifact: {exc}") from None

    @classmethod
    def _decode(cls, data: bytes) -> "ConstraintSystem":
        header = struct.unpack_from("<HBHBBIIII", data, 4)
        version, _, _, _, field_code, nvars, npub, ncons, mlen = header
        if version != FORMAT_VERSION or field_code != FIELD_CODES[FIELD_ID]:
            raise CircuitError("unsupported circuit format or field")
        pos = 4 + struct.calcsize("<HBHBBIIII")
        meta = canonical_loads(bytes(data[pos : pos + mlen]))
        pos += mlen
        view = memoryview(data)
        constraints = []
        for _ in range(ncons):
            a, pos = _decode_lc(view, pos)
            b, pos = _decode_lc(view, pos)
            c, pos = _decode_lc(view, pos)
            constraints.append((a, b, c))
        if pos != len(data):
            raise ValueError("trailing bytes after the last constraint")
        layout = tuple(meta.pop("layout"))
        return cls(nvars, npub, constraints, layout, meta)

    @cached_property
    def artifact(self) -> bytes:
        return self.to_bytes()

    @cached_property
    def digest(self) -> bytes:
        return hashlib.sha256(self.artifact).digest()

    def is_satisfied(self, values: list[int]) -> bool:
        return self.first_violation(values) is None

    def first_violation(self, values: list[int]) -> int | None:
        if len(values) != self.num_variables or values[0] != 1:
            return -1
        for i, (a, b, c) in enumerate(self.constraints):
            av = sum(values[k] * v for k, v in a.items())
            bv = sum(values[k] * v for k, v in b.items())
            cv = sum(values[k] * v for k, v in c.items())
            if (av * bv - cv) % P:
                return i
        return None


def constraint_count(cs: ConstraintSystem) -> int:
    return len(cs.constraints)


@dataclass(frozen=True)
class WitnessAssignment:
    values: tuple[int, ...]
    num_public_inputs: int

    @property
    def public_segment(self) -> tuple[int, ...]:
        return self.values[1 : 1 + self.num_public_inputs]


def lc_value(terms: dict[int, int], values: Iterable[int]) -> int:
    vals = list(values)
    return sum(vals[k] * c for k, c in terms.items()) % P
