"""Circuit gadgets: MiMC, Jubjub arithmetic, EdDSA, comparisons, Merkle paths."""

from __future__ import annotations

from zkperm.circuit.r1cs import LC, Builder, Term, _as_lc
from zkperm.crypto.field import MODULUS as P
from zkperm.crypto.field import inv
from zkperm.crypto.hashing import TAG_NODE, TAG_SIG, mimc_constants
from zkperm.crypto.jubjub import D, Point, generator

PointVar = tuple[LC, LC]

SCALAR_BITS = 252  # Jubjub subgroup order < 2^252
CHALLENGE_BITS = 255


def mimc_permute(cs: Builder, x: Term, key: Term) -> LC:
    x, key = _as_lc(x), _as_lc(key)
    for c in mimc_constants():
        t = x + key + c
        t2 = cs.mul(t, t)
        t4 = cs.mul(t2, t2)
        x = cs.mul(t4, t)
    return x + key


def mimc_hash(cs: Builder, values: list[Term], iv: Term = 0) -> LC:
    h = _as_lc(iv)
    for m in values:
        m = _as_lc(m)
        h = mimc_permute(cs, m, h) + h + m
    return h


def const_point(p: Point) -> PointVar:
    return LC.const(p.x), LC.const(p.y)


def point_add(cs: Builder, p: PointVar, q: PointVar) -> PointVar:
    """Complete twisted Edwards addition (a = -1): 7 constraints in general."""
    x1, y1 = p
    x2, y2 = q
    p1 = cs.mul(x1, y2)
    p2 = cs.mul(y1, x2)
    p3 = cs.mul(x1, x2)
    p4 = cs.mul(y1, y2)
    t = cs.mul(p3, p4)
    num_x = p1 + p2
    num_y = p4 + p3
    den_x = 1 + t * D
    den_y = 1 - t * D
    if den_x.is_constant():
        return num_x * inv(den_x.value), num_y * inv(den_y.value)
    x3 = cs.alloc(num_x.value * inv(den_x.value))
    cs.enforce(x3, den_x, num_x)
    y3 = cs.alloc(num_y.value * inv(den_y.value))
    cs.enforce(y3, den_y, num_y)
    return x3, y3


def assert_on_curve(cs: Builder, p: PointVar) -> None:
    x, y = p
    x2 = cs.mul(x, x)
    y2 = cs.mul(y, y)
    cs.enforce(x2 * D, y2, y2 - x2 - 1)


def fixed_base_mult(cs: Builder, bits: list[LC], base: Point) -> PointVar:
    """sum_i bit_i * 2^i * base with precomputed constant multiples."""
    acc = const_point(Point(0, 1))
    power = base
    for b in bits:
        addend = (b * power.x, 1 + b * ((power.y - 1) % P))
        acc = point_add(cs, acc, addend)
        power = power + power
    return acc


def var_base_mult(cs: Builder, bits: list[LC], point: PointVar) -> PointVar:
    """Double-and-add from the most significant bit; 16 constraints per bit."""
    acc = const_point(Point(0, 1))
    for b in reversed(bits):
        acc = point_add(cs, acc, acc)
        summed = point_add(cs, acc, point)
        acc = (cs.select(b, summed[0], acc[0]), cs.select(b, summed[1], acc[1]))
    return acc


def eddsa_verify(
    cs: Builder, public_key: PointVar, commitment: PointVar, response: int, message: Term
) -> None:
    """Enforce response * B == R + H(R, A, m) * A."""
    assert_on_curve(cs, commitment)
    s_bits = [cs.boolean((response >> i) & 1) for i in range(SCALAR_BITS)]
    k = mimc_hash(
        cs, [commitment[0], commitment[1], public_key[0], public_key[1], message], iv=TAG_SIG
    )
    k_bits = cs.to_bits(k, CHALLENGE_BITS)
    lhs = fixed_base_mult(cs, s_bits, generator())
    rhs = point_add(cs, commitment, var_base_mult(cs, k_bits, public_key))
    cs.assert_equal(lhs[0], rhs[0])
    cs.assert_equal(lhs[1], rhs[1])


def merkle_root(cs: Builder, leaf: LC, path: list[tuple[LC, LC]]) -> LC:
    """Fold ``leaf`` through (sibling, sibling_is_left) pairs."""
    cur = leaf
    for sibling, is_left in path:
        left = cs.select(is_left, sibling, cur)
        right = cur + sibling - left
        cur = mimc_hash(cs, [left, right], iv=TAG_NODE)
    return cur
