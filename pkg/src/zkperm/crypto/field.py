"""Arithmetic in the BLS12-381 scalar field, which hosts every circuit."""

from __future__ import annotations

# BLS12-381 group order r; also the base field of the embedded Jubjub curve.
MODULUS = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
FIELD_ID = "bls12_381.fr"
TWO_ADICITY = 32
MULTIPLICATIVE_GENERATOR = 7

_ODD_PART = (MODULUS - 1) >> TWO_ADICITY


def inv(x: int) -> int:
    """Inverse mod r; zero maps to zero so witness code never raises."""
    x %= MODULUS
    if x == 0:
        return 0
    return pow(x, MODULUS - 2, MODULUS)


def batch_inv(values: list[int]) -> list[int]:
    """Montgomery batch inversion; zeros stay zero."""
    p = MODULUS
    prefix = []
    acc = 1
    for v in values:
        prefix.append(acc)
        if v % p:
            acc = acc * v % p
    acc_inv = pow(acc, p - 2, p)
    out = [0] * len(values)
    for i in range(len(values) - 1, -1, -1):
        v = values[i] % p
        if v:
            out[i] = acc_inv * prefix[i] % p
            acc_inv = acc_inv * v % p
    return out


def is_square(x: int) -> bool:
    x %= MODULUS
    return x == 0 or pow(x, (MODULUS - 1) // 2, MODULUS) == 1


def sqrt(x: int) -> int | None:
    """Tonelli-Shanks square root; returns None for non-residues."""
    p = MODULUS
    x %= p
    if x == 0:
        return 0
    if not is_square(x):
        return None
    z = pow(MULTIPLICATIVE_GENERATOR, _ODD_PART, p)
    m = TWO_ADICITY
    c = z
    t = pow(x, _ODD_PART, p)
    root = pow(x, (_ODD_PART + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m = i
        c = b * b % p
        t = t * c % p
        root = root * b % p
    return root


def root_of_unity(order: int) -> int:
    """Primitive ``order``-th root of unity; ``order`` must be a power of two."""
    if order & (order - 1) or order > 1 << TWO_ADICITY:
        raise ValueError(f"no root of unity of order {order}")
    w = pow(MULTIPLICATIVE_GENERATOR, _ODD_PART, MODULUS)
    return pow(w, (1 << TWO_ADICITY) // order, MODULUS)
