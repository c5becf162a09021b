"""Jubjub: the twisted Edwards curve -x^2 + y^2 = 1 + d x^2 y^2 over the
BLS12-381 scalar field. Its coordinates are native circuit values, so
signature checks cost no field emulation in-circuit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from zkperm.crypto.field import MODULUS as P
from zkperm.crypto.field import inv, sqrt

A = P - 1
D = (-10240 * pow(10241, P - 2, P)) % P
SUBGROUP_ORDER = 0x0E7DB4EA6533AFA906673B0101343B00A6682093CCC81082D0970E5ED6F72CB7
COFACTOR = 8


@dataclass(frozen=True)
class Point:
    x: int
    y: int

    def is_on_curve(self) -> bool:
        x2, y2 = self.x * self.x % P, self.y * self.y % P
        return (A * x2 + y2 - 1 - D * x2 * y2) % P == 0

    def __add__(self, other: "Point") -> "Point":
        return edwards_add(self, other)

    def __neg__(self) -> "Point":
        return Point((-self.x) % P, self.y)

    def __mul__(self, k: int) -> "Point":
        return scalar_mult(self, k)

    __rmul__ = __mul__

    def compress(self) -> bytes:
        """32-byte big-endian y with the parity of x in the top bit."""
        return ((self.x & 1) << 255 | self.y).to_bytes(32, "big")

    def to_json(self) -> str:
        return self.compress().hex()

    @classmethod
    def decompress(cls, data: bytes) -> "Point":
        if len(data) != 32:
            raise ValueError("compressed point must be 32 bytes")
        raw = int.from_bytes(data, "big")
        sign, y = raw >> 255, raw & ((1 << 255) - 1)
        if y >= P:
            raise ValueError("y coordinate out of range")
        y2 = y * y % P
        x = sqrt((y2 - 1) * inv(D * y2 - A) % P)
        if x is None:
            raise ValueError("not a curve point")
        if x & 1 != sign:
            if x == 0:
                raise ValueError("non-canonical encoding")
            x = P - x
        return cls(x, y)

    @classmethod
    def from_hex(cls, text: str) -> "Point":
        return cls.decompress(bytes.fromhex(text))


IDENTITY = Point(0, 1)


def edwards_add(p: Point, q: Point) -> Point:
    x1, y1, x2, y2 = p.x, p.y, q.x, q.y
    t = D * x1 * x2 % P * y1 % P * y2 % P
    x3 = (x1 * y2 + y1 * x2) * inv(1 + t) % P
    y3 = (y1 * y2 - A * x1 * x2) * inv(1 - t) % P
    return Point(x3, y3)


def _to_ext(p: Point) -> tuple[int, int, int, int]:
    return p.x, p.y, 1, p.x * p.y % P


def _ext_add(p1, p2):
    # add-2008-hwcd-3 is only for a = -1 with k = 2d
    x1, y1, z1, t1 = p1
    x2, y2, z2, t2 = p2
    a = (y1 - x1) * (y2 - x2) % P
    b = (y1 + x1) * (y2 + x2) % P
    c = t1 * 2 * D % P * t2 % P
    d = z1 * 2 * z2 % P
    e, f, g, h = b - a, d - c, d + c, b + a
    return e * f % P, g * h % P, f * g % P, e * h % P


def _ext_double(p1):
    x1, y1, z1, _ = p1
    a = x1 * x1 % P
    b = y1 * y1 % P
    c = 2 * z1 * z1 % P
    d = A * a % P
    e = ((x1 + y1) * (x1 + y1) - a - b) % P
    g = d + b
    f = g - c
    h = d - b
    return e * f % P, g * h % P, f * g % P, e * h % P


def scalar_mult(p: Point, k: int) -> Point:
    if k < 0:
        return scalar_mult(-p, -k)
    acc = (0, 1, 1, 0)
    base = _to_ext(p)
    for bit in bin(k)[2:] if k else "":
        acc = _ext_double(acc)
        if bit == "1":
            acc = _ext_add(acc, base)
    x, y, z, _ = acc
    zi = inv(z)
    return Point(x * zi % P, y * zi % P)


def in_prime_subgroup(p: Point) -> bool:
    return p.is_on_curve() and scalar_mult(p, SUBGROUP_ORDER) == IDENTITY


@lru_cache(maxsize=1)
def generator() -> Point:
    """Deterministic prime-order base point: the first y = 2, 3, ... that lies
    on the curve, cofactor-cleared."""
    y = 2
    while True:
        y2 = y * y % P
        x = sqrt((y2 - 1) * inv(D * y2 - A) % P)
        if x is not None:
            base = scalar_mult(Point(min(x, P - x), y), COFACTOR)
            if base != IDENTITY and scalar_mult(base, SUBGROUP_ORDER) == IDENTITY:
                return base
        y += 1
