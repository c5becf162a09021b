"""Radix-2 evaluation domains over the BLS12-381 scalar field."""

from __future__ import annotations

from zkperm.crypto.field import MODULUS as P
from zkperm.crypto.field import MULTIPLICATIVE_GENERATOR
from zkperm.crypto.field import batch_inv, inv, root_of_unity


def _fft(a: list[int], roots: list[int]) -> list[int]:
    n = len(a)
    if n == 1:
        return a
    half = roots[0::2]
    even = _fft(a[0::2], half)
    odd = _fft(a[1::2], half)
    t = [o * w % P for o, w in zip(odd, roots)]
    return [(e + x) % P for e, x in zip(even, t)] + [(e - x) % P for e, x in zip(even, t)]


class EvaluationDomain:
    """The multiplicative subgroup of size ``n`` (a power of two)."""

    def __init__(self, n: int):
        if n < 1 or n & (n - 1):
            raise ValueError("domain size must be a power of two")
        self.size = n
        self.omega = root_of_unity(n)
        self.omega_inv = inv(self.omega)
        self.size_inv = inv(n)
        self.coset_shift = MULTIPLICATIVE_GENERATOR

    @classmethod
    def at_least(cls, n: int) -> "EvaluationDomain":
        size = 1
        while size < n:
            size <<= 1
        return cls(size)

    def _powers(self, base: int, count: int) -> list[int]:
        out = [1] * count
        for i in range(1, count):
            out[i] = out[i - 1] * base % P
        return out

    def elements(self) -> list[int]:
        return self._powers(self.omega, self.size)

    def fft(self, coeffs: list[int]) -> list[int]:
        coeffs = list(coeffs) + [0] * (self.size - len(coeffs))
        return _fft(coeffs, self._powers(self.omega, self.size // 2 or 1))

    def ifft(self, evals: list[int]) -> list[int]:
        out = _fft(list(evals), self._powers(self.omega_inv, self.size // 2 or 1))
        return [v * self.size_inv % P for v in out]

    def coset_fft(self, coeffs: list[int]) -> list[int]:
        shifts = self._powers(self.coset_shift, len(coeffs))
        return self.fft([c * s % P for c, s in zip(coeffs, shifts)])

    def coset_ifft(self, evals: list[int]) -> list[int]:
        coeffs = self.ifft(evals)
        shifts = self._powers(inv(self.coset_shift), len(coeffs))
        return [c * s % P for c, s in zip(coeffs, shifts)]

    def vanishing_at(self, x: int) -> int:
        return (pow(x, self.size, P) - 1) % P

    def lagrange_at(self, tau: int) -> list[int]:
        """All Lagrange basis polynomials of the domain evaluated at ``tau``."""
        z = self.vanishing_at(tau)
        if z == 0:
            raise ValueError("tau lies in the domain")
        elems = self.elements()
        denoms = batch_inv([(tau - w) % P for w in elems])
        scale = z * self.size_inv % P
        return [scale * w % P * d % P for w, d in zip(elems, denoms)]
