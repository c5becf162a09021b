"""Groth16 over BLS12-381.

Setup derives the trapdoor (tau, alpha, beta, gamma, delta) by hashing the
reference-string seed together with the circuit digest, so it is
reproducible and completely insecure outside tests.

The QAP domain holds one row per constraint plus one row ``A = z_i`` per
public input (including the constant one), which keeps the public
polynomials linearly independent.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

from py_arkworks_bls12381 import GT, G1Point, G2Point, Scalar

from zkperm.circuit.r1cs import ConstraintSystem
from zkperm.crypto.field import MODULUS as P
from zkperm.crypto.field import inv
from zkperm.errors import ProofError
from zkperm.proofsys.domain import EvaluationDomain

G1_BYTES, G2_BYTES = 48, 96
PROOF_BYTES = 2 * G1_BYTES + G2_BYTES
PAIRINGS_PER_VERIFY = 4


def _g1_bytes(p: G1Point) -> bytes:
    return bytes(p.to_compressed_bytes())


def _g2_bytes(p: G2Point) -> bytes:
    return bytes(p.to_compressed_bytes())


def _scalars(values) -> list[Scalar]:
    return [Scalar(v) for v in values]


class FixedBase:
    """Byte-windowed table of multiples of one base point."""

    def __init__(self, base, identity):
        self.identity = identity
        self.table = []
        g = base
        for _ in range(32):
            row = [identity]
            acc = identity
            for _ in range(255):
                acc = acc + g
                row.append(acc)
            self.table.append(row)
            g = row[255] + g

    def mul(self, x: int):
        acc = None
        for row, d in zip(self.table, (x % P).to_bytes(32, "little")):
            if d:
                acc = row[d] if acc is None else acc + row[d]
        return self.identity if acc is None else acc


def _trapdoor(seed: bytes, digest: bytes) -> dict[str, int]:
    out = {}
    for label in ("tau", "alpha", "beta", "gamma", "delta"):
        counter = 0
        while True:
            h = hashlib.sha256(
                b"zkperm/srs/" + label.encode() + counter.to_bytes(4, "big") + seed + digest
            ).digest()
            value = int.from_bytes(h, "big") % P
            if value:
                out[label] = value
                break
            counter += 1
    return out


def qap_domain(cs: ConstraintSystem) -> EvaluationDomain:
    return EvaluationDomain.at_least(len(cs.constraints) + cs.num_public_inputs + 1)


@dataclass
class ProvingMaterial:
    alpha_g1: G1Point
    beta_g1: G1Point
    beta_g2: G2Point
    delta_g1: G1Point
    delta_g2: G2Point
    a_query: list
    b_g1_query: list
    b_g2_query: list
    l_query: list
    h_query: list

    def to_bytes(self) -> bytes:
        parts = [
            struct.pack("<IIII", len(self.a_query), len(self.l_query), len(self.h_query), 0),
            _g1_bytes(self.alpha_g1),
            _g1_bytes(self.beta_g1),
            _g2_bytes(self.beta_g2),
            _g1_bytes(self.delta_g1),
            _g2_bytes(self.delta_g2),
        ]
        parts += [_g1_bytes(p) for p in self.a_query]
        parts += [_g1_bytes(p) for p in self.b_g1_query]
        parts += [_g2_bytes(p) for p in self.b_g2_query]
        parts += [_g1_bytes(p) for p in self.l_query]
        parts += [_g1_bytes(p) for p in self.h_query]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProvingMaterial":
        nvars, nl, nh, _ = struct.unpack_from("<IIII", data)
        pos = 16

        def take(kind, size, count):
            nonlocal pos
            out = []
            for _ in range(count):
                out.append(kind.from_compressed_bytes_unchecked(bytes(data[pos : pos + size])))
                pos += size
            return out

        a1, b1 = take(G1Point, G1_BYTES, 2)
        (b2,) = take(G2Point, G2_BYTES, 1)
        (d1,) = take(G1Point, G1_BYTES, 1)
        (d2,) = take(G2Point, G2_BYTES, 1)
        aq = take(G1Point, G1_BYTES, nvars)
        b1q = take(G1Point, G1_BYTES, nvars)
        b2q = take(G2Point, G2_BYTES, nvars)
        lq = take(G1Point, G1_BYTES, nl)
        hq = take(G1Point, G1_BYTES, nh)
        return cls(a1, b1, b2, d1, d2, aq, b1q, b2q, lq, hq)


@dataclass
class VerifyingMaterial:
    alpha_g1: G1Point
    beta_g2: G2Point
    gamma_g2: G2Point
    delta_g2: G2Point
    ic: list

    def to_bytes(self) -> bytes:
        head = _g1_bytes(self.alpha_g1) + _g2_bytes(self.beta_g2)
        head += _g2_bytes(self.gamma_g2) + _g2_bytes(self.delta_g2)
        return head + b"".join(_g1_bytes(p) for p in self.ic)

    @classmethod
    def from_bytes(cls, data: bytes, num_public_inputs: int) -> "VerifyingMaterial":
        expected = G1_BYTES + 3 * G2_BYTES + (num_public_inputs + 1) * G1_BYTES
        if len(data) != expected:
            raise ProofError("verification key has the wrong length")
        alpha = G1Point.from_compressed_bytes(bytes(data[:48]))
        beta, gamma, delta = (
            G2Point.from_compressed_bytes(bytes(data[48 + 96 * i : 144 + 96 * i])) for i in range(3)
        )
        base = G1_BYTES + 3 * G2_BYTES
        ic = [
            G1Point.from_compressed_bytes(bytes(data[base + 48 * i : base + 48 * (i + 1)]))
            for i in range(num_public_inputs + 1)
        ]
        return cls(alpha, beta, gamma, delta, ic)


def _evaluate_qap(cs: ConstraintSystem, lagrange: list[int]) -> tuple[list, list, list]:
    u = [0] * cs.num_variables
    v = [0] * cs.num_variables
    w = [0] * cs.num_variables
    for lj, (a, b, c) in zip(lagrange, cs.constraints):
        for k, co in a.items():
            u[k] += co * lj
        for k, co in b.items():
            v[k] += co * lj
        for k, co in c.items():
            w[k] += co * lj
    m = len(cs.constraints)
    for i in range(cs.num_public_inputs + 1):
        u[i] += lagrange[m + i]
    return [x % P for x in u], [x % P for x in v], [x % P for x in w]


def setup(cs: ConstraintSystem, seed: bytes) -> tuple[ProvingMaterial, VerifyingMaterial]:
    t = _trapdoor(seed, cs.digest)
    tau, alpha, beta, gamma, delta = (t[k] for k in ("tau", "alpha", "beta", "gamma", "delta"))
    domain = qap_domain(cs)
    u, v, w = _evaluate_qap(cs, domain.lagrange_at(tau))

    g1 = FixedBase(G1Point(), G1Point.identity())
    g2 = FixedBase(G2Point(), G2Point.identity())
    npub = cs.num_public_inputs
    gamma_inv, delta_inv = inv(gamma), inv(delta)
    mixed = [(beta * uk + alpha * vk + wk) % P for uk, vk, wk in zip(u, v, w)]
    ic = [g1.mul(x * gamma_inv) for x in mixed[: npub + 1]]
    l_query = [g1.mul(x * delta_inv) for x in mixed[npub + 1 :]]
    a_query = [g1.mul(x) for x in u]
    b_g1 = [g1.mul(x) for x in v]
    b_g2 = [g2.mul(x) for x in v]
    z_delta = domain.vanishing_at(tau) * delta_inv % P
    h_query = []
    power = z_delta
    for _ in range(domain.size - 1):
        h_query.append(g1.mul(power))
        power = power * tau % P

    pm = ProvingMaterial(
        g1.mul(alpha), g1.mul(beta), g2.mul(beta), g1.mul(delta), g2.mul(delta),
        a_query, b_g1, b_g2, l_query, h_query,
    )
    vm = VerifyingMaterial(g1.mul(alpha), g2.mul(beta), g2.mul(gamma), g2.mul(delta), ic)
    return pm, vm


def _row_values(cs: ConstraintSystem, z: list[int], size: int) -> tuple[list, list, list]:
    a_ev, b_ev, c_ev = [], [], []
    for a, b, c in cs.constraints:
        a_ev.append(sum(z[k] * co for k, co in a.items()) % P)
        b_ev.append(sum(z[k] * co for k, co in b.items()) % P)
        c_ev.append(sum(z[k] * co for k, co in c.items()) % P)
    a_ev += z[: cs.num_public_inputs + 1]
    pad = size - len(a_ev)
    return a_ev + [0] * pad, b_ev + [0] * (size - len(b_ev)), c_ev + [0] * (size - len(c_ev))


def _quotient(cs: ConstraintSystem, z: list[int]) -> list[int]:
    domain = qap_domain(cs)
    a_ev, b_ev, c_ev = _row_values(cs, z, domain.size)
    a_cs = domain.coset_fft(domain.ifft(a_ev))
    b_cs = domain.coset_fft(domain.ifft(b_ev))
    c_cs = domain.coset_fft(domain.ifft(c_ev))
    z_inv = inv(domain.vanishing_at(domain.coset_shift))
    h_cs = [(x * y - c) * z_inv % P for x, y, c in zip(a_cs, b_cs, c_cs)]
    return domain.coset_ifft(h_cs)[: domain.size - 1]


def _blinding(digest: bytes, z: list[int]) -> tuple[int, int]:
    h = hashlib.sha256(b"zkperm/groth16/blind" + digest)
    for x in z:
        h.update(x.to_bytes(32, "big"))
    seed = h.digest()
    r = int.from_bytes(hashlib.sha256(seed + b"r").digest(), "big") % P
    s = int.from_bytes(hashlib.sha256(seed + b"s").digest(), "big") % P
    return r, s


def prove(cs: ConstraintSystem, pm: ProvingMaterial, values) -> bytes:
    z = list(values)
    h = _quotient(cs, z)
    r, s = _blinding(cs.digest, z)
    zs = _scalars(z)
    npub = cs.num_public_inputs
    sr, ss = Scalar(r), Scalar(s)

    a = pm.alpha_g1 + G1Point.multiexp_unchecked(pm.a_query, zs) + pm.delta_g1 * sr
    b2 = pm.beta_g2 + G2Point.multiexp_unchecked(pm.b_g2_query, zs) + pm.delta_g2 * ss
    b1 = pm.beta_g1 + G1Point.multiexp_unchecked(pm.b_g1_query, zs) + pm.delta_g1 * ss
    c = G1Point.multiexp_unchecked(pm.l_query, zs[npub + 1 :])
    c = c + G1Point.multiexp_unchecked(pm.h_query, _scalars(h))
    c = c + a * ss + b1 * sr - pm.delta_g1 * Scalar(r * s % P)
    return _g1_bytes(a) + _g2_bytes(b2) + _g1_bytes(c)


def verify(vm: VerifyingMaterial, public_input, proof: bytes) -> bool:
    if len(proof) != PROOF_BYTES or len(public_input) + 1 != len(vm.ic):
        return False
    if any(not 0 <= x < P for x in public_input):
        return False
    try:
        a = G1Point.from_compressed_bytes(list(proof[:48]))
        b = G2Point.from_compressed_bytes(list(proof[48:144]))
        c = G1Point.from_compressed_bytes(list(proof[144:]))
    except (ValueError, TypeError):
        return False
    acc = vm.ic[0]
    if public_input:
        acc = acc + G1Point.multiexp_unchecked(vm.ic[1:], _scalars(public_input))
    return GT.multi_pairing([a, -vm.alpha_g1, -acc, -c], [b, vm.beta_g2, vm.gamma_g2, vm.delta_g2]) == GT.one()
