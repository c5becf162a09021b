"""Minimal constant-product liquidity pool with integer arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isqrt

TOKENS = ("token1", "token2")


class PoolError(Exception):
    pass


@dataclass
class PoolState:
    reserves: list[int] = field(default_factory=lambda: [0, 0])
    lp_shares: dict[str, int] = field(default_factory=dict)

    @property
    def total_shares(self) -> int:
        return sum(self.lp_shares.values())

    def copy(self) -> "PoolState":
        return PoolState(list(self.reserves), dict(self.lp_shares))

    def to_json(self) -> dict:
        return {"lp_shares": dict(sorted(self.lp_shares.items())), "reserves": list(self.reserves)}

    @classmethod
    def from_json(cls, obj: dict) -> "PoolState":
        return cls(list(obj["reserves"]), dict(obj["lp_shares"]))


def _debit(balances: dict, token: str, amount: int) -> None:
    if amount < 0 or balances.get(token, 0) < amount:
        raise PoolError(f"insufficient {token} balance")
    balances[token] -= amount


def deposit(pool: PoolState, balances: dict, account: str, amount1: int, amount2: int) -> int:
    """Add liquidity; mints sqrt(a1*a2) shares initially, proportional shares after."""
    if amount1 <= 0 or amount2 <= 0:
        raise PoolError("deposit amounts must be positive")
    total = pool.total_shares
    r1, r2 = pool.reserves
    if total == 0:
        minted = isqrt(amount1 * amount2)
    else:
        minted = min(amount1 * total // r1, amount2 * total // r2)
    if minted <= 0:
        raise PoolError("deposit too small to mint shares")
    _debit(balances, "token1", amount1)
    _debit(balances, "token2", amount2)
    pool.reserves = [r1 + amount1, r2 + amount2]
    pool.lp_shares[account] = pool.lp_shares.get(account, 0) + minted
    return minted


def swap(pool: PoolState, balances: dict, token_in: str, amount_in: int, min_out: int = 0) -> int:
    """Sell ``amount_in`` of ``token_in``; the reserve product never decreases."""
    if token_in not in TOKENS:
        raise PoolError(f"unknown token {token_in!r}")
    if amount_in <= 0:
        raise PoolError("swap amount must be positive")
    i = TOKENS.index(token_in)
    r_in, r_out = pool.reserves[i], pool.reserves[1 - i]
    out = r_out * amount_in // (r_in + amount_in)
    if out <= 0 or out < min_out:
        raise PoolError("swap output below minimum")
    _debit(balances, token_in, amount_in)
    token_out = TOKENS[1 - i]
    balances[token_out] = balances.get(token_out, 0) + out
    reserves = [0, 0]
    reserves[i], reserves[1 - i] = r_in + amount_in, r_out - out
    pool.reserves = reserves
    return out
