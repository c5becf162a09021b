"""Abstract verification-cost meter.

The weights are arbitrary units chosen for comparing trends between
schemes and condition counts. They say nothing about real gas prices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

COUNTERS = ("pairing", "signature", "hash", "storage", "public_input")
DEFAULT_WEIGHTS = {
    "pairing": 45_000,
    "signature": 5_000,
    "hash": 60,
    "storage": 20_000,
    "public_input": 6_000,
}


@dataclass
class CostMeter:
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    counters: dict = field(default_factory=lambda: dict.fromkeys(COUNTERS, 0))

    def charge(self, counter: str, times: int = 1) -> None:
        if counter not in self.counters:
            raise KeyError(f"unknown cost counter {counter!r}")
        self.counters[counter] += times

    def reset(self) -> None:
        self.counters = dict.fromkeys(COUNTERS, 0)

    @property
    def total_cost(self) -> int:
        return sum(self.counters[c] * self.weights.get(c, 0) for c in COUNTERS)

    def breakdown(self) -> dict:
        return {**self.counters, "total": self.total_cost}
