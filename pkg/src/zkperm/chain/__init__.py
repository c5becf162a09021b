from zkperm.chain.costs import DEFAULT_WEIGHTS, CostMeter
from zkperm.chain.ledger import (
    AUTHENTICITY_FAIL,
    NONCE_MISMATCH,
    OK,
    POLICY_NOT_FOUND,
    PROOF_INVALID,
    TIMESTAMP_MISMATCH,
    UNTRUSTED_ISSUER,
    ChainError,
    Genesis,
    Ledger,
    LedgerState,
    Receipt,
    public_input_layout,
)
from zkperm.chain.pool import PoolState, deposit, swap

__all__ = [
    "AUTHENTICITY_FAIL",
    "DEFAULT_WEIGHTS",
    "NONCE_MISMATCH",
    "OK",
    "POLICY_NOT_FOUND",
    "PROOF_INVALID",
    "TIMESTAMP_MISMATCH",
    "UNTRUSTED_ISSUER",
    "ChainError",
    "CostMeter",
    "Genesis",
    "Ledger",
    "LedgerState",
    "PoolState",
    "Receipt",
    "deposit",
    "public_input_layout",
    "swap",
]
