from zkperm.policy.conditions import (
    EIGHTEEN_YEARS,
    OPERATORS,
    AuxData,
    Condition,
    MembershipSet,
    bind_conditions,
    comp_check_plain,
    evaluate_policy_plain,
    first_failing_condition,
)
from zkperm.policy.vpr import VprZk, build_vpr, canonical_scheme, load_vpr

__all__ = [
    "EIGHTEEN_YEARS",
    "OPERATORS",
    "AuxData",
    "Condition",
    "MembershipSet",
    "VprZk",
    "bind_conditions",
    "build_vpr",
    "canonical_scheme",
    "comp_check_plain",
    "evaluate_policy_plain",
    "first_failing_condition",
    "load_vpr",
]
