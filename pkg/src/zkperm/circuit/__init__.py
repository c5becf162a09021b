from zkperm.circuit.compiler import (
    MembershipWitness,
    circuit_conditions,
    compile_policy_circuit,
    generate_witness,
    public_input_for,
)
from zkperm.circuit.r1cs import ConstraintSystem, WitnessAssignment, constraint_count

__all__ = [
    "ConstraintSystem",
    "MembershipWitness",
    "WitnessAssignment",
    "circuit_conditions",
    "compile_policy_circuit",
    "constraint_count",
    "generate_witness",
    "public_input_for",
]
