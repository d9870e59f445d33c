from .circuit import (
    AnsatzSpec,
    Gate,
    ParameterizedCircuit,
    build_ansatz,
    initial_parameter_binding,
    rot_pair_for_basis,
    run_circuit,
)
from .statevector import StateVector, inner_product, state_fidelity

__all__ = [
    "AnsatzSpec",
    "Gate",
    "ParameterizedCircuit",
    "StateVector",
    "build_ansatz",
    "initial_parameter_binding",
    "inner_product",
    "rot_pair_for_basis",
    "run_circuit",
    "state_fidelity",
]
