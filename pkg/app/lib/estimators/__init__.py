from .base import EvolutionGradient, GradientMethod, QGTMatrix, gradient_values
from .gradients import (
    energy,
    energy_gradient_b_imag,
    evolution_gradient,
    evolution_gradient_b_real,
    expectation_estimate,
    fidelity,
    fidelity_gradient,
    fidelity_gradient_lcu,
    fidelity_gradient_psr,
    sample_terms,
)
from .qgt import qgt_exact, qgt_lcu, qgt_psr, shifted_fidelities
from .shots import ShotConfig, ShotSampler, as_sampler, sample_binomial_estimate

__all__ = [
    "EvolutionGradient",
    "GradientMethod",
    "QGTMatrix",
    "ShotConfig",
    "ShotSampler",
    "as_sampler",
    "energy",
    "energy_gradient_b_imag",
    "evolution_gradient",
    "evolution_gradient_b_real",
    "expectation_estimate",
    "fidelity",
    "fidelity_gradient",
    "fidelity_gradient_lcu",
    "fidelity_gradient_psr",
    "gradient_values",
    "qgt_exact",
    "qgt_lcu",
    "qgt_psr",
    "sample_binomial_estimate",
    "sample_terms",
    "shifted_fidelities",
]
