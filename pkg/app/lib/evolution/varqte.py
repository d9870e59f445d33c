from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.constants import EvolutionMode, GradientKind, MethodTag
from app.constants.status import Status
from app.lib.estimators import GradientMethod, ShotConfig, ShotSampler, evolution_gradient, qgt_lcu, qgt_psr
from app.lib.evolution.base import TimeEvolver, Trajectory, check_time_grid, make_record
from app.lib.evolution.regularization import RegularizationPolicy, solve_update_with_info
from app.lib.exception import QTEException
from app.lib.hamiltonian import PauliSum
from app.lib.sim.circuit import ParameterizedCircuit
from app.types import StepRecord
from app.utils.logger import logger


def default_gradient_method(data):
    """PSR for imaginary time, LCU for real time unless given explicitly."""
    if isinstance(data, dict) and data.get("gradient_method") is None:
        mode = EvolutionMode(data.get("mode", EvolutionMode.IMAGINARY))
        method = GradientMethod.psr() if mode == EvolutionMode.IMAGINARY else GradientMethod.lcu()
        data = {**data, "gradient_method": method}
    return data


class EvolutionConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: EvolutionMode = EvolutionMode.IMAGINARY
    dt: float = 0.01
    T: float = 1.0
    shots: ShotConfig = Field(default_factory=ShotConfig)
    gradient_method: GradientMethod
    regularization: RegularizationPolicy = Field(default_factory=RegularizationPolicy)

    @model_validator(mode="before")
    @classmethod
    def _fill_gradient_method(cls, data):
        return default_gradient_method(data)

    @model_validator(mode="after")
    def _check_grid(self):
        check_time_grid(self.dt, self.T)
        return self


def method_tag_for(mode: EvolutionMode, method: GradientMethod, dual: bool = False) -> MethodTag:
    if mode == EvolutionMode.REAL:
        if method.method != GradientKind.DERIVATIVE_STATE:
            raise QTEException(Status.INCOMPATIBLE_METHOD, "real-time evolution needs the LCU derivative-state method")
        return MethodTag.DUALQRTE_LCU if dual else MethodTag.VARQRTE_LCU
    if method.method == GradientKind.PARAMETER_SHIFT:
        return MethodTag.DUALQITE_PSR if dual else MethodTag.VARQITE_PSR
    return MethodTag.DUALQITE_LCU if dual else MethodTag.VARQITE_LCU


class VarQTE(TimeEvolver):
    """QGT-based evolution: solve g theta_dot = b at every Euler step."""

    def __init__(self, circuit: ParameterizedCircuit, H: PauliSum, config: EvolutionConfig):
        super().__init__(circuit, H, config.mode, config.dt, config.T, config.shots)
        self.config = config
        self._tag = method_tag_for(config.mode, config.gradient_method)

    @property
    def method_tag(self) -> MethodTag:
        return self._tag

    def step(self, theta: np.ndarray, index: int, sampler: ShotSampler) -> Tuple[np.ndarray, StepRecord]:
        start = sampler.circuits
        method = self.config.gradient_method
        if method.method == GradientKind.PARAMETER_SHIFT:
            qgt = qgt_psr(self.circuit, theta, sampler)
        else:
            qgt = qgt_lcu(self.circuit, theta, sampler)
        if sampler.exact:
            lambda_max = qgt.max_eigenvalue()
            if lambda_max > qgt.d / 4 + 1e-9:
                logger.warning(f"step {index}: QGT eigenvalue {lambda_max:.4f} above d/4 = {qgt.d / 4}")
        b = evolution_gradient(self.circuit, theta, self.H, self.mode, method, sampler)
        theta_dot, strength = solve_update_with_info(qgt.g, b.values, self.config.regularization)
        record = make_record(index, self.dt, sampler.circuits - start, sampler.shots, 1, b.norm(), theta_dot)
        record["regularization"] = float(strength)
        return theta_dot, record


def varqte_evolve(
    circuit: ParameterizedCircuit, H: PauliSum, theta0: np.ndarray, config: EvolutionConfig
) -> Trajectory:
    return VarQTE(circuit, H, config).evolve(theta0)
