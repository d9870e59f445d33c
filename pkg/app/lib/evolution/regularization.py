from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.constants import (
    L_CURVE_DEFAULT_MAX,
    L_CURVE_DEFAULT_MIN,
    L_CURVE_DEFAULT_POINTS,
    RegularizationKind,
)
from app.constants.status import Status
from app.lib.exception import QTEException
from app.utils.logger import logger


def default_l_curve_grid() -> List[float]:
    return [float(x) for x in np.logspace(np.log10(L_CURVE_DEFAULT_MIN), np.log10(L_CURVE_DEFAULT_MAX),
                                          L_CURVE_DEFAULT_POINTS)]


class RegularizationPolicy(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: RegularizationKind = RegularizationKind.L_CURVE
    delta_c: float = Field(default=1e-2, ge=0)
    cutoff: float = Field(default=1e-6, ge=0)
    grid: List[float] = Field(default_factory=default_l_curve_grid)

    @model_validator(mode="after")
    def _check_grid(self):
        if self.kind != RegularizationKind.L_CURVE:
            return self
        grid = np.asarray(self.grid, dtype=float)
        if grid.size < 8 or np.any(grid <= 0):
            raise ValueError("the L-curve grid needs at least 8 positive values")
        if np.log10(grid.max() / grid.min()) < 4 - 1e-9:
            raise ValueError("the L-curve grid must span at least 4 decades")
        return self

    @classmethod
    def diagonal_shift(cls, delta_c: float) -> "RegularizationPolicy":
        return cls(kind=RegularizationKind.DIAGONAL_SHIFT, delta_c=delta_c)

    @classmethod
    def truncated_svd(cls, cutoff: float) -> "RegularizationPolicy":
        return cls(kind=RegularizationKind.TRUNCATED_SVD, cutoff=cutoff)


def _shifted_solve(g: np.ndarray, b: np.ndarray, shift: float) -> np.ndarray:
    d = g.shape[0]
    if shift == 0.0 and np.linalg.matrix_rank(g) < d:
        raise QTEException(Status.SINGULAR_SYSTEM, "singular linear system without regularization")
    try:
        return scipy.linalg.solve(g + shift * np.eye(d), b, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise QTEException(Status.SINGULAR_SYSTEM, f"linear solve failed: {exc}")


def _truncated_svd_solve(g: np.ndarray, b: np.ndarray, cutoff: float) -> np.ndarray:
    U, s, Vt = scipy.linalg.svd(g)
    keep = s >= cutoff
    if not np.any(keep):
        return np.zeros_like(b)
    return Vt[keep].T @ ((U[:, keep].T @ b) / s[keep])


def menger_curvature(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Signed curvature of the circle through consecutive point triples; NaN at the ends."""
    curvature = np.full(x.shape[0], np.nan)
    for k in range(1, x.shape[0] - 1):
        x1, x2, x3 = x[k - 1:k + 2]
        y1, y2, y3 = y[k - 1:k + 2]
        cross = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
        sides = np.hypot(x2 - x1, y2 - y1) * np.hypot(x3 - x2, y3 - y2) * np.hypot(x3 - x1, y3 - y1)
        if sides > 0:
            curvature[k] = 2.0 * cross / sides
    return curvature


def l_curve_select(g: np.ndarray, b: np.ndarray, grid: List[float]) -> Tuple[np.ndarray, float]:
    """Shift at the corner of the (log residual, log solution norm) curve.

    Points are ordered by increasing shift, so the corner is the largest positive
    curvature. Ties go to the larger shift. Without a corner the smallest shift wins.
    """
    lambdas = np.sort(np.asarray(grid, dtype=float))
    w, V = scipy.linalg.eigh(0.5 * (g + g.T))
    projected = V.T @ b
    with np.errstate(divide="ignore", invalid="ignore"):
        solutions = [V @ (projected / (w + lam)) for lam in lambdas]
        residuals = np.array([np.linalg.norm(g @ x - b) for x in solutions])
        norms = np.array([np.linalg.norm(x) for x in solutions])
        curvature = menger_curvature(np.log(residuals), np.log(norms))
    curvature[~np.isfinite(curvature)] = -np.inf
    best = int(len(curvature) - 1 - np.argmax(curvature[::-1]))
    if not np.isfinite(curvature[best]) or curvature[best] <= 0:
        logger.warning("L-curve has no corner, using the smallest shift")
        best = 0
    return solutions[best], float(lambdas[best])


def solve_update_with_info(g: np.ndarray, b: np.ndarray, policy: RegularizationPolicy) -> Tuple[np.ndarray, float]:
    """theta_dot and the regularization strength actually used."""
    g = np.asarray(g, dtype=float)
    b = np.asarray(b, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] != b.shape[0]:
        raise QTEException(Status.DIMENSION_MISMATCH, f"g of shape {g.shape} with b of length {b.shape[0]}")
    if not np.any(b):
        return np.zeros_like(b), 0.0
    if policy.kind == RegularizationKind.DIAGONAL_SHIFT:
        return _shifted_solve(g, b, policy.delta_c), policy.delta_c
    if policy.kind == RegularizationKind.TRUNCATED_SVD:
        return _truncated_svd_solve(g, b, policy.cutoff), policy.cutoff
    return l_curve_select(g, b, policy.grid)


def solve_update(g: np.ndarray, b: np.ndarray, policy: Optional[RegularizationPolicy] = None) -> np.ndarray:
    """Regularized solution of g theta_dot = b."""
    theta_dot, _ = solve_update_with_info(g, b, policy or RegularizationPolicy())
    return theta_dot
