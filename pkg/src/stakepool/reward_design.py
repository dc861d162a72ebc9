"""Share of block rewards captured by malicious pool owners.

At the equilibrium induced by a split ``lam`` the malicious share is
``mu = M*lam/(F(c*)H + M)``.  For uniform costs mu is increasing, or
increasing then decreasing, on [M/(H+M), 1], so a constrained minimum sits at
an endpoint of the admissible interval.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np

from .distributions import CostDistribution
from .equilibrium import (BOUNDARY_RTOL, DesignResult, GameParams,
                          solve_threshold_equilibrium, welfare)
from .errors import DomainError, ShapeDiagnosticError

SWEEP_COLUMNS = ("lambda", "cstar", "P", "mu", "security", "welfare")
DIFF_TOL = 1e-13


class Shape(str, enum.Enum):
    INCREASING = "Increasing"
    INCREASING_THEN_DECREASING = "IncreasingThenDecreasing"
    OTHER = "Other"


@dataclass(frozen=True)
class SweepRow:
    lam: float
    cstar: float
    P: float
    mu: float
    security: float
    welfare: float

    def as_tuple(self):
        return (self.lam, self.cstar, self.P, self.mu, self.security, self.welfare)


@dataclass(frozen=True)
class RewardShareCurve:
    rows: tuple[SweepRow, ...]
    shape: Shape

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.rows])

    @property
    def mus(self) -> np.ndarray:
        return np.array([r.mu for r in self.rows])

    def minimizer(self, lo: float | None = None, hi: float | None = None) -> SweepRow:
        rows = [r for r in self.rows
                if (lo is None or r.lam >= lo) and (hi is None or r.lam <= hi)]
        if not rows:
            raise DomainError("no grid points in the requested interval")
        return min(rows, key=lambda r: r.mu)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in self.rows:
            w.writerow([f"{v:.6f}" for v in row.as_tuple()])
        return buf.getvalue()


def _check_lambda(lam: float, params: GameParams) -> float:
    bound = params.lambda_bound
    tol = BOUNDARY_RTOL * max(1.0, bound)
    if lam < bound - tol or lam > 1.0:
        raise DomainError(
            f"lambda={lam!r} outside [M/(H+M), 1] = [{bound!r}, 1]")
    return max(lam, bound)


def malicious_reward_share(lam: float, params: GameParams, dist: CostDistribution) -> float:
    """mu(lam); equals M/(H+M) at the left endpoint, where honest agents all delegate."""
    lam = _check_lambda(lam, params)
    eq = solve_threshold_equilibrium(params.with_lambda(lam), dist)
    return params.M * lam / (eq.P + params.M)


def classify_shape(values) -> Shape:
    """Sign pattern of finite differences: (+)* or (+)*(-)*, else Other."""
    diffs = np.diff(np.asarray(values, dtype=float))
    signs = [1 if d > DIFF_TOL else -1 for d in diffs if abs(d) > DIFF_TOL]
    if all(s > 0 for s in signs):
        return Shape.INCREASING
    first_neg = signs.index(-1)
    if all(s < 0 for s in signs[first_neg:]):
        return Shape.INCREASING_THEN_DECREASING
    return Shape.OTHER


def sweep_lambda(params: GameParams, dist: CostDistribution, grid) -> RewardShareCurve:
    """Equilibrium quantities at every lambda in ``grid`` (ascending order kept)."""
    rows = []
    for lam in grid:
        lam = _check_lambda(float(lam), params)
        eq = solve_threshold_equilibrium(params.with_lambda(lam), dist)
        mu = params.M * lam / (eq.P + params.M)
        rows.append(SweepRow(lam, eq.cstar, eq.P, mu, eq.security,
                             welfare(eq.cstar, params, dist)))
    shape = classify_shape([r.mu for r in rows]) if len(rows) > 1 else Shape.INCREASING
    return RewardShareCurve(tuple(rows), shape)


def lambda_grid(params: GameParams, points: int = 1000, lo: float | None = None,
                hi: float = 1.0) -> np.ndarray:
    lo = params.lambda_bound if lo is None else lo
    return np.linspace(lo, hi, points)


def minimize_malicious_reward(params: GameParams, dist: CostDistribution,
                              lambda_floor: float | None = None,
                              grid_points: int = 1000) -> DesignResult:
    """Smallest malicious share over [lambda_floor, 1] by the endpoint rule.

    A dense grid confirms that mu is increasing or increasing-then-decreasing
    on the interval; otherwise the endpoint rule is unjustified and a
    ``ShapeDiagnosticError`` is raised.
    """
    floor = params.lambda_bound if lambda_floor is None else _check_lambda(lambda_floor, params)
    mu_floor = malicious_reward_share(floor, params, dist)
    if floor >= 1.0:
        return DesignResult("min-malicious", 1.0, solve_threshold_equilibrium(
            params.with_lambda(1.0), dist).cstar, mu_floor, "endpoint")
    curve = sweep_lambda(params, dist, lambda_grid(params, grid_points, lo=floor))
    if curve.shape is Shape.OTHER:
        raise ShapeDiagnosticError(
            f"malicious share on [{floor!r}, 1] is neither increasing nor "
            f"increasing-then-decreasing for {dist.describe()}; endpoint rule does not apply")
    mu_one = malicious_reward_share(1.0, params, dist)
    lam = floor if mu_floor <= mu_one else 1.0
    eq = solve_threshold_equilibrium(params.with_lambda(lam), dist)
    return DesignResult("min-malicious", lam, eq.cstar, min(mu_floor, mu_one),
                        "endpoint", notes=(f"shape={curve.shape.value}",
                                           f"mu(floor)={mu_floor:.6f}", f"mu(1)={mu_one:.6f}"))
