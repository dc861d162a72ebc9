"""Threshold equilibria of the continuum staking-pool formation game.

Honest agents with pool-running cost below the threshold ``cstar`` open a
pool, everyone else delegates.  ``cstar`` solves

    c = lam*R/(F(c)H + M) - (1 - lam)*R/((1 - F(c))H),

whose right-hand side is decreasing in c, so bisection on the gap is safe.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .distributions import CostDistribution
from .errors import DomainError, NumericError, ValidationError
from .numerics import bisect_decreasing, bracket_upper, golden_max

BOUNDARY_RTOL = 1e-12


class Corner(str, enum.Enum):
    INTERIOR = "Interior"
    ALL_DELEGATE = "AllDelegate"
    NO_INTERIOR = "NoInterior"
    # lam = 1 with R/(H+M) >= T: every honest agent runs a pool
    ALL_POOL = "AllPool"


@dataclass(frozen=True)
class GameParams:
    H: float
    M: float
    R: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        for name in ("H", "M", "R", "lam"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or math.isnan(v) or math.isinf(v):
                raise ValidationError(f"{name} must be a finite number, got {v!r}")
        if self.H <= 0.0:
            raise ValidationError(f"H must be positive, got {self.H!r}")
        if self.M < 0.0:
            raise ValidationError(f"M must be nonnegative, got {self.M!r}")
        if not self.H > self.M:
            raise ValidationError(f"the model assumes H > M, got H={self.H!r}, M={self.M!r}")
        if self.R <= 0.0:
            raise ValidationError(f"R must be positive, got {self.R!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError(f"lambda must lie in [0, 1], got {self.lam!r}")

    @property
    def lambda_bound(self) -> float:
        """Existence bound M/(H+M): interior equilibria need lam above it."""
        return self.M / (self.H + self.M)

    def with_lambda(self, lam: float) -> "GameParams":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class EquilibriumResult:
    cstar: float
    P: float
    D: float
    I: float
    s: float
    r: float
    security: float
    corner: Corner

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("cstar", "P", "D", "I", "s", "r", "security")}
        d["corner"] = self.corner.value
        return d


@dataclass(frozen=True)
class DesignResult:
    objective: str
    lam: float
    cstar: float
    value: float
    regime: str
    heuristic: bool = False
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {"objective": self.objective, "lambda": self.lam, "cstar": self.cstar,
                "value": self.value, "regime": self.regime, "heuristic": self.heuristic,
                "notes": list(self.notes)}


def classify_lambda(params: GameParams) -> Corner:
    """Interior / AllDelegate / NoInterior from lam's position vs M/(H+M)."""
    bound = params.lambda_bound
    tol = BOUNDARY_RTOL * max(1.0, bound)
    if abs(params.lam - bound) <= tol:
        return Corner.ALL_DELEGATE
    if params.lam < bound:
        return Corner.NO_INTERIOR
    return Corner.INTERIOR


def indifference_gap(c: float, params: GameParams, dist: CostDistribution,
                     cd: float = 0.0, with_delegators: bool = True) -> float:
    """Pool payoff minus outside-option payoff for an agent with cost c at threshold c."""
    F = dist.cdf(c)
    denom = F * params.H + params.M
    owner = math.inf if denom == 0.0 else params.lam * params.R / denom
    deleg = 0.0
    if with_delegators and params.lam < 1.0:
        rest = (1.0 - F) * params.H
        deleg = math.inf if rest <= 0.0 else (1.0 - params.lam) * params.R / rest
    return owner - deleg + cd - c


def solve_gap_root(params: GameParams, dist: CostDistribution, cd: float = 0.0,
                   with_delegators: bool = True) -> float:
    """Root of the decreasing indifference gap; assumes gap(0) > 0.

    Built-in families run through the selected kernel backend.  Custom
    families bisect in Python, bracketing unbounded supports by doubling.
    """
    spec = dist.kernel_spec()
    if spec is not None:
        family, alpha, T = spec
        return kernels.solve_gap(family, alpha, T, params.H, params.M, params.R,
                                 params.lam, cd, with_delegators)

    def g(c):
        return indifference_gap(c, params, dist, cd, with_delegators)

    T = dist.support_upper
    if math.isfinite(T):
        if g(T) >= 0.0:
            return T
        hi = T
    else:
        try:
            hi = bracket_upper(g)
        except NumericError as exc:
            raise NumericError(f"cannot bracket the equilibrium threshold: {exc}") from None
    return bisect_decreasing(g, 0.0, hi)


def equilibrium_summary(cstar: float, params: GameParams, dist: CostDistribution,
                        corner: Corner | None = None) -> EquilibriumResult:
    """Fill in P, D, I, s, r and security for a threshold cstar (I = 0)."""
    if cstar < 0.0 or cstar > dist.support_upper:
        raise DomainError(f"threshold {cstar!r} outside [0, {dist.support_upper!r}]")
    F = dist.cdf(cstar)
    P = F * params.H
    D = params.H - P
    pools = P + params.M
    s = D / pools if pools > 0.0 else math.nan
    r = params.R / pools if pools > 0.0 else math.nan
    security = P / pools if pools > 0.0 else 0.0
    if corner is None:
        if cstar == 0.0:
            corner = Corner.ALL_DELEGATE
        elif F >= 1.0:
            corner = Corner.ALL_POOL
        else:
            corner = Corner.INTERIOR
    return EquilibriumResult(cstar=cstar, P=P, D=D, I=0.0, s=s, r=r,
                             security=security, corner=corner)


def solve_threshold_equilibrium(params: GameParams, dist: CostDistribution) -> EquilibriumResult:
    """Unique threshold equilibrium of the base game."""
    corner = classify_lambda(params)
    if corner is not Corner.INTERIOR:
        return equilibrium_summary(0.0, params, dist, corner=corner)
    cstar = solve_gap_root(params, dist)
    if cstar >= dist.support_upper:
        return equilibrium_summary(dist.support_upper, params, dist, corner=Corner.ALL_POOL)
    return equilibrium_summary(cstar, params, dist, corner=Corner.INTERIOR)


def lambda_from_cstar(cstar: float, params: GameParams, dist: CostDistribution) -> float:
    """Reward split that makes cstar the equilibrium threshold (params.lam ignored)."""
    if not 0.0 <= cstar < dist.support_upper:
        raise DomainError(f"lambda(c*) needs 0 <= c* < T, got {cstar!r}")
    F = dist.cdf(cstar)
    if F >= 1.0:
        raise DomainError(f"F({cstar!r}) = 1: inverse undefined")
    H, M, R = params.H, params.M, params.R
    deleg = R / ((1.0 - F) * H)
    owner = R / (F * H + M) if F * H + M > 0.0 else math.inf
    if math.isinf(owner):
        return 0.0
    return (cstar + deleg) / (owner + deleg)


def security_max_cstar(params: GameParams, dist: CostDistribution) -> EquilibriumResult:
    """Equilibrium at lam = 1, the security-maximising split."""
    return solve_threshold_equilibrium(params.with_lambda(1.0), dist)


def welfare(cstar: float, params: GameParams, dist: CostDistribution) -> float:
    """Security-weighted honest measure minus honest pool-running costs."""
    if cstar < 0.0 or cstar > dist.support_upper:
        raise DomainError(f"threshold {cstar!r} outside [0, {dist.support_upper!r}]")
    if cstar == 0.0:
        return 0.0
    F = dist.cdf(cstar)
    P = F * params.H
    if P + params.M == 0.0:
        return 0.0
    return P / (P + params.M) * params.H - params.H * dist.partial_expectation(cstar)


def welfare_stationarity(c: float, params: GameParams, dist: CostDistribution) -> float:
    """W'(c)/f(c) = H^2 M/(F(c)H + M)^2 - cH, decreasing in c."""
    denom = dist.cdf(c) * params.H + params.M
    return params.H ** 2 * params.M / denom ** 2 - c * params.H


def welfare_derivative(c: float, params: GameParams, dist: CostDistribution) -> float:
    return dist.pdf(c) * welfare_stationarity(c, params, dist)


def welfare_optimal_cstar(params: GameParams, dist: CostDistribution,
                          tol: float = 1e-9) -> DesignResult:
    """Threshold that maximises welfare, and the split that implements it."""
    H, M = params.H, params.M
    T = dist.support_upper
    notes: list[str] = []
    if math.isfinite(T) and H * M >= (H + M) ** 2 * T:
        cstar = T
        regime = "corner"
        # only lam = 1 reaches c* = T, and only if R/(H+M) >= T
        top = security_max_cstar(params, dist)
        if top.cstar < T:
            notes.append(f"c*=T is not implementable; lambda=1 reaches only c*={top.cstar:.6g}")
        return DesignResult("welfare", 1.0, cstar, welfare(cstar, params, dist), regime,
                            notes=tuple(notes))

    upper = T if math.isfinite(T) else bracket_upper(lambda c: welfare_stationarity(c, params, dist))

    def w(c):
        return welfare(c, params, dist)

    heuristic = False
    if dist.is_concave_cdf():
        a, b = golden_max(w, 0.0, upper, tol=tol)
    else:
        warnings.warn("cost CDF is not concave; welfare optimum found by grid search",
                      RuntimeWarning, stacklevel=2)
        heuristic = True
        xs = np.linspace(0.0, upper, 10_001)
        vals = np.array([w(x) for x in xs])
        i = int(np.argmax(vals))
        a, b = golden_max(w, xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)], tol=tol)
        notes.append("heuristic: non-concave CDF, grid search with local refinement")
    cstar = 0.5 * (a + b)
    # W is flat to rounding within ~sqrt(eps) of its peak; finish on W'/f = 0
    g = lambda c: welfare_stationarity(c, params, dist)  # noqa: E731
    delta = max(b - a, 1e-7)
    while delta < upper:
        lo, hi = max(0.0, cstar - delta), min(upper, cstar + delta)
        if g(lo) >= 0.0 >= g(hi):
            cstar = bisect_decreasing(g, lo, hi)
            break
        delta *= 4.0
    if cstar >= T:
        lam = 1.0
    else:
        lam = lambda_from_cstar(cstar, params, dist)
        if lam > 1.0:
            notes.append("optimal threshold exceeds what lambda <= 1 implements")
    return DesignResult("welfare", lam, cstar, w(cstar), "interior", heuristic, tuple(notes))
