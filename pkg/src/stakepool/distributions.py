"""Cost distributions for honest agents.

Every distribution is atomless on ``[0, T)`` with ``F(0) = 0``.  Built-in
families (uniform and power) have closed forms for everything and are
recognised by the compiled kernels; custom families only need a CDF.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DomainError, NumericError, ValidationError
from .numerics import adaptive_simpson

UNIFORM = 0
POWER = 1


class CostDistribution:
    """Base class.  Subclasses implement ``_cdf`` on ``[0, T]``."""

    family = "custom"
    support_upper = math.inf

    def _cdf(self, c: float) -> float:
        raise NotImplementedError

    def _pdf(self, c: float) -> float:
        h = 1e-6 * max(1.0, c)
        lo = max(0.0, c - h)
        hi = c + h
        if math.isfinite(self.support_upper):
            hi = min(hi, self.support_upper)
        if hi <= lo:
            return 0.0
        return (self._cdf(hi) - self._cdf(lo)) / (hi - lo)

    def _cdf_integral(self, c: float) -> float:
        """Integral of F over [0, c]."""
        return adaptive_simpson(self._cdf, 0.0, c, tol=1e-9)

    @staticmethod
    def _check(c: float) -> float:
        c = float(c)
        if c < 0.0 or math.isnan(c):
            raise DomainError(f"cost must be nonnegative, got {c!r}")
        return c

    def cdf(self, c: float) -> float:
        c = self._check(c)
        if c >= self.support_upper:
            return 1.0
        return self._cdf(c)

    def pdf(self, c: float) -> float:
        c = self._check(c)
        if c >= self.support_upper:
            return 0.0
        return self._pdf(c)

    def partial_expectation(self, c: float) -> float:
        """E[X; X < c] = integral of x f(x) over [0, c]."""
        c = min(self._check(c), self.support_upper)
        if c == 0.0:
            return 0.0
        return c * self._cdf(c) - self._cdf_integral(c)

    def truncated_mean(self, cstar: float) -> float:
        """E[X | X < c*]."""
        c = min(self._check(cstar), self.support_upper)
        mass = self.cdf(c)
        if mass <= 0.0:
            raise DomainError(f"F({cstar!r}) = 0: conditional mean undefined")
        return self.partial_expectation(c) / mass

    def ppf(self, u):
        """Inverse CDF by vectorised bisection.  Accepts scalars or arrays."""
        u = np.asarray(u, dtype=float)
        cdf = np.vectorize(self.cdf, otypes=[float])
        hi_val = self.support_upper
        if not math.isfinite(hi_val):
            hi_val = 1.0
            while self.cdf(hi_val) < float(np.max(u, initial=0.0)):
                hi_val *= 2.0
                if hi_val > 1e300:
                    raise NumericError("cannot bracket quantile")
        lo = np.zeros_like(u)
        hi = np.full_like(u, hi_val)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draws using the caller's generator."""
        return self.ppf(rng.random(size))

    def cdf_array(self, c) -> np.ndarray:
        return np.vectorize(self.cdf, otypes=[float])(c)

    def is_concave_cdf(self, points: int = 2001) -> bool:
        """Grid check of F'' <= 0 via second differences."""
        upper = self.support_upper if math.isfinite(self.support_upper) else 10.0
        xs = np.linspace(0.0, upper, points)
        fs = self.cdf_array(xs)
        second = fs[2:] - 2.0 * fs[1:-1] + fs[:-2]
        return bool(np.all(second <= 1e-12))

    def kernel_spec(self) -> tuple[int, float, float] | None:
        """(family code, alpha, T) for the compiled fast path, if any."""
        return None

    def describe(self) -> str:
        return self.family


class Uniform(CostDistribution):
    """Uniform costs on [0, T]."""

    family = "uniform"

    def __init__(self, upper: float = 1.0):
        if not (upper > 0.0 and math.isfinite(upper)):
            raise ValidationError(f"uniform support bound must be positive, got {upper!r}")
        self.support_upper = float(upper)

    def _cdf(self, c):
        return c / self.support_upper

    def _pdf(self, c):
        return 1.0 / self.support_upper

    def _cdf_integral(self, c):
        return 0.5 * c * c / self.support_upper

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        out = u * self.support_upper
        return float(out) if out.ndim == 0 else out

    def cdf_array(self, c):
        return np.clip(np.asarray(c, dtype=float) / self.support_upper, 0.0, 1.0)

    def kernel_spec(self):
        return UNIFORM, 1.0, self.support_upper

    def describe(self):
        if self.support_upper == 1.0:
            return "uniform"
        return f"uniform:T={self.support_upper!r}"

    def __repr__(self):
        return f"Uniform(upper={self.support_upper!r})"


class Power(CostDistribution):
    """F(c) = (c/T)**alpha with 0 < alpha <= 1, so that F is concave."""

    family = "power"

    def __init__(self, alpha: float, upper: float = 1.0):
        if not (0.0 < alpha <= 1.0):
            raise ValidationError(f"power family needs 0 < alpha <= 1, got {alpha!r}")
        if not (upper > 0.0 and math.isfinite(upper)):
            raise ValidationError(f"power support bound must be positive, got {upper!r}")
        self.alpha = float(alpha)
        self.support_upper = float(upper)

    def _cdf(self, c):
        return (c / self.support_upper) ** self.alpha

    def _pdf(self, c):
        if c == 0.0:
            return math.inf if self.alpha < 1.0 else 1.0 / self.support_upper
        return self.alpha * (c / self.support_upper) ** (self.alpha - 1.0) / self.support_upper

    def _cdf_integral(self, c):
        T = self.support_upper
        return T * (c / T) ** (self.alpha + 1.0) / (self.alpha + 1.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        out = self.support_upper * u ** (1.0 / self.alpha)
        return float(out) if out.ndim == 0 else out

    def cdf_array(self, c):
        x = np.clip(np.asarray(c, dtype=float) / self.support_upper, 0.0, 1.0)
        return x ** self.alpha

    def kernel_spec(self):
        return POWER, self.alpha, self.support_upper

    def describe(self):
        s = f"power:alpha={self.alpha!r}"
        if self.support_upper != 1.0:
            s += f",T={self.support_upper!r}"
        return s

    def __repr__(self):
        return f"Power(alpha={self.alpha!r}, upper={self.support_upper!r})"


class CustomCDF(CostDistribution):
    """User-supplied CDF; the density defaults to a central difference."""

    def __init__(self, cdf: Callable[[float], float], upper: float = math.inf,
                 pdf: Callable[[float], float] | None = None, name: str = "custom"):
        if not upper > 0.0:
            raise ValidationError("support bound must be positive")
        self._user_cdf = cdf
        self._user_pdf = pdf
        self.support_upper = float(upper)
        self.family = name
        if abs(cdf(0.0)) > 1e-12:
            raise ValidationError("custom CDF must satisfy F(0) = 0")

    def _cdf(self, c):
        return float(self._user_cdf(c))

    def _pdf(self, c):
        if self._user_pdf is not None:
            return float(self._user_pdf(c))
        return super()._pdf(c)


class TableCDF(CostDistribution):
    """Piecewise-linear CDF through (c, F(c)) knots."""

    family = "table"

    def __init__(self, costs, probs, source: str | None = None):
        c = np.asarray(costs, dtype=float)
        p = np.asarray(probs, dtype=float)
        if c.ndim != 1 or c.shape != p.shape or c.size < 1:
            raise ValidationError("table CDF needs matching 1-D knot arrays")
        if c[0] > 0.0:
            c = np.concatenate([[0.0], c])
            p = np.concatenate([[0.0], p])
        if c[0] != 0.0 or p[0] != 0.0:
            raise ValidationError("table CDF must start at (0, 0)")
        if np.any(np.diff(c) <= 0.0):
            raise ValidationError("table CDF knots must have strictly increasing costs (no atoms)")
        if np.any(np.diff(p) < 0.0) or np.any(p < 0.0):
            raise ValidationError("table CDF must be nondecreasing")
        if abs(p[-1] - 1.0) > 1e-12:
            raise ValidationError("table CDF must end at probability 1")
        p[-1] = 1.0
        self.costs = c
        self.probs = p
        self.support_upper = float(c[-1])
        self.source = source
        seg = np.diff(c) * 0.5 * (p[1:] + p[:-1])
        self._cum_area = np.concatenate([[0.0], np.cumsum(seg)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "TableCDF":
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if rows:
                        raise ValidationError(f"bad CSV row in {path}: {row!r}") from None
                    continue  # header
        if not rows:
            raise ValidationError(f"no knots in {path}")
        cs, ps = zip(*rows)
        return cls(cs, ps, source=str(path))

    def _segment(self, c):
        i = int(np.searchsorted(self.costs, c, side="right")) - 1
        return min(max(i, 0), self.costs.size - 2)

    def _cdf(self, c):
        return float(np.interp(c, self.costs, self.probs))

    def _pdf(self, c):
        i = self._segment(c)
        return float((self.probs[i + 1] - self.probs[i]) / (self.costs[i + 1] - self.costs[i]))

    def _cdf_integral(self, c):
        i = self._segment(c)
        x0 = self.costs[i]
        return float(self._cum_area[i] + (c - x0) * 0.5 * (self.probs[i] + self._cdf(c)))

    def cdf_array(self, c):
        return np.interp(np.asarray(c, dtype=float), self.costs, self.probs)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        # flat segments map to their left end
        keep = np.concatenate([[True], np.diff(self.probs) > 0.0])
        out = np.interp(u, self.probs[keep], self.costs[keep])
        return float(out) if out.ndim == 0 else out

    def is_concave_cdf(self, points: int = 2001) -> bool:
        slopes = np.diff(self.probs) / np.diff(self.costs)
        return bool(np.all(np.diff(slopes) <= 1e-12))

    def describe(self):
        return f"table:{self.source}" if self.source else "table"


def parse_distribution(spec: str) -> CostDistribution:
    """Parse ``uniform``, ``uniform:T=0.2``, ``power:alpha=0.5``, ``table:<path>``."""
    spec = spec.strip()
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name == "table":
        if not rest:
            raise ValidationError("table distribution needs a CSV path: table:<path>")
        return TableCDF.from_csv(rest)
    kwargs: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValidationError(f"bad distribution parameter {item!r} in {spec!r}")
            try:
                kwargs[key.strip()] = float(value)
            except ValueError:
                raise ValidationError(f"bad number {value!r} in {spec!r}") from None
    upper = kwargs.pop("T", 1.0)
    if name == "uniform":
        if kwargs:
            raise ValidationError(f"unknown uniform parameters {sorted(kwargs)}")
        return Uniform(upper)
    if name == "power":
        if "alpha" not in kwargs:
            raise ValidationError("power distribution needs alpha=<float>")
        alpha = kwargs.pop("alpha")
        if kwargs:
            raise ValidationError(f"unknown power parameters {sorted(kwargs)}")
        return Power(alpha, upper)
    raise ValidationError(f"unknown distribution {spec!r}")
