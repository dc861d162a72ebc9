"""Closed forms for costs uniform on [0, 1].

With F(c) = c the equilibrium condition is the cubic

    0 = -H^2 c^3 + H(H - M) c^2 + H(M + R) c - lam R (H + M) + M R

(the negation of the textbook orientation; both have the same roots), solved
here with Cardano's formula in complex arithmetic.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .errors import InfeasibleError, ValidationError
from .numerics import golden_max

Z_UNIT = complex(-0.5, math.sqrt(3.0) / 2.0)
IMAG_TOL = 1e-9


def cbrt(z: complex) -> complex:
    """Principal complex cube root."""
    if z == 0:
        return 0j
    return cmath.exp(cmath.log(z) / 3.0)


@dataclass(frozen=True)
class CubicSolution:
    a: float
    b: float
    d: float
    e: float
    delta0: float
    delta1: float
    C: complex
    roots: tuple[complex, complex, complex]
    feasible_root: float | None

    def residual(self, x: complex) -> float:
        return abs(((self.a * x + self.b) * x + self.d) * x + self.e)

    def coefficient_scale(self) -> float:
        return abs(self.a) + abs(self.b) + abs(self.d) + abs(self.e)


def cubic_roots(a: float, b: float, d: float, e: float) -> tuple[float, float, complex,
                                                                 tuple[complex, complex, complex]]:
    """Roots of a x^3 + b x^2 + d x + e via Delta0, Delta1 and C.

    Returns (delta0, delta1, C, roots).  A zero C (Delta1^2 = 4 Delta0^3)
    switches to the other sign of the square root, and to the triple root
    when both Delta0 and Delta1 vanish.
    """
    if a == 0:
        raise ValidationError("leading coefficient must be nonzero")
    delta0 = b * b - 3.0 * a * d
    delta1 = 2.0 * b ** 3 - 9.0 * a * b * d + 27.0 * a * a * e
    disc = cmath.sqrt(delta1 * delta1 - 4.0 * delta0 ** 3)
    C = cbrt((delta1 + disc) / 2.0)
    if abs(C) < 1e-14 * max(1.0, abs(delta1)) ** (1.0 / 3.0):
        C = cbrt((delta1 - disc) / 2.0)
    roots = []
    for k in range(3):
        if C == 0:
            roots.append(complex(-b / (3.0 * a)))
            continue
        zc = Z_UNIT ** k * C
        roots.append(-(b + zc + delta0 / zc) / (3.0 * a))
    roots = [_polish(a, b, d, e, r) for r in roots]
    return delta0, delta1, C, (roots[0], roots[1], roots[2])


def _polish(a, b, d, e, x: complex) -> complex:
    # two Newton steps; Cardano loses digits near multiple roots
    for _ in range(2):
        p = ((a * x + b) * x + d) * x + e
        dp = (3.0 * a * x + 2.0 * b) * x + d
        if dp == 0:
            break
        step = p / dp
        if abs(step) > 1e-6 * max(1.0, abs(x)):
            break
        x = x - step
    return x


def security_max_uniform(H: float, M: float, R: float) -> tuple[float, bool]:
    """Positive root of H c^2 + M c - R = 0, clipped to 1.

    Returns (cstar, clipped).
    """
    if not (H > 0 and M >= 0 and R > 0):
        raise ValidationError("need H > 0, M >= 0, R > 0")
    raw = (-M + math.sqrt(M * M + 4.0 * H * R)) / (2.0 * H)
    if raw >= 1.0:
        return 1.0, raw > 1.0
    return raw, False


def welfare_optimal_uniform(H: float, M: float) -> float:
    """Radical expression for the welfare maximiser under uniform costs.

    Roots of H^3 c^3 + 2 H^2 M c^2 + H M^2 c - H^2 M = 0 written with
    Z = cbrt(-27 H^5 M - 2 H^3 M^3 + 3 sqrt(3) sqrt(27 H^10 M^2 + 4 H^8 M^4)).
    """
    if not (H > M > 0):
        raise ValidationError("need H > M > 0")
    inner = 27.0 * H ** 10 * M ** 2 + 4.0 * H ** 8 * M ** 4
    Z = cbrt(-27.0 * H ** 5 * M - 2.0 * H ** 3 * M ** 3 + 3.0 * math.sqrt(3.0) * cmath.sqrt(inner))
    i3 = 1j * math.sqrt(3.0)
    c = ((1.0 + i3) * M ** 2 / (2.0 ** (2.0 / 3.0) * 3.0 * Z)
         + (1.0 - i3) * Z / (6.0 * 2.0 ** (1.0 / 3.0) * H ** 2)
         - 2.0 * M / (3.0 * H))
    if abs(c.imag) < IMAG_TOL and 0.0 <= c.real <= 1.0:
        x = c.real
        # Newton polish on W'(c) = 0 in cubic form
        for _ in range(3):
            p = H ** 3 * x ** 3 + 2 * H ** 2 * M * x ** 2 + H * M ** 2 * x - H ** 2 * M
            dp = 3 * H ** 3 * x ** 2 + 4 * H ** 2 * M * x + H * M ** 2
            x -= p / dp
        return x
    return _welfare_golden_fallback(H, M)


def _welfare_golden_fallback(H: float, M: float) -> float:
    warnings.warn("radical welfare formula gave no admissible root; using golden-section",
                  RuntimeWarning, stacklevel=3)
    a, b = golden_max(lambda c: H * (c * H / (c * H + M) - 0.5 * c * c), 0.0, 1.0, tol=1e-12)
    return 0.5 * (a + b)


def equilibrium_cubic(H: float, M: float, R: float, lam: float) -> CubicSolution:
    """All three roots of the uniform-cost equilibrium cubic and the admissible one."""
    if not (H > 0 and M >= 0 and R > 0):
        raise ValidationError("need H > 0, M >= 0, R > 0")
    a = -H * H
    b = H * (H - M)
    d = H * (M + R)
    e = -lam * R * (H + M) + M * R
    delta0, delta1, C, roots = cubic_roots(a, b, d, e)
    feasible = [r.real for r in roots if abs(r.imag) < IMAG_TOL and 0.0 < r.real < 1.0]
    if not feasible:
        bound = M / (H + M)
        raise InfeasibleError(
            f"no real root in (0, 1) for lambda={lam!r}; an interior equilibrium "
            f"needs lambda > M/(H+M) = {bound!r}")
    # at lam = 1 the cubic also has the spurious root c = 1, excluded by the open interval
    root = min(feasible) if len(feasible) > 1 else feasible[0]
    return CubicSolution(a, b, d, e, delta0, delta1, C, roots, root)


def textbook_coefficients(H: float, M: float, R: float, lam: float) -> tuple[float, float, float, float]:
    """Coefficients in the H^2 c^3 + (MH - H^2) c^2 - ... orientation."""
    return (H * H, M * H - H * H, -(R * H + M * H), lam * R * (H + M) - R * M)
