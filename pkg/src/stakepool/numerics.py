"""Scalar root finding, golden-section search and adaptive quadrature."""
from __future__ import annotations

import math
from typing import Callable

from .errors import NumericError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0

MAX_BISECT_ITER = 200
MAX_DOUBLINGS = 1100


def bisect_decreasing(g: Callable[[float], float], lo: float, hi: float,
                      max_iter: int = MAX_BISECT_ITER) -> float:
    """Root of a decreasing function with ``g(lo) >= 0 >= g(hi)``.

    Runs until the bracket collapses to adjacent floats or ``max_iter``
    halvings have been done.  Infinite endpoint values are fine.
    """
    glo = g(lo)
    ghi = g(hi)
    if glo < 0.0 or ghi > 0.0 or math.isnan(glo) or math.isnan(ghi):
        raise NumericError(
            f"no sign change on [{lo!r}, {hi!r}]: g(lo)={glo!r}, g(hi)={ghi!r}")
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm > 0.0:
            lo = mid
        elif gm < 0.0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def bracket_upper(g: Callable[[float], float], start: float = 1.0,
                  max_doublings: int = MAX_DOUBLINGS) -> float:
    """Double ``start`` until the decreasing function ``g`` turns nonpositive."""
    hi = start
    for _ in range(max_doublings):
        if g(hi) <= 0.0:
            return hi
        hi *= 2.0
    raise NumericError(f"no sign change found on [0, {hi!r}] by doubling")


def golden_max(f: Callable[[float], float], a: float, b: float,
               tol: float = 1e-9) -> tuple[float, float]:
    """Bracket ``[a, b]`` of width <= tol around the maximum of a unimodal f."""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return a, b
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    if yc > yd:
        return a, d
    return c, b


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-9, max_depth: int = 50) -> float:
    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
    right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))
