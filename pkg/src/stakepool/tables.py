"""Regenerate the four published uniform-cost tables and diff them against the
printed values."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .closed_form import equilibrium_cubic, security_max_uniform, welfare_optimal_uniform
from .distributions import Uniform
from .equilibrium import (GameParams, lambda_from_cstar, solve_threshold_equilibrium,
                          welfare, welfare_optimal_cstar)

M_VALUES = (0.5, 0.4, 1.0 / 3.0)

# printed values: {M: (c*, P, W)}
TABLE1 = {0.5: (0.78, 0.78, 0.305), 0.4: (0.82, 0.82, 0.336), 1 / 3: (0.85, 0.85, 0.359)}
# {M: (lambda, c*, P, W)}
TABLE2 = {0.5: (0.83, 0.5, 0.5, 0.375), 0.4: (0.8, 0.497, 0.497, 0.431),
          1 / 3: (0.77, 0.491, 0.491, 0.475)}
TABLE3 = {0.5: 0.390388, 0.4: 0.327922, 1 / 3: 0.282376}
TABLE4 = (
    (0.5, 0.99, 0.395647), (0.5, 0.9, 0.414172), (0.5, 0.8, 0.416164),
    (0.5, 0.7, 0.409608), (0.5, 0.6, 0.396822), (0.5, 0.5, 0.378318),
    (0.4, 0.9, 0.35305), (0.4, 0.8, 0.357138), (0.4, 0.6, 0.345172),
    (0.4, 0.5, 0.331877), (0.4, 0.4, 0.313697),
    (1 / 3, 0.9, 0.307422), (1 / 3, 0.5, 0.294599), (1 / 3, 0.4, 0.28047),
    (1 / 3, 0.3, 0.261626),
)

TOL_SHORT = 5e-3
TOL_LONG = 5e-7


@dataclass
class Cell:
    table: int
    label: str
    computed: float
    printed: float
    tol: float

    @property
    def ok(self) -> bool:
        return abs(self.computed - self.printed) <= self.tol


@dataclass
class TableSet:
    text: dict[int, str] = field(default_factory=dict)
    cells: list[Cell] = field(default_factory=list)
    agreement: list[tuple[str, float]] = field(default_factory=list)

    @property
    def mismatches(self) -> list[Cell]:
        return [c for c in self.cells if not c.ok]


def fmt(x: float, digits: int) -> str:
    s = f"{x:.{digits}f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s


def fmt_m(M: float) -> str:
    frac = Fraction(M).limit_denominator(12)
    if abs(float(frac) - M) < 1e-12 and frac.denominator not in (1, 2, 5, 10):
        return f"{frac.numerator}/{frac.denominator}"
    return fmt(M, 6)


def _render(header, rows) -> str:
    cols = [header] + rows
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


def malicious_share_cubic(H, M, R, lam, round_cstar: int | None = None) -> float:
    c = equilibrium_cubic(H, M, R, lam).feasible_root
    if round_cstar is not None:
        c = round(c, round_cstar)
    return M * lam / (c * H + M)


def malicious_share_bisection(H, M, R, lam) -> float:
    eq = solve_threshold_equilibrium(GameParams(H, M, R, lam), Uniform())
    return M * lam / (eq.P + M)


def build_tables(reference_rounding: bool = False) -> TableSet:
    """Compute all four tables.

    ``reference_rounding`` rounds c* to six decimals before forming the Table 4
    shares, which is how the printed shares appear to have been produced.
    """
    out = TableSet()
    U = Uniform()
    H = R = 1.0

    rows = []
    for M in M_VALUES:
        p = GameParams(H, M, R, 1.0)
        c, _ = security_max_uniform(H, M, R)
        W = welfare(c, p, U)
        rows.append(["1", fmt_m(M), "1", "1", fmt(c, 2), fmt(c * H, 2), fmt(W, 3)])
        pc, pP, pW = TABLE1[M]
        out.cells += [Cell(1, f"M={fmt_m(M)} c*", c, pc, TOL_SHORT),
                      Cell(1, f"M={fmt_m(M)} P", c * H, pP, TOL_SHORT),
                      Cell(1, f"M={fmt_m(M)} W", W, pW, TOL_SHORT)]
        generic = solve_threshold_equilibrium(p, U).cstar
        out.agreement.append((f"T1 M={fmt_m(M)} closed form vs bisection", abs(c - generic)))
    out.text[1] = _render(["H", "M", "R", "lambda", "c*", "P", "W"], rows)

    rows = []
    for M in M_VALUES:
        p = GameParams(H, M, R, 1.0)
        c = welfare_optimal_uniform(H, M)
        lam = lambda_from_cstar(c, p, U)
        W = welfare(c, p, U)
        rows.append(["1", fmt_m(M), "1", fmt(lam, 2), fmt(c, 3), fmt(c * H, 3), fmt(W, 3)])
        pl, pc, pP, pW = TABLE2[M]
        out.cells += [Cell(2, f"M={fmt_m(M)} lambda", lam, pl, TOL_SHORT),
                      Cell(2, f"M={fmt_m(M)} c*", c, pc, TOL_SHORT),
                      Cell(2, f"M={fmt_m(M)} P", c * H, pP, TOL_SHORT),
                      Cell(2, f"M={fmt_m(M)} W", W, pW, TOL_SHORT)]
        generic = welfare_optimal_cstar(p, U).cstar
        out.agreement.append((f"T2 M={fmt_m(M)} radical vs golden-section", abs(c - generic)))
    out.text[2] = _render(["H", "M", "R", "lambda", "c*", "P", "W"], rows)

    rows = []
    for M in M_VALUES:
        share = 2 * M / (M + (M * M + 4) ** 0.5)
        via_eq = malicious_share_bisection(H, M, R, 1.0)
        rows.append(["1", fmt_m(M), "1", fmt(via_eq, 6)])
        out.cells.append(Cell(3, f"M={fmt_m(M)} share", via_eq, TABLE3[M], TOL_LONG))
        out.agreement.append((f"T3 M={fmt_m(M)} closed form vs equilibrium", abs(share - via_eq)))
    out.text[3] = _render(["H", "M", "R", "share"], rows)

    rows = []
    for M, lam, printed in TABLE4:
        cubic = malicious_share_cubic(H, M, R, lam, 6 if reference_rounding else None)
        exact_cubic = malicious_share_cubic(H, M, R, lam)
        bis = malicious_share_bisection(H, M, R, lam)
        rows.append(["1", fmt_m(M), "1", fmt(lam, 2), fmt(cubic, 6)])
        out.cells.append(Cell(4, f"M={fmt_m(M)} lambda={fmt(lam, 2)} share", cubic, printed, TOL_LONG))
        out.agreement.append((f"T4 M={fmt_m(M)} lambda={fmt(lam, 2)} cubic vs bisection",
                              abs(exact_cubic - bis)))
    out.text[4] = _render(["H", "M", "R", "lambda", "share"], rows)
    return out
