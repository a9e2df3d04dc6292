"""Golden-section maximization on [0, 1] and lambda sweeps over both bound curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

from .alpha import AlphaTable, default_table
from .analytic import rpi_limit_perf, wai_limit_prob
from .errors import InvalidParameterError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

CURVES = ("rpi_lower", "wai_upper")


@dataclass(frozen=True)
class OptResult:
    x_star: float
    f_star: float
    tolerance: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            "x_star": self.x_star,
            "f_star": self.f_star,
            "tolerance": self.tolerance,
            "iterations": self.iterations,
        }


def maximize_concave(f, tol: float = 1e-6, bounds: tuple[float, float] = (0.0, 1.0)) -> OptResult:
    """Golden-section search for the maximum of a unimodal f on bounds.

    Concavity is the caller's promise; the search only needs unimodality.
    Stops once the bracket is narrower than tol and reports its midpoint.
    """
    if not tol > 0.0:
        raise InvalidParameterError("tol must be positive")
    a, b = bounds
    if not a < b:
        raise InvalidParameterError("bounds must satisfy a < b")
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    iterations = 0
    while (b - a) > tol:
        iterations += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x_star = 0.5 * (a + b)
    return OptResult(x_star=x_star, f_star=f(x_star), tolerance=tol, iterations=iterations)


def curve_objective(curve: str, lam: float, table: AlphaTable | None = None):
    """The x-objective behind one sweep curve at a fixed lambda."""
    if curve == "rpi_lower":
        tab = table if table is not None else default_table()
        return lambda x: rpi_limit_perf(x, tab, lam)
    if curve == "wai_upper":
        return lambda x: wai_limit_prob(x, lam)
    raise InvalidParameterError(f"unknown curve {curve!r}; expected one of {CURVES}")


def lambda_sweep(
    curve: str,
    grid: list[float],
    tol: float = 1e-6,
    table: AlphaTable | None = None,
) -> list[tuple[float, float, float]]:
    """Maximize one curve over x at each lambda; rows are (lambda, x_star, value)."""
    if not grid:
        raise InvalidParameterError("lambda grid must be nonempty")
    for lam in grid:
        if not 0.0 <= lam <= 1.0:
            raise InvalidParameterError(f"lambda {lam} outside [0, 1]")
    rows = []
    for lam in grid:
        res = maximize_concave(curve_objective(curve, lam, table), tol=tol)
        rows.append((lam, res.x_star, res.f_star))
    return rows


def parse_grid(text: str) -> list[float]:
    """Parse "start:stop:step" into an inclusive grid, stepped in decimal.

    Decimal stepping keeps grid points like 0.07 exact, so a 0:1:0.01 grid
    has 101 points ending exactly at 1.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidParameterError("grid must look like start:stop:step")
    try:
        start, stop, step = (Decimal(p) for p in parts)
    except InvalidOperation as exc:
        raise InvalidParameterError(f"malformed grid {text!r}") from exc
    if step <= 0:
        raise InvalidParameterError("grid step must be positive")
    if start > stop:
        raise InvalidParameterError("grid start must not exceed stop")
    values = []
    k = 0
    while True:
        v = start + k * step
        if v > stop:
            break
        values.append(float(v))
        k += 1
    return values
