"""Deterministic scalar and planar minimizers used by the exact and numeric solvers."""

from __future__ import annotations

import math
from typing import Callable

from .errors import SolverError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   tol: float = 1e-12) -> tuple[float, float]:
    """Minimize a convex function on [lo, hi] to bracket width <= tol.

    Returns (argmin, value). The returned point is the best of the bracket
    midpoint and the two original endpoints, so boundary minima are exact.
    """
    if hi < lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    a, b = lo, hi
    flo, fhi = f(lo), f(hi)
    if hi - lo <= tol:
        return (lo, flo) if flo <= fhi else (hi, fhi)
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    xm = 0.5 * (a + b)
    fm = f(xm)
    best_x, best_f = xm, fm
    if flo < best_f:
        best_x, best_f = lo, flo
    if fhi < best_f:
        best_x, best_f = hi, fhi
    return best_x, best_f


# Compass plus diagonal probes: plain coordinate descent can stall on ridges of
# max-combined objectives, the diagonals restore convergence for convex targets.
_DIRECTIONS = (
    (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0),
    (math.sqrt(0.5), math.sqrt(0.5)), (math.sqrt(0.5), -math.sqrt(0.5)),
    (-math.sqrt(0.5), math.sqrt(0.5)), (-math.sqrt(0.5), -math.sqrt(0.5)),
)


def pattern_search_2d(f: Callable[[float, float], float], start: tuple[float, float],
                      step: float, tol: float = 1e-9,
                      max_sweeps: int = 100_000) -> tuple[tuple[float, float], float, float]:
    """Adaptive pattern descent for a convex function of two real variables.

    Starts at `start` with probe radius `step`; a sweep evaluates all eight
    probe directions and moves to the best strict improvement (doubling the
    radius, capped at the initial one) or halves the radius. Stops when the
    radius drops below `tol`. Returns ((u, v), value, final_radius).
    """
    if step <= 0.0 or tol <= 0.0:
        raise ValueError("step and tol must be positive")
    cu, cv = start
    fc = f(cu, cv)
    h = step
    for sweep in range(max_sweeps):
        if h < tol:
            return (cu, cv), fc, h
        best_u, best_v, best_f = cu, cv, fc
        for du, dv in _DIRECTIONS:
            pu, pv = cu + h * du, cv + h * dv
            fp = f(pu, pv)
            if fp < best_f:
                best_u, best_v, best_f = pu, pv, fp
        if best_f < fc:
            cu, cv, fc = best_u, best_v, best_f
            h = min(2.0 * h, step)
        else:
            h *= 0.5
    raise SolverError(
        "pattern search exceeded its sweep cap",
        {"start": start, "last": (cu, cv), "value": fc, "radius": h, "sweeps": max_sweeps},
    )
