"""Deliberately naive brute-force references used by the test suite.

Nothing here shares code with the solvers it checks beyond the Space distance
primitive: grids are enumerated directly, the four-point constant is a raw
quadruple loop, and slope quotients evaluate the ray verbatim. Slow on
purpose; keep the inputs at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .convex import ConvexFunction
from .errors import GeometryError
from .spaces import HalfPlane, PlanePoint, Point, Ray, Space, Tree, TreePoint


@dataclass(frozen=True)
class GridSpec:
    """Search grid for the brute-force proximal reference.

    resolution: offset step along tree edges, or coordinate step in (u, ln v)
    for the half-plane and (u, v) for the flat plane. bounds: end-edge offset
    cap for trees; ((u_lo, u_hi), (w_lo, w_hi)) rectangle for the planes. The
    region must contain the query point's ball of radius 2 tau L, where the
    minimizer is guaranteed to live.
    """

    resolution: float
    bounds: Optional[object] = None


def default_grid(space: Space, x: Point, tau: float, L: float,
                 resolution: float) -> GridSpec:
    """A grid guaranteed to cover the 2*tau*L ball around x."""
    radius = 2.0 * tau * L * 1.001 + 10.0 * resolution
    if isinstance(space, Tree):
        cap = (x.offset if isinstance(x, TreePoint) else 0.0) + radius + space.core_diameter
        return GridSpec(resolution, cap)
    if isinstance(space, HalfPlane):
        w = math.log(x.v)
        half_u = x.v * math.sinh(radius)
        return GridSpec(resolution, ((x.u - half_u, x.u + half_u),
                                     (w - radius, w + radius)))
    return GridSpec(resolution, ((x.u - radius, x.u + radius),
                                 (x.v - radius, x.v + radius)))


def _axis(lo: float, hi: float, resolution: float) -> list[float]:
    n = max(1, math.ceil((hi - lo) / resolution))
    return [lo + (hi - lo) * i / n for i in range(n + 1)]


def prox_grid(f: ConvexFunction, space: Space, x: Point, tau: float,
              grid: GridSpec) -> tuple[Point, float]:
    """Exhaustive minimum of f(y) + d(x,y)^2/(2 tau) over the grid.

    The grid value is within 3*L*resolution of the true minimum: L
    from f plus 2L from the squared-distance term on the search ball.
    """
    two_tau = 2.0 * tau
    best_y: Optional[Point] = None
    best_g = math.inf

    def consider(y: Point) -> None:
        nonlocal best_y, best_g
        g = f(y) + space.distance(x, y) ** 2 / two_tau
        if g < best_g:
            best_y, best_g = y, g

    if isinstance(space, Tree):
        radius = 2.0 * tau * f.lipschitz
        on_end = space._is_end_edge[x.edge]
        cap = float(grid.bounds) if grid.bounds is not None else 0.0
        if cap < (x.offset if on_end else 0.0) + radius:
            raise GeometryError("end-edge cap does not cover the 2*tau*L ball")
        for eid, (_, _, length) in enumerate(space.edges):
            hi = cap if space._is_end_edge[eid] else length
            for s in _axis(0.0, hi, grid.resolution):
                consider(TreePoint(eid, s))
        return best_y, best_g

    hyper = isinstance(space, HalfPlane)
    (u_lo, u_hi), (w_lo, w_hi) = grid.bounds
    need = 2.0 * tau * f.lipschitz
    w_x = math.log(x.v) if hyper else x.v
    half_u = x.v * math.sinh(need) if hyper else need
    if (w_x - need < w_lo or w_x + need > w_hi
            or x.u - half_u < u_lo or x.u + half_u > u_hi):
        raise GeometryError("grid rectangle does not cover the 2*tau*L ball")
    return _brute_rect(f, space, x, tau, grid, hyper)


def prox_grid_refined(f: ConvexFunction, space: Space, x: Point, tau: float,
                      rounds: int = 3, points_per_axis: int = 81) -> tuple[Point, float]:
    """Iteratively re-centered grid search for the planar spaces: each round
    shrinks the window around the best cell. The window stays generously wider
    than the sublevel set a grid-cell error can hide in, so the minimum value
    never increases between rounds."""
    if isinstance(space, Tree):
        raise GeometryError("refinement loop is for the planar spaces")
    hyper = isinstance(space, HalfPlane)
    radius = 2.0 * tau * f.lipschitz * 1.001 + 1e-3
    cu = x.u
    cw = math.log(x.v) if hyper else x.v
    half_u = x.v * math.sinh(radius) if hyper else radius
    half_w = radius
    best: Optional[tuple[Point, float]] = None
    for _ in range(rounds):
        res = 2.0 * max(half_u, half_w) / (points_per_axis - 1)
        spec = GridSpec(res, ((cu - half_u, cu + half_u), (cw - half_w, cw + half_w)))
        y, g = _brute_rect(f, space, x, tau, spec, hyper)
        if best is None or g < best[1]:
            best = (y, g)
        cu = y.u
        cw = math.log(y.v) if hyper else y.v
        # the objective is (1/tau)-strongly convex along geodesics, so the true
        # minimizer lies within rho of the best cell; window the next round on that
        rho = math.sqrt(2.0 * tau * 6.0 * f.lipschitz * res) + res
        half_w = max(4.0 * res, rho)
        half_u = max(4.0 * res, math.exp(cw) * math.sinh(rho) if hyper else rho)
    return best


def _brute_rect(f, space, x, tau, spec: GridSpec, hyper: bool) -> tuple[Point, float]:
    (u_lo, u_hi), (w_lo, w_hi) = spec.bounds
    best_y, best_g = None, math.inf
    for u in _axis(u_lo, u_hi, spec.resolution):
        for w in _axis(w_lo, w_hi, spec.resolution):
            y = PlanePoint(u, math.exp(w)) if hyper else PlanePoint(u, w)
            g = f(y) + space.distance(x, y) ** 2 / (2.0 * tau)
            if g < best_g:
                best_y, best_g = y, g
    return best_y, best_g


def delta_exhaustive(space: Space, points: Sequence[Point]) -> float:
    """Exact max four-point defect over every labeled quadruple of the sample,
    by plain loops over the distance matrix."""
    pts = list(points)
    n = len(pts)
    if n < 4:
        raise GeometryError(f"need at least 4 points, got {n}")
    D = [[space.distance(a, b) for b in pts] for a in pts]
    worst = 0.0
    for p in range(n):
        dp = D[p]
        for xi in range(n):
            for yi in range(n):
                gxy = 0.5 * (dp[xi] + dp[yi] - D[xi][yi])
                for zi in range(n):
                    gyz = 0.5 * (dp[yi] + dp[zi] - D[yi][zi])
                    gxz = 0.5 * (dp[xi] + dp[zi] - D[xi][zi])
                    defect = min(gxy, gyz) - gxz
                    if defect > worst:
                        worst = defect
    return worst


def slope_quotient(f: ConvexFunction, ray: Ray, t_list: Sequence[float]) -> list[float]:
    """Raw quotient sequence (f(ray(t)) - f(ray(0))) / t; the convexity tests
    check it is non-decreasing and the slope tests compare its tail."""
    if any(t <= 0.0 for t in t_list):
        raise GeometryError("quotient times must be positive")
    f0 = f(ray(0.0))
    return [(f(ray(t)) - f0) / t for t in t_list]
