"""The proximal (resolvent) operator: argmin of f(y) + d(x,y)^2 / (2 tau).

Trees get an exact solver (golden section on the convex restriction to every
edge, end-edges truncated by the a-priori step bound); the planes get a
deterministic 2D descent in coordinates where the domain constraint vanishes.
Step diagnostics cover the two-sided step bounds, the guaranteed decrease, and
the tree-like contraction toward deeper sublevel points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .convex import ConvexFunction
from .errors import GeometryError
from .reports import BoundEntry
from .search import golden_section, pattern_search_2d
from .spaces import Euclid2, HalfPlane, PlanePoint, Point, Space, Tree, TreePoint

#: Parameter tolerance of the per-edge golden-section search. Tighter than the
#: positional accuracy demanded downstream so that errors stay negligible even
#: accumulated over long runs.
TREE_PARAM_TOL = 1e-12

#: Probe radius below which the planar descent stops.
PLANE_STEP_TOL = 1e-9

SOLVER_SWEEP_CAP = 100_000


@dataclass(frozen=True)
class ProxStep:
    """One application of the proximal operator with its diagnostics."""

    x: Point
    x_tau: Point
    tau: float
    step_length: float
    f_x: float
    f_x_tau: float
    objective: float  # f(x_tau) + step_length^2 / (2 tau)
    solver: str
    residual: float


def _polish_quadratic(g, c: float, gc: float, lo: float, hi: float,
                      h: float = 1e-5) -> tuple[float, float]:
    """One parabolic fit around c. Value comparisons bottom out at sqrt(eps),
    but the restriction of the objective to an edge is piecewise quadratic, so
    the fitted vertex is exact on a smooth piece. A kink inside the fit window
    is detected by the value increasing and the fit is discarded."""
    if c - h < lo or c + h > hi:
        return c, gc
    gm, gp = g(c - h), g(c + h)
    curv = gp - 2.0 * gc + gm
    if curv <= 0.0:
        return c, gc
    vertex = c - 0.5 * h * (gp - gm) / curv
    if abs(vertex - c) > h:
        return c, gc
    gv = g(vertex)
    if gv <= gc + 1e-12:
        return vertex, gv
    return c, gc


def _prox_tree(f: ConvexFunction, space: Tree, x: TreePoint, tau: float) -> ProxStep:
    window = 2.0 * tau * f.lipschitz + space.core_diameter + 1.0
    best: Optional[tuple[float, int, float]] = None
    for eid, (a, b, length) in enumerate(space.edges):
        if space._is_end_edge[eid]:
            hi = (x.offset if x.edge == eid else 0.0) + window
        else:
            hi = length

        def g(s: float, _eid=eid) -> float:
            y = TreePoint(_eid, s)
            return f(y) + space.distance(x, y) ** 2 / (2.0 * tau)

        s_star, g_star = golden_section(g, 0.0, hi, tol=TREE_PARAM_TOL)
        s_star, g_star = _polish_quadratic(g, s_star, g_star, 0.0, hi)
        if best is None or g_star < best[0] - 1e-12:
            best = (g_star, eid, s_star)
    g_star, eid, s_star = best
    y = TreePoint(eid, s_star)
    return ProxStep(x, y, tau, space.distance(x, y), f(x), f(y), g_star,
                    "exact_tree", 1e-10)


def _prox_plane(f: ConvexFunction, space: Space, x: PlanePoint, tau: float) -> ProxStep:
    # Optimize in the chart centered at x: for the half-plane that is the
    # isometry-normalized frame (x at (0,1)) in (u, ln v) coordinates, so the
    # search ball of radius 2*tau*L stays well-conditioned no matter how close
    # the iterate has come to the boundary; global coordinates would lose all
    # horizontal resolution there. Flat case: plain translation.
    hyper = isinstance(space, HalfPlane)
    if hyper:
        def to_point(cu: float, cw: float) -> PlanePoint:
            return PlanePoint(x.u + x.v * cu, x.v * math.exp(cw))
    else:
        def to_point(cu: float, cw: float) -> PlanePoint:
            return PlanePoint(x.u + cu, x.v + cw)

    def g(cu: float, cw: float) -> float:
        y = to_point(cu, cw)
        return f(y) + space.distance(x, y) ** 2 / (2.0 * tau)

    # Seed with 1D golden section along the rays toward the function's anchor
    # directions: for large steps toward a finite half-plane anchor the optimum
    # sits in an exponentially thin funnel that blind compass probes cannot
    # thread, while along the anchor ray it is a smooth 1D problem.
    start, g_start = (0.0, 0.0), g(0.0, 0.0)
    reach = 2.0 * tau * f.lipschitz
    for hint in f.hints:
        ray = space.ray_from(x, hint)

        def g_ray(t: float, _ray=ray) -> float:
            return f(_ray(t)) + t * t / (2.0 * tau)

        t_star, g_t = golden_section(g_ray, 0.0, reach, tol=1e-10)
        if g_t < g_start:
            y = ray(t_star)
            if hyper:
                start = ((y.u - x.u) / x.v, math.log(y.v / x.v))
            else:
                start = (y.u - x.u, y.v - x.v)
            g_start = g_t

    step0 = max(reach, 1e-2)
    (cu, cw), g_star, radius = pattern_search_2d(g, start, step=step0,
                                                 tol=PLANE_STEP_TOL,
                                                 max_sweeps=SOLVER_SWEEP_CAP)
    y = to_point(cu, cw)
    return ProxStep(x, y, tau, space.distance(x, y), f(x), f(y), g_star,
                    "numeric_2d", radius)


def prox(f: ConvexFunction, space: Space, x: Point, tau: float) -> ProxStep:
    """Minimize y -> f(y) + d(x,y)^2/(2 tau).

    The objective is strictly convex along geodesics in all three model
    spaces, so the minimizer is unique; ties between edge parametrizations of
    the same tree point break to the lowest edge index.
    """
    if tau <= 0.0:
        raise GeometryError(f"step size tau must be positive, got {tau}")
    if f.space is not space:
        raise GeometryError("function is not defined on this space")
    space.validate_point(x)
    if isinstance(space, Tree):
        return _prox_tree(f, space, x, tau)
    return _prox_plane(f, space, x, tau)


def check_step_bounds(step: ProxStep, L: float, alpha: Optional[float] = None,
                      k: int = 0, tol: float = 1e-6) -> list[BoundEntry]:
    """Margins for the certified step bounds of one proximal application:

    - step_upper: d(x, x_tau) <= 2 tau L                    (Lipschitz only)
    - step_lower: d(x, x_tau) >= (L - sqrt(L^2 - a^2)) tau  (needs alpha > 0)
    - step_lower_weak: the weaker a^2 tau / (2L) form, recorded because the
      divergence rate estimate telescopes it
    - decrease: f(x) - f(x_tau) >= a^4 tau / (8 L^2)

    Margins are slack values; an entry passes when margin >= -tol, with the
    solver residual folded into tol.
    """
    tol = tol + step.residual
    d, tau = step.step_length, step.tau
    entries = [BoundEntry("eq4.1", k, d, 2.0 * tau * L, 2.0 * tau * L - d,
                          "pass" if 2.0 * tau * L - d >= -tol else "fail")]
    if alpha is None or alpha <= 0.0:
        entries.append(BoundEntry("eq4.2", k, d, 0.0, 0.0, "inapplicable"))
        entries.append(BoundEntry("eq4.2w", k, d, 0.0, 0.0, "inapplicable"))
        entries.append(BoundEntry("eq4.3", k, step.f_x - step.f_x_tau, 0.0, 0.0,
                                  "inapplicable"))
        return entries
    alpha = min(alpha, L)  # weak duality guarantees alpha <= L
    lower = (L - math.sqrt(max(L * L - alpha * alpha, 0.0))) * tau
    weak = alpha * alpha * tau / (2.0 * L)
    drop_req = alpha ** 4 * tau / (8.0 * L * L)
    drop = step.f_x - step.f_x_tau
    entries.append(BoundEntry("eq4.2", k, d, lower, d - lower,
                              "pass" if d - lower >= -tol else "fail"))
    entries.append(BoundEntry("eq4.2w", k, d, weak, d - weak,
                              "pass" if d - weak >= -tol else "fail"))
    entries.append(BoundEntry("eq4.3", k, drop, drop_req, drop - drop_req,
                              "pass" if drop - drop_req >= -tol else "fail"))
    return entries


def check_contraction(f: ConvexFunction, step: ProxStep, p: Point, delta: float,
                      L: Optional[float] = None, k: int = 0,
                      tol: float = 1e-6) -> BoundEntry:
    """Tree-like contraction toward any p at least as deep as the new iterate:

        d(p, x_tau) <= d(p, x) - d(x, x_tau) + 4 sqrt(2 tau L delta)

    Inapplicable (not a failure) when f(p) > f(x_tau), the theorem's hypothesis.
    """
    space = f.space
    if L is None:
        L = f.lipschitz
    tol = tol + step.residual
    lhs = space.distance(p, step.x_tau)
    slack = 4.0 * math.sqrt(2.0 * step.tau * L * delta)
    rhs = space.distance(p, step.x) - step.step_length + slack
    margin = rhs - lhs
    if f(p) > step.f_x_tau + 1e-9:
        return BoundEntry("eq4.4", k, lhs, rhs, margin, "inapplicable")
    return BoundEntry("eq4.4", k, lhs, rhs, margin,
                      "pass" if margin >= -tol else "fail")
