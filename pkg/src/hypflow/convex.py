"""Lipschitz convex functions on the model spaces and their slope diagnostics.

Functions built through the constructors here carry exact structural asymptotic
slopes per boundary direction whenever those are known in closed form, so the
steepness constant recovered by `slope_report` is exact for the whole generated
family. Numeric quotient estimation is the fallback for opaque evaluators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvexityError, GeometryError
from .spaces import (
    BoundaryDirection,
    Euclid2,
    EuclidEnd,
    HalfPlane,
    HalfPlaneEnd,
    PlanePoint,
    Point,
    Ray,
    Space,
    Tree,
    TreeEnd,
    TreePoint,
)

#: Sentinel for an infinite asymptotic slope (kept > 1e12 so it is unmistakable).
SLOPE_INFINITE = 1e18

#: Slopes below this are counted as genuinely negative in slope reports.
NEGATIVE_SLOPE_TOL = 1e-9

EPS_CVX = 1e-9


@dataclass(frozen=True)
class ConvexFunction:
    """Evaluable Lipschitz convex function with a certified Lipschitz bound.

    `declared_alpha` is minus the infimum of the asymptotic slope when known
    analytically. `slope_fn` returns the exact asymptotic slope toward a
    boundary direction when the composition admits one. `hints` are boundary
    directions worth probing (the anchors of the composition); a continuum
    boundary cannot be searched blindly.
    """

    space: Space
    fn: Callable[[Point], float]
    lipschitz: float
    declared_alpha: Optional[float] = None
    tag: str = ""
    slope_fn: Optional[Callable[[BoundaryDirection], float]] = None
    hints: tuple = ()

    def __call__(self, x: Point) -> float:
        return self.fn(x)


@dataclass(frozen=True)
class SlopeReport:
    """Asymptotic slope per probed boundary direction.

    alpha_hat is minus the smallest slope seen (negative alpha_hat means no
    descending direction was found). v_star is the unique direction of negative
    slope when one exists among the probes.
    """

    entries: tuple  # of (BoundaryDirection, float)
    alpha_hat: float
    negative_directions: tuple
    v_star: Optional[BoundaryDirection]


# ---------------------------------------------------------------------------
# constructors

def busemann(space: Space, ray: Ray) -> ConvexFunction:
    """Busemann function of the ray: the limit of d(., ray(t)) - t, normalized
    to vanish at the ray's base. 1-Lipschitz, convex, decaying at unit rate
    along the ray and growing at unit rate toward every other direction."""
    direction = ray.direction
    if isinstance(space, Tree):
        space.validate_direction(direction)
        eid = space.end_edge(direction)
        # vertex values are exact once the reference time passes every merge point
        t_ref = space.core_diameter + space.distance(ray.base, space.origin()) \
            + max(length for _, _, length in space.edges) + 1.0
        xi_ref = ray(t_ref)
        bvert = {v: space.distance(space.vertex_point(v), xi_ref) - t_ref
                 for v in space.vertices}
        edges = space.edges
        is_end = space._is_end_edge

        def fn(x: TreePoint) -> float:
            a, b, length = edges[x.edge]
            if x.edge == eid:
                return bvert[a] - x.offset
            if is_end[x.edge]:
                return bvert[a] + x.offset
            return min(bvert[a] + x.offset, bvert[b] + (length - x.offset))

        def slope(d: BoundaryDirection) -> float:
            return -1.0 if d == direction else 1.0

    elif isinstance(space, HalfPlane):
        space.validate_direction(direction)
        a, b = ray.base.u, ray.base.v
        if math.isinf(direction.coord):
            w0 = math.log(b)

            def fn(x: PlanePoint) -> float:
                return w0 - math.log(x.v)
        else:
            p = direction.coord
            norm = 2.0 * math.log(math.hypot(a - p, b)) - math.log(b)

            def fn(x: PlanePoint) -> float:
                return 2.0 * math.log(math.hypot(x.u - p, x.v)) - math.log(x.v) - norm

        def slope(d: BoundaryDirection) -> float:
            return -1.0 if d == direction else 1.0

    elif isinstance(space, Euclid2):
        space.validate_direction(direction)
        cu, cv = math.cos(direction.angle), math.sin(direction.angle)
        bu, bv = ray.base.u, ray.base.v

        def fn(x: PlanePoint) -> float:
            return -((x.u - bu) * cu + (x.v - bv) * cv)

        def slope(d: BoundaryDirection) -> float:
            return -math.cos(d.angle - direction.angle)

    else:
        raise GeometryError(f"unsupported space {space!r}")

    return ConvexFunction(space, fn, lipschitz=1.0, declared_alpha=1.0,
                          tag=f"busemann({direction})", slope_fn=slope,
                          hints=(direction,))


def distance_to(space: Space, q: Point, scale: float = 1.0) -> ConvexFunction:
    """scale * d(q, .): convex, bounded below, slope +scale toward every direction."""
    if scale <= 0.0:
        raise GeometryError(f"scale must be positive, got {scale}")
    space.validate_point(q)

    def fn(x: Point) -> float:
        return scale * space.distance(q, x)

    return ConvexFunction(space, fn, lipschitz=scale, tag=f"distance_to({q}, {scale})",
                          slope_fn=lambda d: scale)


def constant(space: Space, value: float) -> ConvexFunction:
    return ConvexFunction(space, lambda x: value, lipschitz=0.0,
                          tag=f"constant({value})", slope_fn=lambda d: 0.0)


def combine(terms: Sequence[tuple[float, ConvexFunction]], mode: str = "sum") -> ConvexFunction:
    """Positive combination (sum) or pointwise max of convex functions on one space.

    Both preserve convexity along the unique geodesics of the model spaces.
    The declared steepness is dropped; structural slopes recompose exactly.
    """
    if not terms:
        raise GeometryError("combine requires at least one term")
    space = terms[0][1].space
    for w, f in terms:
        if w <= 0.0:
            raise GeometryError(f"weights must be positive, got {w}")
        if f.space is not space:
            raise GeometryError("cannot combine functions on different spaces")
    fns = [(w, f.fn) for w, f in terms]

    if mode == "sum":
        def fn(x: Point) -> float:
            return sum(w * g(x) for w, g in fns)
        lip = sum(w * f.lipschitz for w, f in terms)
    elif mode == "max":
        def fn(x: Point) -> float:
            return max(w * g(x) for w, g in fns)
        lip = max(w * f.lipschitz for w, f in terms)
    else:
        raise ValueError(f"unknown combine mode {mode!r}")

    slope_fn = None
    if all(f.slope_fn is not None for _, f in terms):
        slopes = [(w, f.slope_fn) for w, f in terms]
        if mode == "sum":
            def slope_fn(d: BoundaryDirection) -> float:
                total = sum(w * s(d) for w, s in slopes)
                return min(total, SLOPE_INFINITE)
        else:
            def slope_fn(d: BoundaryDirection) -> float:
                return min(max(w * s(d) for w, s in slopes), SLOPE_INFINITE)

    hints: list = []
    for _, f in terms:
        for h in f.hints:
            if h not in hints:
                hints.append(h)
    return ConvexFunction(space, fn, lipschitz=lip, tag=f"{mode}({len(terms)} terms)",
                          slope_fn=slope_fn, hints=tuple(hints))


# ---------------------------------------------------------------------------
# slope diagnostics

def _tree_probes(space: Tree, x: TreePoint, h: float) -> list[Point]:
    """Points at distance h from x in every tree direction (shorter if a
    non-extendable leaf blocks the way)."""
    probes: list[Point] = []
    a, b, length = space.edges[x.edge]
    eff_len = math.inf if space._is_end_edge[x.edge] else length

    def descend(vertex: str, arrived_edge: int, remaining: float) -> None:
        out = [(eid, other) for eid, other in space._adj[vertex] if eid != arrived_edge]
        if not out:
            probes.append(space.vertex_point(vertex))
            return
        for eid, other in out:
            va, vb, vlen = space.edges[eid]
            span = math.inf if space._is_end_edge[eid] else vlen
            from_a = vertex == va
            if remaining <= span:
                off = remaining if from_a else vlen - remaining
                probes.append(TreePoint(eid, off))
            else:
                descend(other, eid, remaining - vlen)

    up = x.offset + h
    if up <= eff_len:
        probes.append(TreePoint(x.edge, up))
    else:
        descend(b, x.edge, up - length)
    down = x.offset - h
    if down >= 0.0:
        probes.append(TreePoint(x.edge, down))
    else:
        descend(a, x.edge, -down)
    return probes


def descending_slope(f: ConvexFunction, x: Point, h: float = 1e-4,
                     n_dir: int = 128) -> float:
    """Finite-difference estimate of the descending slope at x: the largest
    normalized decrease over probe points at distance ~h. For convex functions
    the finite-h quotient never exceeds the true limsup, so this estimate is
    biased low, the conservative side for duality checks."""
    if h <= 0.0:
        raise GeometryError(f"step h must be positive, got {h}")
    space = f.space
    if isinstance(space, Tree):
        probes = _tree_probes(space, x, h)
    elif isinstance(space, HalfPlane):
        probes = [space.circle_point(x, h, a)
                  for a in np.linspace(0.0, 2.0 * math.pi, n_dir, endpoint=False)]
    else:
        probes = [PlanePoint(x.u + h * math.cos(a), x.v + h * math.sin(a))
                  for a in np.linspace(0.0, 2.0 * math.pi, n_dir, endpoint=False)]
    fx = f(x)
    best = 0.0
    for y in probes:
        d = space.distance(x, y)
        if d > 0.0:
            best = max(best, (fx - f(y)) / d)
    return best


def asymptotic_slope(f: ConvexFunction, ray: Ray, t_max: float, n: int = 8) -> float:
    """Quotient (f(ray(t_max)) - f(ray(0))) / t_max, after checking that the
    quotient sequence is non-decreasing at n intermediate times (a violation
    beyond EPS_CVX means f is not convex along the ray)."""
    if t_max <= 0.0 or n < 2:
        raise GeometryError("t_max must be positive and n >= 2")
    f0 = f(ray(0.0))
    prev = -math.inf
    quot = 0.0
    for i in range(1, n + 1):
        t = t_max * i / n
        quot = (f(ray(t)) - f0) / t
        if quot < prev - EPS_CVX:
            raise ConvexityError(
                f"slope quotient decreased from {prev} to {quot} at t={t} along {ray.direction}")
        prev = quot
    return quot


def _probe_directions(space: Space, f: ConvexFunction) -> list[BoundaryDirection]:
    dirs = list(space.boundary_directions())
    for h in f.hints:
        if h not in dirs:
            dirs.append(h)
    return dirs


def slope_report(f: ConvexFunction, space: Space, base: Point,
                 t_max: Optional[float] = None, n: int = 8,
                 directions: Optional[Sequence[BoundaryDirection]] = None) -> SlopeReport:
    """Asymptotic slope toward each probed boundary direction.

    Trees probe all declared ends (the whole boundary); the planes probe a
    documented finite sample plus the function's own anchor directions, since
    their boundary is a continuum. At most one direction of negative slope may
    exist on the tree and half-plane; observing two is a convexity violation.
    The flat plane is exempt: it is the negative control where uniqueness fails.
    """
    if directions is None:
        directions = _probe_directions(space, f)
    if not directions:
        raise GeometryError("space exposes no boundary directions")
    if t_max is None:
        if isinstance(space, Tree):
            t_max = 4.0 * space.core_diameter + 64.0
        elif isinstance(space, HalfPlane):
            t_max = 512.0  # heights reach exp(t_max); stay clear of float overflow
        else:
            t_max = 1e4

    entries = []
    for d in directions:
        if f.slope_fn is not None:
            s = f.slope_fn(d)
        else:
            s = asymptotic_slope(f, space.ray_from(base, d), t_max, n)
        entries.append((d, s))

    slopes = [s for _, s in entries]
    alpha_hat = -min(slopes)
    negative = tuple(d for d, s in entries if s < -NEGATIVE_SLOPE_TOL)
    if len(negative) > 1 and not isinstance(space, Euclid2):
        raise ConvexityError(
            f"{len(negative)} directions of negative asymptotic slope: {negative}")
    v_star = None
    if negative:
        v_star = min(((d, s) for d, s in entries if s < -NEGATIVE_SLOPE_TOL),
                     key=lambda ds: ds[1])[0]
    return SlopeReport(tuple(entries), alpha_hat, negative, v_star)


# ---------------------------------------------------------------------------
# JSON ingestion

def function_from_json(space: Space, obj: dict, base: Optional[Point] = None) -> ConvexFunction:
    """Build a function from its JSON description.

    busemann rays are based at `base` (default: the space origin); the base
    only shifts the function by a constant.
    """
    from .spaces import direction_from_json, point_from_json

    kind = obj.get("type")
    if kind == "busemann":
        b = base if base is not None else space.origin()
        d = direction_from_json(space, obj["direction"])
        return busemann(space, space.ray_from(b, d))
    if kind == "distance_to":
        q = point_from_json(space, obj["point"])
        return distance_to(space, q, float(obj.get("scale", 1.0)))
    if kind in ("sum", "max"):
        terms = [(float(t["weight"]), function_from_json(space, t["fn"], base))
                 for t in obj["terms"]]
        return combine(terms, mode=kind)
    raise GeometryError(f"unknown function type {kind!r}")
