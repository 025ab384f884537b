"""Model spaces: metric trees with declared ends, the hyperbolic upper half-plane,
and a flat plane used as a negative control.

All three are proper, uniquely geodesic, and expose the same surface: distance,
unit-speed geodesic points, rays toward boundary directions, and four-point
hyperbolicity estimation. Spaces are immutable after construction and every
operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import GeometryError
from .search import pattern_search_2d

INF = math.inf

#: Default probe radius below which closed-form and numeric geodesic
#: constructions are required to agree.
EPS_GEO = 1e-9

#: Documented ceiling for the sampled four-point constant of the upper
#: half-plane (sampling gives a lower bound on the true delta; this constant is
#: the value used when an upper-bound-style delta is needed in checks).
HALF_PLANE_DELTA_CAP = 1.0987


# ---------------------------------------------------------------------------
# points, boundary directions, rays

@dataclass(frozen=True)
class TreePoint:
    """Location on a tree edge: offset is arclength from the edge's first vertex.

    On an end-edge the offset may exceed the declared edge length; the edge is
    treated as extending to infinity past its end-leaf.
    """
    edge: int
    offset: float


@dataclass(frozen=True)
class PlanePoint:
    """Location in the half-plane (v > 0) or the flat plane."""
    u: float
    v: float


Point = Union[TreePoint, PlanePoint]


@dataclass(frozen=True)
class TreeEnd:
    leaf: str


@dataclass(frozen=True)
class HalfPlaneEnd:
    """Boundary coordinate on the real axis, or math.inf for the point at infinity."""
    coord: float


@dataclass(frozen=True)
class EuclidEnd:
    """Unit direction of the flat plane, as an angle in radians."""
    angle: float


BoundaryDirection = Union[TreeEnd, HalfPlaneEnd, EuclidEnd]


@dataclass(frozen=True)
class Ray:
    """Unit-speed geodesic [0, inf) -> space with ray(0) == base."""
    base: Point
    direction: BoundaryDirection
    _eval: Callable[[float], Point]

    def __call__(self, t: float) -> Point:
        if t < 0.0:
            raise GeometryError(f"ray parameter must be >= 0, got {t}")
        return self._eval(t)


@dataclass(frozen=True)
class HyperbolicityEstimate:
    """Max observed four-point defect over the examined quadruples.

    This is a lower bound on the true hyperbolicity constant of the space
    restricted to the sample: sampling can certify 'at least this curved' but
    never an upper bound.
    """
    delta_hat: float
    quadruple_count: int
    method: str


# ---------------------------------------------------------------------------
# trees

class Tree:
    """Finite metric tree with positive edge lengths and distinguished end-leaves.

    An end-leaf's incident edge is extendable past the leaf to infinite length;
    points on it carry an unbounded offset measured from the internal endpoint.
    End-edges are normalized at construction so the leaf is the second vertex.
    """

    kind = "tree"

    def __init__(self, vertices: Sequence[str], edges: Iterable[tuple], ends: Iterable[str]):
        self.vertices = [str(v) for v in vertices]
        if len(set(self.vertices)) != len(self.vertices):
            raise GeometryError("duplicate vertex ids")
        self.ends = tuple(sorted(str(e) for e in ends))
        vset = set(self.vertices)
        if not set(self.ends) <= vset:
            raise GeometryError("end leaves must be declared vertices")

        norm = []
        for a, b, length in edges:
            a, b, length = str(a), str(b), float(length)
            if length <= 0.0:
                raise GeometryError(f"edge ({a},{b}) must have positive length")
            if a not in vset or b not in vset:
                raise GeometryError(f"edge ({a},{b}) references unknown vertex")
            if a in self.ends and b in self.ends:
                raise GeometryError(f"edge ({a},{b}) joins two end-leaves; insert a core vertex")
            if a in self.ends:
                a, b = b, a
            norm.append((a, b, length))
        self.edges: list[tuple[str, str, float]] = norm

        self._adj: dict[str, list[tuple[int, str]]] = {v: [] for v in self.vertices}
        for i, (a, b, _) in enumerate(self.edges):
            self._adj[a].append((i, b))
            self._adj[b].append((i, a))
        if len(self.edges) != len(self.vertices) - 1:
            raise GeometryError("edge count must be vertex count - 1 for a tree")
        for leaf in self.ends:
            if len(self._adj[leaf]) != 1:
                raise GeometryError(f"end leaf {leaf!r} must have degree 1")

        self._end_edge = {leaf: self._adj[leaf][0][0] for leaf in self.ends}
        self._is_end_edge = [False] * len(self.edges)
        for e in self._end_edge.values():
            self._is_end_edge[e] = True

        # all-pairs vertex distances and per-root parent links, by one sweep per root
        self._vdist: dict[str, dict[str, float]] = {}
        self._parent: dict[str, dict[str, tuple[str, int]]] = {}
        for root in self.vertices:
            dist = {root: 0.0}
            parent: dict[str, tuple[str, int]] = {}
            stack = [root]
            while stack:
                v = stack.pop()
                for eid, w in self._adj[v]:
                    if w not in dist:
                        dist[w] = dist[v] + self.edges[eid][2]
                        parent[w] = (v, eid)
                        stack.append(w)
            if len(dist) != len(self.vertices):
                raise GeometryError("tree is not connected")
            self._vdist[root] = dist
            self._parent[root] = parent

        self.core_diameter = max(max(d.values()) for d in self._vdist.values())

    # -- points ------------------------------------------------------------

    def validate_point(self, x: Point) -> None:
        if not isinstance(x, TreePoint):
            raise GeometryError(f"{x!r} is not a tree point")
        if not 0 <= x.edge < len(self.edges):
            raise GeometryError(f"edge index {x.edge} out of range")
        length = self.edges[x.edge][2]
        if x.offset < 0.0 or (not self._is_end_edge[x.edge] and x.offset > length):
            raise GeometryError(f"offset {x.offset} outside edge {x.edge} of length {length}")

    def vertex_point(self, v: str) -> TreePoint:
        v = str(v)
        if v not in self._adj:
            raise GeometryError(f"unknown vertex {v!r}")
        eid, _ = min(self._adj[v])
        a, b, length = self.edges[eid]
        return TreePoint(eid, 0.0 if v == a else length)

    def origin(self) -> TreePoint:
        return self.vertex_point(self.vertices[0])

    def _exits(self, x: TreePoint) -> list[tuple[str, float]]:
        """Vertices through which a path may leave x's edge, with the cost to reach them."""
        a, b, length = self.edges[x.edge]
        if self._is_end_edge[x.edge]:
            return [(a, x.offset)]
        return [(a, x.offset), (b, length - x.offset)]

    def distance(self, x: TreePoint, y: TreePoint) -> float:
        self.validate_point(x)
        self.validate_point(y)
        if x.edge == y.edge:
            return abs(x.offset - y.offset)
        best = INF
        for wx, cx in self._exits(x):
            dw = self._vdist[wx]
            for wy, cy in self._exits(y):
                best = min(best, cx + dw[wy] + cy)
        return best

    def _vertex_path(self, w1: str, w2: str) -> list[tuple[int, str, str]]:
        """Edges from w1 to w2 as (edge id, from vertex, to vertex)."""
        parent = self._parent[w1]
        path = []
        v = w2
        while v != w1:
            pv, eid = parent[v]
            path.append((eid, pv, v))
            v = pv
        path.reverse()
        return path

    def _segments(self, x: TreePoint, y: TreePoint) -> list[tuple[int, float, float]]:
        """The geodesic from x to y as (edge, offset_from, offset_to) pieces."""
        if x.edge == y.edge:
            return [(x.edge, x.offset, y.offset)]
        best, bw = INF, None
        for wx, cx in self._exits(x):
            dw = self._vdist[wx]
            for wy, cy in self._exits(y):
                total = cx + dw[wy] + cy
                if total < best:
                    best, bw = total, (wx, wy)
        wx, wy = bw
        segs = [(x.edge, x.offset, self._offset_of(x.edge, wx))]
        for eid, v_from, v_to in self._vertex_path(wx, wy):
            segs.append((eid, self._offset_of(eid, v_from), self._offset_of(eid, v_to)))
        segs.append((y.edge, self._offset_of(y.edge, wy), y.offset))
        return segs

    def _offset_of(self, eid: int, v: str) -> float:
        a, b, length = self.edges[eid]
        return 0.0 if v == a else length

    @staticmethod
    def _walk(segs: list[tuple[int, float, float]], t: float) -> TreePoint:
        acc = 0.0
        for i, (eid, o1, o2) in enumerate(segs):
            seg_len = abs(o2 - o1)
            if t <= acc + seg_len or i == len(segs) - 1:
                local = min(max(t - acc, 0.0), seg_len)
                return TreePoint(eid, o1 + local if o2 >= o1 else o1 - local)
            acc += seg_len
        raise AssertionError("empty segment list")

    def geodesic_point(self, x: TreePoint, y: TreePoint, t: float) -> TreePoint:
        d = self.distance(x, y)
        if t < -1e-12 or t > d + 1e-12:
            raise GeometryError(f"geodesic parameter {t} outside [0, {d}]")
        return self._walk(self._segments(x, y), min(max(t, 0.0), d))

    # -- boundary ----------------------------------------------------------

    def boundary_directions(self) -> list[TreeEnd]:
        return [TreeEnd(leaf) for leaf in self.ends]

    def validate_direction(self, d: BoundaryDirection) -> None:
        if not isinstance(d, TreeEnd) or d.leaf not in self.ends:
            raise GeometryError(f"{d!r} is not a declared end of this tree")

    def end_edge(self, d: TreeEnd) -> int:
        self.validate_direction(d)
        return self._end_edge[d.leaf]

    def ray_from(self, base: TreePoint, direction: TreeEnd) -> Ray:
        self.validate_point(base)
        self.validate_direction(direction)
        eid = self._end_edge[direction.leaf]
        a_e = self.edges[eid][0]
        if base.edge == eid:
            segs: list[tuple[int, float, float]] = []
            core_len = 0.0
            tail_start = base.offset
        else:
            target = TreePoint(eid, 0.0)
            segs = self._segments(base, target)
            core_len = self.distance(base, target)
            tail_start = 0.0

        def _eval(t: float, _segs=segs, _core=core_len, _tail=tail_start, _eid=eid) -> TreePoint:
            if t >= _core:
                return TreePoint(_eid, _tail + (t - _core))
            return Tree._walk(_segs, t)

        return Ray(base, direction, _eval)

    def to_json(self) -> dict:
        return {"kind": "tree",
                "vertices": list(self.vertices),
                "edges": [[a, b, length] for a, b, length in self.edges],
                "ends": list(self.ends)}


# ---------------------------------------------------------------------------
# the hyperbolic upper half-plane

def _hp_dist(u1: float, v1: float, u2: float, v2: float) -> float:
    """Distance in the upper half-plane, stable for both tiny separations and
    extreme heights: d = 2*asinh(hypot(sinh(dw/2), |du|/2 * exp(-(w1+w2)/2)))."""
    w1, w2 = math.log(v1), math.log(v2)
    hdw = 0.5 * (w1 - w2)
    if abs(hdw) > 700.0:
        return abs(w1 - w2)
    du = u1 - u2
    if du == 0.0:
        r = abs(math.sinh(hdw))
    else:
        r = math.hypot(math.sinh(hdw), 0.5 * abs(du) * math.exp(-0.5 * (w1 + w2)))
    if math.isinf(r):
        return abs(w1 - w2)
    return 2.0 * math.asinh(r)


def _hp_invert(u: float, v: float, p: float) -> tuple[float, float]:
    """The isometry z -> -1/(z - p): sends boundary point p to infinity, so any
    geodesic ending at p becomes a vertical line."""
    zu = u - p
    nrm = zu * zu + v * v
    return -zu / nrm, v / nrm


def _hp_invert_back(cu: float, cv: float, p: float) -> tuple[float, float]:
    """Inverse of _hp_invert: z = p - 1/zeta."""
    nrm = cu * cu + cv * cv
    return p - cu / nrm, cv / nrm


def _hp_dist_sq_grad(ua: float, wa: float, u: float, w: float) -> tuple[float, float, float]:
    """Squared half-plane distance from (ua, e^wa) to (u, e^w) and its (u, w) gradient.

    Uses d = 2*asinh(sqrt(s)) with s = sinh((w-wa)/2)^2 + ((u-ua)/2)^2 e^{-(wa+w)};
    the gradient of d^2 stays bounded as the points merge.
    """
    hdw = 0.5 * (w - wa)
    du2 = 0.5 * (u - ua)
    e = math.exp(-(wa + w))
    s = math.sinh(hdw) ** 2 + du2 * du2 * e
    d = 2.0 * math.asinh(math.sqrt(s))
    if s == 0.0:
        return 0.0, 0.0, 0.0
    factor = 2.0 * d / math.sqrt(s * (1.0 + s))
    ds_du = 0.5 * du2 * e
    ds_dw = 0.5 * math.sinh(w - wa) - du2 * du2 * e
    return d * d, factor * ds_du, factor * ds_dw


def _hp_numeric_midpoint(space: "HalfPlane", a: PlanePoint, b: PlanePoint) -> PlanePoint:
    """Midpoint of [a, b] by minimizing the squared-distance sum: coarse pattern
    descent followed by damped Newton on the analytic gradient (value-only search
    stalls near 1e-8 because the objective is quadratically flat at the minimum)."""
    ua, wa = a.u, math.log(a.v)
    ub, wb = b.u, math.log(b.v)

    def val(u: float, w: float) -> float:
        return (_hp_dist_sq_grad(ua, wa, u, w)[0] + _hp_dist_sq_grad(ub, wb, u, w)[0])

    def grad(u: float, w: float) -> tuple[float, float]:
        _, g1u, g1w = _hp_dist_sq_grad(ua, wa, u, w)
        _, g2u, g2w = _hp_dist_sq_grad(ub, wb, u, w)
        return g1u + g2u, g1w + g2w

    d = space.distance(a, b)
    start = (0.5 * (ua + ub), 0.5 * (wa + wb))
    (cu, cw), fc, _ = pattern_search_2d(val, start, step=max(d, 1e-3), tol=1e-6)
    scale = 1.0 + abs(cu) + abs(cw)
    h = 1e-6
    for _ in range(40):
        gu, gw = grad(cu, cw)
        if math.hypot(gu, gw) < 1e-13 * scale:
            break
        j11 = (grad(cu + h, cw)[0] - grad(cu - h, cw)[0]) / (2 * h)
        j21 = (grad(cu + h, cw)[1] - grad(cu - h, cw)[1]) / (2 * h)
        j12 = (grad(cu, cw + h)[0] - grad(cu, cw - h)[0]) / (2 * h)
        j22 = (grad(cu, cw + h)[1] - grad(cu, cw - h)[1]) / (2 * h)
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            break
        su = -(j22 * gu - j12 * gw) / det
        sw = -(-j21 * gu + j11 * gw) / det
        step = 1.0
        for _ in range(20):
            nu, nw = cu + step * su, cw + step * sw
            if val(nu, nw) <= fc + 1e-18:
                cu, cw, fc = nu, nw, val(nu, nw)
                break
            step *= 0.5
        else:
            break
    return PlanePoint(cu, math.exp(cw))


class HalfPlane:
    """Upper half-plane {v > 0} with the hyperbolic metric of curvature -1.

    Geodesics are vertical lines and semicircles centered on the real axis;
    general pairs are evaluated through the semicircle's angle parametrization,
    which is the closed form obtained by normalizing the pair to a vertical line.
    """

    kind = "half_plane"

    def validate_point(self, x: Point) -> None:
        if not isinstance(x, PlanePoint) or not x.v > 0.0:
            raise GeometryError(f"{x!r} is not in the open upper half-plane")

    def origin(self) -> PlanePoint:
        return PlanePoint(0.0, 1.0)

    def distance(self, x: PlanePoint, y: PlanePoint) -> float:
        self.validate_point(x)
        self.validate_point(y)
        return _hp_dist(x.u, x.v, y.u, y.v)

    def _circle(self, x: PlanePoint, y: PlanePoint) -> tuple[float, float]:
        """Center and radius of the semicircle geodesic through x and y."""
        c = (y.u * y.u + y.v * y.v - x.u * x.u - x.v * x.v) / (2.0 * (y.u - x.u))
        return c, math.hypot(x.u - c, x.v)

    def geodesic_point(self, x: PlanePoint, y: PlanePoint, t: float) -> PlanePoint:
        d = self.distance(x, y)
        if t < -1e-12 or t > d + 1e-12:
            raise GeometryError(f"geodesic parameter {t} outside [0, {d}]")
        t = min(max(t, 0.0), d)
        if d == 0.0:
            return x
        scale = abs(x.u) + abs(y.u) + x.v + y.v
        if abs(x.u - y.u) <= 1e-13 * scale:
            sgn = 1.0 if y.v >= x.v else -1.0
            return PlanePoint(x.u, x.v * math.exp(sgn * t))
        # normalize the pair to a vertical line by inverting at the semicircle
        # endpoint the segment stays away from, walk, and map back
        c, r = self._circle(x, y)
        pl, pr = c - r, c + r
        near_l = min(math.hypot(x.u - pl, x.v), math.hypot(y.u - pl, y.v))
        near_r = min(math.hypot(x.u - pr, x.v), math.hypot(y.u - pr, y.v))
        p = pl if near_l >= near_r else pr
        xu, xv = _hp_invert(x.u, x.v, p)
        yu, yv = _hp_invert(y.u, y.v, p)
        sgn = 1.0 if yv >= xv else -1.0
        cu = 0.5 * (xu + yu)  # equal in exact arithmetic
        ru, rv = _hp_invert_back(cu, xv * math.exp(sgn * t), p)
        return PlanePoint(ru, rv)

    def boundary_directions(self) -> list[HalfPlaneEnd]:
        # the boundary circle is a continuum; this is only the canonical probe set
        coords = [0.0]
        for k in np.linspace(-2.0, 1.0, 16):
            coords.extend([float(10.0 ** k), float(-(10.0 ** k))])
        return [HalfPlaneEnd(c) for c in sorted(coords)] + [HalfPlaneEnd(INF)]

    def validate_direction(self, d: BoundaryDirection) -> None:
        if not isinstance(d, HalfPlaneEnd) or math.isnan(d.coord):
            raise GeometryError(f"{d!r} is not a half-plane boundary direction")
        if math.isinf(d.coord) and d.coord < 0:
            raise GeometryError("use +inf for the point at infinity")

    def ray_from(self, base: PlanePoint, direction: HalfPlaneEnd) -> Ray:
        self.validate_point(base)
        self.validate_direction(direction)
        a, b = base.u, base.v
        if math.isinf(direction.coord):
            log_b = math.log(b)

            def _eval(t: float) -> PlanePoint:
                if t + log_b > 709.0:
                    raise GeometryError(
                        f"ray point at t={t} exceeds floating-point height range")
                return PlanePoint(a, b * math.exp(t))
        elif direction.coord == a:
            def _eval(t: float) -> PlanePoint:
                return PlanePoint(a, b * math.exp(-t))
        else:
            # invert at the target so the ray becomes the vertical ray upward
            p = direction.coord
            cu, cv = _hp_invert(a, b, p)

            def _eval(t: float) -> PlanePoint:
                vt = cv * math.exp(t) if t < 700.0 else INF
                if not vt < 1e150:  # inversion back would overflow the square
                    return PlanePoint(p, math.exp(-t) / cv)
                ru, rv = _hp_invert_back(cu, vt, p)
                return PlanePoint(ru, rv)

        return Ray(base, direction, _eval)

    def circle_point(self, center: PlanePoint, radius: float, angle: float) -> PlanePoint:
        """Point at exact hyperbolic distance `radius` from `center`: the metric
        circle is the Euclidean circle of center (u, v*cosh r) and radius v*sinh r."""
        self.validate_point(center)
        sh, ch = math.sinh(radius), math.cosh(radius)
        return PlanePoint(center.u + center.v * sh * math.cos(angle),
                          center.v * (ch + sh * math.sin(angle)))

    def to_json(self) -> dict:
        return {"kind": "half_plane"}


# ---------------------------------------------------------------------------
# flat control plane

class Euclid2:
    """The flat plane. Not uniformly hyperbolic: its four-point constant grows
    with scale, which is exactly why it serves as the negative control."""

    kind = "euclid2"

    def validate_point(self, x: Point) -> None:
        if not isinstance(x, PlanePoint):
            raise GeometryError(f"{x!r} is not a plane point")

    def origin(self) -> PlanePoint:
        return PlanePoint(0.0, 0.0)

    def distance(self, x: PlanePoint, y: PlanePoint) -> float:
        self.validate_point(x)
        self.validate_point(y)
        return math.hypot(x.u - y.u, x.v - y.v)

    def geodesic_point(self, x: PlanePoint, y: PlanePoint, t: float) -> PlanePoint:
        d = self.distance(x, y)
        if t < -1e-12 or t > d + 1e-12:
            raise GeometryError(f"geodesic parameter {t} outside [0, {d}]")
        if d == 0.0:
            return x
        s = min(max(t / d, 0.0), 1.0)
        return PlanePoint(x.u + s * (y.u - x.u), x.v + s * (y.v - x.v))

    def boundary_directions(self) -> list[EuclidEnd]:
        return [EuclidEnd(float(a))
                for a in np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)]

    def validate_direction(self, d: BoundaryDirection) -> None:
        if not isinstance(d, EuclidEnd) or not math.isfinite(d.angle):
            raise GeometryError(f"{d!r} is not a flat-plane direction")

    def ray_from(self, base: PlanePoint, direction: EuclidEnd) -> Ray:
        self.validate_point(base)
        self.validate_direction(direction)
        cu, cv = math.cos(direction.angle), math.sin(direction.angle)

        def _eval(t: float) -> PlanePoint:
            return PlanePoint(base.u + t * cu, base.v + t * cv)

        return Ray(base, direction, _eval)

    def to_json(self) -> dict:
        return {"kind": "euclid2"}


Space = Union[Tree, HalfPlane, Euclid2]


# ---------------------------------------------------------------------------
# shared operations

def distance(space: Space, x: Point, y: Point) -> float:
    return space.distance(x, y)


def geodesic_point(space: Space, x: Point, y: Point, t: float) -> Point:
    return space.geodesic_point(x, y, t)


def gromov_product(space: Space, p: Point, x: Point, y: Point) -> float:
    """(x|y)_p = (d(p,x) + d(p,y) - d(x,y)) / 2."""
    return 0.5 * (space.distance(p, x) + space.distance(p, y) - space.distance(x, y))


def ray_from(space: Space, base: Point, direction: BoundaryDirection) -> Ray:
    return space.ray_from(base, direction)


def distance_to_geodesic(space: Space, p: Point, x: Point, y: Point,
                         tol: float = 1e-10) -> float:
    """min over the geodesic [x, y] of the distance to p (convex along the segment)."""
    from .search import golden_section

    d = space.distance(x, y)
    if d == 0.0:
        return space.distance(p, x)
    val = golden_section(lambda t: space.distance(p, space.geodesic_point(x, y, t)),
                         0.0, d, tol=tol)[1]
    return val


# the 12 labeled (p; x, y, z) configurations of an unordered quadruple, as
# index positions: p and the middle element y determine the pair {x, z}
_LABELINGS = [(p, y) for p in range(4) for y in range(4) if y != p]


def estimate_delta(space: Space, points: Sequence[Point], method: str = "exhaustive",
                   seed: int = 0, num_quadruples: int = 200_000) -> HyperbolicityEstimate:
    """Max four-point defect min((x|y)_p, (y|z)_p) - (x|z)_p over quadruples,
    clamped at zero. Exhaustive mode sweeps all labeled quadruples of the
    sample; sampled mode draws quadruples with a seeded generator and evaluates
    all 12 labelings of each. Either way the result only bounds delta from below.
    """
    pts = list(points)
    n = len(pts)
    if n < 4:
        raise GeometryError(f"need at least 4 points, got {n}")
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = space.distance(pts[i], pts[j])

    if method == "exhaustive":
        worst = 0.0
        for p in range(n):
            G = 0.5 * (D[p][:, None] + D[p][None, :] - D)
            best_mid = np.full((n, n), -np.inf)
            for y in range(n):
                np.maximum(best_mid, np.minimum(G[:, y][:, None], G[y, :][None, :]),
                           out=best_mid)
            worst = max(worst, float((best_mid - G).max()))
        return HyperbolicityEstimate(max(0.0, worst), math.comb(n, 4), "exhaustive")

    if method != "sampled":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    quads = rng.integers(0, n, size=(num_quadruples, 4))
    distinct = ((quads[:, 0] != quads[:, 1]) & (quads[:, 0] != quads[:, 2])
                & (quads[:, 0] != quads[:, 3]) & (quads[:, 1] != quads[:, 2])
                & (quads[:, 1] != quads[:, 3]) & (quads[:, 2] != quads[:, 3]))
    quads = quads[distinct]
    worst = 0.0
    for pi, yi in _LABELINGS:
        xi, zi = [k for k in range(4) if k not in (pi, yi)]
        p, x, y, z = quads[:, pi], quads[:, xi], quads[:, yi], quads[:, zi]
        gxy = 0.5 * (D[p, x] + D[p, y] - D[x, y])
        gyz = 0.5 * (D[p, y] + D[p, z] - D[y, z])
        gxz = 0.5 * (D[p, x] + D[p, z] - D[x, z])
        defect = np.minimum(gxy, gyz) - gxz
        if defect.size:
            worst = max(worst, float(defect.max()))
    return HyperbolicityEstimate(max(0.0, worst), int(quads.shape[0]), f"sampled(seed={seed})")


def check_geodesic_stability(space: Space, x: Point, y: Point, delta: float,
                             samples: int = 100) -> float:
    """Max deviation between two independent constructions of the geodesic [x, y].

    Trees and the flat plane compare forward vs. reversed parametrizations; the
    half-plane compares the closed form against numeric midpoint refinement.
    The contract is deviation <= max(4*delta, EPS_GEO).
    """
    d = space.distance(x, y)
    if d == 0.0:
        return 0.0
    if isinstance(space, HalfPlane):
        depth = max(1, math.ceil(math.log2(samples + 1)))
        pts = {0.0: x, 1.0: y}
        frontier = [(0.0, 1.0)]
        for _ in range(depth):
            nxt = []
            for s1, s2 in frontier:
                sm = 0.5 * (s1 + s2)
                pts[sm] = _hp_numeric_midpoint(space, pts[s1], pts[s2])
                nxt.extend([(s1, sm), (sm, s2)])
            frontier = nxt
        return max(space.distance(space.geodesic_point(x, y, s * d), q)
                   for s, q in pts.items())
    ts = np.linspace(0.0, d, samples)
    return max(space.distance(space.geodesic_point(x, y, float(t)),
                              space.geodesic_point(y, x, d - float(t))) for t in ts)


# ---------------------------------------------------------------------------
# JSON ingestion

def space_from_json(obj: dict) -> Space:
    kind = obj.get("kind")
    if kind == "tree":
        return Tree(obj["vertices"], [tuple(e) for e in obj["edges"]], obj.get("ends", []))
    if kind == "half_plane":
        return HalfPlane()
    if kind == "euclid2":
        return Euclid2()
    raise GeometryError(f"unknown space kind {kind!r}")


def point_from_json(space: Space, obj) -> Point:
    if isinstance(space, Tree):
        if isinstance(obj, dict):
            p = TreePoint(int(obj["edge"]), float(obj["offset"]))
        else:
            p = TreePoint(int(obj[0]), float(obj[1]))
    else:
        if isinstance(obj, dict):
            p = PlanePoint(float(obj["u"]), float(obj["v"]))
        else:
            p = PlanePoint(float(obj[0]), float(obj[1]))
    space.validate_point(p)
    return p


def point_to_json(p: Point):
    if isinstance(p, TreePoint):
        return [p.edge, p.offset]
    return [p.u, p.v]


def direction_from_json(space: Space, obj) -> BoundaryDirection:
    if isinstance(space, Tree):
        d: BoundaryDirection = TreeEnd(str(obj))
    elif isinstance(space, HalfPlane):
        d = HalfPlaneEnd(INF if obj in ("inf", "Infinity") else float(obj))
    else:
        d = EuclidEnd(float(obj))
    space.validate_direction(d)
    return d


def direction_to_json(d: BoundaryDirection):
    if isinstance(d, TreeEnd):
        return d.leaf
    if isinstance(d, HalfPlaneEnd):
        return "inf" if math.isinf(d.coord) else d.coord
    return d.angle
