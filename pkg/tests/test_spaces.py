import json
import math

import numpy as np
import pytest

from hypflow.errors import GeometryError
from hypflow.oracle import delta_exhaustive
from hypflow.spaces import (
    EPS_GEO,
    HALF_PLANE_DELTA_CAP,
    INF,
    Euclid2,
    EuclidEnd,
    HalfPlane,
    HalfPlaneEnd,
    PlanePoint,
    Tree,
    TreeEnd,
    TreePoint,
    check_geodesic_stability,
    direction_from_json,
    distance_to_geodesic,
    estimate_delta,
    gromov_product,
    point_from_json,
    point_to_json,
    space_from_json,
)


def simpson(fn, a, b, n=2000):
    xs = np.linspace(a, b, 2 * n + 1)
    ys = np.array([fn(x) for x in xs])
    h = (b - a) / (2 * n)
    return h / 3 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-1:2].sum())


# ---------------------------------------------------------------------------
# distance

def test_halfplane_vertical_distance_matches_line_integral(hp):
    # independent oracle: arclength of the vertical segment is the integral of dv/v
    d = hp.distance(PlanePoint(0, 1), PlanePoint(0, 2))
    oracle = simpson(lambda v: 1.0 / v, 1.0, 2.0)
    assert d == pytest.approx(math.log(2), abs=1e-12)
    assert d == pytest.approx(oracle, abs=1e-9)


def test_tree_single_edge_distance(line):
    assert line.distance(TreePoint(1, 0.0), TreePoint(1, 3.0)) == 3.0


@pytest.mark.parametrize("pt", [TreePoint(0, 2.5), TreePoint(1, 7.0)])
def test_distance_identity_tree(line, pt):
    assert line.distance(pt, pt) == 0.0


def test_distance_identity_planes(hp, e2):
    assert hp.distance(PlanePoint(0.3, 2.0), PlanePoint(0.3, 2.0)) == 0.0
    assert e2.distance(PlanePoint(1, 2), PlanePoint(1, 2)) == 0.0


def _random_points(space, rng, n):
    if isinstance(space, Tree):
        out = []
        for _ in range(n):
            eid = int(rng.integers(0, len(space.edges)))
            hi = space.edges[eid][2] * (3.0 if space._is_end_edge[eid] else 1.0)
            out.append(TreePoint(eid, float(rng.uniform(0, hi))))
        return out
    if isinstance(space, HalfPlane):
        return [PlanePoint(float(u), float(math.exp(w)))
                for u, w in zip(rng.uniform(-5, 5, n), rng.uniform(-2, 2, n))]
    return [PlanePoint(float(u), float(v))
            for u, v in zip(rng.uniform(-5, 5, n), rng.uniform(-5, 5, n))]


@pytest.mark.parametrize("space_name", ["line", "hp", "e2"])
def test_triangle_inequality_and_symmetry(space_name, request):
    space = request.getfixturevalue(space_name)
    rng = np.random.default_rng(101)
    pts = _random_points(space, rng, 60)
    idx = rng.integers(0, len(pts), size=(10_000, 3))
    for i, j, k in idx:
        a, b, c = pts[i], pts[j], pts[k]
        dab, dbc, dac = space.distance(a, b), space.distance(b, c), space.distance(a, c)
        assert dac <= dab + dbc + 1e-9
        assert dab == pytest.approx(space.distance(b, a), abs=1e-12)
        assert dab >= 0.0


# ---------------------------------------------------------------------------
# geodesics

def test_geodesic_examples(line, ytree, hp, e2):
    mid = e2.geodesic_point(PlanePoint(0, 0), PlanePoint(2, 0), 1.0)
    assert (mid.u, mid.v) == (1.0, 0.0)

    p = hp.geodesic_point(PlanePoint(0, 1), PlanePoint(0, math.e ** 2), 1.0)
    assert hp.distance(p, PlanePoint(0, math.e)) < 1e-12

    u, w = ytree.vertex_point("u"), ytree.vertex_point("w")
    c = ytree.geodesic_point(u, w, 1.0)
    assert ytree.distance(c, ytree.vertex_point("c")) < 1e-12


@pytest.mark.parametrize("space_name", ["line", "hp", "e2"])
def test_geodesic_two_sided_parametrization(space_name, request):
    space = request.getfixturevalue(space_name)
    rng = np.random.default_rng(7)
    pts = _random_points(space, rng, 20)
    for _ in range(60):
        x, y = pts[rng.integers(len(pts))], pts[rng.integers(len(pts))]
        d = space.distance(x, y)
        if d == 0.0:
            continue
        t = float(rng.uniform(0, d))
        g = space.geodesic_point(x, y, t)
        assert space.distance(x, g) == pytest.approx(t, abs=EPS_GEO)
        assert space.distance(g, y) == pytest.approx(d - t, abs=EPS_GEO)


def test_geodesic_out_of_range(hp):
    with pytest.raises(GeometryError):
        hp.geodesic_point(PlanePoint(0, 1), PlanePoint(0, 2), 5.0)


# ---------------------------------------------------------------------------
# Gromov products

def test_gromov_product_examples(ytree, e2):
    w = ytree.vertex_point("w")
    u, v = ytree.vertex_point("u"), ytree.vertex_point("v")
    assert gromov_product(ytree, w, u, w) == 0.0
    assert gromov_product(ytree, w, u, v) == pytest.approx(1.0, abs=1e-12)
    p, x, y = PlanePoint(0, 0), PlanePoint(1, 0), PlanePoint(2, 0)
    assert gromov_product(e2, p, x, y) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("space_name,cap", [("line", 0.0), ("hp", HALF_PLANE_DELTA_CAP)])
def test_gromov_product_geodesic_sandwich(space_name, cap, request):
    space = request.getfixturevalue(space_name)
    rng = np.random.default_rng(13)
    pts = _random_points(space, rng, 25)
    for _ in range(120):
        x, y, z = (pts[rng.integers(len(pts))] for _ in range(3))
        g = gromov_product(space, x, y, z)
        dgeo = distance_to_geodesic(space, x, y, z)
        assert g <= dgeo + EPS_GEO
        assert g >= dgeo - 2.0 * cap - EPS_GEO


# ---------------------------------------------------------------------------
# rays

def test_ray_examples(line, hp):
    r = hp.ray_from(PlanePoint(0, 1), HalfPlaneEnd(INF))
    assert hp.distance(r(1.0), PlanePoint(0, math.e)) < 1e-12
    assert r(0.0) == PlanePoint(0, 1)

    ray = line.ray_from(TreePoint(1, 0.0), TreeEnd("R"))
    assert ray(5.0) == TreePoint(1, 5.0)
    assert ray(0.0) == TreePoint(1, 0.0)
    assert ray(12.0) == TreePoint(1, 12.0)  # past the declared leaf


@pytest.mark.parametrize("space_name", ["line", "ytree", "hp", "e2"])
def test_ray_unit_speed(space_name, request):
    space = request.getfixturevalue(space_name)
    rng = np.random.default_rng(23)
    if isinstance(space, Tree):
        bases = _random_points(space, rng, 3)
        dirs = space.boundary_directions()
    elif isinstance(space, HalfPlane):
        bases = [PlanePoint(0.5, 2.0), PlanePoint(-1.0, 0.5)]
        dirs = [HalfPlaneEnd(INF), HalfPlaneEnd(-2.0), HalfPlaneEnd(0.5)]
    else:
        bases = [PlanePoint(0.0, 0.0)]
        dirs = [EuclidEnd(0.3), EuclidEnd(4.0)]
    for base in bases:
        for d in dirs:
            ray = space.ray_from(base, d)
            assert space.distance(ray(0.0), base) < 1e-12
            for s, t in rng.uniform(0, 40, size=(100, 2)):
                err = abs(space.distance(ray(float(s)), ray(float(t))) - abs(s - t))
                assert err <= EPS_GEO


def test_ray_invalid_direction(line, hp):
    with pytest.raises(GeometryError):
        line.ray_from(line.origin(), TreeEnd("C"))
    with pytest.raises(GeometryError):
        hp.ray_from(PlanePoint(0, 1), TreeEnd("R"))
    with pytest.raises(GeometryError):
        hp.ray_from(PlanePoint(0, 1), HalfPlaneEnd(-INF))


def test_ray_negative_time(hp):
    ray = hp.ray_from(PlanePoint(0, 1), HalfPlaneEnd(INF))
    with pytest.raises(GeometryError):
        ray(-0.5)


# ---------------------------------------------------------------------------
# hyperbolicity estimation

def test_trees_are_zero_hyperbolic(line, ytree):
    rng = np.random.default_rng(17)
    for space in (line, ytree):
        pts = [space.vertex_point(v) for v in space.vertices]
        pts += _random_points(space, rng, 8)
        est = estimate_delta(space, pts)
        assert est.delta_hat <= 1e-12
        assert est.method == "exhaustive"


def test_tree_four_point_inequality_exact(ytree):
    rng = np.random.default_rng(3)
    pts = _random_points(ytree, rng, 12)
    n = len(pts)
    for _ in range(400):
        p, x, y, z = (pts[rng.integers(n)] for _ in range(4))
        gxz = gromov_product(ytree, p, x, z)
        gxy = gromov_product(ytree, p, x, y)
        gyz = gromov_product(ytree, p, y, z)
        assert gxz >= min(gxy, gyz) - 1e-12


def test_euclid_delta_grows_with_scale(e2):
    def grid(side, m=10):
        return [PlanePoint(side * i / (m - 1), side * j / (m - 1))
                for i in range(m) for j in range(m)]

    d5 = estimate_delta(e2, grid(5.0)).delta_hat
    d10 = estimate_delta(e2, grid(10.0)).delta_hat
    assert d5 > 0.0
    assert d10 > d5
    # frozen regression values for the side-10 and side-5 unit grids
    assert d10 == pytest.approx(4.142135623730951, abs=1e-12)
    assert d5 == pytest.approx(2.0710678118654755, abs=1e-12)


def test_halfplane_delta_default_sample(hp):
    rng = np.random.default_rng(0)
    pts = [PlanePoint(float(u), float(math.exp(w)))
           for u, w in zip(rng.uniform(-5, 5, 200), rng.uniform(-2, 2, 200))]
    est = estimate_delta(hp, pts, method="sampled", seed=0, num_quadruples=200_000)
    assert est.delta_hat <= HALF_PLANE_DELTA_CAP
    assert est.delta_hat == pytest.approx(0.6768844057869985, abs=1e-9)


def test_sampled_never_exceeds_exhaustive(e2):
    rng = np.random.default_rng(5)
    pts = _random_points(e2, rng, 12)
    full = estimate_delta(e2, pts, method="exhaustive").delta_hat
    for seed in (0, 1, 2):
        sub = estimate_delta(e2, pts, method="sampled", seed=seed,
                             num_quadruples=5000).delta_hat
        assert sub <= full + 1e-12


def test_exhaustive_matches_naive_oracle(hp, e2):
    rng = np.random.default_rng(9)
    for space in (hp, e2):
        pts = _random_points(space, rng, 8)
        fast = estimate_delta(space, pts, method="exhaustive").delta_hat
        naive = delta_exhaustive(space, pts)
        assert fast == pytest.approx(naive, abs=1e-12)


def test_estimate_delta_determinism_and_errors(e2):
    pts = [PlanePoint(float(i), float(i * i % 7)) for i in range(10)]
    a = estimate_delta(e2, pts, method="sampled", seed=42, num_quadruples=10_000)
    b = estimate_delta(e2, pts, method="sampled", seed=42, num_quadruples=10_000)
    assert a.delta_hat == b.delta_hat
    with pytest.raises(GeometryError):
        estimate_delta(e2, pts[:3])


# ---------------------------------------------------------------------------
# geodesic stability

def test_geodesic_stability(line, hp, e2):
    assert check_geodesic_stability(line, TreePoint(0, 2.0), TreePoint(1, 3.0), 0.0) <= 1e-12
    dev = check_geodesic_stability(hp, PlanePoint(-1, 1), PlanePoint(1, 1),
                                   HALF_PLANE_DELTA_CAP, samples=100)
    assert dev <= EPS_GEO
    assert check_geodesic_stability(e2, PlanePoint(0, 0), PlanePoint(3, 4), 0.0) <= EPS_GEO


# ---------------------------------------------------------------------------
# construction and JSON

def test_tree_validation():
    with pytest.raises(GeometryError):
        Tree(["a", "b"], [("a", "b", 0.0)], ["b"])  # nonpositive length
    with pytest.raises(GeometryError):
        Tree(["a", "b", "c"], [("a", "b", 1.0)], ["b"])  # disconnected
    with pytest.raises(GeometryError):
        Tree(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)], [])
    with pytest.raises(GeometryError):
        Tree(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0)], ["b"])  # degree 2 end
    with pytest.raises(GeometryError):
        Tree(["a", "b"], [("a", "b", 1.0)], ["a", "b"])  # both endpoints ends


def test_point_validation(line, hp):
    with pytest.raises(GeometryError):
        line.validate_point(TreePoint(5, 0.0))
    with pytest.raises(GeometryError):
        line.validate_point(TreePoint(0, -0.5))
    with pytest.raises(GeometryError):
        hp.validate_point(PlanePoint(0.0, -1.0))
    line.validate_point(TreePoint(1, 27.0))  # end edges extend


def test_space_json_round_trip(line):
    rebuilt = space_from_json(json.loads(json.dumps(line.to_json())))
    assert rebuilt.edges == line.edges
    assert rebuilt.ends == line.ends
    assert space_from_json({"kind": "half_plane"}).kind == "half_plane"
    assert space_from_json({"kind": "euclid2"}).kind == "euclid2"
    with pytest.raises(GeometryError):
        space_from_json({"kind": "poincare_ball"})


def test_point_and_direction_json(line, hp):
    p = point_from_json(line, [1, 2.5])
    assert p == TreePoint(1, 2.5)
    assert point_to_json(p) == [1, 2.5]
    assert point_from_json(hp, [0.5, 2.0]) == PlanePoint(0.5, 2.0)
    assert direction_from_json(line, "R") == TreeEnd("R")
    assert direction_from_json(hp, "inf") == HalfPlaneEnd(INF)
    assert direction_from_json(hp, -3.0) == HalfPlaneEnd(-3.0)
    with pytest.raises(GeometryError):
        direction_from_json(line, "nope")
    with pytest.raises(GeometryError):
        point_from_json(hp, [0.0, -2.0])
