"""Discrete-time proximal point flows for unbounded Lipschitz convex functions
on hyperbolic model spaces, with mechanical verification of the quantitative
step, contraction, and divergence bounds."""

from .errors import ConvexityError, GeometryError, SolverError, SublevelRangeError
from .spaces import (
    EPS_GEO,
    HALF_PLANE_DELTA_CAP,
    Euclid2,
    EuclidEnd,
    HalfPlane,
    HalfPlaneEnd,
    HyperbolicityEstimate,
    PlanePoint,
    Point,
    Ray,
    Space,
    Tree,
    TreeEnd,
    TreePoint,
    check_geodesic_stability,
    distance,
    distance_to_geodesic,
    estimate_delta,
    geodesic_point,
    gromov_product,
    ray_from,
    space_from_json,
)

__version__ = "0.1.0"
