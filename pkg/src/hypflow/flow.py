"""The discrete-time gradient flow: iterate the proximal operator, detect the
boundary limit, and mechanically verify every quantitative bound along the run.

Checked per step k (margins are slack on the guaranteed side):

- eq4.1   step length <= 2 tau L, and its sum  d(x0,xk) <= 2 k tau L (eq4.1s)
- eq4.2   step length >= (L - sqrt(L^2 - alpha^2)) tau  (eq4.2w: alpha^2 tau/2L)
- eq4.3   f decrease >= alpha^4 tau / (8 L^2)
- eq4.4   contraction toward xi(t_k):  d(p,xk) <= d(p,x_{k-1}) - step + 4 sqrt(2 tau L delta)
- eq4.4t  its telescoped form  d(xi(t_k),xk) <= d(xi(t_k),x0) - k (alpha^2 tau/2L - 4 sqrt(2 tau L delta))
- eq4.5   (f(xk)-f(x0)) / d(x0,xk) <= -alpha^4 / (16 L^3)
- eq4.6   d(x0,xk) >= (f(x0)-f(xk))/L >= k alpha^4 tau / (8 L^3)
- eq4.7   d(xi(t_k),xk) >= t_k + k alpha^4 tau/(8 L^3) - 2 (xi(t_k)|xk)_{x0}
- eq1.4   (xi(t_k)|xk)_{x0} >= k sqrt(tau) { (alpha^2/4L + alpha^4/16L^3) sqrt(tau) - 2 sqrt(2 L delta) }
          (also probed at 2 t_k as eq1.4b); gated by the step-size threshold

where t_k is the first ray time with f(xi(t_k)) <= f(xk).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .convex import ConvexFunction, slope_report
from .errors import GeometryError, SublevelRangeError
from .proximal import ProxStep, check_contraction, check_step_bounds, prox
from .reports import BoundEntry, BoundReport
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
    gromov_product,
)


@dataclass(frozen=True)
class FlowConfig:
    tau: float
    steps: int
    x0: Point
    seed: int = 0
    eps_geo: float = 1e-9
    eps_cvx: float = 1e-9
    solver_cap: int = 100_000

    def __post_init__(self):
        if self.tau <= 0.0:
            raise GeometryError(f"tau must be positive, got {self.tau}")
        if self.steps < 1:
            raise GeometryError(f"need at least one step, got {self.steps}")


@dataclass
class Trajectory:
    """Iterates of the flow with per-step diagnostics retained.

    points[k] is x_k (points[0] the start); pair_products holds the scheduled
    Gromov products (x_i|x_j)_{x0} for the pairs {(i,2i)} and {(k-1,k)}, enough
    to witness divergence without the quadratic all-pairs sweep.
    """

    space: Space
    config: FlowConfig
    steps: list[ProxStep]
    points: list[Point]
    values: list[float]
    dist_from_start: list[float]
    pair_products: dict[tuple[int, int], float]

    @property
    def x0(self) -> Point:
        return self.points[0]

    def max_residual(self) -> float:
        return max(s.residual for s in self.steps)


def run_ppa(f: ConvexFunction, space: Space, config: FlowConfig) -> Trajectory:
    """Iterate x_k = prox(f, x_{k-1}, tau) for k = 1..steps."""
    space.validate_point(config.x0)
    steps: list[ProxStep] = []
    points: list[Point] = [config.x0]
    x = config.x0
    for _ in range(config.steps):
        st = prox(f, space, x, config.tau)
        steps.append(st)
        x = st.x_tau
        points.append(x)
    values = [f(p) for p in points]
    dist = [space.distance(config.x0, p) for p in points]
    schedule = {(k - 1, k) for k in range(1, config.steps + 1)}
    schedule |= {(i, 2 * i) for i in range(1, config.steps // 2 + 1)}
    products = {(i, j): gromov_product(space, config.x0, points[i], points[j])
                for i, j in sorted(schedule)}
    return Trajectory(space, config, steps, points, values, dist, products)


# ---------------------------------------------------------------------------
# step-size threshold (Eq. 1.5)

@dataclass(frozen=True)
class TauThreshold:
    exact: float
    sufficient: float


def tau_threshold(L: float, alpha: float, delta: float) -> TauThreshold:
    """Step sizes above `exact` make the divergence bound's right side positive:

        exact      = 2^11 L^7 / ((4 L^2 + alpha^2)^2 alpha^4) * delta
        sufficient = 82 L^7 / alpha^8 * delta

    `sufficient >= exact` always (it absorbs (4L^2+alpha^2)^2 >= 25 alpha^4).
    """
    if alpha <= 0.0:
        raise GeometryError(f"alpha must be positive, got {alpha}")
    if alpha > L:
        raise GeometryError(f"alpha={alpha} exceeds the Lipschitz bound L={L}")
    if delta < 0.0:
        raise GeometryError(f"delta must be nonnegative, got {delta}")
    exact = 2.0 ** 11 * L ** 7 / ((4.0 * L * L + alpha * alpha) ** 2 * alpha ** 4) * delta
    sufficient = 82.0 * L ** 7 / alpha ** 8 * delta
    return TauThreshold(exact, sufficient)


def divergence_rhs(k: int, tau: float, L: float, alpha: float, delta: float) -> float:
    """Right-hand side of the divergence bound at step k."""
    st = math.sqrt(tau)
    return k * st * ((alpha * alpha / (4.0 * L) + alpha ** 4 / (16.0 * L ** 3)) * st
                     - 2.0 * math.sqrt(2.0 * L * delta))


# ---------------------------------------------------------------------------
# sublevel times along the steep ray

def locate_sublevel_time(f: ConvexFunction, ray: Ray, level: float, t_hi: float,
                         eps: float = 1e-8) -> float:
    """Smallest t with f(ray(t)) <= level, by bisection.

    Along a ray of negative asymptotic slope f is eventually strictly
    decreasing and convex, so the sublevel set of the ray is a half-line.
    Raises SublevelRangeError (suggesting 2*t_hi) when the bracket is short.
    """
    if f(ray(0.0)) <= level:
        return 0.0
    if t_hi <= 0.0 or f(ray(t_hi)) > level:
        raise SublevelRangeError(
            f"f(ray({t_hi})) is still above the target level", suggested_t_hi=2.0 * t_hi)
    lo, hi = 0.0, t_hi
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        if f(ray(mid)) <= level:
            hi = mid
        else:
            lo = mid
    return hi


def _sublevel_time(f: ConvexFunction, ray: Ray, level: float, alpha: float) -> float:
    """locate_sublevel_time started at gap/alpha + 1, doubling on a miss.

    The slope quotient along the steep ray is non-decreasing with limit at most
    -alpha, so f(ray(t)) <= f(ray(0)) - alpha*t and the start bracket already
    suffices whenever alpha is a valid lower bound on the decay rate; keeping
    the bracket tight avoids overshooting into unrepresentable ray points."""
    gap = f(ray(0.0)) - level
    if gap <= 0.0:
        return 0.0
    t_hi = gap / alpha + 1.0
    for _ in range(200):
        try:
            return locate_sublevel_time(f, ray, level, t_hi)
        except SublevelRangeError as err:
            t_hi = err.suggested_t_hi
    raise SublevelRangeError("sublevel time not reachable (slope not negative?)",
                             suggested_t_hi=t_hi)


# ---------------------------------------------------------------------------
# verification

@dataclass
class DivergenceCheck:
    """Full bound report plus the per-step quantities the report was built from."""

    report: BoundReport
    alpha: float
    L: float
    delta: Optional[float]
    v_star: Optional[BoundaryDirection]
    threshold: Optional[TauThreshold]
    below_threshold: bool
    rows: list[dict] = field(default_factory=list)


def verify_divergence(traj: Trajectory, f: ConvexFunction, space: Space,
                      delta: Optional[float], alpha: Optional[float] = None,
                      tol: float = 1e-6) -> DivergenceCheck:
    """Check every per-step and cumulative bound along the trajectory.

    delta=None marks the space as having no usable hyperbolicity constant (the
    flat control); the contraction and divergence entries are then recorded as
    inapplicable. The divergence entries are additionally gated by the
    step-size threshold: below it their right side is negative and the bound is
    vacuous, which is reported as inapplicable rather than a hollow pass.
    """
    cfg = traj.config
    L = f.lipschitz
    report = BoundReport()

    v_star: Optional[BoundaryDirection] = None
    if alpha is None:
        alpha = f.declared_alpha
        if f.declared_alpha is not None and f.hints:
            v_star = f.hints[0]
    if alpha is None or v_star is None:
        sr = slope_report(f, space, traj.x0)
        if alpha is None:
            alpha = sr.alpha_hat
        v_star = sr.v_star

    if alpha is None or alpha <= 0.0 or v_star is None:
        for k in range(1, cfg.steps + 1):
            report.extend(check_step_bounds(traj.steps[k - 1], L, None, k=k, tol=tol))
        return DivergenceCheck(report, alpha if alpha is not None else 0.0, L,
                               delta, None, None, False)

    alpha = min(alpha, L)
    ray = space.ray_from(traj.x0, v_star)
    threshold = tau_threshold(L, alpha, delta) if delta is not None else None
    below = threshold is not None and cfg.tau <= threshold.exact
    rate_lower = alpha ** 4 / (8.0 * L ** 3)  # per-step displacement constant

    rows = []
    cum_res = 0.0
    for k in range(1, cfg.steps + 1):
        step = traj.steps[k - 1]
        cum_res += step.residual
        tol_k = tol + cum_res
        report.extend(check_step_bounds(step, L, alpha, k=k, tol=tol))

        d0k = traj.dist_from_start[k]
        fk = traj.values[k]
        f0 = traj.values[0]

        # eq4.1 summed: d(x0, xk) <= 2 k tau L
        m = 2.0 * k * cfg.tau * L - d0k
        report.append(BoundEntry("eq4.1s", k, d0k, 2.0 * k * cfg.tau * L, m,
                                 "pass" if m >= -tol_k else "fail"))

        # eq4.5: slope of the chord from x0 is at most -alpha^4/(16 L^3)
        if d0k > 0.0:
            chord = (fk - f0) / d0k
            m = -(alpha ** 4) / (16.0 * L ** 3) - chord
            report.append(BoundEntry("eq4.5", k, chord, -(alpha ** 4) / (16.0 * L ** 3),
                                     m, "pass" if m >= -tol_k else "fail"))

        # eq4.6: d(x0,xk) >= (f0-fk)/L >= k tau alpha^4/(8 L^3)
        mid = (f0 - fk) / L
        m = min(d0k - mid, mid - k * cfg.tau * rate_lower)
        report.append(BoundEntry("eq4.6", k, d0k, k * cfg.tau * rate_lower, m,
                                 "pass" if m >= -tol_k else "fail"))

        t_k = _sublevel_time(f, ray, fk, alpha)
        xi_tk = ray(t_k)
        prod = gromov_product(space, traj.x0, xi_tk, traj.points[k])
        d_xi_xk = space.distance(xi_tk, traj.points[k])

        # eq4.7: Gromov-product form of the displacement lower bound
        rhs = t_k + k * cfg.tau * rate_lower - 2.0 * prod
        m = d_xi_xk - rhs
        report.append(BoundEntry("eq4.7", k, d_xi_xk, rhs, m,
                                 "pass" if m >= -tol_k else "fail"))

        quan_rhs = None
        if delta is None:
            report.append(BoundEntry("eq4.4", k, 0.0, 0.0, 0.0, "inapplicable"))
            report.append(BoundEntry("eq4.4t", k, 0.0, 0.0, 0.0, "inapplicable"))
            report.append(BoundEntry("eq1.4", k, prod, 0.0, 0.0, "inapplicable"))
            report.append(BoundEntry("eq1.4b", k, 0.0, 0.0, 0.0, "inapplicable"))
        else:
            report.append(check_contraction(f, step, xi_tk, delta, L=L, k=k, tol=tol))

            # telescoped contraction from x0 to xk seen from xi(t_k)
            slack = k * (alpha * alpha * cfg.tau / (2.0 * L)
                         - 4.0 * math.sqrt(2.0 * cfg.tau * L * delta))
            rhs = space.distance(xi_tk, traj.x0) - slack
            m = rhs - d_xi_xk
            report.append(BoundEntry("eq4.4t", k, d_xi_xk, rhs, m,
                                     "pass" if m >= -tol_k else "fail"))

            quan_rhs = divergence_rhs(k, cfg.tau, L, alpha, delta)
            if below:
                report.append(BoundEntry("eq1.4", k, prod, quan_rhs, prod - quan_rhs,
                                         "inapplicable"))
                report.append(BoundEntry("eq1.4b", k, 0.0, quan_rhs, 0.0,
                                         "inapplicable"))
            else:
                m = prod - quan_rhs
                report.append(BoundEntry("eq1.4", k, prod, quan_rhs, m,
                                         "pass" if m >= -tol_k else "fail"))
                # evidence probe at a second, deeper sublevel time; skipped when
                # the ray point falls outside floating-point range
                try:
                    xi_2tk = ray(2.0 * t_k)
                    prod2 = gromov_product(space, traj.x0, xi_2tk, traj.points[k])
                except (GeometryError, OverflowError):
                    report.append(BoundEntry("eq1.4b", k, 0.0, quan_rhs, 0.0,
                                             "inapplicable"))
                else:
                    m2 = prod2 - quan_rhs
                    report.append(BoundEntry("eq1.4b", k, prod2, quan_rhs, m2,
                                             "pass" if m2 >= -tol_k else "fail"))

        rows.append({"k": k, "t_k": t_k, "gromov": prod, "quan_rhs": quan_rhs,
                     "d_xi_xk": d_xi_xk})

    return DivergenceCheck(report, alpha, L, delta, v_star, threshold, below, rows)


# ---------------------------------------------------------------------------
# boundary detection

@dataclass(frozen=True)
class BoundaryDetection:
    direction: Optional[BoundaryDirection]
    conclusive: bool
    evidence: dict


def detect_boundary_limit(traj: Trajectory, space: Space) -> BoundaryDetection:
    """Identify the boundary point the iterates converge to.

    Evidence is the diverging-Gromov-product criterion: the scheduled pair
    products over the late half of the run must exceed those over the early
    half. A bounded orbit (e.g. at a minimizer) comes back inconclusive.
    """
    if len(traj.points) < 3:
        raise GeometryError("need a trajectory of length >= 3")
    K = traj.config.steps
    half = K / 2.0
    early = [v for (i, j), v in traj.pair_products.items() if j <= half]
    late = [v for (i, j), v in traj.pair_products.items() if i >= half]
    evidence = {
        "early_min": min(early) if early else 0.0,
        "late_min": min(late) if late else 0.0,
        "products": dict(traj.pair_products),
    }
    conclusive = bool(late) and bool(early) and evidence["late_min"] > evidence["early_min"] + 1e-12

    direction: Optional[BoundaryDirection] = None
    if isinstance(space, Tree):
        last, prev = traj.points[-1], traj.points[-2]
        if (isinstance(last, TreePoint) and last.edge == prev.edge
                and space._is_end_edge[last.edge] and last.offset > prev.offset):
            leaf = space.edges[last.edge][1]
            direction = TreeEnd(leaf)
    elif isinstance(space, HalfPlane):
        last = traj.points[-1]
        rise = math.log(last.v) - math.log(traj.points[0].v)
        d_total = traj.dist_from_start[-1]
        if d_total > 0.0:
            if rise >= 0.5 * d_total:
                direction = HalfPlaneEnd(math.inf)
            elif rise <= -0.5 * d_total:
                direction = HalfPlaneEnd(last.u)
    else:
        last = traj.points[-1]
        du, dv = last.u - traj.points[0].u, last.v - traj.points[0].v
        if du != 0.0 or dv != 0.0:
            direction = EuclidEnd(math.atan2(dv, du) % (2.0 * math.pi))

    if not conclusive:
        return BoundaryDetection(None, False, evidence)
    return BoundaryDetection(direction, direction is not None, evidence)
