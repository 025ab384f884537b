"""Command-line harness: run flows with bound verification, estimate
hyperbolicity constants, and report boundary slopes.

    hypflow run <config.json> [more configs...] [--out DIR] [--jobs N]
    hypflow delta <space.json> [--exhaustive] [--samples N] [--quadruples M] [--seed S]
    hypflow slopes <space.json> <fn.json>

Exit codes: 0 all applicable bounds pass, 1 a bound or convexity property
failed, 2 usage/config/solver error. The HYPFLOW_SEED environment variable
overrides the seed found in configs. Numbers are written with 17 significant
digits (CSV) and mirrored as strings in JSON so no reader rounds them.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from .convex import ConvexFunction, function_from_json, slope_report
from .errors import ConvexityError, GeometryError, SolverError
from .flow import (
    DivergenceCheck,
    FlowConfig,
    Trajectory,
    detect_boundary_limit,
    run_ppa,
    tau_threshold,
    verify_divergence,
)
from .oracle import delta_exhaustive
from .spaces import (
    HALF_PLANE_DELTA_CAP,
    Euclid2,
    HalfPlane,
    PlanePoint,
    Space,
    Tree,
    TreePoint,
    direction_to_json,
    estimate_delta,
    point_from_json,
    point_to_json,
    space_from_json,
)

#: Default hyperbolicity constant fed to the bound checks, per space kind.
#: Sampled estimates are lower bounds and would make the contraction checks
#: spuriously strict, so the defaults are fixed documented constants; the flat
#: plane has no usable constant at all.
DEFAULT_DELTA = {"tree": 0.0, "half_plane": HALF_PLANE_DELTA_CAP, "euclid2": None}

CSV_COLUMNS = ["k", "coord0", "coord1", "d_x0_xk", "f_xk", "step_length",
               "gromov_xi_t_xk", "t_k", "quan_rhs", "margin_eq4.1",
               "margin_eq4.2", "margin_eq4.3", "margin_eq4.4", "margin_eq1.4",
               "margin_eq4.5", "margin_eq4.7"]


def _fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _seed_override(seed: int) -> int:
    env = os.environ.get("HYPFLOW_SEED")
    return int(env) if env else seed


# ---------------------------------------------------------------------------
# run

def _resolve_delta(policy, space: Space, seed: int):
    if policy is None:
        return DEFAULT_DELTA[space.kind], "default"
    if "fixed" in policy:
        v = policy["fixed"]
        return (None if v is None else float(v)), "fixed"
    if "estimate" in policy:
        spec = policy["estimate"] or {}
        pts = _sample_points(space, spec, seed)
        est = estimate_delta(space, pts, method=spec.get("method", "sampled"),
                             seed=seed, num_quadruples=int(spec.get("quadruples", 200_000)))
        return est.delta_hat, f"estimate({est.method})"
    raise GeometryError(f"unknown delta policy {policy!r}")


def _sample_points(space: Space, spec: dict, seed: int):
    import numpy as np

    rng = np.random.default_rng(seed)
    n = int(spec.get("count", 200))
    if isinstance(space, Tree):
        pts = [space.vertex_point(v) for v in space.vertices]
        per_edge = int(spec.get("per_edge", 2))
        for eid, (_, _, length) in enumerate(space.edges):
            for s in rng.uniform(0.0, length, per_edge):
                pts.append(TreePoint(eid, float(s)))
        return pts
    if isinstance(space, HalfPlane):
        u_lo, u_hi = spec.get("u_range", (-5.0, 5.0))
        w_lo, w_hi = spec.get("logv_range", (-2.0, 2.0))
        return [PlanePoint(float(u), float(math.exp(w)))
                for u, w in zip(rng.uniform(u_lo, u_hi, n), rng.uniform(w_lo, w_hi, n))]
    side = float(spec.get("side", 10.0))
    m = int(spec.get("grid", 10))
    return [PlanePoint(side * i / (m - 1), side * j / (m - 1))
            for i in range(m) for j in range(m)]


def _write_trajectory_csv(path: Path, traj: Trajectory, chk: DivergenceCheck) -> None:
    by_k: dict[int, dict[str, float]] = {}
    for e in chk.report.entries:
        if e.status != "inapplicable":
            by_k.setdefault(e.k, {})[e.name] = e.margin
    rows_by_k = {r["k"]: r for r in chk.rows}
    lines = [",".join(CSV_COLUMNS)]
    for k, p in enumerate(traj.points):
        c0, c1 = point_to_json(p)
        row = rows_by_k.get(k, {})
        margins = by_k.get(k, {})
        step = traj.steps[k - 1].step_length if k >= 1 else None
        cells = [str(k), _fmt(c0), _fmt(c1), _fmt(traj.dist_from_start[k]),
                 _fmt(traj.values[k]), _fmt(step),
                 _fmt(row.get("gromov")), _fmt(row.get("t_k")), _fmt(row.get("quan_rhs")),
                 _fmt(margins.get("eq4.1")), _fmt(margins.get("eq4.2")),
                 _fmt(margins.get("eq4.3")), _fmt(margins.get("eq4.4")),
                 _fmt(margins.get("eq1.4")), _fmt(margins.get("eq4.5")),
                 _fmt(margins.get("eq4.7"))]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_plot_script(path: Path, csv_name: str) -> None:
    gromov_col = CSV_COLUMNS.index("gromov_xi_t_xk") + 1
    rhs_col = CSV_COLUMNS.index("quan_rhs") + 1
    path.write_text(
        "set datafile separator ','\n"
        "set key left top\n"
        "set xlabel 'k'\n"
        "set ylabel 'gromov product at x0'\n"
        f"plot '{csv_name}' using 1:{gromov_col} every ::1 with linespoints"
        " title 'observed (xi(t_k)|x_k)', \\\n"
        f"     '{csv_name}' using 1:{rhs_col} every ::1 with lines"
        " title 'divergence bound'\n",
        encoding="utf-8")


def run_experiment(config_path: str, out_dir: Optional[str] = None) -> int:
    """Execute one experiment config; returns the process exit code."""
    cfg = _load_json(config_path)
    space = space_from_json(cfg["space"])
    f = function_from_json(space, cfg["function"])
    flow_cfg = cfg.get("flow", {})
    x0 = point_from_json(space, flow_cfg["x0"]) if "x0" in flow_cfg else space.origin()
    seed = _seed_override(int(flow_cfg.get("seed", 0)))
    config = FlowConfig(tau=float(flow_cfg.get("tau", 1.0)),
                        steps=int(flow_cfg.get("steps", flow_cfg.get("K", 10))),
                        x0=x0, seed=seed)
    delta, delta_mode = _resolve_delta(cfg.get("delta"), space, seed)
    tol = float(cfg.get("tolerances", {}).get("bound_tol", 1e-6))

    out = Path(out_dir or cfg.get("out") or (Path(config_path).stem + ".out"))
    out.mkdir(parents=True, exist_ok=True)

    traj = run_ppa(f, space, config)
    chk = verify_divergence(traj, f, space, delta, tol=tol)
    det = detect_boundary_limit(traj, space)

    _write_trajectory_csv(out / "trajectory.csv", traj, chk)
    _write_plot_script(out / "plot.gp", "trajectory.csv")

    threshold = chk.threshold
    summary = {
        "config": cfg,
        "alpha_hat": _fmt(chk.alpha),
        "lipschitz": _fmt(chk.L),
        "v_star": direction_to_json(chk.v_star) if chk.v_star is not None else None,
        "delta_used": _fmt(delta) if delta is not None else None,
        "delta_mode": delta_mode,
        "tau_threshold_exact": _fmt(threshold.exact) if threshold else None,
        "tau_threshold_sufficient": _fmt(threshold.sufficient) if threshold else None,
        "below_threshold": chk.below_threshold,
        "pass_counts": chk.report.counts(),
        "boundary_limit": (direction_to_json(det.direction)
                           if det.direction is not None else None),
        "boundary_conclusive": det.conclusive,
        "max_solver_residual": _fmt(traj.max_residual()),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")

    if chk.below_threshold:
        print(f"warning: tau={config.tau} is below the divergence threshold "
              f"{_fmt(threshold.exact)}; divergence entries are inapplicable",
              file=sys.stderr)
    failures = chk.report.failures()
    for e in failures[:20]:
        print(f"FAIL {e.name} k={e.k} margin={_fmt(e.margin)}", file=sys.stderr)
    return 1 if failures else 0


def cmd_run(args) -> int:
    codes = []
    if args.jobs > 1 and len(args.config) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(run_experiment, c,
                                   str(Path(args.out) / Path(c).stem) if args.out else None)
                       for c in args.config]
            codes = [f.result() for f in futures]
    else:
        for c in args.config:
            sub = str(Path(args.out) / Path(c).stem) if args.out and len(args.config) > 1 \
                else args.out
            codes.append(run_experiment(c, sub))
    return max(codes)


# ---------------------------------------------------------------------------
# delta

def cmd_delta(args) -> int:
    space = space_from_json(_load_json(args.space))
    spec = {}
    if args.samples:
        spec["count"] = args.samples
    if args.side:
        spec["side"] = args.side
    seed = _seed_override(args.seed)
    pts = _sample_points(space, spec, seed)
    if args.oracle:
        value = delta_exhaustive(space, pts[: min(len(pts), 20)])
        est_json = {"delta_hat": _fmt(value), "quadruple_count": None,
                    "method": "oracle_exhaustive"}
        print(f"delta_hat = {_fmt(value)} (naive oracle over {min(len(pts), 20)} points)")
    else:
        method = "exhaustive" if args.exhaustive else "sampled"
        est = estimate_delta(space, pts, method=method, seed=seed,
                             num_quadruples=args.quadruples)
        est_json = {"delta_hat": _fmt(est.delta_hat),
                    "quadruple_count": est.quadruple_count, "method": est.method}
        print(f"delta_hat = {_fmt(est.delta_hat)} over {est.quadruple_count} quadruples "
              f"({est.method}); lower bound only")
    if args.out:
        Path(args.out).write_text(json.dumps(est_json, indent=2) + "\n", encoding="utf-8")
    else:
        Path("delta.json").write_text(json.dumps(est_json, indent=2) + "\n", encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# slopes

def cmd_slopes(args) -> int:
    space = space_from_json(_load_json(args.space))
    f = function_from_json(space, _load_json(args.function))
    base = space.origin()
    report = slope_report(f, space, base)
    for d, s in report.entries:
        print(f"{direction_to_json(d)}: {_fmt(s)}")
    if report.v_star is not None:
        print(f"alpha_hat = {_fmt(report.alpha_hat)}; v_star = "
              f"{direction_to_json(report.v_star)}")
    else:
        print(f"alpha_hat = {_fmt(report.alpha_hat)}; no negative direction")
    out = {"entries": [[direction_to_json(d), _fmt(s)] for d, s in report.entries],
           "alpha_hat": _fmt(report.alpha_hat),
           "v_star": (direction_to_json(report.v_star)
                      if report.v_star is not None else None)}
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypflow", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a flow experiment and verify its bounds")
    p_run.add_argument("config", nargs="+", help="experiment config JSON path(s)")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel configs")
    p_run.set_defaults(fn=cmd_run)

    p_delta = sub.add_parser("delta", help="estimate the four-point constant")
    p_delta.add_argument("space", help="space JSON path")
    p_delta.add_argument("--exhaustive", action="store_true",
                         help="sweep all quadruples of the sample")
    p_delta.add_argument("--oracle", action="store_true",
                         help="use the naive reference implementation (small samples)")
    p_delta.add_argument("--samples", type=int, default=None)
    p_delta.add_argument("--side", type=float, default=None,
                         help="square side for the flat-plane grid sample")
    p_delta.add_argument("--quadruples", type=int, default=200_000)
    p_delta.add_argument("--seed", type=int, default=0)
    p_delta.add_argument("--out", default=None, help="output JSON path (default delta.json)")
    p_delta.set_defaults(fn=cmd_delta)

    p_slopes = sub.add_parser("slopes", help="report asymptotic slopes per direction")
    p_slopes.add_argument("space", help="space JSON path")
    p_slopes.add_argument("function", help="function JSON path")
    p_slopes.add_argument("--out", default=None)
    p_slopes.set_defaults(fn=cmd_slopes)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.fn(args)
    except ConvexityError as err:
        print(f"convexity violation: {err}", file=sys.stderr)
        return 1
    except (GeometryError, SolverError, KeyError, ValueError,
            OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
