"""posbvp command line: ``posbvp --config fig1.ini [--task solve] [--out DIR] ...``.

Exit status: 0 task succeeded, 2 hypotheses not satisfied, 1 operational error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import TASKS, ConfigError, RunConfig, load_config, task_value
from .eigen import EigenResult, WeightKind, WeightVanishes, eigenfunction, first_eigenvalue
from .hypotheses import check_all, lambda_threshold_scan
from .integrator import StepSizeUnderflow
from .problem import PartitionError, absolute_value, negative_part, positive_part
from .radial import solve_radial
from .shooting import NoBracketFound, find_positive_solutions, sample_poincare, small_amplitude_scan

log = logging.getLogger("posbvp")

EXIT_OK, EXIT_ERROR, EXIT_VERDICT = 0, 1, 2
POINCARE_COLUMNS = ["c", "uL", "vL", "escaped", "positive_interior"]


def _fmt(x, precision: int) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.{precision}g}"


def _clean(obj, precision: int):
    """Round floats to ``precision`` significant digits; non-finite floats become strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{precision}g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v, precision) for v in obj]
    return str(obj)


class Artifacts:
    """Files are staged in memory and written only after the task finished."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.files: dict[str, str] = {}

    @property
    def want_csv(self) -> bool:
        return self.cfg.fmt in ("csv", "both")

    def table(self, name: str, header: list, rows) -> None:
        if not self.want_csv:
            return
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v, self.cfg.precision) for v in row])
        self.files[name] = buf.getvalue()

    def report(self, payload: dict) -> None:
        # report.json is always written; --format csv only drops the extra JSON files
        self.files["report.json"] = json.dumps(_clean(payload, self.cfg.precision), indent=2) + "\n"

    def json(self, name: str, payload) -> None:
        if self.cfg.fmt in ("json", "both"):
            self.files[name] = json.dumps(_clean(payload, self.cfg.precision), indent=2) + "\n"

    def flush(self, out_dir: Path) -> list[Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            p = out_dir / name
            p.write_text(text)
            written.append(p)
        return written


def _poincare_rows(points):
    return [[p.c, p.uL, p.vL, int(p.escaped), int(p.positive_interior)] for p in points]


def _scan_params(cfg: RunConfig, tol_override: Optional[float]) -> dict:
    tol_bvp = task_value(cfg, "tol_bvp", 1e-9)
    if tol_override is not None:
        tol_bvp = tol_override
    return dict(
        c_min=task_value(cfg, "c_min", 0.0),
        c_max=task_value(cfg, "c_max", 12.0),
        n_scan=task_value(cfg, "n_scan", 481, int),
        tol_bvp=tol_bvp,
        tol_ode=task_value(cfg, "tol_ode", 1e-10),
        cap=task_value(cfg, "cap", 1e8),
        quad_n=task_value(cfg, "quad_n", 1024, int),
    )


def _eigen_tol(cfg: RunConfig, tol_override: Optional[float]) -> float:
    return tol_override if tol_override is not None else task_value(cfg, "tol", 1e-8)


def run_check(cfg, art, tol, workers):
    rep = check_all(cfg.problem, _eigen_tol(cfg, tol))
    print(rep.to_text())
    art.report({"task": "check", "hypotheses": rep.to_dict(), "overall": rep.overall})
    return EXIT_OK if rep.passed else EXIT_VERDICT


def run_solve(cfg, art, tol, workers):
    spec = cfg.problem
    hyp = check_all(spec, task_value(cfg, "tol", 1e-8))
    print(hyp.to_text())
    payload = {"task": "solve", "hypotheses": hyp.to_dict(), "overall": hyp.overall}
    if not hyp.passed:
        art.report(payload)
        return EXIT_VERDICT
    params = _scan_params(cfg, tol)
    try:
        rep = find_positive_solutions(spec, workers=workers, **params)
    except NoBracketFound as exc:
        art.table("poincare.csv", POINCARE_COLUMNS, _poincare_rows(exc.table))
        payload["solutions"] = {"error": str(exc), "n_solutions": 0}
        art.report(payload)
        log.error("%s", exc)
        return EXIT_ERROR
    art.table("poincare.csv", POINCARE_COLUMNS, _poincare_rows(rep.table))
    for k, prof in enumerate(rep.solutions, start=1):
        art.table(f"solution_{k}.csv", ["x", "u", "v"], zip(prof.x, prof.u, prof.v))
    payload["solver"] = params
    payload["solutions"] = rep.summary()
    r_small = task_value(cfg, "r_small")
    if r_small is not None:
        c_small = np.geomspace(task_value(cfg, "small_c_min", 1e-8), task_value(cfg, "small_c_max", 1e-2), 61)
        payload["small_amplitude"] = small_amplitude_scan(spec, r_small, c_small).summary()
    art.report(payload)
    for prof in rep.solutions:
        print(
            f"c* = {prof.initial_slope:.15g}  |u(L)| = {prof.boundary_residual:.3e}  "
            f"min u = {prof.interior_positivity:.3e}  ||u - Phi u|| = {prof.operator_residual:.3e}"
        )
    if not rep.solutions:
        log.error("sign changes found but no root was accepted")
        return EXIT_ERROR
    return EXIT_OK


def run_poincare(cfg, art, tol, workers):
    p = _scan_params(cfg, None)
    tol_ode = tol if tol is not None else p["tol_ode"]
    pts = sample_poincare(cfg.problem, p["c_min"], p["c_max"], p["n_scan"], tol_ode, p["cap"], workers)
    art.table("poincare.csv", POINCARE_COLUMNS, _poincare_rows(pts))
    art.json("poincare.json", [pt.row() for pt in pts])
    signs = sum(
        1
        for a, b in zip(pts, pts[1:])
        if not (a.escaped or b.escaped) and a.c > 0 and a.uL * b.uL < 0
    )
    art.report(
        {
            "task": "poincare",
            "problem": cfg.problem.describe(),
            "c_min": p["c_min"],
            "c_max": p["c_max"],
            "n": len(pts),
            "n_escaped": sum(pt.escaped for pt in pts),
            "n_sign_changes": signs,
        }
    )
    print(f"{len(pts)} slopes, {signs} sign change(s) of u(L)")
    return EXIT_OK


_KINDS = {
    "positive": (positive_part, WeightKind.POSITIVE_PART),
    "negative": (negative_part, WeightKind.NEGATIVE_PART),
    "abs": (absolute_value, WeightKind.ABSOLUTE_VALUE),
    "given": (lambda w: w, WeightKind.GIVEN),
}


def run_eigen(cfg, art, tol, workers):
    kind = task_value(cfg, "weight_kind", "positive", str)
    if kind not in _KINDS:
        raise ConfigError(f"[task] weight_kind must be one of {', '.join(_KINDS)}")
    make, wkind = _KINDS[kind]
    w = make(cfg.problem.weight)
    intervals = task_value(cfg, "intervals", None, "pairs")
    if intervals is None:
        intervals = [(0.0, cfg.problem.L)]
    elif kind == "positive" and len(intervals) >= 1:
        wkind = WeightKind.POSITIVE_PART_ON_SUBINTERVAL
    etol = _eigen_tol(cfg, tol)
    results: list[EigenResult] = []
    for lo, hi in intervals:
        try:
            results.append(first_eigenvalue(w, lo, hi, etol, wkind))
        except WeightVanishes as exc:
            art.report({"task": "eigen", "error": str(exc)})
            print(f"[{lo}, {hi}]: {exc}")
            return EXIT_VERDICT
    for k, er in enumerate(results, start=1):
        ef = eigenfunction(er, task_value(cfg, "n_samples", 401, int))
        art.table(f"eigenfunction_{k}.csv", ["x", "phi", "dphi"], zip(ef.x, ef.u, ef.v))
        print(f"[{er.interval[0]:.12g}, {er.interval[1]:.12g}]: lambda_1 = {er.lam:.15g}")
    art.report({"task": "eigen", "weight": w.name, "results": [r.to_dict() for r in results]})
    return EXIT_OK


def run_radial(cfg, art, tol, workers):
    rp = cfg.radial
    if rp is None:
        raise ConfigError("task radial needs N, R1, R2 in [problem]")
    hyp = check_all(cfg.problem, task_value(cfg, "tol", 1e-8))
    print(hyp.to_text())
    payload = {
        "task": "radial",
        "radial": {"N": rp.N, "R1": rp.R1, "R2": rp.R2, "L": rp.L},
        "hypotheses": hyp.to_dict(),
        "overall": hyp.overall,
    }
    if not hyp.passed:
        art.report(payload)
        return EXIT_VERDICT
    params = _scan_params(cfg, tol)
    c_min, c_max = params.pop("c_min"), params.pop("c_max")
    try:
        rep = solve_radial(rp, c_min, c_max, workers=workers, **params)
    except NoBracketFound as exc:
        art.table("poincare.csv", POINCARE_COLUMNS, _poincare_rows(exc.table))
        payload["solutions"] = {"error": str(exc), "n_solutions": 0}
        art.report(payload)
        log.error("%s", exc)
        return EXIT_ERROR
    slice_n = task_value(cfg, "slice_n", 0, int)
    sols = []
    for k, rs in enumerate(rep.solutions, start=1):
        art.table(f"radial_solution_{k}.csv", ["r", "w", "dw"], zip(rs.r, rs.w, rs.dw))
        if slice_n:
            X1, X2, U = rs.slice_grid(slice_n)
            keep = np.isfinite(U)
            art.table(f"radial_slice_{k}.csv", ["x1", "x2", "u"], zip(X1[keep], X2[keep], U[keep]))
        res = [rs.radial_residual(n) for n in (32, 64, 128)]
        sols.append(
            {
                **rs.profile_t.summary(),
                "w_R1": rs.boundary_values[0],
                "w_R2": rs.boundary_values[1],
                "radial_fd_residual": dict(zip(("n32", "n64", "n128"), res)),
                "observed_order": math.log2(res[1] / res[2]) if res[2] > 0 else None,
            }
        )
        print(f"c* = {rs.profile_t.initial_slope:.15g}  w(R1) = {rs.w[0]:.3e}  w(R2) = {rs.w[-1]:.3e}")
    payload["solutions"] = sols
    art.report(payload)
    return EXIT_OK if sols else EXIT_ERROR


def run_lambda_scan(cfg, art, tol, workers):
    grid = task_value(cfg, "lambda_grid", None, list)
    if grid is None:
        lo = task_value(cfg, "lambda_min", 0.1)
        hi = task_value(cfg, "lambda_max", 10.0)
        n = task_value(cfg, "lambda_n", 21, int)
        grid = list(np.geomspace(lo, hi, n))
    scan = lambda_threshold_scan(cfg.problem, grid, _eigen_tol(cfg, tol))
    art.table(
        "lambda_scan.csv",
        ["lambda_w", "verdict", "predicted"],
        ([row["lambda_w"], row["verdict"], row["predicted"]] for row in scan.grid),
    )
    art.report({"task": "lambda-scan", "problem": cfg.problem.describe(), **scan.to_dict()})
    print(f"lambda* = {scan.lambda_star:.15g}; smallest passing grid value: {scan.smallest_passing}")
    return EXIT_OK


RUNNERS = {
    "check": run_check,
    "solve": run_solve,
    "poincare": run_poincare,
    "eigen": run_eigen,
    "radial": run_radial,
    "lambda-scan": run_lambda_scan,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="posbvp", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="config file, or a bundled name (fig1, fig2, radial-n3, constant-weight)")
    ap.add_argument("--task", choices=TASKS, help="override [task] name")
    ap.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    ap.add_argument("--tol", type=float, help="main tolerance: eigenvalue tol (check/eigen/lambda-scan), tol_bvp (solve/radial), ODE tol (poincare)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for slope sampling")
    ap.add_argument("--format", choices=("csv", "json", "both"), help="artifact formats")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.task)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out is not None:
        cfg.out_dir = args.out
    if args.format is not None:
        cfg.fmt = args.format
    if args.tol is not None and not args.tol > 0:
        print("--tol must be positive", file=sys.stderr)
        return EXIT_ERROR
    art = Artifacts(cfg)
    try:
        status = RUNNERS[cfg.task](cfg, art, args.tol, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (StepSizeUnderflow, PartitionError, ValueError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for p in art.flush(cfg.out_dir):
        log.info("wrote %s", p)
    return status


if __name__ == "__main__":
    sys.exit(main())
