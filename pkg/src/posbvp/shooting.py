"""Shooting on the extended equation and the slope-to-endpoint (Poincare) map.

For a slope c >= 0 the IVP u(0) = 0, u'(0) = c is integrated with g~ in
place of g, so F(c) = u(L; c) is continuous wherever the trajectory does
not escape. Sign changes of F are bisected; positivity on ]0, L[ is checked
afterwards.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .green import operator_residual
from .integrator import DEFAULT_CAP, Trajectory, integrate
from .problem import ProblemSpec
from .profile import SolutionProfile

log = logging.getLogger(__name__)

DEFAULT_N_SCAN = 481
DEFAULT_TOL_BVP = 1e-9
DEFAULT_TOL_ODE = 1e-10
VERIFY_N = 2001
ESCAPE_REFINEMENTS = 3
ESCAPE_SUBDIVISIONS = 8


class NoBracketFound(RuntimeError):
    def __init__(self, message: str, table: list):
        super().__init__(message)
        self.table = table


@dataclass
class PoincarePoint:
    c: float
    end_state: Optional[tuple[float, float]]
    interior_min: float
    positive_interior: bool
    x_escape: Optional[float] = None

    @property
    def escaped(self) -> bool:
        return self.end_state is None

    @property
    def uL(self) -> float:
        return math.nan if self.end_state is None else self.end_state[0]

    @property
    def vL(self) -> float:
        return math.nan if self.end_state is None else self.end_state[1]

    def row(self) -> dict:
        return {
            "c": self.c,
            "uL": self.uL,
            "vL": self.vL,
            "escaped": int(self.escaped),
            "positive_interior": int(self.positive_interior),
        }


def _interior_min(tr: Trajectory, L: float, n: int = VERIFY_N) -> float:
    x_end = L if tr.reached_end else float(tr.x[-1])
    xs = np.linspace(0.0, x_end, n)[1:-1]
    if xs.size == 0:
        return math.nan
    u, _ = tr.sample(xs)
    return float(u.min())


def shoot(spec: ProblemSpec, c: float, tol: float = DEFAULT_TOL_ODE, cap: float = DEFAULT_CAP) -> Trajectory:
    return integrate(spec, 0.0, 0.0, c, spec.L, tol, cap)


def poincare_point(spec: ProblemSpec, c: float, tol: float = DEFAULT_TOL_ODE, cap: float = DEFAULT_CAP) -> PoincarePoint:
    tr = shoot(spec, c, tol, cap)
    imin = _interior_min(tr, spec.L)
    return PoincarePoint(
        float(c),
        tr.end_state,
        imin,
        bool(tr.reached_end and imin > 0),
        tr.x_escape,
    )


def _map(fn, items, workers: int):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def sample_poincare(
    spec: ProblemSpec,
    c_min: float,
    c_max: float,
    n: int = DEFAULT_N_SCAN,
    tol: float = DEFAULT_TOL_ODE,
    cap: float = DEFAULT_CAP,
    workers: int = 1,
) -> list[PoincarePoint]:
    """Image of the segment {0} x [c_min, c_max] under c -> (u(L), u'(L)), on n uniform slopes."""
    if not 0 <= c_min < c_max:
        raise ValueError("need 0 <= c_min < c_max")
    if n < 2:
        raise ValueError("need n >= 2")
    cs = np.linspace(c_min, c_max, n)
    return _map(lambda c: poincare_point(spec, float(c), tol, cap), cs, workers)


def _refine_escapes(spec, points, tol, cap, workers, rounds=ESCAPE_REFINEMENTS):
    pts = sorted(points, key=lambda p: p.c)
    for _ in range(rounds):
        new_cs = []
        for p, q in zip(pts, pts[1:]):
            if p.escaped != q.escaped:
                new_cs.extend(np.linspace(p.c, q.c, ESCAPE_SUBDIVISIONS + 1)[1:-1])
        if not new_cs:
            break
        pts = sorted(pts + _map(lambda c: poincare_point(spec, float(c), tol, cap), new_cs, workers), key=lambda p: p.c)
    return pts


@dataclass
class ShootingReport:
    solutions: list
    table: list
    brackets: list = field(default_factory=list)
    discarded: list = field(default_factory=list)
    rejected: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "n_solutions": len(self.solutions),
            "solutions": [s.summary() for s in self.solutions],
            "brackets": [list(b) for b in self.brackets],
            "discarded_brackets": [dict(d) for d in self.discarded],
            "rejected_roots": [dict(r) for r in self.rejected],
        }


def _bisect_root(spec, lo, f_lo, hi, f_hi, tol_bvp, tol_ode, cap):
    """Bisection on F(c) = u(L; c); returns (c, trajectory) or (None, reason)."""
    best = None
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        tr = shoot(spec, mid, tol_ode, cap)
        if not tr.reached_end:
            return None, f"trajectory escaped at c = {mid!r} inside the bracket"
        f_mid = tr.end_state[0]
        if best is None or abs(f_mid) < abs(best[1].end_state[0]):
            best = (mid, tr)
        if abs(f_mid) <= tol_bvp:
            return mid, tr
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return best if best is not None else (None, "empty bracket")


def _polish(spec, c0, tol_bvp, tol_ode, cap, width):
    """Secant/bisection on the fine-tolerance map around c0 until |u(L)| <= tol_bvp."""

    def F(c):
        tr = shoot(spec, c, tol_ode, cap)
        return (tr.end_state[0] if tr.reached_end else math.nan), tr

    f0, tr0 = F(c0)
    if not math.isfinite(f0) or abs(f0) <= tol_bvp:
        return c0, tr0
    # bracket on the fine map
    step = max(width, 1e-12 * max(1.0, abs(c0)))
    for _ in range(40):
        fa, tra = F(c0 - step)
        fb, trb = F(c0 + step)
        if math.isfinite(fa) and fa * f0 <= 0:
            lo, flo, hi, fhi = c0 - step, fa, c0, f0
            break
        if math.isfinite(fb) and fb * f0 <= 0:
            lo, flo, hi, fhi = c0, f0, c0 + step, fb
            break
        step *= 2
    else:
        return c0, tr0
    best = (c0, tr0) if abs(f0) <= min(abs(flo), abs(fhi)) else ((lo, tra) if abs(flo) < abs(fhi) else (hi, trb))
    for _ in range(200):
        # regula falsi step, safeguarded by bisection
        c = hi - fhi * (hi - lo) / (fhi - flo) if fhi != flo else 0.5 * (lo + hi)
        if not lo < c < hi:
            c = 0.5 * (lo + hi)
        fc, trc = F(c)
        if not math.isfinite(fc):
            break
        if abs(fc) < abs(best[1].end_state[0]):
            best = (c, trc)
        if abs(fc) <= tol_bvp:
            break
        if (fc > 0) == (flo > 0):
            lo, flo = c, fc
            fhi *= 0.5  # Illinois modification
        else:
            hi, fhi = c, fc
            flo *= 0.5
        if hi - lo <= 4e-16 * max(1.0, abs(hi)):
            break
    return best


def _profile_from(spec: ProblemSpec, c: float, tr: Trajectory, quad_n: Optional[int]) -> SolutionProfile:
    imin = _interior_min(tr, spec.L)
    sol = tr._solution
    prof = SolutionProfile(
        tr.x.copy(),
        tr.u.copy(),
        tr.v.copy(),
        initial_slope=float(c),
        boundary_residual=abs(float(tr.u[-1])),
        interior_positivity=imin,
        dense=sol.evaluate_many,
    )
    if quad_n:
        prof.operator_residual = operator_residual(spec, prof, quad_n)
    return prof


def find_positive_solutions(
    spec: ProblemSpec,
    c_min: float = 0.0,
    c_max: float = 12.0,
    n_scan: int = DEFAULT_N_SCAN,
    tol_bvp: float = DEFAULT_TOL_BVP,
    tol_ode: float = DEFAULT_TOL_ODE,
    cap: float = DEFAULT_CAP,
    quad_n: Optional[int] = 1024,
    workers: int = 1,
    raise_on_empty: bool = True,
) -> ShootingReport:
    """All positive solutions bracketed by sign changes of u(L; c) on a slope scan.

    Every accepted profile has |u(L)| <= tol_bvp on a re-integration at
    tol_ode / 10 and is positive on the interior verification grid.
    """
    if not tol_bvp > 0:
        raise ValueError("tol_bvp must be positive")
    table = sample_poincare(spec, c_min, c_max, n_scan, tol_ode, cap, workers)
    pts = _refine_escapes(spec, table, tol_ode, cap, workers)

    brackets, discarded, exact = [], [], []
    for p, q in zip(pts, pts[1:]):
        if p.escaped or q.escaped:
            continue
        if p.c == 0.0 and p.uL == 0.0:
            # the trivial solution at c = 0 is not a bracket endpoint
            continue
        if p.uL == 0.0:
            exact.append(p.c)
        elif p.uL * q.uL < 0:
            brackets.append((p.c, p.uL, q.c, q.uL))
    last = pts[-1]
    if not last.escaped and last.uL == 0.0 and last.c > 0:
        exact.append(last.c)
    for p, mid, q in zip(pts, pts[1:], pts[2:]):
        if mid.escaped and not p.escaped and not q.escaped and p.uL * q.uL < 0:
            discarded.append({"c_lo": p.c, "c_hi": q.c, "reason": "sign change across an escaped sample"})

    if not brackets and not exact:
        if raise_on_empty:
            raise NoBracketFound(
                f"u(L; c) has no sign change among non-escaped samples of [{c_min}, {c_max}]", table
            )
        return ShootingReport([], table, [], discarded, [])

    solutions, rejected = [], []
    candidates = [(c, None) for c in exact]
    for lo, flo, hi, fhi in brackets:
        c, tr = _bisect_root(spec, lo, flo, hi, fhi, tol_bvp, tol_ode, cap)
        if c is None:
            discarded.append({"c_lo": lo, "c_hi": hi, "reason": tr})
            continue
        candidates.append((c, hi - lo))
    fine = tol_ode / 10
    for c, width in candidates:
        c, tr = _polish(spec, c, tol_bvp, fine, cap, width or 1e-9 * max(1.0, c))
        if not tr.reached_end:
            rejected.append({"c": c, "reason": "escaped on re-integration"})
            continue
        prof = _profile_from(spec, c, tr, quad_n)
        if not prof.interior_positivity > 0:
            rejected.append({"c": c, "reason": f"not positive on ]0, L[ (min {prof.interior_positivity:.3e})"})
            continue
        if prof.boundary_residual > tol_bvp:
            log.warning("c* = %r: |u(L)| = %.3e exceeds tol_bvp after polishing", c, prof.boundary_residual)
            rejected.append({"c": c, "reason": f"|u(L)| = {prof.boundary_residual:.3e} > tol_bvp"})
            continue
        solutions.append(prof)
    solutions.sort(key=lambda s: s.initial_slope)
    return ShootingReport(solutions, table, [(b[0], b[2]) for b in brackets], discarded, rejected)


@dataclass
class SmallAmplitudeReport:
    r_small: float
    ok: bool
    accepted_small: list
    largest_sup_norm: float
    min_relative_miss: float
    n_candidates: int

    def summary(self) -> dict:
        return {
            "r_small": self.r_small,
            "ok": self.ok,
            "accepted_small": self.accepted_small,
            "largest_sup_norm": self.largest_sup_norm,
            "min_relative_boundary_miss": self.min_relative_miss,
            "n_candidates": self.n_candidates,
        }


def small_amplitude_scan(
    spec: ProblemSpec,
    r_small: float,
    c_grid: Sequence[float],
    tol_bvp: float = DEFAULT_TOL_BVP,
    tol_ode: float = DEFAULT_TOL_ODE,
) -> SmallAmplitudeReport:
    """Look for positive solutions of sup-norm <= r_small among the slopes ``c_grid``.

    Near-solutions are the scanned trajectories whose sup-norm is at most
    r_small; the report gives the largest such sup-norm and the smallest
    relative boundary miss |u(L)| / ||u|| among them. c = 0 is skipped
    (the trivial solution is not positive).
    """
    if not r_small > 0:
        raise ValueError("r_small must be positive")
    cs = sorted(float(c) for c in c_grid if c > 0)
    trs = [shoot(spec, c, tol_ode) for c in cs]
    largest = 0.0
    min_miss = math.inf
    n_cand = 0
    for tr in trs:
        if not tr.reached_end:
            continue
        sup = float(np.max(np.abs(tr.u)))
        if sup <= r_small:
            n_cand += 1
            largest = max(largest, sup)
            min_miss = min(min_miss, abs(tr.u[-1]) / sup)

    accepted = []
    for (c0, t0), (c1, t1) in zip(zip(cs, trs), zip(cs[1:], trs[1:])):
        if not (t0.reached_end and t1.reached_end):
            continue
        f0, f1 = t0.u[-1], t1.u[-1]
        if f0 * f1 < 0 or f1 == 0:
            c, tr = _bisect_root(spec, c0, f0, c1, f1, tol_bvp, tol_ode, DEFAULT_CAP)
            if c is None:
                continue
            sup = float(np.max(np.abs(tr.u)))
            if sup <= r_small and _interior_min(tr, spec.L) > 0:
                accepted.append({"c": c, "sup_norm": sup})
    return SmallAmplitudeReport(r_small, not accepted, accepted, largest, min_miss, n_cand)
