"""Radial solutions on the annulus R1 < |x| < R2 in R^N.

A radial solution u(x) = w(|x|) of -Lap u = a(|x|) g(u) solves

    w'' + (N-1)/r w' + a(r) g(w) = 0,   w(R1) = w(R2) = 0.

With t = h(r) = int_{R1}^r xi^(1-N) dxi and v(t) = w(r(t)) this becomes

    v'' + r(t)^(2(N-1)) a(r(t)) g(v) = 0,   v(0) = v(h(R2)) = 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .problem import Nonlinearity, ProblemSpec, SignPartition, Weight, detect_sign_partition
from .profile import SolutionProfile
from .shooting import ShootingReport, find_positive_solutions


def _check_r(r, R1):
    if np.any(np.asarray(r) < R1 * (1 - 1e-15)):
        raise ValueError(f"r must be >= R1 = {R1}")


def h(r, N: int, R1: float):
    """t = int_{R1}^r xi^(1-N) dxi (closed form)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    _check_r(r, R1)
    r = np.asarray(r, dtype=float)
    if N == 2:
        out = np.log(r / R1)
    else:
        out = (R1 ** (2 - N) - r ** (2 - N)) / (N - 2)
    return out if out.ndim else float(out)


def h_inverse(t, N: int, R1: float):
    """r with h(r) = t."""
    if N < 2:
        raise ValueError("N must be at least 2")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    if N == 2:
        out = R1 * np.exp(t)
    else:
        base = R1 ** (2 - N) - (N - 2) * t
        if np.any(base <= 0):
            raise ValueError(f"t beyond the range of h for N = {N}, R1 = {R1}")
        out = base ** (1.0 / (2 - N))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RadialProblem:
    N: int
    R1: float
    R2: float
    a: Weight  # evaluated on r in [R1, R2]; its domain_length is ignored
    g: Nonlinearity
    label: str = "radial"

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if not 0 < self.R1 < self.R2:
            raise ValueError("need 0 < R1 < R2")

    @property
    def L(self) -> float:
        return h(self.R2, self.N, self.R1)


@dataclass(frozen=True)
class TransformedProblem:
    radial: RadialProblem
    spec: ProblemSpec

    @property
    def L(self) -> float:
        return self.spec.L

    def back_map(self, t):
        return h_inverse(t, self.radial.N, self.radial.R1)


def radial_weight_from(func, vfunc=None, name="a(r)", R_max: float = math.inf) -> Weight:
    """Wrap an r-evaluator as a Weight (domain_length is a placeholder for r-space)."""
    L = R_max if math.isfinite(R_max) else 1.0
    return Weight(L, func, vfunc, name=name)


def reduce(rp: RadialProblem) -> TransformedProblem:
    N, R1 = rp.N, rp.R1
    L = rp.L
    af, avf, sc = rp.a.func, rp.a.vfunc, rp.a.scale
    p = 2 * (N - 1)
    if N == 2:

        def rt(t):
            return R1 * math.exp(t)

    else:
        base, expo = R1 ** (2 - N), 1.0 / (2 - N)

        def rt(t):
            return (base - (N - 2) * t) ** expo

    def wt(t):
        r = rt(t)
        return r**p * af(r)

    def vwt(ts):
        r = h_inverse(np.asarray(ts, dtype=float), N, R1)
        return r**p * np.asarray(avf(r), dtype=float)

    weight = Weight(L, wt, vwt, scale=sc, name=f"r(t)^{p}*{rp.a.name}")
    part = _mapped_partition(rp, weight)
    if part is not None:
        weight = replace(weight, partition=part)
    spec = ProblemSpec(weight, rp.g, label=f"{rp.label}-transformed")
    return TransformedProblem(rp, spec)


def _mapped_partition(rp: RadialProblem, weight_t: Weight) -> Optional[SignPartition]:
    # partition in r (declared, or detected on [R1, R2]) pushed through h
    if rp.a.partition is not None:
        ivs = rp.a.partition.intervals
    else:
        shifted = Weight(rp.R2 - rp.R1, lambda s: rp.a.func(rp.R1 + s), name="shifted")
        try:
            ivs = [(rp.R1 + lo, rp.R1 + hi) for lo, hi in detect_sign_partition(shifted).intervals]
        except ValueError:
            return None
    L = weight_t.domain_length
    mapped = []
    for lo, hi in ivs:
        tlo = 0.0 if lo <= rp.R1 else h(lo, rp.N, rp.R1)
        thi = L if hi >= rp.R2 else h(hi, rp.N, rp.R1)
        mapped.append((tlo, thi))
    return SignPartition(tuple(mapped))


@dataclass
class RadialSolution:
    r: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    profile_t: SolutionProfile
    problem: RadialProblem

    @property
    def boundary_values(self) -> tuple[float, float]:
        return float(self.w[0]), float(self.w[-1])

    def evaluate(self, r) -> tuple[np.ndarray, np.ndarray]:
        """(w(r), w'(r)) from the dense output of v: w = v(h(r)), w' = v'(h(r)) r^(1-N)."""
        r = np.asarray(r, dtype=float)
        t = np.clip(h(r, self.problem.N, self.problem.R1), 0.0, self.profile_t.x[-1])
        uv = self.profile_t.dense(np.asarray(t))
        return uv[..., 0], uv[..., 1] * r ** (1 - self.problem.N)

    def radial_residual(self, n: int) -> float:
        """max over interior nodes of |w'' + (N-1)/r w' + a g(w)| with central differences on n intervals."""
        rp = self.problem
        r = np.linspace(rp.R1, rp.R2, n + 1)
        w, _ = self.evaluate(r)
        dr = r[1] - r[0]
        d2 = (w[2:] - 2 * w[1:-1] + w[:-2]) / dr**2
        d1 = (w[2:] - w[:-2]) / (2 * dr)
        ri = r[1:-1]
        wi = w[1:-1]
        gw = np.where(wi > 0, rp.g.values(np.maximum(wi, 0.0)), 0.0)
        res = d2 + (rp.N - 1) / ri * d1 + rp.a.scale * np.asarray(rp.a.vfunc(ri)) * gw
        return float(np.max(np.abs(res)))

    def slice_grid(self, n: int = 101) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """u(x1, x2, 0, ...) on an n x n grid covering the annulus; NaN outside it."""
        rp = self.problem
        s = np.linspace(-rp.R2, rp.R2, n)
        X1, X2 = np.meshgrid(s, s)
        R = np.hypot(X1, X2)
        U = np.full(R.shape, np.nan)
        inside = (R >= rp.R1) & (R <= rp.R2)
        U[inside], _ = self.evaluate(R[inside])
        return X1, X2, U

    def to_csv(self, path, precision: int = 17) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["r", "w", "dw"])
            for row in zip(self.r, self.w, self.dw):
                wr.writerow([f"{val:.{precision}g}" for val in row])

    def slice_to_csv(self, path, n: int = 101, precision: int = 17) -> None:
        X1, X2, U = self.slice_grid(n)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x1", "x2", "u"])
            for a, b, c in zip(X1.ravel(), X2.ravel(), U.ravel()):
                if np.isfinite(c):
                    wr.writerow([f"{a:.{precision}g}", f"{b:.{precision}g}", f"{c:.{precision}g}"])


@dataclass
class RadialReport:
    transformed: TransformedProblem
    shooting: ShootingReport
    solutions: list


def solve_radial(rp: RadialProblem, c_min: float = 0.0, c_max: float = 100.0, n_samples: int = 401, **solver_opts) -> RadialReport:
    """Shoot on the transformed 1-D problem and map accepted v(t) back to w(r)."""
    tp = reduce(rp)
    rep = find_positive_solutions(tp.spec, c_min, c_max, **solver_opts)
    sols = []
    for prof in rep.solutions:
        r = np.linspace(rp.R1, rp.R2, n_samples)
        rs = RadialSolution(r, np.empty(0), np.empty(0), prof, rp)
        w, dw = rs.evaluate(r)
        # exact endpoint values from the 1-D profile
        w[0], w[-1] = prof.u[0], prof.u[-1]
        rs.w, rs.dw = w, dw
        sols.append(rs)
    return RadialReport(tp, rep, sols)
