"""Adaptive Dormand-Prince 5(4) integration of u'' + a(x) g~(u) = 0.

The stepper works on plain Python floats: the systems here are one or two
dimensional and per-step numpy overhead would dominate the cost.
"""

from __future__ import annotations

import bisect
import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .problem import Nonlinearity, ProblemSpec

DEFAULT_CAP = 1e8
ZERO_TOL = 1e-12

# Dormand & Prince (1980) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
# Shampine's continuous extension; rows are stages 1,3,4,5,6,7, columns the weights of theta..theta^4
_P = (
    (1.0, -2.8535800653862835, 3.0717434641059005, -1.1270175653862835),
    (0.0, 4.023133379230305, -6.249321565289, 2.675424484351598),
    (0.0, -3.7324019615885042, 10.068970589843675, -5.685526961588504),
    (0.0, 2.5548038301849423, -6.399112377351017, 3.5219323679207912),
    (0.0, -1.3744241142186024, 3.272657752246729, -1.7672812570757455),
    (0.0, 1.3824689317781436, -3.764937863556287, 2.382468931778144),
)


class StepSizeUnderflow(RuntimeError):
    def __init__(self, message: str, partial: "Trajectory"):
        super().__init__(message)
        self.partial = partial


class Outcome(str, enum.Enum):
    REACHED_END = "ReachedEnd"
    ESCAPED = "Escaped"


def extend_g(g: Nonlinearity | Callable[[float], float]) -> Callable[[float], float]:
    """g~(s) = g(s) for s >= 0 and 0 for s < 0."""
    f = g.func if isinstance(g, Nonlinearity) else g

    def g_ext(s: float) -> float:
        return f(s) if s >= 0.0 else 0.0

    return g_ext


@dataclass
class _Segment:
    x0: float
    h: float
    y0: tuple
    q: tuple  # per component (c1..c4): y(x0 + t h) = y0 + t*(c1 + t*(c2 + t*(c3 + t*c4)))

    def __call__(self, x: float) -> tuple:
        t = (x - self.x0) / self.h
        return tuple(y + t * (c1 + t * (c2 + t * (c3 + t * c4))) for y, (c1, c2, c3, c4) in zip(self.y0, self.q))


@dataclass
class Solution:
    """Raw output of :func:`dopri5`: accepted mesh, dense segments and how it ended."""

    xs: list
    ys: list
    segments: list
    outcome: Outcome
    x_escape: Optional[float] = None
    nfev: int = 0
    _arrays: Optional[tuple] = field(default=None, repr=False)

    def evaluate_many(self, xs) -> np.ndarray:
        """Dense output at an array of abscissae; result has shape xs.shape + (dim,)."""
        xs = np.asarray(xs, dtype=float)
        if not self.segments:
            return np.broadcast_to(np.array(self.ys[0]), xs.shape + (len(self.ys[0]),)).copy()
        if self._arrays is None:
            x0 = np.array([s.x0 for s in self.segments])
            h = np.array([s.h for s in self.segments])
            y0 = np.array([s.y0 for s in self.segments])
            q = np.array([s.q for s in self.segments])
            self._arrays = (np.array(self.xs), x0, h, y0, q)
        mesh, x0, h, y0, q = self._arrays
        flat = xs.ravel()
        k = np.clip(np.searchsorted(mesh, flat, side="right") - 1, 0, len(self.segments) - 1)
        t = np.clip((flat - x0[k]) / h[k], 0.0, 1.0)[:, None]
        c = q[k]
        out = y0[k] + t * (c[..., 0] + t * (c[..., 1] + t * (c[..., 2] + t * c[..., 3])))
        return out.reshape(xs.shape + (out.shape[-1],))

    def evaluate(self, x: float) -> tuple:
        if x <= self.xs[0]:
            return self.ys[0]
        k = bisect.bisect_right(self.xs, x) - 1
        if k >= len(self.segments):
            return self.ys[-1]
        return self.segments[k](x)


def _initial_step(rhs, x0, y0, f0, direction_span, tol):
    scale = [tol + tol * abs(y) for y in y0]
    d0 = math.sqrt(sum((y / s) ** 2 for y, s in zip(y0, scale)) / len(y0))
    d1 = math.sqrt(sum((f / s) ** 2 for f, s in zip(f0, scale)) / len(y0))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    y1 = [y + h0 * f for y, f in zip(y0, f0)]
    f1 = rhs(x0 + h0, y1)
    d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, f0, scale)) / len(y0)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, direction_span)


def dopri5(
    rhs: Callable[[float, Sequence[float]], Sequence[float]],
    x0: float,
    y0: Sequence[float],
    x1: float,
    tol: float,
    breakpoints: Sequence[float] = (),
    escape: Optional[Callable[[Sequence[float]], bool]] = None,
    h_min: Optional[float] = None,
) -> Solution:
    """Integrate y' = rhs(x, y) from x0 to x1 > x0 with mixed abs/rel tolerance ``tol``.

    Steps never straddle an entry of ``breakpoints``. When ``escape(y)``
    becomes true after an accepted step, integration stops with outcome
    ESCAPED and the first escaping abscissa is located on the dense output.
    """
    if not x1 > x0:
        raise ValueError("need x1 > x0")
    if not tol > 0:
        raise ValueError("tol must be positive")
    span = x1 - x0
    if h_min is None:
        h_min = 1e-14 * span
    stops = sorted(b for b in breakpoints if x0 < b < x1)
    stops.append(x1)
    si = 0

    y = tuple(float(v) for v in y0)
    dim = len(y)
    x = float(x0)
    f = tuple(rhs(x, y))
    nfev = 1
    xs, ys, segments = [x], [y], []
    h = _initial_step(rhs, x, y, f, span, tol)
    nfev += 1
    rng = range(dim)

    while True:
        target = stops[si]
        last = False
        h_try = h
        if x + h >= target - 1e-14 * max(1.0, abs(target)):
            h = target - x
            last = True
        try:
            k1 = f
            yt = [y[i] + h * _A21 * k1[i] for i in rng]
            k2 = rhs(x + _C2 * h, yt)
            yt = [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in rng]
            k3 = rhs(x + _C3 * h, yt)
            yt = [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in rng]
            k4 = rhs(x + _C4 * h, yt)
            yt = [y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]) for i in rng]
            k5 = rhs(x + _C5 * h, yt)
            yt = [
                y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
                for i in rng
            ]
            xn = target if last else x + h
            k6 = rhs(xn, yt)
            yn = tuple(
                y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i]) for i in rng
            )
            finite = all(math.isfinite(v) for v in yn)
            k7 = rhs(xn, yn) if finite else yn
            nfev += 6
            err = 0.0
            if finite:
                for i in rng:
                    e = h * (
                        _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
                    )
                    sc = tol + tol * max(abs(y[i]), abs(yn[i]))
                    err += (e / sc) ** 2
                err = math.sqrt(err / dim)
                if not math.isfinite(err):
                    err = math.inf
            else:
                err = math.inf
        except (OverflowError, ZeroDivisionError):
            err = math.inf
            xn = yn = k7 = None

        if err <= 1.0:
            ks = (k1, k3, k4, k5, k6, k7)
            q = []
            for i in rng:
                c1 = c2 = c3 = c4 = 0.0
                for kk, row in zip(ks, _P):
                    ki = kk[i]
                    c1 += row[0] * ki
                    c2 += row[1] * ki
                    c3 += row[2] * ki
                    c4 += row[3] * ki
                q.append((h * c1, h * c2, h * c3, h * c4))
            seg = _Segment(x, h, y, tuple(q))
            segments.append(seg)
            x, y, f = xn, yn, tuple(k7)
            xs.append(x)
            ys.append(y)
            if escape is not None and escape(y):
                x_esc = _locate_escape(seg, escape, xs[-2], x)
                return Solution(xs, ys, segments, Outcome.ESCAPED, x_esc, nfev)
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2))
            if last:
                si += 1
                if si == len(stops):
                    return Solution(xs, ys, segments, Outcome.REACHED_END, None, nfev)
                # a step shortened to hit a stop says little about the next one
                h = max(h, h_try) * fac
            else:
                h *= fac
        else:
            fac = 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err**-0.2)
            h *= fac
            if h < h_min:
                partial = Solution(xs, ys, segments, Outcome.REACHED_END, None, nfev)
                raise StepSizeUnderflow(f"step size {h:.3e} below {h_min:.3e} at x = {x:.17g}", partial)


def _locate_escape(seg, escape, xa, xb) -> float:
    lo, hi = xa, xb
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if escape(seg(mid)):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return hi


# -- the boundary value problem's IVP ----------------------------------------


@dataclass
class Trajectory:
    """Sampled path (x, u, u') of the extended initial value problem."""

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    outcome: Outcome
    x_escape: Optional[float] = None
    zero_crossings: list = field(default_factory=list)
    tol: float = 0.0
    _solution: Optional[Solution] = field(default=None, repr=False)

    @property
    def reached_end(self) -> bool:
        return self.outcome is Outcome.REACHED_END

    @property
    def end_state(self) -> Optional[tuple[float, float]]:
        if not self.reached_end:
            return None
        return float(self.u[-1]), float(self.v[-1])

    def __call__(self, x) -> tuple:
        """Dense-output evaluation of (u, v) at ``x`` (scalar)."""
        return self._solution.evaluate(float(x))

    def sample(self, xs) -> tuple[np.ndarray, np.ndarray]:
        uv = self._solution.evaluate_many(xs)
        return uv[..., 0], uv[..., 1]

    def to_csv(self, path, precision: int = 17) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "u", "v"])
            for row in zip(self.x, self.u, self.v):
                w.writerow([f"{val:.{precision}g}" for val in row])


def _downward_zeros(sol: Solution, zero_tol: float = ZERO_TOL) -> list[float]:
    out = []
    for k, seg in enumerate(sol.segments):
        ua = sol.ys[k][0]
        ub = sol.ys[k + 1][0]
        if ua > 0.0 and ub <= 0.0:
            if ub == 0.0:
                out.append(sol.xs[k + 1])
                continue
            lo, hi = sol.xs[k], sol.xs[k + 1]
            xm = hi
            for _ in range(200):
                xm = 0.5 * (lo + hi)
                um = seg(xm)[0]
                if abs(um) <= zero_tol or hi - lo <= 1e-16 * max(1.0, abs(hi)):
                    break
                if um > 0.0:
                    lo = xm
                else:
                    hi = xm
            out.append(xm)
    return out


def bvp_rhs(problem: ProblemSpec) -> Callable:
    a = problem.weight
    af = a.func
    sc = a.scale
    gf = problem.nonlinearity.func

    def rhs(x, y):
        u = y[0]
        return (y[1], -sc * af(x) * gf(u)) if u > 0.0 else (y[1], 0.0)

    return rhs


def integrate(
    problem: ProblemSpec,
    x0: float,
    u0: float,
    v0: float,
    x1: float,
    tol: float = 1e-10,
    cap: float = DEFAULT_CAP,
) -> Trajectory:
    """Integrate (u, v)' = (v, -a(x) g~(u)) from (x0, u0, v0) to x1."""
    L = problem.L
    if not x0 < x1 <= L * (1 + 1e-15):
        raise ValueError(f"need x0 < x1 <= L (got x0={x0}, x1={x1}, L={L})")
    if not cap > 0:
        raise ValueError("cap must be positive")
    rhs = bvp_rhs(problem)

    def escaped(y):
        return abs(y[0]) + abs(y[1]) > cap

    try:
        sol = dopri5(rhs, x0, (u0, v0), x1, tol, problem.weight.breakpoints, escaped, 1e-14 * L)
    except StepSizeUnderflow as exc:
        exc.partial = _to_trajectory(exc.partial, tol)
        raise
    return _to_trajectory(sol, tol)


def _to_trajectory(sol: Solution, tol: float) -> Trajectory:
    arr = np.array(sol.ys, dtype=float)
    return Trajectory(
        x=np.array(sol.xs, dtype=float),
        u=arr[:, 0],
        v=arr[:, 1],
        outcome=sol.outcome,
        x_escape=sol.x_escape,
        zero_crossings=_downward_zeros(sol),
        tol=tol,
        _solution=sol,
    )


def rk4_fixed(problem: ProblemSpec, u0: float, v0: float, h: float = 1e-5, x0: float = 0.0, x1: Optional[float] = None):
    """Classical fixed-step RK4 on the extended equation; reference path for tests.

    Returns (u(x1), v(x1)) or None if |u| + |v| exceeds 1e8 on the way.
    """
    if x1 is None:
        x1 = problem.L
    n = max(1, int(round((x1 - x0) / h)))
    h = (x1 - x0) / n
    rhs = bvp_rhs(problem)
    u, v = float(u0), float(v0)
    x = x0
    for k in range(n):
        x = x0 + k * h
        a1, b1 = rhs(x, (u, v))
        a2, b2 = rhs(x + 0.5 * h, (u + 0.5 * h * a1, v + 0.5 * h * b1))
        a3, b3 = rhs(x + 0.5 * h, (u + 0.5 * h * a2, v + 0.5 * h * b2))
        a4, b4 = rhs(x + h, (u + h * a3, v + h * b3))
        u += h * (a1 + 2 * a2 + 2 * a3 + a4) / 6
        v += h * (b1 + 2 * b2 + 2 * b3 + b4) / 6
        if abs(u) + abs(v) > DEFAULT_CAP:
            return None
    return u, v
