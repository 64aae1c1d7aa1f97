"""First Dirichlet eigenvalue of phi'' + lam * w(x) * phi = 0 by Pruefer shooting.

With phi = rho sin(theta), phi' = rho cos(theta) the angle obeys

    theta' = cos^2(theta) + lam * w(x) * sin^2(theta),   theta(alpha) = 0,

and the first eigenvalue is the lam for which theta(beta) = pi. The terminal
angle is nondecreasing in lam when w >= 0, so a doubling search followed by
bisection brackets it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .integrator import dopri5
from .problem import Weight
from .profile import SolutionProfile

DEFAULT_TOL = 1e-8
LAMBDA_CEILING = 1e16


class WeightVanishes(ValueError):
    """w is identically zero on the interval; there is no first eigenvalue."""


class NegativeWeight(ValueError):
    pass


class BracketOverflow(RuntimeError):
    pass


class WeightKind(str, enum.Enum):
    POSITIVE_PART = "PositivePart"
    NEGATIVE_PART = "NegativePart"
    ABSOLUTE_VALUE = "AbsoluteValue"
    POSITIVE_PART_ON_SUBINTERVAL = "PositivePartOnSubinterval"
    GIVEN = "Given"


@dataclass
class EigenResult:
    lam: float
    interval: tuple[float, float]
    weight_kind: WeightKind
    residual: float
    bracket: tuple[float, float]
    tol: float
    iterations: int = 0
    residual_history: list = field(default_factory=list, repr=False)
    weight: Optional[Weight] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "interval": list(self.interval),
            "weight_kind": self.weight_kind.value,
            "residual": self.residual,
            "bracket": list(self.bracket),
            "tol": self.tol,
            "iterations": self.iterations,
        }


def _breakpoints(w: Weight, alpha: float, beta: float) -> list[float]:
    return [b for b in w.breakpoints if alpha < b < beta]


def check_weight(w: Weight, alpha: float, beta: float, grid_n: int = 4096, neg_tol: float = 1e-12) -> None:
    xs = np.linspace(alpha, beta, grid_n + 1)
    vals = w.values(xs)
    if np.any(vals < -neg_tol):
        raise NegativeWeight(f"weight is negative on [{alpha}, {beta}] (min {vals.min():.3e})")
    if not np.any(vals > 0):
        raise WeightVanishes(f"weight vanishes identically on [{alpha}, {beta}]")


def terminal_angle(w: Weight, lam: float, alpha: float, beta: float, ode_tol: float) -> float:
    """theta(beta; lam) for the Pruefer angle started at theta(alpha) = 0."""
    wf = w.func
    sc = w.scale * lam
    cos, sin = math.cos, math.sin

    def rhs(x, y):
        th = y[0]
        c = cos(th)
        s = sin(th)
        return (c * c + sc * wf(x) * s * s,)

    sol = dopri5(rhs, alpha, (0.0,), beta, ode_tol, _breakpoints(w, alpha, beta))
    return sol.ys[-1][0]


def first_eigenvalue(
    w: Weight,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    kind: WeightKind = WeightKind.GIVEN,
    ode_tol: Optional[float] = None,
) -> EigenResult:
    """Smallest lam > 0 with a Dirichlet solution of phi'' + lam w phi = 0 on [alpha, beta].

    ``tol`` is relative: the returned bracket satisfies hi - lo <= tol * hi.
    """
    alpha = 0.0 if alpha is None else float(alpha)
    beta = w.domain_length if beta is None else float(beta)
    if not beta > alpha:
        raise ValueError("need alpha < beta")
    if not tol > 0:
        raise ValueError("tol must be positive")
    check_weight(w, alpha, beta)
    if ode_tol is None:
        ode_tol = max(1e-13, min(1e-10, 1e-2 * tol))

    def theta(lam):
        return terminal_angle(w, lam, alpha, beta, ode_tol)

    lam = 1.0
    th = theta(lam)
    iterations = 1
    if th >= math.pi:
        hi, th_hi = lam, th
        lo = lam / 2
        th_lo = theta(lo)
        iterations += 1
        while th_lo >= math.pi:
            hi, th_hi = lo, th_lo
            lo /= 2
            if lo < 1e-300:
                raise BracketOverflow("eigenvalue below representable range")
            th_lo = theta(lo)
            iterations += 1
    else:
        lo, th_lo = lam, th
        hi = 2.0
        th_hi = theta(hi)
        iterations += 1
        while th_hi < math.pi:
            lo, th_lo = hi, th_hi
            hi *= 2
            if hi > LAMBDA_CEILING:
                raise BracketOverflow(f"theta(beta) < pi up to lambda = {LAMBDA_CEILING:g}")
            th_hi = theta(hi)
            iterations += 1

    best = min(abs(th_lo - math.pi), abs(th_hi - math.pi))
    history = [best]
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        th_mid = theta(mid)
        iterations += 1
        if th_mid >= math.pi:
            hi = mid
        else:
            lo = mid
        best = min(best, abs(th_mid - math.pi))
        history.append(best)
    lam = 0.5 * (lo + hi)
    residual = abs(theta(lam) - math.pi)
    iterations += 1
    history.append(min(best, residual))
    return EigenResult(lam, (alpha, beta), kind, residual, (lo, hi), tol, iterations, history, w)


def eigenfunction(result: EigenResult, n_samples: int = 401, ode_tol: float = 1e-12) -> SolutionProfile:
    """Eigenfunction with phi(alpha) = 0, phi'(alpha) = 1, rescaled to sup-norm 1."""
    w = result.weight
    if w is None:
        raise ValueError("EigenResult carries no weight")
    alpha, beta = result.interval
    wf = w.func
    sc = w.scale * result.lam

    def rhs(x, y):
        return (y[1], -sc * wf(x) * y[0])

    sol = dopri5(rhs, alpha, (0.0, 1.0), beta, ode_tol, _breakpoints(w, alpha, beta))
    xs = np.linspace(alpha, beta, n_samples)
    uv = sol.evaluate_many(xs)
    peak = np.max(np.abs(uv[:, 0]))
    phi = uv[:, 0] / peak
    dphi = uv[:, 1] / peak
    return SolutionProfile(
        xs,
        phi,
        dphi,
        initial_slope=1.0 / peak,
        boundary_residual=abs(phi[-1]),
        interior_positivity=float(phi[1:-1].min()),
        dense=lambda q: sol.evaluate_many(q) / peak,
    )
