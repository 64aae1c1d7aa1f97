"""Weights, nonlinearities and the problem descriptor u'' + a(x) g(u) = 0, u(0) = u(L) = 0."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

ScalarFn = Callable[[float], float]
ArrayFn = Callable[[np.ndarray], np.ndarray]

MAX_INTERVALS = 64
DEFAULT_SIGN_TOL = 1e-12
S_MAX = 1e6


class PartitionError(ValueError):
    pass


class NoNonNegativeRegion(PartitionError):
    """The weight is strictly negative (beyond the sign tolerance) on the whole grid."""


class TooManyIntervals(PartitionError):
    pass


class InconclusiveSign(ValueError):
    """g vanishes on every sample near zero; the near-zero class has to be declared."""


class NearZeroClass(str, enum.Enum):
    NON_NEGATIVE = "NonNegative"
    NON_POSITIVE = "NonPositive"
    SIGN_CHANGING = "SignChanging"


class DescriptorSource(str, enum.Enum):
    USER_DECLARED = "UserDeclared"
    GRID_ESTIMATED = "GridEstimated"


def _vectorize(func: ScalarFn) -> ArrayFn:
    def vfunc(xs):
        xs = np.asarray(xs, dtype=float)
        return np.fromiter((func(float(x)) for x in xs.ravel()), float, xs.size).reshape(xs.shape)

    return vfunc


@dataclass(frozen=True)
class SignPartition:
    intervals: tuple[tuple[float, float], ...]
    tolerance: float = 0.0

    def __post_init__(self):
        if not self.intervals:
            raise PartitionError("a sign partition needs at least one interval")
        prev_end = -math.inf
        for lo, hi in self.intervals:
            if not lo < hi:
                raise PartitionError(f"degenerate interval [{lo}, {hi}]")
            if not lo > prev_end:
                raise PartitionError("intervals must be ordered and pairwise disjoint")
            prev_end = hi

    @property
    def m(self) -> int:
        return len(self.intervals)

    def endpoints(self) -> list[float]:
        return [p for iv in self.intervals for p in iv]

    def contains(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)


@dataclass(frozen=True)
class Weight:
    """Coefficient a(x) on [0, L], evaluated as ``scale * func(x)``.

    ``func`` must accept a float. ``vfunc`` is an optional numpy version used
    for grid work; it is derived from ``func`` when omitted. ``kinks`` lists
    abscissae where a(x) is not smooth (table nodes, for instance); together
    with the partition endpoints they become forced mesh points of the
    integrator.
    """

    domain_length: float
    func: ScalarFn
    vfunc: Optional[ArrayFn] = None
    partition: Optional[SignPartition] = None
    scale: float = 1.0
    kinks: tuple[float, ...] = ()
    name: str = "weight"

    def __post_init__(self):
        if not self.domain_length > 0:
            raise ValueError("domain_length must be positive")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.vfunc is None:
            object.__setattr__(self, "vfunc", _vectorize(self.func))

    def __call__(self, x: float) -> float:
        return self.scale * self.func(x)

    def values(self, xs) -> np.ndarray:
        return self.scale * np.asarray(self.vfunc(np.asarray(xs, dtype=float)), dtype=float)

    def scaled(self, factor: float) -> "Weight":
        return replace(self, scale=self.scale * factor, name=f"{factor:g}*{self.name}")

    @cached_property
    def sign_partition(self) -> SignPartition:
        """Declared partition if any, otherwise the auto-detected one."""
        if self.partition is not None:
            return self.partition
        return detect_sign_partition(self)

    @cached_property
    def breakpoints(self) -> tuple[float, ...]:
        pts = set(self.kinks)
        try:
            pts.update(self.sign_partition.endpoints())
        except PartitionError:
            pass
        L = self.domain_length
        return tuple(sorted(p for p in pts if 0.0 < p < L))

    def grid(self, n: int = 4096) -> np.ndarray:
        return np.linspace(0.0, self.domain_length, n + 1)


@dataclass(frozen=True)
class Nonlinearity:
    """g on [0, inf) together with its near-zero sign class and growth descriptors.

    Infinite descriptors are stored as ``math.inf`` / ``-math.inf``.
    Descriptors left as ``None`` are filled by :func:`with_estimated_descriptors`.
    """

    func: ScalarFn
    vfunc: Optional[ArrayFn] = None
    near_zero_class: Optional[NearZeroClass] = None
    delta: Optional[float] = None
    g0_inf: Optional[float] = None
    g0_sup: Optional[float] = None
    g_infty: Optional[float] = None
    descriptor_source: DescriptorSource = DescriptorSource.USER_DECLARED
    name: str = "g"

    def __post_init__(self):
        if self.vfunc is None:
            object.__setattr__(self, "vfunc", _vectorize(self.func))
        if (
            self.g0_inf is not None
            and self.g0_sup is not None
            and math.isfinite(self.g0_inf)
            and math.isfinite(self.g0_sup)
            and self.g0_inf > self.g0_sup
        ):
            raise ValueError("g0_inf must not exceed g0_sup")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive")

    def __call__(self, s: float) -> float:
        return self.func(s)

    def values(self, ss) -> np.ndarray:
        return np.asarray(self.vfunc(np.asarray(ss, dtype=float)), dtype=float)

    @property
    def descriptors_complete(self) -> bool:
        return None not in (self.g0_inf, self.g0_sup, self.g_infty)


@dataclass(frozen=True)
class ProblemSpec:
    weight: Weight
    nonlinearity: Nonlinearity
    label: str = "problem"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def L(self) -> float:
        return self.weight.domain_length

    def describe(self) -> dict:
        g = self.nonlinearity
        return {
            "label": self.label,
            "L": self.L,
            "weight": self.weight.name,
            "weight_scale": self.weight.scale,
            "nonlinearity": g.name,
            "near_zero_class": g.near_zero_class.value if g.near_zero_class else None,
            "delta": g.delta,
            "g0_inf": g.g0_inf,
            "g0_sup": g.g0_sup,
            "g_infty": g.g_infty,
            "descriptor_source": g.descriptor_source.value,
        }

    def scaled(self, factor: float) -> "ProblemSpec":
        return replace(self, weight=self.weight.scaled(factor))


# -- sign structure of the weight -------------------------------------------


def _bisect_boundary(a: ScalarFn, x_in: float, x_out: float, tau: float, xtol: float) -> float:
    # x_in satisfies a >= -tau, x_out has a < -tau; runs to machine precision (never coarser than xtol)
    while abs(x_out - x_in) > xtol * 1e-6:
        mid = 0.5 * (x_in + x_out)
        if mid in (x_in, x_out):
            break
        if a(mid) < -tau:
            x_out = mid
        else:
            x_in = mid
    return 0.5 * (x_in + x_out)


def detect_sign_partition(weight: Weight, grid_n: int = 4096, tau: float = DEFAULT_SIGN_TOL) -> SignPartition:
    """Coarsest family of intervals with a >= -tau on them and a <= tau off them."""
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    L = weight.domain_length
    xs = np.linspace(0.0, L, grid_n + 1)
    vals = weight.values(xs)
    neg = vals < -tau
    pos = vals > tau

    runs = []
    i = 0
    n = len(xs)
    while i < n:
        if neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and not neg[j + 1]:
            j += 1
        runs.append((i, j))
        i = j + 1

    kept = [r for r in runs if pos[r[0] : r[1] + 1].any()]
    if not kept:
        # a vanishes (within tau) on these runs; keep the nondegenerate ones so
        # that the failure surfaces later as a vanishing weight on I_i
        kept = [r for r in runs if r[1] > r[0]]
    if not kept:
        raise NoNonNegativeRegion("a(x) < -tau on the whole verification grid")
    if len(kept) > MAX_INTERVALS:
        raise TooManyIntervals(f"{len(kept)} nonnegativity intervals detected (cap {MAX_INTERVALS})")

    xtol = L / grid_n**2
    intervals = []
    for i, j in kept:
        lo = 0.0 if i == 0 else _bisect_boundary(weight, xs[i], xs[i - 1], tau, xtol)
        hi = L if j == n - 1 else _bisect_boundary(weight, xs[j], xs[j + 1], tau, xtol)
        intervals.append((float(lo), float(hi)))
    return SignPartition(tuple(intervals), tau)


def validate_partition(weight: Weight, partition: SignPartition, grid_n: int = 4096, tau: float = 1e-9) -> list[str]:
    """Grid check of a declared partition; returns the list of violations (empty if fine)."""
    L = weight.domain_length
    problems = []
    for lo, hi in partition.intervals:
        if lo < 0 or hi > L:
            problems.append(f"interval [{lo}, {hi}] leaves [0, {L}]")
    xs = np.linspace(0.0, L, grid_n + 1)
    vals = weight.values(xs)
    inside = np.zeros(xs.shape, dtype=bool)
    for lo, hi in partition.intervals:
        inside |= (xs >= lo) & (xs <= hi)
    bad_in = inside & (vals < -tau)
    bad_out = ~inside & (vals > tau)
    if bad_in.any():
        problems.append(f"a < 0 inside the partition at x = {xs[bad_in][0]:.6g}")
    if bad_out.any():
        problems.append(f"a > 0 outside the partition at x = {xs[bad_out][0]:.6g}")
    return problems


def positive_part(weight: Weight) -> Weight:
    f = weight.func
    vf = weight.vfunc
    return replace(
        weight,
        func=lambda x: max(f(x), 0.0),
        vfunc=lambda xs: np.maximum(vf(xs), 0.0),
        name=f"({weight.name})+",
    )


def negative_part(weight: Weight) -> Weight:
    f = weight.func
    vf = weight.vfunc
    return replace(
        weight,
        func=lambda x: max(-f(x), 0.0),
        vfunc=lambda xs: np.maximum(-np.asarray(vf(xs)), 0.0),
        name=f"({weight.name})-",
    )


def absolute_value(weight: Weight) -> Weight:
    f = weight.func
    vf = weight.vfunc
    return replace(
        weight,
        func=lambda x: abs(f(x)),
        vfunc=lambda xs: np.abs(vf(xs)),
        name=f"|{weight.name}|",
    )


# -- nonlinearity descriptors -------------------------------------------------


@dataclass(frozen=True)
class NearZeroReport:
    kind: NearZeroClass
    delta: float
    grid_n: int
    positive_witness: Optional[float] = None
    negative_witness: Optional[float] = None


def near_zero_grid(delta: float, grid_n: int) -> np.ndarray:
    # points delta * 10**(-6 j / grid_n), j = 0..grid_n-1; nested when grid_n doubles
    j = np.arange(grid_n)
    return np.sort(delta * 10.0 ** (-6.0 * j / grid_n))


def classify_near_zero(g: Nonlinearity | ScalarFn, delta: float, grid_n: int = 256) -> NearZeroReport:
    if not delta > 0:
        raise ValueError("delta must be positive")
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    ss = near_zero_grid(delta, grid_n)
    vals = g.values(ss) if isinstance(g, Nonlinearity) else np.array([g(float(s)) for s in ss])
    pos = np.flatnonzero(vals > 0)
    neg = np.flatnonzero(vals < 0)
    pw = float(ss[pos[0]]) if pos.size else None
    nw = float(ss[neg[0]]) if neg.size else None
    if pos.size and neg.size:
        kind = NearZeroClass.SIGN_CHANGING
    elif pos.size:
        kind = NearZeroClass.NON_NEGATIVE
    elif neg.size:
        kind = NearZeroClass.NON_POSITIVE
    else:
        raise InconclusiveSign(f"g vanishes on all {grid_n} samples of (0, {delta}]")
    return NearZeroReport(kind, delta, grid_n, pw, nw)


def default_delta(g: Nonlinearity | ScalarFn) -> float:
    """min(1, first amplitude where |g| exceeds 1e-3 of its max on a log grid of [1e-9, 1])."""
    ss = np.geomspace(1e-9, 1.0, 2001)
    vals = np.abs(g.values(ss) if isinstance(g, Nonlinearity) else np.array([g(float(s)) for s in ss]))
    top = vals.max()
    if not top > 0:
        return 1.0
    idx = np.flatnonzero(vals > 1e-3 * top)
    return float(min(1.0, ss[idx[0]]))


@dataclass(frozen=True)
class Asymptotics:
    g0_inf: float
    g0_sup: float
    g_infty: float
    source: DescriptorSource = DescriptorSource.GRID_ESTIMATED


def _ratios(g: Nonlinearity | ScalarFn, ss: np.ndarray) -> np.ndarray:
    out = np.empty(ss.size)
    for k, s in enumerate(ss):
        try:
            out[k] = g(float(s)) / s
        except OverflowError:
            out[k] = math.inf
    return out


def estimate_asymptotics(g: Nonlinearity | ScalarFn, delta: float, s_max: float = S_MAX) -> Asymptotics:
    """Sampled stand-ins for liminf/limsup of g(s)/s at 0+ and liminf at infinity.

    Near zero the ratio is sampled on [delta*1e-8, delta*1e-4]; at infinity
    on the top decade [s_max/10, s_max]. The values are advisory only.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    near = _ratios(g, np.geomspace(delta * 1e-8, delta * 1e-4, 401))
    far = _ratios(g, np.geomspace(s_max / 10.0, s_max, 401))
    return Asymptotics(float(near.min()), float(near.max()), float(far.min()))


def with_estimated_descriptors(g: Nonlinearity) -> Nonlinearity:
    """Fill in any missing delta / class / limits; marks the result GridEstimated if a limit was estimated."""
    delta = g.delta if g.delta is not None else default_delta(g)
    kind = g.near_zero_class
    if kind is None:
        kind = classify_near_zero(g, delta).kind
    updates = dict(delta=delta, near_zero_class=kind)
    if not g.descriptors_complete:
        est = estimate_asymptotics(g, delta)
        updates.update(
            g0_inf=g.g0_inf if g.g0_inf is not None else est.g0_inf,
            g0_sup=g.g0_sup if g.g0_sup is not None else est.g0_sup,
            g_infty=g.g_infty if g.g_infty is not None else est.g_infty,
            descriptor_source=DescriptorSource.GRID_ESTIMATED,
        )
    return replace(g, **updates)


def check_g_basic(g: Nonlinearity, scan: Sequence[float] | None = None) -> list[str]:
    """(H2) on a scan grid: g(0) = 0 and g not identically zero."""
    problems = []
    g0 = g(0.0)
    if g0 != 0.0:
        problems.append(f"g(0) = {g0!r} != 0")
    ss = np.geomspace(1e-8, 1e3, 1101) if scan is None else np.asarray(scan, dtype=float)
    if not np.any(g.values(ss) != 0.0):
        problems.append("g vanishes on the whole scan grid")
    return problems
