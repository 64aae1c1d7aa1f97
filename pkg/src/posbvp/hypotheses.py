"""Grid-and-eigenvalue verification of the four standing hypotheses.

(H1) sign partition of the weight, (H2) g(0) = 0 and g not identically 0,
(H3) growth of g(s)/s at 0 against the first eigenvalue of a+, a- or |a|
depending on the sign of g near 0, (H4) liminf g(s)/s at infinity against
the first eigenvalue of a+ on each nonnegativity interval.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .eigen import DEFAULT_TOL, EigenResult, NegativeWeight, WeightKind, WeightVanishes, first_eigenvalue
from .problem import (
    DescriptorSource,
    InconclusiveSign,
    NearZeroClass,
    PartitionError,
    ProblemSpec,
    SignPartition,
    absolute_value,
    check_g_basic,
    classify_near_zero,
    default_delta,
    detect_sign_partition,
    estimate_asymptotics,
    negative_part,
    positive_part,
    validate_partition,
)

PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"
PASS_ADVISORY = "pass (advisory)"

MARGIN_FACTOR = 10.0


def _judge(margin: float, lam: float, tol: float) -> str:
    """Strict inequality 'margin > 0' judged outside a band of 10 * tol * lam."""
    band = MARGIN_FACTOR * tol * abs(lam)
    if margin > band:
        return PASS
    if margin < -band:
        return FAIL
    return INDETERMINATE


def _combine(verdicts: Sequence[str]) -> str:
    if all(v == PASS for v in verdicts):
        return PASS
    if any(v == FAIL for v in verdicts):
        return FAIL
    return INDETERMINATE


@dataclass
class H1Result:
    verdict: str
    intervals: list
    source: str
    problems: list = field(default_factory=list)

    @property
    def partition(self) -> Optional[SignPartition]:
        return SignPartition(tuple(tuple(iv) for iv in self.intervals)) if self.intervals else None


@dataclass
class H2Result:
    verdict: str
    problems: list = field(default_factory=list)


@dataclass
class H3Result:
    verdict: str
    case: Optional[str]
    delta: Optional[float]
    threshold_name: Optional[str] = None
    threshold: Optional[float] = None
    descriptor: dict = field(default_factory=dict)
    margin: Optional[float] = None
    eigen: Optional[dict] = None
    explanation: str = ""


@dataclass
class H4Item:
    interval: list
    verdict: str
    lam: Optional[float] = None
    margin: Optional[float] = None
    eigen: Optional[dict] = None
    explanation: str = ""


@dataclass
class H4Result:
    verdict: str
    g_infty: Optional[float]
    items: list = field(default_factory=list)
    explanation: str = ""


@dataclass
class HypothesisReport:
    h1: H1Result
    h2: H2Result
    h3: H3Result
    h4: H4Result
    overall: str
    warnings: list = field(default_factory=list)
    problem: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _finite_json(
            {
                "problem": self.problem,
                "h1": asdict(self.h1),
                "h2": asdict(self.h2),
                "h3": asdict(self.h3),
                "h4": asdict(self.h4),
                "overall": self.overall,
                "warnings": list(self.warnings),
            }
        )

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    @property
    def passed(self) -> bool:
        return self.overall in (PASS, PASS_ADVISORY)

    def to_text(self) -> str:
        lines = [f"overall: {self.overall}"]
        lines.append(f"(H1) {self.h1.verdict}: m = {len(self.h1.intervals)} ({self.h1.source})")
        for lo, hi in self.h1.intervals:
            lines.append(f"     I = [{lo:.12g}, {hi:.12g}]")
        lines.extend(f"     ! {p}" for p in self.h1.problems)
        lines.append(f"(H2) {self.h2.verdict}")
        lines.extend(f"     ! {p}" for p in self.h2.problems)
        h3 = self.h3
        lines.append(f"(H3) {h3.verdict}: case {h3.case}, delta = {h3.delta}")
        if h3.threshold is not None:
            lines.append(f"     {h3.threshold_name} = {h3.threshold:.12g}, margin = {h3.margin:.6g}")
        if h3.explanation:
            lines.append(f"     {h3.explanation}")
        lines.append(f"(H4) {self.h4.verdict}: g_infty = {self.h4.g_infty}")
        for it in self.h4.items:
            lam = "n/a" if it.lam is None else f"{it.lam:.12g}"
            lines.append(f"     I = [{it.interval[0]:.12g}, {it.interval[1]:.12g}]: lambda_1 = {lam} -> {it.verdict}")
            if it.explanation:
                lines.append(f"       {it.explanation}")
        if self.h4.explanation:
            lines.append(f"     {self.h4.explanation}")
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)


def _finite_json(obj):
    """Replace non-finite floats by the strings 'inf', '-inf', 'nan' (strict JSON)."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _finite_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_json(v) for v in obj]
    return obj


# -- individual hypotheses ----------------------------------------------------


def check_H1(spec: ProblemSpec) -> H1Result:
    w = spec.weight
    if w.partition is not None:
        problems = validate_partition(w, w.partition)
        ivs = [list(iv) for iv in w.partition.intervals]
        return H1Result(FAIL if problems else PASS, ivs, "declared", problems)
    try:
        part = detect_sign_partition(w)
    except PartitionError as exc:
        return H1Result(FAIL, [], "detected", [f"{type(exc).__name__}: {exc}"])
    return H1Result(PASS, [list(iv) for iv in part.intervals], "detected")


def check_H2(spec: ProblemSpec) -> H2Result:
    problems = check_g_basic(spec.nonlinearity)
    return H2Result(FAIL if problems else PASS, problems)


def _descriptors(spec: ProblemSpec, warnings: list):
    """(delta, near-zero class or None, g0_inf, g0_sup, g_infty) with estimation where undeclared."""
    g = spec.nonlinearity
    delta = g.delta if g.delta is not None else default_delta(g)
    kind = g.near_zero_class
    if kind is None:
        try:
            kind = classify_near_zero(g, delta).kind
            warnings.append(f"near-zero class {kind.value} classified on a log grid of (0, {delta:.3g}]")
        except InconclusiveSign as exc:
            warnings.append(str(exc))
            kind = None
    g0_inf, g0_sup, g_inf = g.g0_inf, g.g0_sup, g.g_infty
    estimated = g.descriptor_source is DescriptorSource.GRID_ESTIMATED
    if None in (g0_inf, g0_sup, g_inf):
        est = estimate_asymptotics(g, delta)
        g0_inf = est.g0_inf if g0_inf is None else g0_inf
        g0_sup = est.g0_sup if g0_sup is None else g0_sup
        g_inf = est.g_infty if g_inf is None else g_inf
        estimated = True
    if estimated:
        warnings.append("growth descriptors g0_inf/g0_sup/g_infty are GridEstimated, not exact limits")
    return delta, kind, g0_inf, g0_sup, g_inf


def check_H3(
    spec: ProblemSpec,
    tol: float = DEFAULT_TOL,
    warnings: Optional[list] = None,
    _desc=None,
) -> H3Result:
    warnings = [] if warnings is None else warnings
    delta, kind, g0_inf, g0_sup, _ = _desc if _desc is not None else _descriptors(spec, warnings)
    desc = {"g0_inf": g0_inf, "g0_sup": g0_sup}
    if kind is None:
        return H3Result(
            INDETERMINATE, None, delta, descriptor=desc,
            explanation="g vanishes on every sample near 0; declare near_zero_class",
        )
    w = spec.weight
    if kind is NearZeroClass.NON_NEGATIVE:
        part, wkind, name = positive_part(w), WeightKind.POSITIVE_PART, "lambda0_plus"
    elif kind is NearZeroClass.NON_POSITIVE:
        part, wkind, name = negative_part(w), WeightKind.NEGATIVE_PART, "lambda0_minus"
    else:
        part, wkind, name = absolute_value(w), WeightKind.ABSOLUTE_VALUE, "lambda0"
    try:
        er = first_eigenvalue(part, 0.0, spec.L, tol, wkind)
    except WeightVanishes as exc:
        which = {"lambda0_plus": "a+", "lambda0_minus": "a-", "lambda0": "a"}[name]
        return H3Result(FAIL, kind.value, delta, name, None, desc, None, None, f"{which} vanishes identically: {exc}")
    lam = er.lam
    if kind is NearZeroClass.NON_NEGATIVE:
        margin = lam - g0_sup
        expl = "requires g0_sup < lambda0_plus"
    elif kind is NearZeroClass.NON_POSITIVE:
        margin = g0_inf + lam
        expl = "requires g0_inf > -lambda0_minus"
    else:
        margin = min(g0_inf + lam, lam - g0_sup)
        expl = "requires -lambda0 < g0_inf <= g0_sup < lambda0"
    verdict = _judge(margin, lam, tol)
    return H3Result(verdict, kind.value, delta, name, lam, desc, margin, er.to_dict(), expl)


def check_H4(
    spec: ProblemSpec,
    tol: float = DEFAULT_TOL,
    warnings: Optional[list] = None,
    partition: Optional[SignPartition] = None,
    g_infty: Optional[float] = None,
) -> H4Result:
    warnings = [] if warnings is None else warnings
    if g_infty is None:
        g_infty = _descriptors(spec, warnings)[4]
    if partition is None:
        try:
            partition = spec.weight.sign_partition
        except PartitionError as exc:
            return H4Result(FAIL, g_infty, [], f"no nonnegativity interval: {exc}")
    a_plus = positive_part(spec.weight)
    items = []
    for lo, hi in partition.intervals:
        try:
            er: EigenResult = first_eigenvalue(a_plus, lo, hi, tol, WeightKind.POSITIVE_PART_ON_SUBINTERVAL)
        except (WeightVanishes, NegativeWeight) as exc:
            items.append(H4Item([lo, hi], FAIL, explanation=f"a vanishes identically on I: {exc}"))
            continue
        if math.isinf(g_infty) and g_infty > 0:
            verdict, margin = PASS, math.inf
        else:
            margin = g_infty - er.lam
            verdict = _judge(margin, er.lam, tol)
        items.append(H4Item([lo, hi], verdict, er.lam, margin, er.to_dict()))
    return H4Result(_combine([it.verdict for it in items]) if items else FAIL, g_infty, items)


def check_all(spec: ProblemSpec, tol: float = DEFAULT_TOL) -> HypothesisReport:
    warnings: list = []
    h1 = check_H1(spec)
    h2 = check_H2(spec)
    desc = _descriptors(spec, warnings)
    h3 = check_H3(spec, tol, warnings, desc)
    if h1.verdict == PASS and h1.intervals:
        h4 = check_H4(spec, tol, warnings, h1.partition, desc[4])
    else:
        h4 = H4Result(FAIL, desc[4], [], "no nonnegativity interval from (H1)")
    overall = _combine([h1.verdict, h2.verdict, h3.verdict, h4.verdict])
    if overall == PASS and any("GridEstimated" in w for w in warnings):
        overall = PASS_ADVISORY
    return HypothesisReport(h1, h2, h3, h4, overall, warnings, spec.describe())


# -- weight scaling -----------------------------------------------------------------


@dataclass
class LambdaScan:
    lambda_star: float
    eigenvalues: list
    g_infty: float
    grid: list  # dicts: lambda_w, verdict (direct check_H4), predicted
    smallest_passing: Optional[float]

    def to_dict(self) -> dict:
        return _finite_json(asdict(self))


def lambda_threshold_scan(spec: ProblemSpec, lam_grid: Sequence[float], tol: float = DEFAULT_TOL) -> LambdaScan:
    """Threshold lambda* = max_i lambda_1^i(a+) / g_infty for u'' + lam_w a(x) g(u) = 0.

    Each grid value is also checked directly with check_H4 on the scaled
    weight, so the scaling law and the direct verdicts can be compared.
    """
    warnings: list = []
    g_inf = _descriptors(spec, warnings)[4]
    if not (math.isfinite(g_inf) and g_inf > 0):
        raise ValueError("lambda_threshold_scan needs a finite positive g_infty")
    base = check_H4(spec, tol, warnings, g_infty=g_inf)
    lams = [it.lam for it in base.items]
    if not lams or any(lam is None for lam in lams):
        raise ValueError("a first eigenvalue on some nonnegativity interval does not exist")
    lam_star = max(lams) / g_inf
    grid = []
    smallest = None
    for lw in sorted(float(x) for x in lam_grid):
        direct = check_H4(spec.scaled(lw), tol, [], g_infty=g_inf)
        grid.append(
            {
                "lambda_w": lw,
                "verdict": direct.verdict,
                "predicted": PASS if lw > lam_star else FAIL,
                "eigenvalues": [it.lam for it in direct.items],
            }
        )
        if direct.verdict == PASS and smallest is None:
            smallest = lw
    return LambdaScan(lam_star, lams, g_inf, grid, smallest)
