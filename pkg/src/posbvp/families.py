"""Built-in weight and nonlinearity families plus table-backed evaluators.

Every family returns a scalar ``math``-based evaluator (used by the
integrators) and a matching numpy evaluator (used on grids).
"""

from __future__ import annotations

import ast
import bisect
import csv
import math
import operator
from dataclasses import replace
from pathlib import Path
from typing import Callable

import numpy as np

from .problem import DescriptorSource, NearZeroClass, Nonlinearity, ProblemSpec, SignPartition, Weight

_CONSTANTS = {"pi": math.pi, "e": math.e, "inf": math.inf}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal with optional arithmetic, ``pi``, ``e`` and ``inf``.

    >>> parse_number("2*pi**2")
    19.739208802178716
    """

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = ev(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"not a number: {text!r}")

    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"not a number: {text!r}") from exc
    return float(ev(tree))


# -- weights ------------------------------------------------------------------


def sin_weight(L: float, k: float, amplitude: float = 1.0) -> Weight:
    """a(x) = amplitude * sin(k pi x)."""
    w = k * math.pi
    return Weight(
        L,
        lambda x: amplitude * math.sin(w * x),
        lambda xs: amplitude * np.sin(w * xs),
        name=f"{amplitude:g}*sin({k:g}*pi*x)",
    )


def cos_weight(L: float, k: float, amplitude: float = 1.0) -> Weight:
    """a(x) = amplitude * cos(k pi x)."""
    w = k * math.pi
    return Weight(
        L,
        lambda x: amplitude * math.cos(w * x),
        lambda xs: amplitude * np.cos(w * xs),
        name=f"{amplitude:g}*cos({k:g}*pi*x)",
    )


def constant_weight(L: float, value: float = 1.0) -> Weight:
    return Weight(L, lambda x: value, lambda xs: np.full(np.shape(xs), value, dtype=float), name=f"{value:g}")


def linear_weight(L: float, slope: float, intercept: float = 0.0) -> Weight:
    return Weight(
        L,
        lambda x: slope * x + intercept,
        lambda xs: slope * np.asarray(xs) + intercept,
        name=f"{slope:g}*x+{intercept:g}",
    )


def power_weight(L: float, coef: float, power: float) -> Weight:
    """a(x) = coef * x**power (for x > 0)."""
    return Weight(
        L,
        lambda x: coef * x**power,
        lambda xs: coef * np.asarray(xs, dtype=float) ** power,
        name=f"{coef:g}*x^{power:g}",
    )


def read_table(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV (header optional) with strictly increasing abscissae."""
    xs, ys = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ValueError(f"{path}:{lineno}: non-numeric entry") from None
            xs.append(x)
            ys.append(y)
    xs_a, ys_a = np.array(xs), np.array(ys)
    if xs_a.size < 2:
        raise ValueError(f"{path}: need at least two rows")
    if np.any(np.diff(xs_a) <= 0):
        raise ValueError(f"{path}: abscissae must be strictly increasing")
    return xs_a, ys_a


def _interp_scalar(xs: list, ys: list) -> Callable[[float], float]:
    n = len(xs)

    def f(x: float) -> float:
        if x <= xs[0]:
            return ys[0]
        if x >= xs[-1]:
            return ys[-1]
        k = bisect.bisect_right(xs, x) - 1
        if k >= n - 1:
            return ys[-1]
        t = (x - xs[k]) / (xs[k + 1] - xs[k])
        return ys[k] + t * (ys[k + 1] - ys[k])

    return f


def table_weight(L: float, xs: np.ndarray, ys: np.ndarray, name: str = "table") -> Weight:
    if xs[0] > 0 or xs[-1] < L:
        raise ValueError("weight table must cover [0, L]")
    xl, yl = xs.tolist(), ys.tolist()
    return Weight(
        L,
        _interp_scalar(xl, yl),
        lambda q: np.interp(q, xs, ys),
        kinks=tuple(float(x) for x in xs if 0 < x < L),
        name=name,
    )


def with_partition(weight: Weight, intervals) -> Weight:
    return replace(weight, partition=SignPartition(tuple((float(a), float(b)) for a, b in intervals)))


# -- nonlinearities -------------------------------------------------------------


def power_g(coef: float = 1.0, power: float = 3.0) -> Nonlinearity:
    """g(s) = coef * s**power."""
    return Nonlinearity(
        lambda s: coef * s**power,
        lambda ss: coef * np.asarray(ss, dtype=float) ** power,
        name=f"{coef:g}*s^{power:g}",
    )


def polynomial_g(terms) -> Nonlinearity:
    """g(s) = sum of coef * s**power over ``terms`` = [(coef, power), ...]; powers must be positive."""
    terms = [(float(c), float(p)) for c, p in terms]
    if any(p <= 0 for _, p in terms):
        raise ValueError("polynomial powers must be positive so that g(0) = 0")

    def f(s):
        return sum(c * s**p for c, p in terms)

    def vf(ss):
        ss = np.asarray(ss, dtype=float)
        out = np.zeros_like(ss)
        for c, p in terms:
            out = out + c * ss**p
        return out

    label = " + ".join(f"{c:g}*s^{p:g}" for c, p in terms)
    return Nonlinearity(f, vf, name=label)


def arctan_g(k: float = 1.0) -> Nonlinearity:
    """g(s) = k * s * arctan(s)."""
    return Nonlinearity(
        lambda s: k * s * math.atan(s),
        lambda ss: k * np.asarray(ss, dtype=float) * np.arctan(ss),
        name=f"{k:g}*s*atan(s)",
    )


def sin_inverse_g(p: float = 3.0, q: float = 2.0, k: float = 1.0) -> Nonlinearity:
    """g(s) = s**p + k * s**q * sin(1/s), continuously extended by g(0) = 0 (q > 0)."""
    if q <= 0 or p <= 0:
        raise ValueError("need p, q > 0")

    def f(s):
        if s == 0.0:
            return 0.0
        return s**p + k * s**q * math.sin(1.0 / s)

    def vf(ss):
        ss = np.asarray(ss, dtype=float)
        out = np.zeros_like(ss)
        nz = ss != 0
        s = ss[nz]
        out[nz] = s**p + k * s**q * np.sin(1.0 / s)
        return out

    return Nonlinearity(f, vf, name=f"s^{p:g}+{k:g}*s^{q:g}*sin(1/s)")


def min_g(*parts: Nonlinearity) -> Nonlinearity:
    """Pointwise minimum of several nonlinearities."""
    fs = [p.func for p in parts]
    vfs = [p.vfunc for p in parts]

    def f(s):
        return min(fn(s) for fn in fs)

    def vf(ss):
        return np.minimum.reduce([np.asarray(v(ss), dtype=float) for v in vfs])

    return Nonlinearity(f, vf, name="min{" + ", ".join(p.name for p in parts) + "}")


def table_g(ss: np.ndarray, gs: np.ndarray, name: str = "table") -> Nonlinearity:
    """Linear interpolation of a table starting at s = 0; linear extrapolation beyond the last row."""
    if ss[0] != 0.0:
        raise ValueError("nonlinearity table must start at s = 0")
    sl, gl = ss.tolist(), gs.tolist()
    inner = _interp_scalar(sl, gl)
    slope = (gl[-1] - gl[-2]) / (sl[-1] - sl[-2])
    s_end, g_end = sl[-1], gl[-1]

    def f(s):
        if s > s_end:
            return g_end + slope * (s - s_end)
        return inner(s)

    def vf(q):
        q = np.asarray(q, dtype=float)
        return np.where(q > s_end, g_end + slope * (q - s_end), np.interp(q, ss, gs))

    return Nonlinearity(f, vf, name=name)


# -- the two worked examples ---------------------------------------------------------


def fig1_problem():
    """a(x) = sin(3 pi x), g(s) = min{20 s^(6/5) - 6 s^3 + s^4, 400 s arctan s} on [0, 1]."""
    g = min_g(polynomial_g([(20, 1.2), (-6, 3), (1, 4)]), arctan_g(400.0))
    g = replace(
        g,
        near_zero_class=NearZeroClass.NON_NEGATIVE,
        g0_inf=0.0,
        g0_sup=0.0,
        g_infty=200 * math.pi,
        descriptor_source=DescriptorSource.USER_DECLARED,
    )
    return ProblemSpec(sin_weight(1.0, 3), g, label="fig1")


def fig2_problem():
    """a(x) = sin(7 pi x), g(s) = s^3 + s^2 sin(1/s) on [0, 1]."""
    g = replace(
        sin_inverse_g(3, 2, 1),
        near_zero_class=NearZeroClass.SIGN_CHANGING,
        g0_inf=0.0,
        g0_sup=0.0,
        g_infty=math.inf,
        descriptor_source=DescriptorSource.USER_DECLARED,
    )
    return ProblemSpec(sin_weight(1.0, 7), g, label="fig2")
