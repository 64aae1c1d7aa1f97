"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line (also collected in the terminal summary)."""

import math
import time

import numpy as np
import pytest

from posbvp import families as fam
from posbvp.eigen import first_eigenvalue
from posbvp.green import apply_operator
from posbvp.hypotheses import PASS, check_all, check_H4, lambda_threshold_scan
from posbvp.problem import DescriptorSource, NearZeroClass, ProblemSpec, absolute_value, positive_part
from posbvp.radial import RadialProblem, h, h_inverse, solve_radial
from posbvp.shooting import find_positive_solutions, sample_poincare, small_amplitude_scan

from conftest import ACCEPTANCE_LINES
from oracles import PI2, fd_first_eigenvalue


def verdict(n, title, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_1_eigenvalue_oracle():
    t0 = time.perf_counter()
    a = first_eigenvalue(fam.constant_weight(1.0, 1.0), 0.0, 1.0)
    t1 = time.perf_counter()
    b = first_eigenvalue(fam.constant_weight(math.pi, 1.0), 0.0, math.pi)
    t2 = time.perf_counter()
    ea = abs(a.lam - PI2) / PI2
    eb = abs(b.lam - 1.0)
    ok = ea <= 1e-8 and eb <= 1e-8 and t1 - t0 < 0.1 and t2 - t1 < 0.1
    verdict(1, "eigenvalue oracle", ok, f"rel err {ea:.1e}, {eb:.1e}; {t1 - t0:.3f} s, {t2 - t1:.3f} s")


def test_criterion_2_fd_cross_validation():
    sin3 = lambda x: np.maximum(np.sin(3 * np.pi * x), 0.0)
    abs7 = lambda x: np.abs(np.sin(7 * np.pi * x))
    cases = [
        (positive_part(fam.sin_weight(1.0, 3)), sin3, 0.0, 1.0),
        (positive_part(fam.sin_weight(1.0, 3)), sin3, 0.0, 1 / 3),
        (absolute_value(fam.sin_weight(1.0, 7)), abs7, 0.0, 1.0),
    ]
    worst = 0.0
    parts = []
    for w, wf, a, b in cases:
        lam = first_eigenvalue(w, a, b, 1e-9).lam
        ref, _, _ = fd_first_eigenvalue(wf, a, b, 4096)
        rel = abs(lam - ref) / ref
        worst = max(worst, rel)
        parts.append(f"{lam:.6g} vs {ref:.6g}")
    verdict(2, "Pruefer vs finite differences (4 significant digits)", worst <= 5e-5, f"{'; '.join(parts)}; worst rel {worst:.1e}")


def _figure(n, spec, c_max, need_negative_axis):
    t0 = time.perf_counter()
    rep = find_positive_solutions(spec, 0.0, c_max)
    elapsed = time.perf_counter() - t0
    pts = rep.table
    changes = [
        (p, q)
        for p, q in zip(pts, pts[1:])
        if not (p.escaped or q.escaped) and p.c > 0 and p.uL * q.uL < 0
    ]
    if need_negative_axis:
        changes = [(p, q) for p, q in changes if p.vL < 0 and q.vL < 0]
    good = [
        s
        for s in rep.solutions
        if s.boundary_residual <= 1e-9 and s.interior_positivity > 0 and s.operator_residual <= 1e-6
    ]
    ok = bool(changes) and bool(good) and elapsed < 30
    s = good[0] if good else (rep.solutions[0] if rep.solutions else None)
    detail = f"{len(changes)} sign change(s), {len(good)} accepted, {elapsed:.1f} s"
    if s is not None:
        detail += (
            f"; c* = {s.initial_slope:.10g}, |u(1)| = {s.boundary_residual:.1e}, "
            f"min u = {s.interior_positivity:.2e}, residual = {s.operator_residual:.1e}"
        )
    return ok, detail


def test_criterion_3_figure1(fig1):
    ok, detail = _figure(3, fig1, 12.0, True)
    verdict(3, "fig1 example: positive solution", ok, detail)


def test_criterion_4_figure2(fig2):
    ok, detail = _figure(4, fig2, 16.0, False)
    verdict(4, "fig2 example: positive solution", ok, detail)


def test_criterion_5_hypothesis_verdicts(fig1, fig2):
    r1 = check_all(fig1)
    r2 = check_all(fig2)
    g = fam.polynomial_g([(2 * PI2, 1.0), (1.0, 3.0)])
    from dataclasses import replace

    g = replace(
        g,
        near_zero_class=NearZeroClass.NON_NEGATIVE,
        g0_inf=2 * PI2,
        g0_sup=2 * PI2,
        g_infty=math.inf,
        descriptor_source=DescriptorSource.USER_DECLARED,
    )
    r3 = check_all(ProblemSpec(fam.constant_weight(1.0, 1.0), g))
    ok = (
        r1.overall == PASS
        and r1.h3.case == "NonNegative"
        and r2.overall == PASS
        and r2.h3.case == "SignChanging"
        and r3.h3.verdict == "fail"
        and r3.h3.margin is not None
        and r3.h3.margin < 0
    )
    verdict(
        5,
        "hypothesis verdicts",
        ok,
        f"fig1 {r1.overall} via {r1.h3.case}; fig2 {r2.overall} via {r2.h3.case}; "
        f"violation (H3) {r3.h3.verdict}, margin {r3.h3.margin:.6g}",
    )


def test_criterion_6_small_amplitude(fig1):
    rep = small_amplitude_scan(fig1, 1e-3, np.geomspace(1e-8, 1e-2, 61))
    verdict(
        6,
        "no small positive solution",
        rep.ok and not rep.accepted_small,
        f"{rep.n_candidates} trajectories with sup <= 1e-3, min |u(1)|/sup = {rep.min_relative_miss:.3g}",
    )


def test_criterion_7_radial():
    rp = RadialProblem(3, 1.0, 2.0, fam.constant_weight(2.0, 1.0), fam.power_g(1.0, 3.0))
    rep = solve_radial(rp, 0.0, 200.0)
    rs = rep.solutions[0]
    w1, w2 = rs.boundary_values
    res = [rs.radial_residual(n) for n in (32, 64, 128)]
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    rng = np.random.default_rng(7)
    worst = 0.0
    for N in (2, 3, 4, 5):
        t = rng.uniform(0.0, h(2.0, N, 1.0), 1000)
        back = h(h_inverse(t, N, 1.0), N, 1.0)
        worst = max(worst, float(np.max(np.abs(back - t) / np.maximum(np.abs(t), 1e-300))))
    ok = abs(w1) <= 1e-9 and abs(w2) <= 1e-9 and rs.w[1:-1].min() > 0 and min(orders) >= 1.9 and worst <= 1e-12
    verdict(
        7,
        "radial pipeline",
        ok,
        f"w(1) = {w1:.1e}, w(2) = {w2:.1e}, observed orders {orders[0]:.2f}, {orders[1]:.2f}, round trip {worst:.1e}",
    )


def test_criterion_8_operator_identity():
    L = 1.0
    spec = ProblemSpec(fam.constant_weight(L, 1.0), fam.power_g(1.0, 1.0))
    xs = np.linspace(0.0, L, 41)
    exact = (L / np.pi) ** 2 * np.sin(np.pi * xs / L)
    errs = []
    for n in (64, 128, 256, 512):
        _, phi = apply_operator(spec, lambda x: np.sin(np.pi * x / L), n, xs)
        errs.append(float(np.max(np.abs(phi - exact))))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(12.0 <= r <= 20.0 for r in ratios)
    verdict(8, "operator identity, Simpson order 4", ok, "ratios " + ", ".join(f"{r:.2f}" for r in ratios))


def test_criterion_9_scaling_law(fig1):
    tol = 1e-9
    w = positive_part(fam.sin_weight(1.0, 3))
    base = first_eigenvalue(w, 0.0, 1 / 3, tol).lam
    errs = []
    for c in (0.5, 2.0, 10.0):
        lam = first_eigenvalue(w.scaled(c), 0.0, 1 / 3, tol).lam
        errs.append(abs(lam - base / c) / (base / c))
    lam1 = [it.lam for it in check_H4(fig1).items]
    star = max(lam1) / (200 * math.pi)
    grid = [0.5 * star, 0.95 * star, 1.05 * star, 2.0 * star]
    scan = lambda_threshold_scan(fig1, grid)
    consistent = all(row["verdict"] == row["predicted"] for row in scan.grid)
    ok = max(errs) <= 2 * tol and abs(scan.lambda_star - star) <= 1e-12 * star and consistent
    verdict(
        9,
        "scaling law and lambda threshold",
        ok,
        f"max rel err {max(errs):.1e}; lambda* = {scan.lambda_star:.10g}; grid verdicts "
        + ", ".join(row["verdict"] for row in scan.grid),
    )
