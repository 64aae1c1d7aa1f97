import numpy as np
import pytest

from posbvp import families as fam
from posbvp.problem import ProblemSpec
from posbvp.shooting import (
    NoBracketFound,
    find_positive_solutions,
    poincare_point,
    sample_poincare,
    small_amplitude_scan,
)

# roots of u(1; c) by bisection on a fixed-step RK4 (h = 5e-5), computed once
RK4_CSTAR_FIG1 = 11.541438089765144
RK4_CSTAR_FIG2 = 14.768801930876307
RK4_CSTAR_CUBIC = 9.722981027606872


def cubic_spec():
    return ProblemSpec(fam.constant_weight(1.0, 1.0), fam.power_g(1.0, 3.0))


def test_zero_slope_is_equilibrium(fig1):
    p = poincare_point(fig1, 0.0)
    assert p.end_state == (0.0, 0.0)
    assert not p.positive_interior


def test_sample_layout(fig1):
    pts = sample_poincare(fig1, 0.0, 12.0, 481)
    assert len(pts) == 481
    assert pts[0].c == 0.0 and pts[-1].c == 12.0
    assert set(pts[0].row()) == {"c", "uL", "vL", "escaped", "positive_interior"}


def test_threads_do_not_change_results(fig1):
    a = sample_poincare(fig1, 0.0, 12.0, 25, workers=1)
    b = sample_poincare(fig1, 0.0, 12.0, 25, workers=4)
    assert [p.row() for p in a] == [p.row() for p in b]


def test_fig1_crosses_negative_axis(fig1_report):
    pts = fig1_report.table
    hits = [
        (p, q)
        for p, q in zip(pts, pts[1:])
        if not (p.escaped or q.escaped) and p.c > 0 and p.uL * q.uL < 0 and p.vL < 0 and q.vL < 0
    ]
    assert hits


def test_fig1_solution(fig1_report):
    sols = fig1_report.solutions
    assert len(sols) >= 1
    s = sols[0]
    assert 0 < s.initial_slope <= 12
    assert s.initial_slope == pytest.approx(RK4_CSTAR_FIG1, abs=1e-6)
    assert s.boundary_residual <= 1e-9
    assert s.interior_positivity > 0
    assert s.u.min() >= -1e-8
    assert s.operator_residual <= 1e-6


def test_fig2_solution(fig2_report):
    s = fig2_report.solutions[0]
    assert s.initial_slope == pytest.approx(RK4_CSTAR_FIG2, abs=1e-6)
    assert s.boundary_residual <= 1e-9
    assert s.interior_positivity > 0


def test_cubic_solution():
    rep = find_positive_solutions(cubic_spec(), 0.0, 40.0)
    assert len(rep.solutions) == 1
    s = rep.solutions[0]
    assert s.initial_slope == pytest.approx(RK4_CSTAR_CUBIC, abs=1e-6)
    # autonomous and symmetric: u is even about x = 1/2
    xs = np.linspace(0.0, 1.0, 201)
    assert np.max(np.abs(s(xs) - s(1.0 - xs))) < 1e-8
    assert s.operator_residual <= 1e-6


def test_no_bracket_raises_with_table():
    # small slopes only: u(1; c) ~ c > 0 throughout
    with pytest.raises(NoBracketFound) as info:
        find_positive_solutions(cubic_spec(), 0.0, 1.0, n_scan=21)
    assert len(info.value.table) == 21
    rep = find_positive_solutions(cubic_spec(), 0.0, 1.0, n_scan=21, raise_on_empty=False)
    assert rep.solutions == []


def test_zero_weight_has_no_solution():
    spec = ProblemSpec(fam.constant_weight(1.0, 0.0), fam.power_g(1.0, 3.0))
    pts = sample_poincare(spec, 0.0, 5.0, 11)
    for p in pts:
        assert p.uL == pytest.approx(p.c)
    with pytest.raises(NoBracketFound):
        find_positive_solutions(spec, 0.0, 5.0, n_scan=11)


def test_small_amplitude_fig1(fig1):
    rep = small_amplitude_scan(fig1, 1e-3, np.geomspace(1e-8, 1e-2, 61))
    assert rep.ok
    assert rep.accepted_small == []
    assert rep.n_candidates > 0


def test_small_amplitude_cubic():
    rep = small_amplitude_scan(cubic_spec(), 1e-3, np.geomspace(1e-8, 1e-3, 31))
    assert rep.ok
    assert rep.min_relative_miss > 0.9  # u(1; c) close to c


def test_report_summary(fig1_report):
    d = fig1_report.summary()
    assert d["n_solutions"] == len(fig1_report.solutions)
    assert set(d["solutions"][0]) >= {"c_star", "boundary_residual", "interior_min", "operator_residual"}
