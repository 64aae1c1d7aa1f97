import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posbvp import families as fam
from posbvp.problem import Weight
from posbvp.radial import RadialProblem, h, h_inverse, reduce, solve_radial
from posbvp.shooting import NoBracketFound

from oracles import numeric_h


def cubic(N=3, R1=1.0, R2=2.0, a=None):
    a = a or fam.constant_weight(R2, 1.0)
    return RadialProblem(N, R1, R2, a, fam.power_g(1.0, 3.0))


def test_h_examples():
    assert h(math.e, 2, 1.0) == pytest.approx(1.0)
    assert h(2.0, 3, 1.0) == pytest.approx(0.5)
    assert h_inverse(0.25, 3, 1.0) == pytest.approx(4 / 3)
    assert cubic().L == pytest.approx(0.5)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
@pytest.mark.parametrize("R1", [0.5, 1.0, 3.0])
def test_h_round_trip(N, R1):
    rng = np.random.default_rng(N * 10 + int(R1 * 2))
    R2 = 2 * R1
    t = rng.uniform(0, h(R2, N, R1), 1000)
    back = h(h_inverse(t, N, R1), N, R1)
    assert np.max(np.abs(back - t) / np.maximum(t, 1e-300)) <= 1e-12 or np.max(np.abs(back - t)) <= 1e-15
    r = rng.uniform(R1, R2, 1000)
    assert np.max(np.abs(h_inverse(h(r, N, R1), N, R1) - r) / r) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.floats(0.2, 3.0), st.floats(1.01, 4.0))
def test_h_matches_quadrature(N, R1, ratio):
    r = R1 * ratio
    assert h(r, N, R1) == pytest.approx(numeric_h(r, N, R1), rel=1e-10, abs=1e-13)


def test_domain_errors():
    with pytest.raises(ValueError):
        h(0.5, 3, 1.0)
    with pytest.raises(ValueError):
        h_inverse(1.5, 3, 1.0)
    with pytest.raises(ValueError):
        RadialProblem(1, 1.0, 2.0, fam.constant_weight(2.0), fam.power_g())


def test_reduce_weights():
    tp = reduce(cubic(2, 1.0, math.e))
    for t in (0.0, 0.3, 1.0):
        assert tp.spec.weight(t) == pytest.approx(math.exp(2 * t))
    for N in (2, 3, 4):
        p = 2 * (N - 1)
        a = Weight(2.0, lambda r, p=p: r ** (-p))
        tp = reduce(cubic(N, 1.0, 2.0, a))
        ts = np.linspace(0, tp.L, 7)
        assert np.allclose(tp.spec.weight.values(ts), 1.0)
        assert tp.spec.weight(ts[3]) == pytest.approx(1.0)


def test_reduce_maps_partition():
    a = Weight(2.0, lambda r: math.cos(math.pi * r))
    tp = reduce(cubic(3, 1.0, 2.0, a))
    (lo, hi), = tp.spec.weight.sign_partition.intervals
    assert lo == pytest.approx(1 / 3, abs=1e-10)
    assert hi == pytest.approx(0.5)


@pytest.fixture(scope="module")
def cubic_solution():
    return solve_radial(cubic(), 0.0, 200.0)


def test_radial_solution(cubic_solution):
    rs = cubic_solution.solutions[0]
    w1, w2 = rs.boundary_values
    assert abs(w1) <= 1e-9 and abs(w2) <= 1e-9
    assert rs.w[1:-1].min() > 0
    res = [rs.radial_residual(n) for n in (32, 64, 128)]
    assert res[0] > res[1] > res[2]
    assert math.log2(res[1] / res[2]) >= 1.9


def test_radial_matches_profile(cubic_solution):
    rs = cubic_solution.solutions[0]
    t = h(rs.r, 3, 1.0)
    assert np.allclose(rs.w, rs.profile_t(t), atol=1e-12)


def test_slice_and_csv(tmp_path, cubic_solution):
    rs = cubic_solution.solutions[0]
    X1, X2, U = rs.slice_grid(41)
    R = np.hypot(X1, X2)
    assert np.all(np.isnan(U[R < 1.0 - 1e-12]))
    inside = (R > 1.0) & (R < 2.0)
    assert np.all(U[inside] > 0)
    rs.to_csv(tmp_path / "w.csv")
    rs.slice_to_csv(tmp_path / "s.csv", 21)
    assert (tmp_path / "w.csv").read_text().startswith("r,w,dw\n")
    assert (tmp_path / "s.csv").read_text().startswith("x1,x2,u\n")


def test_zero_weight_no_solution():
    rp = cubic(a=fam.constant_weight(2.0, 0.0))
    with pytest.raises(NoBracketFound):
        solve_radial(rp, 0.0, 10.0, n_scan=21)
