import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posbvp import families as fam
from posbvp.green import GreenKernel, apply_operator, green, operator_residual
from posbvp.problem import ProblemSpec


def linear_spec(L=1.0):
    return ProblemSpec(fam.constant_weight(L, 1.0), fam.power_g(1.0, 1.0))


def test_closed_form_values():
    assert green(0.5, 0.5, 1.0) == pytest.approx(0.25)
    assert green(0.0, 0.7, 1.0) == 0.0
    assert green(0.25, 0.75, 1.0) == pytest.approx(1 / 16)
    assert GreenKernel(2.0).sup == pytest.approx(0.5)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.1, 10.0))
def test_kernel_symmetric_nonnegative_bounded(s, t, L):
    x, xi = s * L, t * L
    gv = green(x, xi, L)
    assert gv == pytest.approx(green(xi, x, L), abs=1e-15)
    assert 0.0 <= gv <= L / 4 + 1e-15
    assert green(0.0, xi, L) == 0.0
    assert green(L, xi, L) == pytest.approx(0.0, abs=1e-15)


def test_kernel_inverts_second_derivative():
    # int G(x, xi) * 2 dxi = x (L - x), i.e. -u'' = 2
    L = 1.5
    xi = np.linspace(0, L, 20001)
    for x in (0.2, 0.75, 1.3):
        val = np.trapezoid(green(x, xi, L) * 2.0, xi)
        assert val == pytest.approx(x * (L - x), rel=1e-7)


def test_zero_maps_to_zero(fig1):
    xs, phi = apply_operator(fig1, lambda x: 0.0)
    assert np.all(phi == 0.0)
    assert operator_residual(fig1, lambda x: 0.0) == 0.0


@pytest.mark.parametrize("L", [1.0, 2.5])
def test_eigenfunction_identity(L):
    spec = linear_spec(L)
    xs = np.linspace(0, L, 41)
    _, phi = apply_operator(spec, lambda x: np.sin(np.pi * x / L), 512, xs)
    assert np.max(np.abs(phi - (L / np.pi) ** 2 * np.sin(np.pi * xs / L))) < 1e-10


def test_simpson_order_four():
    spec = linear_spec(1.0)
    xs = np.linspace(0, 1, 41)
    exact = np.sin(np.pi * xs) / np.pi**2
    errs = []
    for n in (64, 128, 256):
        _, phi = apply_operator(spec, lambda x: np.sin(np.pi * x), n, xs)
        errs.append(np.max(np.abs(phi - exact)))
    for a, b in zip(errs, errs[1:]):
        assert 12 < a / b < 20


def test_accepted_solution_is_fixed_point(fig1, fig1_report):
    u = fig1_report.solutions[0]
    res = operator_residual(fig1, u)
    assert res <= 1e3 * 1e-9
    perturbed = (u.x, u.u + 0.1 * np.sin(np.pi * u.x))
    assert operator_residual(fig1, perturbed) >= 0.05


def test_grid_inputs(fig1):
    xs = np.linspace(0, 1, 201)
    us = 0.01 * np.sin(np.pi * xs)
    out_x, _ = apply_operator(fig1, (xs, us))
    assert np.array_equal(out_x, xs)
    with pytest.raises(ValueError):
        apply_operator(fig1, (xs, us), quad_n=16)
    with pytest.raises(TypeError):
        apply_operator(fig1, 3.0)
