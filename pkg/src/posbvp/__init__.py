"""Positive solutions of u'' + a(x) g(u) = 0, u(0) = u(L) = 0, with a sign-changing weight a."""

from .eigen import EigenResult, WeightKind, eigenfunction, first_eigenvalue
from .families import fig1_problem, fig2_problem
from .green import GreenKernel, apply_operator, green, operator_residual
from .hypotheses import HypothesisReport, check_all, check_H1, check_H2, check_H3, check_H4, lambda_threshold_scan
from .integrator import Outcome, StepSizeUnderflow, Trajectory, dopri5, integrate
from .problem import (
    DescriptorSource,
    NearZeroClass,
    Nonlinearity,
    ProblemSpec,
    SignPartition,
    Weight,
    absolute_value,
    detect_sign_partition,
    negative_part,
    positive_part,
)
from .profile import SolutionProfile
from .radial import RadialProblem, h, h_inverse, reduce, solve_radial
from .shooting import NoBracketFound, find_positive_solutions, sample_poincare, small_amplitude_scan

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
