"""Reference computations kept independent of the package's solution paths."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh


def fd_first_eigenvalue(wfun, alpha: float, beta: float, n: int = 4096) -> tuple[float, np.ndarray, np.ndarray]:
    """First eigenvalue of -phi'' = lam w phi, phi(alpha) = phi(beta) = 0, by second differences.

    Solved as the largest mu of W phi = mu K phi (mu = 1/lam) so that rows
    where w vanishes stay harmless. Returns (lam, interior x, eigenvector).
    """
    h = (beta - alpha) / n
    x = alpha + h * np.arange(1, n)
    main = np.full(n - 1, 2.0 / h**2)
    off = np.full(n - 2, -1.0 / h**2)
    K = sp.diags([off, main, off], [-1, 0, 1], format="csc")
    W = sp.diags(np.asarray(wfun(x), dtype=float), 0, format="csc")
    mu, vec = eigsh(W, k=1, M=K, which="LA")
    phi = vec[:, 0]
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    return 1.0 / mu[0], x, phi


def rk4_endpoint(rhs, x0, y0, x1, h):
    """Fixed-step classical RK4 for a small system; returns y(x1)."""
    n = max(1, int(round((x1 - x0) / h)))
    h = (x1 - x0) / n
    y = np.array(y0, dtype=float)
    for k in range(n):
        x = x0 + k * h
        k1 = np.asarray(rhs(x, y))
        k2 = np.asarray(rhs(x + h / 2, y + h / 2 * k1))
        k3 = np.asarray(rhs(x + h / 2, y + h / 2 * k2))
        k4 = np.asarray(rhs(x + h, y + h * k3))
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def brute_roots(f, lo: float, hi: float, n: int = 20001) -> list[float]:
    """Sign changes of f on a uniform grid, polished by bisection."""
    xs = np.linspace(lo, hi, n)
    fs = np.array([f(x) for x in xs])
    roots = []
    for i in range(n - 1):
        if fs[i] == 0:
            roots.append(xs[i])
        elif fs[i] * fs[i + 1] < 0:
            a, b = xs[i], xs[i + 1]
            fa = fs[i]
            for _ in range(100):
                m = 0.5 * (a + b)
                fm = f(m)
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    return roots


def numeric_h(r: float, N: int, R1: float) -> float:
    from scipy.integrate import quad

    val, _ = quad(lambda xi: xi ** (1 - N), R1, r, epsabs=1e-13, epsrel=1e-12)
    return val


PI2 = math.pi**2
