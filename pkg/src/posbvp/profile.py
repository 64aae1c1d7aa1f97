from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


@dataclass
class SolutionProfile:
    """Sampled (x, u, u') of a boundary value solution or eigenfunction.

    ``dense`` maps an array of abscissae to an array of (u, u') pairs
    (shape ``xs.shape + (2,)``) when the profile came from an integrator;
    Green-operator checks use it instead of interpolating the samples.
    """

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    initial_slope: float = float("nan")
    boundary_residual: float = float("nan")
    interior_positivity: float = float("nan")
    operator_residual: Optional[float] = None
    dense: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.u)))

    def __call__(self, x):
        if self.dense is not None:
            out = self.dense(np.asarray(x, dtype=float))[..., 0]
        else:
            out = np.interp(x, self.x, self.u)
        return out if np.ndim(out) else float(out)

    def summary(self) -> dict:
        return {
            "c_star": self.initial_slope,
            "boundary_residual": self.boundary_residual,
            "interior_min": self.interior_positivity,
            "sup_norm": self.sup_norm,
            "operator_residual": self.operator_residual,
            "n_samples": int(self.x.size),
        }

    def to_csv(self, path, precision: int = 17, xname: str = "x") -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([xname, "u", "v"])
            for row in zip(self.x, self.u, self.v):
                w.writerow([f"{val:.{precision}g}" for val in row])
