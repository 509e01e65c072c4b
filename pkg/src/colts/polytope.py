"""Polytope container: box bounds plus general inequality rows G a <= h.

Validation (nonemptiness, boundedness) is an LP question and lives in
``colts.optim``; instances are checked at construction time by
``colts.instance``.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Polytope:
    """The action domain {a : G a <= h, lower <= a <= upper}.

    Infinite bounds (+-inf) are allowed for coordinates whose range is
    already limited by the rows of G.
    """

    dim: int
    lower: np.ndarray
    upper: np.ndarray
    ineq_lhs: np.ndarray = field(default=None)
    ineq_rhs: np.ndarray = field(default=None)

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(self.dim)
        upper = np.asarray(self.upper, dtype=float).reshape(self.dim)
        if self.ineq_lhs is None:
            G = np.zeros((0, self.dim))
            h = np.zeros(0)
        else:
            G = np.asarray(self.ineq_lhs, dtype=float).reshape(-1, self.dim)
            h = np.asarray(self.ineq_rhs, dtype=float).reshape(G.shape[0])
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "ineq_lhs", G)
        object.__setattr__(self, "ineq_rhs", h)

    @classmethod
    def box(cls, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        return cls(dim=lower.size, lower=lower, upper=upper)

    @property
    def n_rows(self):
        return self.ineq_lhs.shape[0]

    def contains(self, a, tol=1e-9):
        a = np.asarray(a, dtype=float)
        if a.shape != (self.dim,):
            return False
        if np.any(a < self.lower - tol) or np.any(a > self.upper + tol):
            return False
        if self.n_rows and np.any(self.ineq_lhs @ a > self.ineq_rhs + tol):
            return False
        return True
