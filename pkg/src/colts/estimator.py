"""Online ridge regression for the objective and constraint rows, the
confidence radius, perturbation-scale widths, and the simulator-side
consistency check.

SufficientStats is single-owner mutable state: one run owns one instance and
updates it strictly sequentially.  The inverse and inverse-square-root caches
are refreshed eagerly on every update (O(d^3), trivial at desk scale), so
they can never go stale.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg


@dataclass
class SufficientStats:
    """Gram matrix V = I + sum a a^T, the moment vectors behind the ridge
    solutions, the round counter, and eagerly refreshed caches."""

    d: int
    m: int
    V: np.ndarray = field(init=False)
    xr: np.ndarray = field(init=False)
    XS: np.ndarray = field(init=False)
    t: int = field(init=False, default=0)
    V_inv: np.ndarray = field(init=False)
    V_inv_sqrt: np.ndarray = field(init=False)
    log_det: float = field(init=False, default=0.0)

    def __post_init__(self):
        self.V = np.eye(self.d)
        self.xr = np.zeros(self.d)
        self.XS = np.zeros((self.d, self.m))
        self.V_inv = np.eye(self.d)
        self.V_inv_sqrt = np.eye(self.d)


@dataclass(frozen=True)
class Estimates:
    theta_hat: np.ndarray
    phi_hat: np.ndarray
    omega: float


def update(stats, a, R, S):
    """Fold one round of feedback into the sufficient statistics.

    A zero action leaves every moment unchanged, so the caches are kept and
    only the round counter advances.
    """
    a = np.asarray(a, dtype=float)
    S = np.asarray(S, dtype=float)
    if a.shape != (stats.d,) or S.shape != (stats.m,):
        raise ValueError("dimension mismatch in estimator update")
    stats.t += 1
    if not a.any():
        return stats
    stats.V = linalg.rank1_update(stats.V, a)
    stats.xr = stats.xr + a * float(R)
    stats.XS = stats.XS + np.outer(a, S)
    w, Q = linalg.sym_eig(stats.V)
    V_inv = (Q / w) @ Q.T
    V_inv_sqrt = (Q / np.sqrt(w)) @ Q.T
    stats.V_inv = 0.5 * (V_inv + V_inv.T)
    stats.V_inv_sqrt = 0.5 * (V_inv_sqrt + V_inv_sqrt.T)
    stats.log_det = float(np.sum(np.log(w)))
    return stats


def confidence_radius(stats, m, delta):
    """1 + sqrt(log((m+1)/delta)/2 + log(det V)/4), the ellipsoid radius."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return 1.0 + math.sqrt(0.5 * math.log((m + 1) / delta) + 0.25 * stats.log_det)


def delta_t(t, delta):
    """Per-round slice delta / (t (t+1)) of the failure budget, t >= 1."""
    if t < 1:
        raise ValueError("round index must be >= 1")
    return delta / (t * (t + 1.0))


def current_estimates(stats, delta):
    """Ridge solutions from the cached inverse plus the confidence radius."""
    theta_hat = stats.V_inv @ stats.xr
    phi_hat = (stats.V_inv @ stats.XS).T
    return Estimates(theta_hat=theta_hat, phi_hat=phi_hat,
                     omega=confidence_radius(stats, stats.m, delta))


def width(stats, law_B_t, omega, a):
    """Uncertainty width B_t * omega * ||a||_{V^-1} at the action a."""
    return law_B_t * omega * linalg.mahalanobis(a, stats.V_inv)


def consistency_holds(est, stats, truth):
    """Simulator-side check that the true parameters sit inside both
    confidence ellipsoids of radius omega (V-weighted norms)."""
    if linalg.weighted_norm(est.theta_hat - truth.theta_star, stats.V) > est.omega:
        return False
    D = est.phi_hat - truth.phi_star
    row_sq = np.einsum("ij,jk,ik->i", D, stats.V, D)
    return bool(np.all(np.sqrt(np.maximum(row_sq, 0.0)) <= est.omega))
