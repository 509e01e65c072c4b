"""Perturbation laws for the sampled programs: the coupled design (one vector
shifts the objective up and every constraint row down, in whitened
coordinates), the decoupled ablation (independent rows), and the two base
measures (uniform sphere of radius gamma, standard Gaussian).
"""

import math
from dataclasses import dataclass

import numpy as np

COUPLED = "coupled"
DECOUPLED = "decoupled"
SPHERE = "sphere"
GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PerturbationLaw:
    d: int
    m: int
    design: str = COUPLED
    base: str = SPHERE
    gamma: float = 0.5

    def __post_init__(self):
        if self.design not in (COUPLED, DECOUPLED):
            raise ValueError(f"unknown design {self.design!r}")
        if self.base not in (SPHERE, GAUSSIAN):
            raise ValueError(f"unknown base {self.base!r}")
        if self.base == SPHERE and self.gamma <= 0.0:
            raise ValueError("sphere radius gamma must be positive")


def practical_law(d, m, design=COUPLED, base=SPHERE):
    """The small-noise configuration used in experiments: radius 0.5."""
    return PerturbationLaw(d=d, m=m, design=design, base=base, gamma=0.5)


def theory_law(d, m, design=COUPLED, base=SPHERE):
    """The analysed configuration: sphere radius sqrt(3 d)."""
    return PerturbationLaw(d=d, m=m, design=design, base=base, gamma=math.sqrt(3.0 * d))


@dataclass(frozen=True)
class PerturbedParams:
    theta_tilde: np.ndarray
    phi_tilde: np.ndarray


def sample_base(law, rng):
    """One draw of the base measure: a uniform point on the radius-gamma
    sphere (normalised Gaussian direction) or a standard normal vector."""
    g = rng.standard_normal(law.d)
    if law.base == GAUSSIAN:
        return g
    nrm = np.linalg.norm(g)
    while nrm == 0.0:  # probability zero; regenerate defensively
        g = rng.standard_normal(law.d)
        nrm = np.linalg.norm(g)
    return (law.gamma / nrm) * g


def sample_noise(law, rng):
    """Draw the pair (eta, H): objective row shift and constraint row shifts.

    Coupled: a single zeta gives eta = zeta and H^i = -zeta for every row.
    Decoupled: eta and each row of H are independent base draws (eta first,
    then rows in order).
    """
    if law.design == COUPLED:
        zeta = sample_base(law, rng)
        return zeta, -np.tile(zeta, (law.m, 1))
    eta = sample_base(law, rng)
    H = np.vstack([sample_base(law, rng) for _ in range(law.m)])
    return eta, H


def concentration_B(law, xi):
    """Tail bound B(xi) with P(max(||eta||, max_i ||H^i||) >= B(xi)) <= xi.

    Sphere draws have norm exactly gamma, so B is the constant gamma.  For
    the Gaussian base, B(xi) = sqrt(d) + sqrt(2 log(1/xi)).
    """
    if not 0.0 < xi <= 1.0:
        raise ValueError("xi must lie in (0, 1]")
    if law.base == SPHERE:
        return law.gamma
    return math.sqrt(law.d) + math.sqrt(2.0 * math.log(1.0 / xi))


def b_factor(law, t, delta):
    """The per-round noise radius factor B_t = 1 + max(1, B(delta_t)) with
    delta_t = delta / (t (t+1))."""
    xi = delta / (t * (t + 1.0))
    return 1.0 + max(1.0, concentration_B(law, min(xi, 1.0)))


def perturb(est, stats, eta, H):
    """Shift the estimates: theta_tilde = theta_hat + omega V^-1/2 eta and
    phi_tilde = phi_hat + omega H V^-1/2."""
    eta = np.asarray(eta, dtype=float)
    H = np.asarray(H, dtype=float)
    if eta.shape != (stats.d,) or H.shape != (stats.m, stats.d):
        raise ValueError("noise dimensions do not match the statistics")
    W = stats.V_inv_sqrt
    return PerturbedParams(
        theta_tilde=est.theta_hat + est.omega * (W @ eta),
        phi_tilde=est.phi_hat + est.omega * (H @ W),
    )
