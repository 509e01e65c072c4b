"""Simulator-side detectors for the explanatory events tracked during
instrumented runs: local optimism (the true optimum stays feasible for the
perturbed program with value at least the true optimum), global optimism (the
perturbed program's value reaches the true optimum anywhere), and
unsaturation (the chosen action's true gap is dominated by its uncertainty
width).
"""

from dataclasses import dataclass

import numpy as np

from .optim import solve_lp

EVENT_TOL = 1e-10


@dataclass(frozen=True)
class EventFlags:
    consistent: bool
    local_optimism: bool
    global_optimism: bool
    unsaturated: bool
    perturbed_feasible: bool

    def bits(self):
        """Pack into an integer: bit0 consistent, bit1 local, bit2 global,
        bit3 unsaturated, bit4 perturbed-feasible."""
        return (
            int(self.consistent)
            | int(self.local_optimism) << 1
            | int(self.global_optimism) << 2
            | int(self.unsaturated) << 3
            | int(self.perturbed_feasible) << 4
        )


def detect_local(pp, sol, inst):
    """Local optimism: theta_tilde @ a_star >= value_star and
    phi_tilde a_star <= alpha, both with EVENT_TOL slack."""
    a_star = sol.a_star
    if float(pp.theta_tilde @ a_star) < sol.value_star - EVENT_TOL:
        return False
    return bool(np.all(pp.phi_tilde @ a_star <= inst.alpha + EVENT_TOL))


def detect_global(pp, domain, alpha, value_star, tol=1e-9):
    """Global optimism: the perturbed program is feasible and its value is at
    least value_star - tol.  Infeasible programs have value -inf by convention."""
    res = solve_lp(pp.theta_tilde, domain, pp.phi_tilde, alpha, tol=1e-9)
    return res.optimal and res.value >= value_star - tol


def detect_unsaturated(a_t, gap, width):
    """Unsaturation of the perturbed optimiser: gap <= width + EVENT_TOL."""
    if a_t is None:
        return False
    return gap <= width + EVENT_TOL
