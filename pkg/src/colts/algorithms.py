"""Per-round decision rules.

Four agents share the same skeleton (ridge estimates -> perturbation draw ->
perturbed linear program), differing in how they certify or recover safety:

* SColtsAgent: scales the perturbed optimiser toward a known safe action
  until a pessimistic constraint certifies it, after an optional initial
  phase that estimates the safe action's margin from feedback.
* RColtsAgent: draws several perturbations, plays the optimiser of the
  highest-value feasible program, repeating the previous action when every
  draw is infeasible.
* EColtsAgent: forces spanner exploration until the Gram matrix is rich
  enough, then plays the perturbed optimiser.
* SafeLtsAgent: perturbs only the objective and optimises under the
  second-order-cone pessimism rows (the conservative baseline).

Agents see only public data (domain, levels, safe action, noise law, delta);
the simulator holds the ground truth.  All randomness comes from the caller's
generator, so a run is a pure function of its seed.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .estimator import SufficientStats, current_estimates, update as stats_update, width
from .linalg import mahalanobis
from .noise import b_factor, perturb, sample_noise
from .optim import feasible_point, max_scaling_rho, solve_lp, solve_soc


def lil_bound(t, delta):
    """Anytime Gaussian-walk envelope sqrt(4 t log(max(1, log t)/delta))."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    return math.sqrt(4.0 * t * math.log(max(1.0, math.log(t)) / delta))


@dataclass(frozen=True)
class Gamma0Estimator:
    """Running margin estimator fed by the constraint feedback of repeated
    safe-action plays.  Maintains the average slack Av_t = sum(alpha - S_s)/t
    with the anytime band LIL(t, delta/m)/t on both sides, and stops the
    first time every lower bound clears half its upper bound."""

    m: int
    delta: float
    sums: np.ndarray = None
    t: int = 0
    gamma0: float | None = None
    stop_time: int | None = None

    def __post_init__(self):
        if self.sums is None:
            object.__setattr__(self, "sums", np.zeros(self.m))

    @property
    def running(self):
        return self.gamma0 is None


def gamma0_step(g, S, alpha):
    """Fold one safe-action feedback vector into the margin estimator."""
    if not g.running:
        raise RuntimeError("margin estimator already stopped")
    sums = g.sums + (np.asarray(alpha, dtype=float) - np.asarray(S, dtype=float))
    t = g.t + 1
    band = lil_bound(t, g.delta / g.m) / t
    av = sums / t
    lower = av - band
    upper = av + band
    if np.all(lower >= upper / 2.0):
        return replace(g, sums=sums, t=t, gamma0=float(lower.min()), stop_time=t)
    return replace(g, sums=sums, t=t)


def build_spanner(domain):
    """Round-robin exploration vertices for the builtin domain families.

    Boxes anchored at the origin use the d single-coordinate vertices; the
    symmetric two-dimensional box uses two orthogonal corners.  Anything else
    needs a user-supplied spanner.
    """
    lo, up = domain.lower, domain.upper
    if domain.n_rows == 0 and np.all(np.isfinite(lo)) and np.all(np.isfinite(up)):
        if not lo.any():
            return [up[i] * np.eye(domain.dim)[i] for i in range(domain.dim)]
        if domain.dim == 2 and np.allclose(lo, -up):
            return [np.array([up[0], up[1]]), np.array([up[0], -up[1]])]
    raise ValueError("no builtin spanner for this domain; supply one explicitly")


def exploration_policy(state, domain):
    """Next spanner element in round-robin order; advances the state's index."""
    spanner = state.spanner
    a = spanner[state.spanner_index % len(spanner)]
    state.spanner_index += 1
    return np.array(a, dtype=float)


class _ColtsBase:
    """Shared round skeleton: statistics, estimates, draw bookkeeping."""

    def __init__(self, domain, alpha, law, delta, lp_tol=1e-9):
        self.domain = domain
        self.alpha = np.asarray(alpha, dtype=float)
        self.d = domain.dim
        self.m = self.alpha.size
        self.law = law
        self.delta = delta
        self.lp_tol = lp_tol
        self.stats = SufficientStats(self.d, self.m)
        self._reset_round()

    @property
    def t(self):
        """Index of the round currently being decided (1-based)."""
        return self.stats.t + 1

    def _reset_round(self):
        self.last_draw = None
        self.last_feasible = None
        self.last_b = None
        self.last_value = None
        self.last_omega = None
        self.last_B_t = None
        self.was_explore = False
        self.was_fallback = False

    def _begin_round(self):
        self._reset_round()
        est = current_estimates(self.stats, self.delta)
        B_t = b_factor(self.law, self.t, self.delta)
        self.last_omega = est.omega
        self.last_B_t = B_t
        return est, B_t

    def _solve_perturbed(self, pp):
        res = solve_lp(pp.theta_tilde, self.domain, pp.phi_tilde, self.alpha, tol=self.lp_tol)
        self.last_draw = pp
        self.last_feasible = res.optimal
        self.last_b = res.x if res.optimal else None
        self.last_value = res.value if res.optimal else None
        return res

    def update(self, a, R, S):
        stats_update(self.stats, a, R, S)


class SColtsAgent(_ColtsBase):
    """Hard enforcement: pessimistically certified mixtures with a safe anchor."""

    name = "scolts"

    def __init__(self, domain, alpha, a_safe, law, delta, gamma0=None, lp_tol=1e-9):
        super().__init__(domain, alpha, law, delta, lp_tol)
        if a_safe is None:
            raise ValueError("a known safe action is required")
        self.a_safe = np.asarray(a_safe, dtype=float)
        self.gamma0 = gamma0
        self.margin_est = Gamma0Estimator(self.m, delta) if gamma0 is None else None
        self.last_rho = None

    def step(self, rng):
        if self.gamma0 is None:
            self._reset_round()
            self.was_explore = True
            return self.a_safe.copy()
        est, B_t = self._begin_round()
        eta, H = sample_noise(self.law, rng)
        pp = perturb(est, self.stats, eta, H)
        self.last_draw = pp
        self.last_rho = None
        if width(self.stats, B_t, est.omega, self.a_safe) > self.gamma0 / 3.0:
            self.was_fallback = True
            return self.a_safe.copy()
        res = self._solve_perturbed(pp)
        if not res.optimal:
            self.was_fallback = True
            return self.a_safe.copy()
        anchor_slack = float(np.max(self.phat_margin(est, self.a_safe)))
        if anchor_slack > 1e-9:
            # confidence sets failed to cover the anchor; only the anchor is safe
            self.was_fallback = True
            return self.a_safe.copy()
        rho = max_scaling_rho(est.phi_hat, self.alpha, est.omega, self.stats.V_inv,
                              self.a_safe, res.x, tol=1e-9)
        self.last_rho = rho
        a = (1.0 - rho) * self.a_safe + rho * res.x
        cert = float(np.max(self.phat_margin(est, a)))
        if cert > 1e-8:
            raise RuntimeError(f"pessimistic certificate violated by {cert:.2e}")
        return a

    def phat_margin(self, est, a):
        """Rows of phi_hat a + omega ||a||_{V^-1} - alpha (<= 0 certifies a)."""
        return est.phi_hat @ a + est.omega * mahalanobis(a, self.stats.V_inv) - self.alpha

    def update(self, a, R, S):
        if self.gamma0 is None:
            self.margin_est = gamma0_step(self.margin_est, S, self.alpha)
            if not self.margin_est.running:
                self.gamma0 = self.margin_est.gamma0
        super().update(a, R, S)


class RColtsAgent(_ColtsBase):
    """Soft enforcement via resampling: best of I_t perturbed programs."""

    name = "rcolts"

    def __init__(self, domain, alpha, law, delta, r=4, samples=None, lp_tol=1e-9):
        super().__init__(domain, alpha, law, delta, lp_tol)
        if r < 0:
            raise ValueError("resampling order must be >= 0")
        self.r = r
        self.samples = samples
        self.last_action = feasible_point(domain)

    def resample_count(self, t):
        """I_t = samples when fixed, else 1 + ceil(r log(t (t+1) / delta))."""
        if self.samples is not None:
            return self.samples
        return 1 + math.ceil(self.r * math.log(t * (t + 1.0) / self.delta))

    def step(self, rng):
        est, B_t = self._begin_round()
        count = self.resample_count(self.t)
        best = None
        best_val = -math.inf
        first = None
        for _ in range(count):
            eta, H = sample_noise(self.law, rng)
            pp = perturb(est, self.stats, eta, H)
            res = solve_lp(pp.theta_tilde, self.domain, pp.phi_tilde, self.alpha,
                           tol=self.lp_tol)
            if first is None:
                first = (pp, res)
            if res.optimal and res.value > best_val:
                best = (pp, res)
                best_val = res.value
        pp, res = best if best is not None else first
        self.last_draw = pp
        self.last_feasible = res.optimal
        self.last_b = res.x if res.optimal else None
        self.last_value = res.value if res.optimal else None
        if best is None:
            self.was_fallback = True
            return self.last_action.copy()
        return res.x

    def update(self, a, R, S):
        super().update(a, R, S)
        self.last_action = np.array(a, dtype=float)


class EColtsAgent(_ColtsBase):
    """Soft enforcement with forced spanner exploration instead of resampling."""

    name = "ecolts"

    def __init__(self, domain, alpha, law, delta, spanner=None, lp_tol=1e-9):
        super().__init__(domain, alpha, law, delta, lp_tol)
        self.spanner = spanner if spanner is not None else build_spanner(domain)
        self.spanner_index = 0
        self.u_explore = 0
        self.n_infeasible = 0

    def explore_threshold(self, B_t, omega):
        return B_t * omega * math.sqrt(self.d * self.t)

    def step(self, rng):
        est, B_t = self._begin_round()
        eta, H = sample_noise(self.law, rng)
        pp = perturb(est, self.stats, eta, H)
        self.last_draw = pp
        if self.u_explore <= self.explore_threshold(B_t, est.omega):
            self.u_explore += 1
            self.was_explore = True
            return exploration_policy(self, self.domain)
        res = self._solve_perturbed(pp)
        if not res.optimal:
            self.n_infeasible += 1
            self.u_explore += 1
            self.was_explore = True
            return exploration_policy(self, self.domain)
        return res.x


class SafeLtsAgent(_ColtsBase):
    """Conservative baseline: sampled objective under cone pessimism rows."""

    name = "safelts"

    def __init__(self, domain, alpha, a_safe, law, delta, lp_tol=1e-6, cut_cap=200):
        super().__init__(domain, alpha, law, delta, lp_tol)
        if a_safe is None:
            raise ValueError("a known safe action is required")
        self.a_safe = np.asarray(a_safe, dtype=float)
        self.cut_cap = cut_cap
        self.n_degraded = 0
        self.total_cuts = 0

    def step(self, rng):
        est, B_t = self._begin_round()
        eta, H = sample_noise(self.law, rng)
        pp = perturb(est, self.stats, eta, H)
        self.last_draw = pp
        res = solve_soc(pp.theta_tilde, self.domain, est.phi_hat, self.alpha,
                        est.omega, self.stats.V_inv_sqrt, tol=self.lp_tol,
                        cut_cap=self.cut_cap)
        self.total_cuts += res.n_cuts
        if res.degraded:
            self.n_degraded += 1
        if not res.optimal:
            self.was_fallback = True
            return self.a_safe.copy()
        a = res.x
        slack = est.phi_hat @ a + est.omega * mahalanobis(a, self.stats.V_inv) - self.alpha
        if float(slack.max()) > 1e-6:
            raise RuntimeError("cone pessimism certificate violated")
        return a


def make_agent(name, domain, alpha, law, delta, a_safe=None, gamma0=None,
               r=4, samples=None, spanner=None, lp_tol=1e-9, cut_cap=200):
    if name == "scolts":
        return SColtsAgent(domain, alpha, a_safe, law, delta, gamma0=gamma0, lp_tol=lp_tol)
    if name == "rcolts":
        return RColtsAgent(domain, alpha, law, delta, r=r, samples=samples, lp_tol=lp_tol)
    if name == "ecolts":
        return EColtsAgent(domain, alpha, law, delta, spanner=spanner, lp_tol=lp_tol)
    if name == "safelts":
        return SafeLtsAgent(domain, alpha, a_safe, law, delta,
                            lp_tol=max(lp_tol, 1e-6), cut_cap=cut_cap)
    raise KeyError(f"unknown algorithm {name!r}")
