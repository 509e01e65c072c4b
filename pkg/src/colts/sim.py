"""The environment loop: feedback generation, metric accumulation, event
instrumentation, and timing.

Episodes are pure functions of (instance, config, T, seed): the seed is split
into independent agent and environment streams, so trajectories are exactly
reproducible and runs with different seeds never share generator state.
Timing fields are the one exception to determinism and are excluded from
reproducibility guarantees.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithms import make_agent
from .estimator import consistency_holds, current_estimates
from .events import EventFlags, detect_local, detect_unsaturated
from .instance import optimal_action, safety_margin
from .linalg import mahalanobis
from .noise import PerturbationLaw
from .optim import solve_lp

PRESET_PRACTICAL = "practical"
PRESET_THEORY = "theory"

# delta share each algorithm receives from the user budget under the
# theory-faithful preset (the guarantees are stated for these splits)
_THEORY_DELTA_SHARE = {"scolts": 1.0 / 3.0, "rcolts": 0.5, "ecolts": 1.0 / 3.0,
                       "safelts": 1.0}


@dataclass(frozen=True)
class AlgoConfig:
    """Algorithm selection plus hyperparameters, resolvable against an instance."""

    algorithm: str
    delta: float = 0.1
    gamma: float = 0.5
    design: str = "coupled"
    base: str = "sphere"
    r: int = 4
    samples: int | None = None
    gamma0: float | str | None = "estimate"  # float, "estimate", or "true"
    preset: str | None = None
    sigma: float | None = None  # overrides the instance observation noise
    lp_tol: float = 1e-9

    def resolved(self, inst):
        """Apply the preset against a concrete instance (gamma, delta split, r)."""
        cfg = self
        if cfg.preset == PRESET_THEORY:
            cfg = replace(cfg, gamma=math.sqrt(3.0 * inst.d),
                          delta=cfg.delta * _THEORY_DELTA_SHARE[cfg.algorithm],
                          r=max(cfg.r, 4) if cfg.algorithm == "rcolts" else cfg.r)
        elif cfg.preset not in (None, "", PRESET_PRACTICAL):
            raise ValueError(f"unknown preset {cfg.preset!r}")
        return cfg

    def law(self, inst):
        return PerturbationLaw(d=inst.d, m=inst.m, design=self.design,
                               base=self.base, gamma=self.gamma)


@dataclass
class RoundRecord:
    t: int
    action: np.ndarray
    regret: float
    risk: float
    cum_regret: float
    cum_risk: float
    flags: EventFlags | None
    wall_ns: int
    was_explore: bool
    was_fallback: bool


@dataclass
class RunSummary:
    seed: int
    algorithm: str
    instance: str
    T: int
    regret: float
    risk: float
    wall_ns_total: int
    wall_ns_per_round: float
    rate_local: float | None = None
    rate_global: float | None = None
    rate_unsat: float | None = None
    rate_consistent: float | None = None
    n_explore: int = 0
    n_fallback: int = 0
    containment_violations: int = 0
    ellip_sq: float = 0.0
    ellip_lin: float = 0.0
    ellip_sq_bound: float = 0.0
    ellip_lin_bound: float = 0.0
    checkpoints: dict = field(default_factory=dict)


def _build_agent(inst, cfg):
    cfg = cfg.resolved(inst)
    gamma0 = cfg.gamma0
    if gamma0 == "true":
        if inst.a_safe is None:
            raise ValueError("gamma0='true' needs an instance with a safe action")
        gamma0 = safety_margin(inst, inst.a_safe)
    elif gamma0 == "estimate":
        gamma0 = None
    return make_agent(cfg.algorithm, inst.domain, inst.alpha, cfg.law(inst),
                      cfg.delta, a_safe=inst.a_safe, gamma0=gamma0, r=cfg.r,
                      samples=cfg.samples, lp_tol=cfg.lp_tol)


def run_episode(inst, cfg, T, seed, record_every=0, instrument=False,
                checkpoints=()):
    """Run one episode and return (RunSummary, list[RoundRecord]).

    record_every = k keeps every k-th round (plus round T); 0 keeps none.
    Cumulative metrics at T are exact regardless of thinning.  Checkpoints
    are round indices at which (cum_regret, cum_risk) are snapshotted into
    the summary.
    """
    if T < 1:
        raise ValueError("horizon T must be >= 1")
    cfg = cfg.resolved(inst)
    sigma = inst.obs_sigma if cfg.sigma is None else cfg.sigma
    ss = np.random.SeedSequence(seed)
    rng_agent, rng_env = [np.random.default_rng(s) for s in ss.spawn(2)]
    agent = _build_agent(inst, cfg)
    sol = optimal_action(inst)
    want_flags = bool(instrument)
    check_true_safety = cfg.algorithm == "scolts"
    checkpoint_set = set(int(c) for c in checkpoints)

    cum_regret = 0.0
    cum_risk = 0.0
    ellip_sq = 0.0
    ellip_lin = 0.0
    wall_total = 0
    n_explore = 0
    n_fallback = 0
    n_local = n_global = n_unsat = n_consistent = 0
    containment_violations = 0
    records = []
    cpoints = {}

    for t in range(1, T + 1):
        t0 = time.perf_counter_ns()
        a = agent.step(rng_agent)
        wall = time.perf_counter_ns() - t0
        wall_total += wall
        a = np.asarray(a, dtype=float)
        if not inst.domain.contains(a, tol=1e-6):
            raise RuntimeError(f"agent played an action outside the domain at round {t}")

        # pre-update quantities (the agent's statistics still describe V_t)
        anorm = mahalanobis(a, agent.stats.V_inv)
        ellip_sq += anorm * anorm
        ellip_lin += anorm

        flags = None
        if want_flags or check_true_safety:
            est = current_estimates(agent.stats, cfg.delta)
            consistent = consistency_holds(est, agent.stats, inst)
        if check_true_safety and consistent:
            if float(np.max(inst.phi_star @ a - inst.alpha)) > 1e-6:
                raise RuntimeError("safe-scaling agent violated a true constraint "
                                   "while the confidence sets covered the truth")
        if want_flags:
            pp = agent.last_draw
            if pp is None:
                flags = EventFlags(consistent, False, False, False, False)
            else:
                if agent.last_feasible is None:
                    # the agent never solved this draw's program; do it here
                    res = solve_lp(pp.theta_tilde, inst.domain, pp.phi_tilde,
                                   inst.alpha, tol=1e-9)
                    feas = res.optimal
                    b = res.x if feas else None
                    val = res.value
                else:
                    feas = agent.last_feasible
                    b = agent.last_b
                    val = agent.last_value
                local = detect_local(pp, sol, inst)
                glob = bool(feas and val >= sol.value_star - 1e-9)
                unsat = False
                if b is not None:
                    gap = sol.value_star - float(inst.theta_star @ b)
                    w_b = agent.last_B_t * agent.last_omega * mahalanobis(
                        b, agent.stats.V_inv)
                    unsat = detect_unsaturated(b, gap, w_b)
                flags = EventFlags(consistent, local, glob, unsat, bool(feas))
            if flags.local_optimism and not flags.global_optimism:
                containment_violations += 1
            if flags.local_optimism and flags.consistent and not flags.unsaturated:
                containment_violations += 1
            n_local += flags.local_optimism
            n_global += flags.global_optimism
            n_unsat += flags.unsaturated
            n_consistent += flags.consistent

        w = rng_env.standard_normal(inst.m + 1)
        R = float(inst.theta_star @ a) + sigma * w[0]
        S = inst.phi_star @ a + sigma * w[1:]
        agent.update(a, R, S)

        regret = max(sol.value_star - float(inst.theta_star @ a), 0.0)
        risk = max(float(np.max(inst.phi_star @ a - inst.alpha)), 0.0)
        cum_regret += regret
        cum_risk += risk
        n_explore += agent.was_explore
        n_fallback += agent.was_fallback
        if t in checkpoint_set:
            cpoints[t] = (cum_regret, cum_risk)
        if record_every and (t % record_every == 0 or t == T):
            records.append(RoundRecord(t, a, regret, risk, cum_regret, cum_risk,
                                       flags, wall, agent.was_explore,
                                       agent.was_fallback))

    d = inst.d
    ellip_sq_bound = 2.0 * d * math.log(1.0 + T / d)
    ellip_lin_bound = math.sqrt(2.0 * d * T * math.log(1.0 + T / d))
    if ellip_sq > ellip_sq_bound or ellip_lin > ellip_lin_bound:
        raise RuntimeError("elliptical potential bound violated; "
                           "the statistics update must be broken")

    summary = RunSummary(
        seed=seed, algorithm=cfg.algorithm, instance=inst.name, T=T,
        regret=cum_regret, risk=cum_risk, wall_ns_total=wall_total,
        wall_ns_per_round=wall_total / T,
        rate_local=n_local / T if want_flags else None,
        rate_global=n_global / T if want_flags else None,
        rate_unsat=n_unsat / T if want_flags else None,
        rate_consistent=n_consistent / T if want_flags else None,
        n_explore=n_explore, n_fallback=n_fallback,
        containment_violations=containment_violations,
        ellip_sq=ellip_sq, ellip_lin=ellip_lin,
        ellip_sq_bound=ellip_sq_bound, ellip_lin_bound=ellip_lin_bound,
        checkpoints=cpoints,
    )
    return summary, records


def _episode_worker(args):
    inst, cfg, T, seed, record_every, instrument, checkpoints = args
    return run_episode(inst, cfg, T, seed, record_every=record_every,
                       instrument=instrument, checkpoints=checkpoints)


def run_batch(inst, cfg, T, seeds, record_every=0, instrument=False,
              checkpoints=(), n_jobs=1, with_records=False):
    """Independent episodes for each seed, in seed order.

    Episodes are seed-pure, so parallel and serial execution produce
    identical results (timing fields aside).  Errors propagate with the
    offending seed attached.
    """
    seeds = list(seeds)
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    jobs = [(inst, cfg, T, s, record_every, instrument, tuple(checkpoints))
            for s in seeds]
    results = []
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for seed, out in zip(seeds, pool.map(_episode_worker, jobs)):
                results.append(out)
    else:
        for job in jobs:
            try:
                results.append(_episode_worker(job))
            except Exception as exc:
                raise RuntimeError(f"episode with seed {job[3]} failed: {exc}") from exc
    if with_records:
        return results
    return [summary for summary, _ in results]
