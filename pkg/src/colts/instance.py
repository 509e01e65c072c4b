"""Ground-truth problem instances: an unknown linear objective over a compact
polytope subject to unknown linear constraints, plus the two builtin
benchmark families (a d=9 box with a dense random constraint matrix, and a
d=2 family whose feasible region is a regular m-gon).
"""

import math
from dataclasses import dataclass

import numpy as np

from .optim import solve_lp, validate_polytope
from .polytope import Polytope

__all__ = [
    "Polytope",
    "SlbInstance",
    "InstanceSolution",
    "optimal_action",
    "reward_gap",
    "safety_margin",
    "builtin_box_instance",
    "builtin_polygon_instance",
    "builtin_instance",
    "save_instance",
    "load_instance",
]


@dataclass(frozen=True)
class SlbInstance:
    """True objective theta_star, constraint system phi_star a <= alpha over
    the domain, an optional known-safe action, and the observation-noise scale.

    Construction validates: row norms <= 1, the true program is feasible, and
    the safe action (when given) has strictly positive margin.
    """

    name: str
    theta_star: np.ndarray
    phi_star: np.ndarray
    alpha: np.ndarray
    domain: Polytope
    a_safe: np.ndarray | None = None
    obs_sigma: float = 1.0

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float)
        phi = np.asarray(self.phi_star, dtype=float).reshape(-1, theta.size)
        alpha = np.asarray(self.alpha, dtype=float).reshape(phi.shape[0])
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "phi_star", phi)
        object.__setattr__(self, "alpha", alpha)
        if self.a_safe is not None:
            object.__setattr__(self, "a_safe", np.asarray(self.a_safe, dtype=float))
        if np.linalg.norm(theta) > 1.0 + 1e-12:
            raise ValueError("objective norm exceeds 1")
        row_norms = np.linalg.norm(phi, axis=1)
        if np.any(row_norms > 1.0 + 1e-12):
            raise ValueError("a constraint row norm exceeds 1")
        if self.obs_sigma < 0:
            raise ValueError("observation noise scale must be nonnegative")
        validate_polytope(self.domain)
        probe = solve_lp(np.zeros(self.d), self.domain, phi, alpha)
        if not probe.optimal:
            raise ValueError("true program is infeasible")
        if self.a_safe is not None:
            if not self.domain.contains(self.a_safe):
                raise ValueError("safe action lies outside the domain")
            if safety_margin(self, self.a_safe) <= 0.0:
                raise ValueError("safe action has no positive safety margin")

    @property
    def d(self):
        return self.theta_star.size

    @property
    def m(self):
        return self.phi_star.shape[0]


@dataclass(frozen=True)
class InstanceSolution:
    a_star: np.ndarray
    value_star: float
    gamma_safe: float | None = None


def optimal_action(inst, tol=1e-9):
    """Solve the true program max theta_star @ a s.t. phi_star a <= alpha, a in domain."""
    res = solve_lp(inst.theta_star, inst.domain, inst.phi_star, inst.alpha, tol=tol)
    if not res.optimal:
        raise RuntimeError("true program infeasible; instance validation should prevent this")
    gamma_safe = None
    if inst.a_safe is not None:
        gamma_safe = safety_margin(inst, inst.a_safe)
    return InstanceSolution(a_star=res.x, value_star=res.value, gamma_safe=gamma_safe)


def reward_gap(inst, sol, a):
    """Gap theta_star @ (a_star - a); may be negative for infeasible a."""
    return sol.value_star - float(inst.theta_star @ np.asarray(a, dtype=float))


def safety_margin(inst, a):
    """Clamped minimum slack (min_i (alpha - phi_star a)_i)_+; exactly 0 when infeasible."""
    slack = inst.alpha - inst.phi_star @ np.asarray(a, dtype=float)
    return max(float(slack.min()), 0.0)


def builtin_box_instance(seed=0, obs_sigma=1.0):
    """d = m = 9 instance: theta = 1/sqrt(d), domain [0, 1/sqrt(d)]^d,
    constraint levels 0.8/sqrt(d), and a seeded dense 0/1 constraint matrix
    (about 60% populated) with rows rescaled to unit norm.  The origin is the
    safe action.
    """
    d = 9
    rng = np.random.default_rng(seed)
    phi = (rng.random((d, d)) < 0.6).astype(float)
    for i in range(d):
        while not phi[i].any():  # empty rows cannot be normalised; redraw
            phi[i] = (rng.random(d) < 0.6).astype(float)
    phi /= np.linalg.norm(phi, axis=1, keepdims=True)
    s = 1.0 / math.sqrt(d)
    return SlbInstance(
        name=f"box9[seed={seed}]",
        theta_star=np.full(d, s),
        phi_star=phi,
        alpha=np.full(d, 0.8 * s),
        domain=Polytope.box(np.zeros(d), np.full(d, s)),
        a_safe=np.zeros(d),
        obs_sigma=obs_sigma,
    )


POLYGON_CIRCUMRADIUS = 0.2 / math.sqrt(2.0)


def builtin_polygon_instance(m, obs_sigma=1.0):
    """d = 2 instance over the box [-1/sqrt(2), 1/sqrt(2)]^2 with theta = (1, 0).

    For m >= 3 the unknown constraints are the m edges of the regular m-gon
    centred at the origin with circumradius 0.2/sqrt(2) and one vertex at
    (0.2/sqrt(2), 0); rows are the unit outward edge normals and every level
    equals the apothem.  m = 1 is the single half-plane x1 <= 0.2/sqrt(2),
    whose boundary passes through the same vertex.  m = 2 is degenerate and
    rejected.  The origin is the safe action.
    """
    R = POLYGON_CIRCUMRADIUS
    if m == 1:
        phi = np.array([[1.0, 0.0]])
        alpha = np.array([R])
    elif m >= 3:
        k = np.arange(m)
        ang = (2.0 * k + 1.0) * math.pi / m
        phi = np.column_stack([np.cos(ang), np.sin(ang)])
        alpha = np.full(m, R * math.cos(math.pi / m))
    else:
        raise ValueError("polygon instances need m = 1 or m >= 3")
    half = 1.0 / math.sqrt(2.0)
    return SlbInstance(
        name=f"polygon[m={m}]",
        theta_star=np.array([1.0, 0.0]),
        phi_star=phi,
        alpha=alpha,
        domain=Polytope.box(np.array([-half, -half]), np.array([half, half])),
        a_safe=np.zeros(2),
        obs_sigma=obs_sigma,
    )


def builtin_instance(name, seed=0, m=12, obs_sigma=1.0):
    """Registry used by the CLI: name is 'box9' or 'polygon'."""
    if name == "box9":
        return builtin_box_instance(seed=seed, obs_sigma=obs_sigma)
    if name == "polygon":
        return builtin_polygon_instance(m=m, obs_sigma=obs_sigma)
    raise KeyError(f"unknown builtin instance {name!r}")


def _fmt_vec(v):
    return " ".join(repr(float(x)) for x in np.asarray(v, dtype=float))


def save_instance(inst, path):
    """Write the instance to a flat key-value text file (exact float round-trip)."""
    lines = [
        "# slb-instance v1",
        f"name = {inst.name}",
        f"d = {inst.d}",
        f"m = {inst.m}",
        f"sigma = {inst.obs_sigma!r}",
        f"theta = {_fmt_vec(inst.theta_star)}",
        f"alpha = {_fmt_vec(inst.alpha)}",
    ]
    for i in range(inst.m):
        lines.append(f"phi[{i}] = {_fmt_vec(inst.phi_star[i])}")
    lines.append(f"lower = {_fmt_vec(inst.domain.lower)}")
    lines.append(f"upper = {_fmt_vec(inst.domain.upper)}")
    for i in range(inst.domain.n_rows):
        lines.append(f"dom_lhs[{i}] = {_fmt_vec(inst.domain.ineq_lhs[i])}")
    if inst.domain.n_rows:
        lines.append(f"dom_rhs = {_fmt_vec(inst.domain.ineq_rhs)}")
    if inst.a_safe is not None:
        lines.append(f"a_safe = {_fmt_vec(inst.a_safe)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_instance(path):
    kv = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
    d = int(kv["d"])
    m = int(kv["m"])

    def vec(key):
        return np.array([float(tok) for tok in kv[key].split()])

    phi = np.vstack([vec(f"phi[{i}]") for i in range(m)]) if m else np.zeros((0, d))
    n_dom = len([k for k in kv if k.startswith("dom_lhs[")])
    if n_dom:
        G = np.vstack([vec(f"dom_lhs[{i}]") for i in range(n_dom)])
        h = vec("dom_rhs")
        dom = Polytope(dim=d, lower=vec("lower"), upper=vec("upper"), ineq_lhs=G, ineq_rhs=h)
    else:
        dom = Polytope.box(vec("lower"), vec("upper"))
    return SlbInstance(
        name=kv.get("name", "file"),
        theta_star=vec("theta"),
        phi_star=phi,
        alpha=vec("alpha"),
        domain=dom,
        a_safe=vec("a_safe") if "a_safe" in kv else None,
        obs_sigma=float(kv["sigma"]),
    )
