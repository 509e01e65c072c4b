import math

import numpy as np
import pytest

from colts.estimator import Estimates, SufficientStats
from colts.noise import (
    PerturbationLaw,
    b_factor,
    concentration_B,
    perturb,
    practical_law,
    sample_base,
    sample_noise,
    theory_law,
)

from _oracles import ScriptedRng


def test_law_validation():
    with pytest.raises(ValueError):
        PerturbationLaw(d=2, m=1, design="weird")
    with pytest.raises(ValueError):
        PerturbationLaw(d=2, m=1, base="weird")
    with pytest.raises(ValueError):
        PerturbationLaw(d=2, m=1, base="sphere", gamma=0.0)


def test_named_presets():
    assert practical_law(9, 9).gamma == 0.5
    assert theory_law(9, 9).gamma == pytest.approx(math.sqrt(27.0))


def test_sphere_draw_has_exact_radius():
    law = practical_law(6, 3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = sample_base(law, rng)
        assert abs(np.linalg.norm(z) - 0.5) <= 1e-12


def test_different_seeds_give_different_draws():
    law = practical_law(4, 2)
    z1 = sample_base(law, np.random.default_rng(1))
    z2 = sample_base(law, np.random.default_rng(2))
    assert not np.allclose(z1, z2)


def test_sphere_isotropy_monte_carlo():
    law = PerturbationLaw(d=3, m=1, gamma=1.0)
    rng = np.random.default_rng(3)
    draws = np.array([sample_base(law, rng) for _ in range(100_000)])
    coord_sigma = 1.0 / math.sqrt(3.0)  # per-coordinate sd on the unit sphere
    bound = 3.0 * coord_sigma / math.sqrt(draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0)) <= bound)


def test_coupled_rows_are_exactly_negated_objective_shift():
    law = practical_law(3, 4)
    eta, H = sample_noise(law, np.random.default_rng(4))
    for i in range(4):
        assert np.array_equal(H[i], -eta)


def test_coupled_with_scripted_direction():
    law = PerturbationLaw(d=3, m=2, gamma=0.5)
    rng = ScriptedRng([np.array([1.0, 0.0, 0.0])])
    eta, H = sample_noise(law, rng)
    assert np.allclose(eta, [0.5, 0.0, 0.0], atol=1e-15)
    assert np.allclose(H, [[-0.5, 0.0, 0.0], [-0.5, 0.0, 0.0]], atol=1e-15)


def test_decoupled_rows_are_pairwise_distinct():
    law = PerturbationLaw(d=3, m=5, design="decoupled")
    rng = np.random.default_rng(5)
    for _ in range(100):
        eta, H = sample_noise(law, rng)
        rows = np.vstack([eta, H])
        for i in range(rows.shape[0]):
            for j in range(i + 1, rows.shape[0]):
                assert not np.array_equal(rows[i], rows[j])


def test_concentration_sphere_is_constant():
    law = PerturbationLaw(d=3, m=1, gamma=3.0)  # sqrt(3*3) folded into gamma
    for xi in (1.0, 0.5, 0.01):
        assert concentration_B(law, xi) == 3.0


def test_concentration_gaussian_values():
    law4 = PerturbationLaw(d=4, m=1, base="gaussian")
    assert concentration_B(law4, 1.0) == pytest.approx(2.0, abs=1e-12)
    law1 = PerturbationLaw(d=1, m=1, base="gaussian")
    assert concentration_B(law1, 0.1) == pytest.approx(3.145966026289347, abs=1e-12)


def test_concentration_rejects_bad_xi():
    law = practical_law(2, 1)
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            concentration_B(law, bad)


def test_sphere_draws_satisfy_their_concentration_bound_exactly():
    law = PerturbationLaw(d=5, m=3, gamma=0.7)
    rng = np.random.default_rng(6)
    for _ in range(500):
        eta, H = sample_noise(law, rng)
        big = max(np.linalg.norm(eta), np.linalg.norm(H, axis=1).max())
        assert big <= concentration_B(law, 0.5) + 1e-12


def test_b_factor_formula():
    law = practical_law(9, 9)  # B == 0.5 < 1, so B_t = 2
    assert b_factor(law, 1, 0.1) == pytest.approx(2.0)
    theory = theory_law(9, 9)
    assert b_factor(theory, 1, 0.1) == pytest.approx(1.0 + math.sqrt(27.0))


def _fresh(d, m, omega):
    st = SufficientStats(d, m)
    est = Estimates(np.zeros(d), np.zeros((m, d)), omega)
    return st, est


def test_perturb_identity_and_shift():
    st, est = _fresh(3, 2, 2.0)
    pp = perturb(est, st, np.array([1.0, 0.0, 0.0]), np.zeros((2, 3)))
    assert np.allclose(pp.theta_tilde, [2.0, 0.0, 0.0], atol=1e-15)
    assert np.allclose(pp.phi_tilde, np.zeros((2, 3)), atol=1e-15)
    zero = perturb(est, st, np.zeros(3), np.zeros((2, 3)))
    assert np.array_equal(zero.theta_tilde, est.theta_hat)
    assert np.array_equal(zero.phi_tilde, est.phi_hat)


def test_perturb_dimension_mismatch():
    st, est = _fresh(3, 2, 1.0)
    with pytest.raises(ValueError):
        perturb(est, st, np.zeros(2), np.zeros((2, 3)))


def test_coupled_perturbation_row_identity():
    # for coupled draws, each row shift applied to any action equals the
    # negated objective shift
    rng = np.random.default_rng(7)
    st = SufficientStats(4, 3)
    from colts.estimator import update
    for _ in range(10):
        update(st, rng.standard_normal(4) / 2, rng.standard_normal(),
               rng.standard_normal(3))
    from colts.estimator import current_estimates
    est = current_estimates(st, 0.1)
    law = practical_law(4, 3)
    eta, H = sample_noise(law, rng)
    pp = perturb(est, st, eta, H)
    for _ in range(20):
        a = rng.standard_normal(4)
        obj_shift = float((pp.theta_tilde - est.theta_hat) @ a)
        row_shifts = (pp.phi_tilde - est.phi_hat) @ a
        assert np.all(np.abs(row_shifts + obj_shift) <= 1e-10)


def test_perturb_is_linear_in_the_noise():
    rng = np.random.default_rng(8)
    st, est = _fresh(3, 2, 1.7)
    e1, h1 = rng.standard_normal(3), rng.standard_normal((2, 3))
    e2, h2 = rng.standard_normal(3), rng.standard_normal((2, 3))
    both = perturb(est, st, e1 + e2, h1 + h2)
    p1 = perturb(est, st, e1, h1)
    p2 = perturb(est, st, e2, h2)
    assert np.max(np.abs(both.theta_tilde -
                         (p1.theta_tilde + p2.theta_tilde - est.theta_hat))) <= 1e-12
    assert np.max(np.abs(both.phi_tilde -
                         (p1.phi_tilde + p2.phi_tilde - est.phi_hat))) <= 1e-12


@pytest.mark.parametrize("d", [2, 5, 9])
def test_theory_scale_sphere_anticoncentration(d):
    # fraction of draws with zeta @ u >= ||u|| for the sqrt(3d)-radius sphere
    law = theory_law(d, 1)
    rng = np.random.default_rng(100 + d)
    u = rng.standard_normal(d)
    zs = np.array([sample_base(law, rng) for _ in range(100_000)])
    frac = float(np.mean(zs @ u >= np.linalg.norm(u)))
    assert frac >= 0.27
