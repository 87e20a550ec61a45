"""Randomized property suites shared by test_properties and the acceptance gate.

Each runner draws its own seeded generator, checks every case with plain
asserts, and returns the number of cases it ran so callers can verify the
coverage floor.
"""

import numpy as np

from friedrichs import (
    FriedrichsModel,
    HydrogenFormFactor,
    RationalFormFactor,
    UnitSystem,
    gram_matrix,
    k_matrix,
    lambda_bar_closed_form,
    pv_matrix,
)

CASES = 200


def draw_model(rng, *, max_levels=4):
    """Random model over the built-in families, scale O(1)."""
    if rng.random() < 0.15:
        n = int(rng.integers(1, 4))
        idx = sorted(rng.permutation([1, 2, 3])[:n].tolist())
        factors = tuple(HydrogenFormFactor(int(i)) for i in idx)
    else:
        n = int(rng.integers(1, max_levels + 1))
        factors = tuple(
            RationalFormFactor(int(rng.integers(1, 4)),
                               float(rng.uniform(0.0, 3.0)),
                               float(rng.uniform(0.5, 2.0)))
            for _ in range(n))
    levels = np.sort(rng.uniform(-0.5, 0.5, size=n))
    coupling = float(rng.uniform(0.0, 3.0))
    return FriedrichsModel(tuple(levels), coupling, factors, UnitSystem(1.0))


def _kappa(model, shift):
    return np.linalg.eigvalsh(k_matrix(model, shift))


def suite_gram_psd_monotone(seed=2026, cases=CASES):
    """S(E) is PSD and S(E') <= S(E) for E' <= E < 0."""
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        model = draw_model(rng)
        e_hi = float(-(10.0 ** rng.uniform(-3, 0.7)))
        e_lo = e_hi - float(10.0 ** rng.uniform(-2, 0.7))
        s_hi = gram_matrix(model, e_hi).entries
        s_lo = gram_matrix(model, e_lo).entries
        tol = 1e-11 * max(np.linalg.norm(s_hi), 1.0)
        assert np.linalg.eigvalsh(s_hi).min() >= -tol
        assert np.linalg.eigvalsh(s_lo).min() >= -tol
        assert np.linalg.eigvalsh(s_hi - s_lo).min() >= -tol
    return cases


def suite_kappa_monotone_bounded(seed=2027, cases=CASES):
    """Each eigencurve is nonincreasing in E and stays at or below its level."""
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        model = draw_model(rng)
        e_hi = float(-(10.0 ** rng.uniform(-3, 0.7)))
        e_lo = e_hi - float(10.0 ** rng.uniform(-2, 0.7))
        k_hi = _kappa(model, gram_matrix(model, e_hi))
        k_lo = _kappa(model, gram_matrix(model, e_lo))
        tol = 1e-11 * max(1.0, np.abs(k_hi).max())
        assert np.all(k_hi <= k_lo + tol)
        assert np.all(k_hi <= model.level_array() + tol)
        assert np.all(k_lo <= model.level_array() + tol)
    return cases


def suite_weyl_sandwiches(seed=2028, cases=CASES):
    """Both eigenvalue sandwiches around kappa_n(E) at E < 0.

    With sigma the ascending spectrum of S(E):
      omega_n - lam^2 sigma_N <= kappa_n <= omega_n - lam^2 sigma_1
      omega_1 - lam^2 sigma_{N+1-n} <= kappa_n <= omega_N - lam^2 sigma_{N+1-n}
    """
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        model = draw_model(rng)
        e = float(-(10.0 ** rng.uniform(-3, 0.7)))
        shift = gram_matrix(model, e)
        sigma = np.linalg.eigvalsh(shift.entries)
        kappa = _kappa(model, shift)
        lam_sq = model.coupling ** 2
        w = model.level_array()
        tol = 1e-10 * max(1.0, lam_sq * sigma[-1])
        assert np.all(kappa >= w - lam_sq * sigma[-1] - tol)
        assert np.all(kappa <= w - lam_sq * sigma[0] + tol)
        rev = sigma[::-1]
        assert np.all(kappa >= w[0] - lam_sq * rev - tol)
        assert np.all(kappa <= w[-1] - lam_sq * rev + tol)
    return cases


def suite_pv_perturbation_bound(seed=2029, cases=CASES):
    """|kappa_n(E) - omega_n| <= lam^2 ||D(E)|| for E > 0."""
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        model = draw_model(rng)
        e = float(10.0 ** rng.uniform(-2, 0.7))
        shift = pv_matrix(model, e)
        kappa = _kappa(model, shift)
        lam_sq = model.coupling ** 2
        bound = lam_sq * shift.norm()
        tol = 1e-10 * max(1.0, bound)
        assert np.all(np.abs(kappa - model.level_array()) <= bound + tol)
    return cases


def suite_lambda_bar_below(seed=2030, cases=CASES):
    """The refined threshold always sits strictly below the coarse one."""
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        lam_n = float(10.0 ** rng.uniform(-4, 1))
        alpha = float(10.0 ** rng.uniform(-6, 1))
        beta = float(10.0 ** rng.uniform(-6, 1))
        gamma = float(10.0 ** rng.uniform(-6, 1))
        bar = lambda_bar_closed_form(lam_n, alpha, beta, gamma)
        assert 0.0 < bar < lam_n
        # the squared ratio solves beta x^2 - (alpha+beta+gamma) x + alpha = 0
        x = (bar / lam_n) ** 2
        res = beta * x * x - (alpha + beta + gamma) * x + alpha
        assert abs(res) <= 1e-9 * (alpha + beta + gamma)
    return cases


def suite_pv_threshold_continuity(seed=2031, cases=CASES):
    """||D(eps) - S(0)|| shrinks monotonically along eps = 1e-2, 1e-4, 1e-6."""
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        model = draw_model(rng, max_levels=3)
        s0 = gram_matrix(model, 0.0).entries
        devs = [np.linalg.norm(pv_matrix(model, eps).entries - s0, 2)
                for eps in (1e-2, 1e-4, 1e-6)]
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] <= 1e-2 * max(1.0, np.linalg.norm(s0, 2))
    return cases


ALL_SUITES = (
    suite_gram_psd_monotone,
    suite_kappa_monotone_bounded,
    suite_weyl_sandwiches,
    suite_pv_perturbation_bound,
    suite_lambda_bar_below,
    suite_pv_threshold_continuity,
)
