import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pemrate import ArmaModel, ArmaParams, FitConfig, NoiseSpec, ParameterClass, fit, simulate
from pemrate.theory import (
    basic_inequality_holds,
    linearized_offset,
    martingale_offset,
    mean_squared_gap,
    prediction_gap,
    taylor_decomposition_check,
)

from _oracles import local_smoothness


def ar1_data(a_star=0.0, T=300, seed=0):
    return simulate(ArmaParams([a_star]), NoiseSpec.rademacher(), T, seed)


class TestMartingaleOffset:
    def test_zero_at_truth(self):
        tr = simulate(ArmaParams([0.5], [0.3]), NoiseSpec.uniform(), 200, 1)
        assert martingale_offset(ArmaModel(1, 1), [0.5, 0.3], [0.5, 0.3], tr.Y, tr.W) == 0.0

    def test_zero_noise_is_minus_gap(self):
        tr = simulate(ArmaParams([0.5], [0.3]), NoiseSpec.uniform(), 200, 2)
        m = ArmaModel(1, 1)
        val = martingale_offset(m, [0.2, 0.1], [0.5, 0.3], tr.Y, np.zeros(200))
        assert val == pytest.approx(-mean_squared_gap(m, [0.2, 0.1], [0.5, 0.3], tr.Y))
        assert val <= 0

    def test_ar1_white_noise_substitution(self):
        tr = ar1_data()
        W, a = tr.W, 0.3
        Wl = np.concatenate([[0.0], W[:-1]])
        expect = np.mean(4 * a * W * Wl - a * a * Wl ** 2)
        assert martingale_offset(ArmaModel(1, 0), [a], [0.0], tr.Y, W) == pytest.approx(expect,
                                                                                         rel=1e-13)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            martingale_offset(ArmaModel(1, 0), [0.1], [0.0], np.ones(5), np.ones(4))

    def test_gap_definition(self):
        tr = ar1_data(0.5)
        g = prediction_gap(ArmaModel(1, 0), [0.4], [0.5], tr.Y)
        np.testing.assert_allclose(g, -0.1 * np.concatenate([[0.0], tr.Y[:-1]]), atol=1e-15)


class TestLinearizedOffset:
    def test_zero_at_truth(self):
        tr = simulate(ArmaParams([0.5], [0.3]), NoiseSpec.uniform(), 100, 3)
        assert linearized_offset(ArmaModel(1, 1), [0.5, 0.3], [0.5, 0.3], tr.Y, tr.W) == 0.0

    def test_ar1_substitution(self):
        tr = ar1_data(0.5, seed=4)
        D = -0.2
        Yl = np.concatenate([[0.0], tr.Y[:-1]])
        expect = np.mean(4 * tr.W * Yl * D - 0.5 * Yl ** 2 * D ** 2)
        got = linearized_offset(ArmaModel(1, 0), [0.3], [0.5], tr.Y, tr.W)
        assert got == pytest.approx(expect, rel=1e-13)

    @settings(max_examples=40)
    @given(st.integers(0, 2**31), st.integers(1, 3))
    def test_ar_identity(self, seed, p):
        rng = np.random.default_rng(seed)
        ar_star = rng.uniform(-0.3, 0.3, p)
        theta = ar_star + rng.uniform(-0.5, 0.5, p)
        tr = simulate(ArmaParams(ar_star), NoiseSpec.uniform(), 200, seed)
        m = ArmaModel(p, 0)
        Zd = m.gradients(ar_star, tr.Y) @ (theta - ar_star)
        lhs = martingale_offset(m, theta, ar_star, tr.Y, tr.W)
        rhs = linearized_offset(m, theta, ar_star, tr.Y, tr.W) - 0.5 * np.mean(Zd ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-15)


class TestBasicInequality:
    def test_holds_with_truth_start(self):
        m = ArmaModel(1, 1)
        cls = ParameterClass(2, 0.95)
        for seed in range(15):
            tr = simulate(ArmaParams([0.5], [0.3]), NoiseSpec.rademacher(), 300, seed)
            res = fit(m, tr.Y, cls, FitConfig(n_starts=1, include_truth_start=True),
                      theta_star=[0.5, 0.3])
            assert basic_inequality_holds(m, res.theta_hat, [0.5, 0.3], tr.Y, tr.W)

    def test_fails_far_from_optimum(self):
        # theta far from the fit has larger loss than the truth, so the inequality breaks
        tr = ar1_data(0.5, seed=5)
        assert not basic_inequality_holds(ArmaModel(1, 0), [-0.5], [0.5], tr.Y, tr.W)


class TestTaylor:
    def test_trivial_at_truth(self):
        tr = simulate(ArmaParams([0.5], [0.3]), NoiseSpec.uniform(), 100, 6)
        chk = taylor_decomposition_check(ArmaModel(1, 1), [0.5, 0.3], [0.5, 0.3], tr.Y, tr.W, 1.0)
        assert chk.lhs == 0.0 and chk.rhs == 0.0 and chk.holds

    def test_ar_case_reduces_to_identity(self):
        tr = ar1_data(0.5, seed=7)
        m = ArmaModel(1, 0)
        chk = taylor_decomposition_check(m, [0.3], [0.5], tr.Y, tr.W, L2=0.0)
        assert chk.hessian_term == 0.0 and chk.quartic_term == 0.0
        assert chk.holds
        Zd = m.gradients([0.5], tr.Y)[:, 0] * -0.2
        assert chk.rhs - chk.lhs == pytest.approx(0.5 * np.mean(Zd ** 2), rel=1e-10)
        assert chk.components == (chk.linearized, chk.hessian_term, chk.quartic_term)

    def test_near_truth_sweep(self):
        m = ArmaModel(1, 1)
        theta_star = np.array([0.5, 0.3])
        rng = np.random.default_rng(8)
        for seed in range(30):
            tr = simulate(ArmaParams([0.5], [0.3]), NoiseSpec.rademacher(), 400, seed)
            u = rng.standard_normal(2)
            theta = theta_star + 0.05 * rng.uniform() * u / np.linalg.norm(u)
            L2, L3 = local_smoothness(m, tr.Y, theta_star, 0.05, 0.025)
            chk = taylor_decomposition_check(m, theta, theta_star, tr.Y, tr.W, L2=L2, L3=L3)
            assert chk.holds
