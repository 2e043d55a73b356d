"""Successive-approximation pricing solver and Neumann sums."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import sdf_stability as sd
from sdf_stability import IndeterminateError, InstabilityError, ParameterError


def _one_state(v):
    chain = sd.MarkovChain.from_transition(np.array([0.0]), np.array([[1.0]]))
    return sd.ValuationMatrix(V=np.array([[float(v)]]), chain=chain)


def _stable_problem(rng, n, radius=0.6):
    A = rng.uniform(0.05, 1.0, size=(n, n))
    A *= radius / np.max(np.abs(np.linalg.eigvals(A)))
    chain = sd.MarkovChain.from_transition(np.arange(n, dtype=float),
                                           np.full((n, n), 1.0 / n))
    g = rng.uniform(0.1, 1.0, size=n)
    return sd.PricingProblem(V=sd.ValuationMatrix(V=A, chain=chain), g_hat=g)


class TestProblemValidation:
    def test_rejects_negative_forcing(self):
        with pytest.raises(ParameterError):
            sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([-1.0]))

    def test_rejects_identically_zero_forcing(self):
        with pytest.raises(ParameterError):
            sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([0.0]))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ParameterError):
            sd.PricingProblem(V=_one_state(0.5), g_hat=np.ones(2))

    def test_forcing_is_read_only(self):
        prob = sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([1.0]))
        with pytest.raises(ValueError):
            prob.g_hat[0] = 2.0


class TestOperator:
    def test_apply_T_definition(self):
        rng = np.random.default_rng(5)
        prob = _stable_problem(rng, 4)
        h = rng.normal(size=4)
        np.testing.assert_allclose(sd.apply_T(prob, h),
                                   prob.V.V @ h + prob.g_hat, rtol=1e-15)

    def test_apply_T_shape_check(self):
        prob = sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([1.0]))
        with pytest.raises(ParameterError):
            sd.apply_T(prob, np.ones(3))

    def test_neumann_partial_sums_by_hand(self):
        prob = sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([1.0]))
        # sum_{k<=K} 0.5^k = 2 - 2^{ -K}
        for K in range(5):
            got = sd.neumann_partial_sum(prob, K)[0]
            assert got == pytest.approx(2.0 - 0.5**K, abs=1e-15)

    def test_neumann_rejects_negative_K(self):
        prob = sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([1.0]))
        with pytest.raises(ParameterError):
            sd.neumann_partial_sum(prob, -1)


class TestSolver:
    def test_one_state_toy(self):
        # h = 0.5 h + 0.5 has the unique solution h* = 1.
        prob = sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([0.5]))
        sol = sd.solve_markov_solution(prob)
        assert sol.h_star[0] == pytest.approx(1.0, abs=1e-9)
        assert sol.ln_r == pytest.approx(math.log(0.5), abs=1e-10)
        assert sol.residual < 1e-9
        assert sol.iterations >= 1

    @given(st.integers(2, 8), st.integers(0, 10_000))
    def test_matches_direct_linear_solve(self, n, seed):
        rng = np.random.default_rng(seed)
        prob = _stable_problem(rng, n)
        sol = sd.solve_markov_solution(prob, tol=1e-12)
        direct = np.linalg.solve(np.eye(n) - prob.V.V, prob.g_hat)
        np.testing.assert_allclose(sol.h_star, direct, rtol=1e-8, atol=1e-10)

    @given(st.integers(2, 6), st.integers(0, 10_000))
    def test_fixed_point_residual(self, n, seed):
        rng = np.random.default_rng(seed)
        prob = _stable_problem(rng, n)
        sol = sd.solve_markov_solution(prob, tol=1e-11)
        gap = np.max(np.abs(sd.apply_T(prob, sol.h_star) - sol.h_star))
        assert gap == pytest.approx(sol.residual, abs=1e-15)
        assert sol.residual < 1e-10

    def test_neumann_sums_converge_to_solution(self):
        rng = np.random.default_rng(9)
        prob = _stable_problem(rng, 5)
        sol = sd.solve_markov_solution(prob, tol=1e-13)
        partial = sd.neumann_partial_sum(prob, 200)
        np.testing.assert_allclose(partial, sol.h_star, rtol=1e-10)

    def test_warm_start_converges_faster(self):
        rng = np.random.default_rng(13)
        prob = _stable_problem(rng, 5)
        cold = sd.solve_markov_solution(prob, tol=1e-12)
        warm = sd.solve_markov_solution(prob, h0=cold.h_star, tol=1e-12)
        assert warm.iterations <= cold.iterations
        np.testing.assert_allclose(warm.h_star, cold.h_star, atol=1e-10)

    def test_h0_validation(self):
        prob = sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([1.0]))
        with pytest.raises(ParameterError):
            sd.solve_markov_solution(prob, h0=np.ones(2))
        with pytest.raises(ParameterError):
            sd.solve_markov_solution(prob, h0=np.array([np.inf]))


class TestDivergence:
    def test_supercritical_raises_with_exponent(self):
        prob = sd.PricingProblem(V=_one_state(1.5), g_hat=np.array([1.0]))
        with pytest.raises(InstabilityError) as exc:
            sd.solve_markov_solution(prob)
        assert exc.value.ln_r == pytest.approx(math.log(1.5), abs=1e-10)

    def test_boundary_radius_one_raises(self):
        # r = 1 exactly: iterates grow linearly without bound.
        prob = sd.PricingProblem(V=_one_state(1.0), g_hat=np.array([1.0]))
        with pytest.raises(InstabilityError) as exc:
            sd.solve_markov_solution(prob)
        assert abs(exc.value.ln_r) < 1e-10

    def test_noise_band_is_indeterminate(self):
        # ln r = -1e-9 sits inside the (-1e-8, 0) band: sustained growth is
        # neither certified divergence nor achievable convergence.
        prob = sd.PricingProblem(V=_one_state(1.0 - 1e-9),
                                 g_hat=np.array([1.0]))
        with pytest.raises(IndeterminateError) as exc:
            sd.solve_markov_solution(prob)
        assert -1e-8 < exc.value.ln_r < 0.0
        assert len(exc.value.residuals) > 0

    def test_budget_exhaustion_is_indeterminate(self):
        prob = sd.PricingProblem(V=_one_state(0.5), g_hat=np.array([1.0]))
        with pytest.raises(IndeterminateError):
            sd.solve_markov_solution(prob, tol=1e-30, max_iter=5)

    def test_two_state_mixed_weights_unstable(self):
        # Supercritical even though one row has a small diagonal weight.
        chain = sd.MarkovChain.from_transition(
            np.array([-1.0, 1.0]), np.array([[0.5, 0.5], [0.5, 0.5]]))
        V = sd.ValuationMatrix(V=np.array([[0.3, 0.9], [0.9, 0.9]]),
                               chain=chain)
        prob = sd.PricingProblem(V=V, g_hat=np.ones(2))
        r = sd.spectral_radius(V)
        assert r > 1
        with pytest.raises(InstabilityError) as exc:
            sd.solve_markov_solution(prob)
        assert exc.value.ln_r == pytest.approx(math.log(r), abs=1e-9)
