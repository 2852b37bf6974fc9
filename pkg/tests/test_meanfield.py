import numpy as np
import pytest

import linksched as ls
from linksched import meanfield as mf


def small_problem(seed=0, n_links=12, gamma_f=4.0):
    net = ls.generate_topology(seed, n_links, 10.0)
    nbhd = ls.neighborhood(net, gamma_f)
    params = ls.params_for(net, 10.0)
    return net, nbhd, params


class TestMfSolve:
    def test_zero_outside_coupling_gives_zero_field(self):
        net, _, params = small_problem()
        nbhd = ls.neighborhood(net, 20.0)  # covers the whole area
        sol = mf.mf_solve(net, nbhd, params)
        assert sol.converged
        assert np.all(sol.h_star == 0.0)

    def test_symmetric_pair_gets_equal_solution(self):
        # two congruent, far-apart links outside each other's neighborhood
        pos = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 8.0], [1.0, 8.0]])
        net = ls.Network(positions=pos, links=np.array([[0, 1], [2, 3]]),
                         power=np.ones(4), alpha=4.0, noise=1e-4, area_side=9.0)
        nbhd = ls.neighborhood(net, 2.0)
        assert not nbhd.members.any()
        params = ls.params_for(net, 10.0)
        sol = mf.mf_solve(net, nbhd, params, tol=1e-10)
        assert sol.converged
        # sweeps run in link order, so symmetry holds to solver tolerance
        assert sol.mu[0] == pytest.approx(sol.mu[1], abs=1e-9)
        assert sol.h_star[0] == pytest.approx(sol.h_star[1], abs=1e-9)

    def test_substitution_residual(self):
        net, nbhd, params = small_problem(seed=3, n_links=6)
        sol = mf.mf_solve(net, nbhd, params, tol=1e-10)
        coeff = mf.mf_coefficients(net, nbhd, params)
        assert sol.converged
        # converged solution substituted back into the field equation
        assert np.abs(sol.h_star - coeff.pair_out @ sol.mu).max() <= 1e-10

    def test_mu_equation_residual_at_most_tol(self):
        for seed in range(5):
            net, nbhd, params = small_problem(seed=seed, n_links=30)
            sol = mf.mf_solve(net, nbhd, params, tol=1e-8)
            assert sol.converged
            assert sol.residual_norm <= 1e-8

    def test_b_identity(self):
        net, nbhd, params = small_problem(seed=1)
        sol = mf.mf_solve(net, nbhd, params)
        coeff = mf.mf_coefficients(net, nbhd, params)
        assert np.allclose(sol.b, coeff.a + sol.h_star, rtol=0, atol=0)

    def test_pair_coefficients_nonnegative_and_split(self):
        net, nbhd, params = small_problem(seed=2)
        coeff = mf.mf_coefficients(net, nbhd, params)
        assert np.all(coeff.pair_in >= 0)
        assert np.all(coeff.pair_out >= 0)
        assert not np.any((coeff.pair_in > 0) & (coeff.pair_out > 0))

    def test_gamma_ladder_drives_field_to_zero(self):
        net, _, params = small_problem(seed=4, n_links=20)
        peaks = []
        for gamma in (1.0, 2.0, 4.0, 8.0, 20.0):
            nbhd = ls.neighborhood(net, gamma)
            sol = mf.mf_solve(net, nbhd, params)
            peaks.append(sol.h_star.max())
        assert all(b <= a + 1e-12 for a, b in zip(peaks, peaks[1:]))
        assert peaks[-1] == 0.0

    def test_mu_stays_in_unit_interval(self):
        net, nbhd, params = small_problem(seed=5, n_links=25)
        sol = mf.mf_solve(net, nbhd, params)
        assert np.all(sol.mu >= 0) and np.all(sol.mu <= 1)
        assert np.all(sol.h_star >= 0)

    def test_deterministic(self):
        net, nbhd, params = small_problem(seed=6, n_links=25)
        a = mf.mf_solve(net, nbhd, params)
        b = mf.mf_solve(net, nbhd, params)
        assert np.array_equal(a.mu, b.mu)
        assert np.array_equal(a.h_star, b.h_star)
        assert a.iterations == b.iterations

    def test_argument_validation(self):
        net, nbhd, params = small_problem()
        with pytest.raises(ValueError):
            mf.mf_solve(net, nbhd, params, tol=0.0)
        with pytest.raises(ValueError):
            mf.mf_solve(net, nbhd, params, damping=1.5)
        with pytest.raises(ValueError):
            mf.mf_solve(net, nbhd, params, init=np.full(net.n_links, 1.5))

    def test_nonconvergence_reported_not_raised(self):
        net, nbhd, params = small_problem(seed=1, n_links=30)
        sol = mf.mf_solve(net, nbhd, params, max_iter=1)
        assert not sol.converged
        assert sol.iterations == 1


class TestMeasurement:
    def test_zero_error_is_exact(self):
        true = np.array([0.1, 0.0, 2.5])
        est = mf.mf_from_measurement(true, 0.0, seed=0)
        assert np.array_equal(est, true)

    def test_relative_error_statistics(self):
        true = np.full(20000, 3.0)
        est = mf.mf_from_measurement(true, 0.1, seed=42)
        rel = est / true - 1.0
        assert abs(rel.std() - 0.1) < 0.005
        assert abs(rel.mean()) < 0.005

    def test_clamped_at_zero(self):
        true = np.full(1000, 1.0)
        est = mf.mf_from_measurement(true, 5.0, seed=0)
        assert np.all(est >= 0.0)

    def test_deterministic_per_seed(self):
        true = np.linspace(0, 1, 50)
        a = mf.mf_from_measurement(true, 0.2, seed=9)
        b = mf.mf_from_measurement(true, 0.2, seed=9)
        assert np.array_equal(a, b)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            mf.mf_from_measurement(np.ones(3), -0.1, seed=0)


class TestFreeEnergy:
    def test_zero_mu_gives_zero(self):
        net, nbhd, params = small_problem()
        L = net.n_links
        result = mf.variational_free_energy(np.zeros(L), np.zeros(L), net, nbhd, params)
        assert result.value == 0.0
        assert result.omits_log_partition

    def test_single_link_closed_form(self):
        net = ls.linear_network(2)
        nbhd = ls.neighborhood(net, 5.0)
        params = ls.params_for(net, 10.0)
        # no other links: only the -h* mu term survives
        got = mf.variational_free_energy(np.array([0.3]), np.array([2.0]), net, nbhd, params)
        assert got.value == pytest.approx(-0.6, rel=1e-12)

    def test_value_matches_hand_expansion(self):
        net, nbhd, params = small_problem(seed=7, n_links=8)
        coeff = mf.mf_coefficients(net, nbhd, params)
        rng = np.random.default_rng(1)
        mu = rng.uniform(0, 1, net.n_links)
        h = rng.uniform(0, 1, net.n_links)
        expected = -(h * mu).sum()
        for i in range(net.n_links):
            for j in range(net.n_links):
                expected += coeff.pair_out[i, j] * mu[i] * mu[j]
        got = mf.variational_free_energy(mu, h, net, nbhd, params)
        assert got.value == pytest.approx(expected, rel=1e-10)

    def test_fixed_point_is_stationary(self):
        """Finite-difference stationarity of the coupled equations: perturbing
        any single field component away from the solved value cannot shrink
        the self-consistency residual h - pair_out @ mu(h), where mu(h) is
        the inner fixed point solved at that fixed field."""
        net, nbhd, params = small_problem(seed=8, n_links=6, gamma_f=3.0)
        coeff = mf.mf_coefficients(net, nbhd, params)
        sol = mf.mf_solve(net, nbhd, params, tol=1e-12)
        assert sol.converged

        def mu_at_fixed_field(h):
            m = np.full(net.n_links, 0.5)
            for _ in range(6000):
                field = coeff.a + h + coeff.pair_in @ m
                target = 1.0 / (1.0 + np.exp(np.clip(field, -700, 700)))
                if np.abs(target - m).max() <= 1e-13:
                    return target
                m = 0.5 * m + 0.5 * target
            return m

        def residual(h):
            return np.abs(h - coeff.pair_out @ mu_at_fixed_field(h)).max()

        base = residual(sol.h_star)
        assert base <= 1e-10
        delta = 1e-4
        for k in range(net.n_links):
            for sign in (+1.0, -1.0):
                h = sol.h_star.copy()
                h[k] = max(h[k] + sign * delta, 0.0)
                if np.array_equal(h, sol.h_star):
                    continue
                assert residual(h) >= base
