import itertools

import numpy as np
import pytest

import linksched as ls
from linksched import network as nc
from linksched import oracle as oc


def independent_enumeration(net, rule, maximal=False):
    """Second, independently coded enumerator: plain itertools over active
    sets with direct predicate evaluation, no bit tricks."""
    L = net.n_links

    def feasible(active):
        if isinstance(rule, oc.SeparationRule):
            need = max(rule.contention_links, rule.interference_links)
            for a, b in itertools.combinations(sorted(active), 2):
                between = abs(b - a) - 1  # chain nets: link ids follow the chain
                if between < need:
                    return False
            return True
        cfg = ls.config_from_active(active, L)
        r = ls.inverse_sinr_all(cfg, net)
        return all(r[k] <= rule.params.r_th for k in active)

    feas = [tuple(sorted(c))
            for n in range(L + 1)
            for c in itertools.combinations(range(L), n)
            if feasible(c)]
    if maximal:
        feas_set = set(feas)
        feas = [c for c in feas
                if not any(tuple(sorted(set(c) | {x})) in feas_set
                           for x in range(L) if x not in c)]
    return sorted(feas, key=lambda c: (len(c), c))


class TestEnumerateFeasible:
    def test_matches_independent_enumerator_separation(self):
        net = ls.linear_network(8)
        rule = oc.SeparationRule(1, 2)
        for maximal in (False, True):
            got = oc.enumerate_feasible(net, rule, maximal=maximal)
            want = independent_enumeration(net, rule, maximal=maximal)
            assert got == want

    def test_matches_independent_enumerator_sinr(self):
        net = ls.generate_topology(2, 8, 10.0)
        rule = oc.SinrRule(ls.params_for(net, 10.0))
        for maximal in (False, True):
            got = oc.enumerate_feasible(net, rule, maximal=maximal)
            want = independent_enumeration(net, rule, maximal=maximal)
            assert got == want

    def test_ten_node_chain_maximal_family(self):
        # the full set-inclusion maximal family of the 10-node chain under
        # the (1 contention, 2 interference) separation rule, verified
        # against the independent enumerator: three two-link and ten
        # three-link configurations (1-based: the two-link ones are
        # {2,7}, {3,7}, {3,8})
        net = ls.linear_network(10)
        got = oc.enumerate_feasible(net, oc.SeparationRule(1, 2), maximal=True)
        assert got == independent_enumeration(net, oc.SeparationRule(1, 2), maximal=True)
        sizes = {}
        for cfg in got:
            sizes[len(cfg)] = sizes.get(len(cfg), 0) + 1
        assert sizes == {2: 3, 3: 10}
        assert (1, 6) in got and (2, 6) in got and (2, 7) in got
        assert (0, 4, 8) in got

    def test_empty_network_yields_empty_configuration(self):
        net = ls.linear_network(2)
        got = oc.enumerate_feasible(net, oc.SeparationRule(1, 2))
        assert got[0] == ()

    def test_members_pass_feasibility_recheck(self):
        net = ls.generate_topology(4, 10, 10.0)
        rule = oc.SinrRule(ls.params_for(net, 10.0))
        for cfg in oc.enumerate_feasible(net, rule):
            r = ls.inverse_sinr_all(ls.config_from_active(cfg, net.n_links), net)
            assert all(r[k] <= rule.params.r_th for k in cfg)

    def test_size_guard(self):
        net = ls.generate_topology(0, 25, 12.0)
        with pytest.raises(ValueError):
            oc.enumerate_feasible(net, oc.SeparationRule(1, 2))


class TestBoltzmannArgmax:
    def test_single_link_net_activates(self):
        net = ls.linear_network(2)
        nbhd = ls.neighborhood(net, 5.0)
        params = ls.params_for(net, 10.0)
        best = oc.boltzmann_argmax(net, nbhd, params)
        assert ls.active_ids(best) == (0,)

    def test_chain_argmax_is_three_link_feasible(self):
        net = ls.linear_network(10)
        nbhd = ls.neighborhood(net, 20.0)
        params = ls.params_for(net, 10.0)
        best = oc.boltzmann_argmax(net, nbhd, params)
        active = ls.active_ids(best)
        assert len(active) == 3
        assert ls.objective_value(best, net, params).feasible
        feas3 = [c for c in oc.enumerate_feasible(net, oc.SeparationRule(1, 2), maximal=True)
                 if len(c) == 3]
        assert active in feas3

    def test_matches_independent_brute_force(self):
        net = ls.generate_topology(8, 6, 10.0)
        nbhd = ls.neighborhood(net, 4.0)
        params = ls.params_for(net, 10.0)
        best = oc.boltzmann_argmax(net, nbhd, params)

        def energy(active):
            cfg = ls.config_from_active(active, net.n_links)
            res = ls.residual_interference(cfg, net, nbhd)
            return ls.potential_energy(cfg, net, nbhd, params, res)

        h_all = {c: energy(c) for n in range(net.n_links + 1)
                 for c in itertools.combinations(range(net.n_links), n)}
        h_min = min(h_all.values())
        assert energy(ls.active_ids(best)) == pytest.approx(h_min, rel=1e-10)

    def test_argmax_contained_in_sinr_feasible_for_large_beta(self):
        for seed in range(3):
            net = ls.generate_topology(seed, 8, 10.0)
            nbhd = ls.neighborhood(net, 4.0)
            params = ls.params_for(net, 10.0, beta=1e6)
            best = oc.boltzmann_argmax(net, nbhd, params)
            feas = oc.enumerate_feasible(net, oc.SinrRule(params))
            assert ls.active_ids(best) in feas


class TestBoltzmannProbabilities:
    def test_probabilities_sum_to_one(self):
        net = ls.generate_topology(1, 8, 10.0)
        nbhd = ls.neighborhood(net, 4.0)
        params = ls.params_for(net, 10.0)
        _, probs = oc.boltzmann_probabilities(net, nbhd, params)
        assert abs(probs.sum() - 1.0) < 1e-10

    def test_exact_energy_matches_expanded_form(self):
        # the compact first-line energy equals the neighborhood-expanded
        # potential with the exact residual supplied
        net = ls.generate_topology(6, 9, 10.0)
        nbhd = ls.neighborhood(net, 3.0)
        params = ls.params_for(net, 10.0)
        rng = np.random.default_rng(0)
        for _ in range(10):
            cfg = rng.integers(0, 2, net.n_links).astype(np.int8)
            res = ls.residual_interference(cfg, net, nbhd)
            expanded = ls.potential_energy(cfg, net, nbhd, params, res)
            compact = float(oc.exact_energy(cfg[None, :], net, nbhd, params)[0])
            assert compact == pytest.approx(expanded, rel=1e-10)


class TestGibbsSampler:
    def test_two_link_frequencies_match_exact(self):
        net = ls.generate_topology(5, 2, 10.0)
        nbhd = ls.neighborhood(net, 4.0)
        params = ls.params_for(net, 10.0)
        n_sweeps = 40000
        freqs = oc.mc_boltzmann_sample(net, nbhd, params, seed=3, n_sweeps=n_sweeps)
        configs, probs = oc.boltzmann_probabilities(net, nbhd, params)
        for cfg_row, p in zip(configs, probs):
            key = ls.active_ids(cfg_row)
            se = np.sqrt(p * (1 - p) / n_sweeps)
            assert abs(freqs.get(key, 0.0) - p) < max(3 * se, 2e-3)

    def test_large_beta_suppresses_violators(self):
        # two links forced into conflict: the all-on configuration violates
        pos = np.array([[0.0, 0.0], [1.0, 0.0], [1.5, 0.0], [2.5, 0.0]])
        net = nc.Network(positions=pos, links=np.array([[0, 1], [2, 3]]),
                         power=np.ones(4), alpha=4.0, noise=1e-4, area_side=3.0)
        nbhd = ls.neighborhood(net, 5.0)
        params = ls.params_for(net, 10.0, beta=1000.0)
        freqs = oc.mc_boltzmann_sample(net, nbhd, params, seed=1, n_sweeps=5000)
        assert freqs.get((0, 1), 0.0) < 1e-3

    def test_deterministic_per_seed(self):
        net = ls.generate_topology(9, 4, 10.0)
        nbhd = ls.neighborhood(net, 4.0)
        params = ls.params_for(net, 10.0)
        a = oc.mc_boltzmann_sample(net, nbhd, params, seed=11, n_sweeps=500)
        b = oc.mc_boltzmann_sample(net, nbhd, params, seed=11, n_sweeps=500)
        assert a == b

    def test_size_guard(self):
        net = ls.generate_topology(0, 13, 10.0)
        nbhd = ls.neighborhood(net, 4.0)
        params = ls.params_for(net, 10.0)
        with pytest.raises(ValueError):
            oc.mc_boltzmann_sample(net, nbhd, params, seed=0, n_sweeps=10)
