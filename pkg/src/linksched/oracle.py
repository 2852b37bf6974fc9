"""Exhaustive ground truth for small instances.

Feasible-configuration enumeration, exact minimization of the system
potential energy (equivalently maximization of the Boltzmann probability)
and a Gibbs sampler for sanity-checking the Boltzmann model.  Everything
here is exponential in the link count and guarded accordingly; it exists
to validate the distributed scheduler and the approximations on nets small
enough to enumerate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.sparse.csgraph import shortest_path

from linksched import network as nc

__all__ = [
    "SeparationRule",
    "SinrRule",
    "FeasibilityRule",
    "MAX_ENUM_LINKS",
    "MAX_SAMPLER_LINKS",
    "enumerate_feasible",
    "boltzmann_argmax",
    "boltzmann_probabilities",
    "mc_boltzmann_sample",
    "exact_energy",
]

MAX_ENUM_LINKS = 24
MAX_SAMPLER_LINKS = 12

# Finite stand-in for infinite interference (coincident transmitter and
# receiver on shared-node chains); keeps batched matmuls NaN-free while
# still dwarfing every threshold.
_BIG = 1e300


@dataclass(frozen=True)
class SeparationRule:
    """Hop-count separation on a chain: between any two active links there
    must be at least ``contention_links`` links (channel contention) and at
    least ``interference_links`` links (interference protection)."""

    contention_links: int = 1
    interference_links: int = 2

    def __post_init__(self):
        if self.contention_links < 0 or self.interference_links < 0:
            raise ValueError("separation parameters must be nonnegative")


@dataclass(frozen=True)
class SinrRule:
    """A configuration is feasible when every active link satisfies the
    exact inverse-SINR constraint R_ij <= R_th."""

    params: nc.SchedulingParams


FeasibilityRule = Union[SeparationRule, SinrRule]


def _clamped_gains(net):
    w = net.cross_gains
    return np.where(np.isfinite(w), w, _BIG)


def _link_hop_distance(net):
    """Line-graph hop distance between links (links sharing a node are at
    distance 1).  The number of links strictly between two chain links is
    this distance minus one."""
    L = net.n_links
    adj = np.zeros((L, L))
    for a in range(L):
        for b in range(a + 1, L):
            if set(net.links[a]) & set(net.links[b]):
                adj[a, b] = adj[b, a] = 1
    d = shortest_path(adj, method="D", unweighted=True)
    if np.isinf(d).any():
        raise ValueError("separation rule requires a connected link graph")
    return d.astype(int)


def _all_configs(n_links):
    """(2^L, L) int8 matrix of every configuration, bit k = link k.

    Row order is by bitmask value, so row index doubles as a stable
    configuration id.
    """
    masks = np.arange(2 ** n_links, dtype=np.uint32)
    return ((masks[:, None] >> np.arange(n_links)) & 1).astype(np.int8)


def _feasible_mask(net, rule, configs):
    if isinstance(rule, SeparationRule):
        gap = _link_hop_distance(net)
        need = max(rule.contention_links, rule.interference_links) + 1
        conflict = (gap < need).astype(np.float64)
        np.fill_diagonal(conflict, 0.0)
        bits = configs.astype(np.float64)
        violations = np.einsum("bi,ij,bj->b", bits, conflict, bits)
        return violations == 0
    if isinstance(rule, SinrRule):
        w = _clamped_gains(net)
        bits = configs.astype(np.float64)
        interference = bits @ w.T
        r = (interference + net.noise) / net.signal
        bad = (r > rule.params.r_th) & (configs == 1)
        return ~bad.any(axis=1)
    raise TypeError(f"unknown feasibility rule: {rule!r}")


def enumerate_feasible(net, rule, maximal=False):
    """All configurations satisfying a feasibility rule, as sorted tuples of
    active link ids; with ``maximal=True`` only set-inclusion maximal ones.

    Both rules are downward closed (deactivating links never breaks
    feasibility), so maximality is equivalent to no single-link extension
    being feasible.
    """
    L = net.n_links
    if L > MAX_ENUM_LINKS:
        raise ValueError(f"enumeration is limited to {MAX_ENUM_LINKS} links, got {L}")
    configs = _all_configs(L)
    ok = _feasible_mask(net, rule, configs)
    feasible_masks = set(np.flatnonzero(ok).tolist())
    result = []
    for mask in sorted(feasible_masks):
        if maximal:
            free = [x for x in range(L) if not mask & (1 << x)]
            if any((mask | (1 << x)) in feasible_masks for x in free):
                continue
        result.append(tuple(k for k in range(L) if mask & (1 << k)))
    result.sort(key=lambda c: (len(c), c))
    return result


def exact_energy(configs, net, nbhd, params):
    """Exact system potential energy of each configuration row.

    Uses the compact form H = sum (-R0 + R_ij) sigma + beta sum
    U(R_ij - R_th) sigma with the full-information R_ij, which equals the
    neighborhood-expanded form evaluated at the exact residuals.
    """
    bits = np.atleast_2d(np.asarray(configs, dtype=np.float64))
    w = _clamped_gains(net)
    r = (bits @ w.T + net.noise) / net.signal
    h = ((-params.r0 + r) * bits).sum(axis=1)
    h = h + params.beta * ((r > params.r_th) & (bits > 0)).sum(axis=1)
    return h


def boltzmann_argmax(net, nbhd, params):
    """The configuration minimizing the exact potential energy, i.e. the
    maximizer of the Boltzmann probability; ties go to the smallest bitmask
    (links ordered by id, link 0 least significant)."""
    L = net.n_links
    if L > MAX_ENUM_LINKS:
        raise ValueError(f"exact maximization is limited to {MAX_ENUM_LINKS} links, got {L}")
    configs = _all_configs(L)
    h = exact_energy(configs, net, nbhd, params)
    best = int(np.argmin(h))
    return configs[best].copy()


def boltzmann_probabilities(net, nbhd, params):
    """Exact Boltzmann probability of every configuration (row order =
    bitmask order), computed stably by shifting energies by their minimum."""
    L = net.n_links
    if L > MAX_ENUM_LINKS:
        raise ValueError(f"exact probabilities are limited to {MAX_ENUM_LINKS} links, got {L}")
    configs = _all_configs(L)
    h = exact_energy(configs, net, nbhd, params)
    z = np.exp(-(h - h.min()))
    return configs, z / z.sum()


def mc_boltzmann_sample(net, nbhd, params, seed, n_sweeps):
    """Single-site Gibbs sampler over configurations.

    Sweeps links in id order; after each sweep the current configuration is
    recorded.  Returns a dict mapping active-id tuples to empirical
    frequencies.  Long runs converge to the exact Boltzmann distribution.
    """
    L = net.n_links
    if L > MAX_SAMPLER_LINKS:
        raise ValueError(f"the Gibbs sampler is limited to {MAX_SAMPLER_LINKS} links, got {L}")
    if n_sweeps < 1:
        raise ValueError("n_sweeps must be at least 1")
    rng = np.random.default_rng(seed)
    sigma = np.zeros(L, dtype=np.int8)
    counts = {}
    for _ in range(n_sweeps):
        for k in range(L):
            on = sigma.copy()
            on[k] = 1
            off = sigma.copy()
            off[k] = 0
            h_on, h_off = exact_energy(np.stack([on, off]), net, nbhd, params)
            delta = h_on - h_off
            # P(sigma_k = 1 | rest) = 1 / (1 + exp(delta))
            if delta > 700:
                p_on = 0.0
            elif delta < -700:
                p_on = 1.0
            else:
                p_on = 1.0 / (1.0 + np.exp(delta))
            sigma[k] = 1 if rng.uniform() < p_on else 0
        key = nc.active_ids(sigma)
        counts[key] = counts.get(key, 0) + 1
    return {cfg: n / n_sweeps for cfg, n in sorted(counts.items())}
