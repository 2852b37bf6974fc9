"""Deterministic mean-field approximation of the residual interference.

The exact potential energy couples every pair of links.  Splitting the
pairwise couplings at the neighborhood boundary and replacing the
out-of-neighborhood part by a deterministic field h*_ij gives the
approximated energy

    H^l(sigma) = sum b_ij sigma_ij + sum_{mn in N_ij} a_ij,mn sigma_ij sigma_mn,
    b_ij = a_ij + h*_ij,

with a_ij = -R0 + N_b / (P_i l_ij^-alpha) and a_ij,mn the normalized
pairwise interference ratio.  Making the variational free energy of the
approximated model stationary in h yields the coupled equations

    h*_ij = sum_{mn not in N_ij} a_ij,mn mu_mn,
    mu_ij = logistic(-(b_ij + sum_{mn in N_ij} a_ij,mn mu_mn)),

solved here by damped fixed-point iteration.  h* is in the same
normalized units as the a coefficients; multiply by the link's received
signal power to recover raw interference power.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


__all__ = [
    "MfCoefficients",
    "MfSolution",
    "mf_coefficients",
    "mf_solve",
    "mf_from_measurement",
    "variational_free_energy",
]

# Cap in place of infinite couplings (links sharing a node): logistic(-1e30)
# underflows to exactly 0, matching the infinite-coupling limit.
_BIG = 1e30


@dataclass(eq=False)
class MfCoefficients:
    """First- and second-order energy coefficients, the pairwise table split
    at the neighborhood boundary (both parts nonnegative)."""

    a: np.ndarray
    pair_in: np.ndarray
    pair_out: np.ndarray

    @property
    def pair_all(self):
        return self.pair_in + self.pair_out


def mf_coefficients(net, nbhd, params):
    a = -params.r0 + net.noise / net.signal
    w = net.cross_gains
    w = np.where(np.isfinite(w), w, _BIG)
    pair = w / net.signal[:, None]
    np.fill_diagonal(pair, 0.0)
    out = ~nbhd.members.copy()
    np.fill_diagonal(out, False)
    return MfCoefficients(
        a=a,
        pair_in=np.where(nbhd.members, pair, 0.0),
        pair_out=np.where(out, pair, 0.0),
    )


@dataclass(eq=False)
class MfSolution:
    """Fixed point of the mean-field equations.

    h_star         : per-link residual field (normalized units, >= 0)
    mu             : per-link activation probability E(sigma_ij) in [0, 1]
    b              : absorbed first-order coefficient a + h_star
    iterations     : sweeps executed
    residual_norm  : max-norm self-consistency residual of the mu equation
    converged      : residual_norm <= tol reached before max_iter
    """

    h_star: np.ndarray
    mu: np.ndarray
    b: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool


def _logistic(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def mf_solve(net, nbhd, params, init=None, tol=1e-8, max_iter=4000, damping=0.5):
    """Solve the coupled mean-field equations by damped fixed-point iteration.

    Each sweep updates the links in ascending id order (Gauss-Seidel), so
    every update sees the freshest fields; this breaks the two-cycles a
    synchronous sweep can fall into on strongly coupled nets.  Convergence
    is declared when the self-consistency residual
    max|logistic(-field(mu)) - mu| drops to ``tol`` (which bounds the
    damped per-sweep update change as well).  If the residual stalls, the
    damping factor is halved; the iteration stays deterministic.
    Non-convergence is reported on the solution record, never raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    coeff = mf_coefficients(net, nbhd, params)
    L = net.n_links
    if init is None:
        mu = np.full(L, 0.5)
    else:
        mu = np.asarray(init, dtype=float).copy()
        if mu.shape != (L,):
            raise ValueError("init must supply one probability per link")
        if np.any(mu < 0) or np.any(mu > 1):
            raise ValueError("init probabilities must lie in [0, 1]")

    pair = coeff.pair_all
    d = damping
    prev_resid = np.inf
    resid = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        for k in range(L):
            field_k = coeff.a[k] + pair[k] @ mu
            target_k = float(_logistic(np.array([-field_k]))[0])
            mu[k] = (1.0 - d) * mu[k] + d * target_k
        field = coeff.a + pair @ mu
        resid = float(np.abs(_logistic(-field) - mu).max())
        if resid <= tol:
            break
        if resid > prev_resid:
            d = max(d * 0.5, 1.0 / 16.0)
        prev_resid = resid

    h_star = coeff.pair_out @ mu
    return MfSolution(
        h_star=h_star,
        mu=mu,
        b=coeff.a + h_star,
        iterations=iterations,
        residual_norm=resid,
        converged=resid <= tol,
    )


def mf_from_measurement(true_residual, relative_sigma, seed):
    """Residual field estimated from noisy interference measurements:
    h_ij = true_ij * (1 + eps), eps ~ N(0, relative_sigma^2), clamped at 0."""
    if relative_sigma < 0:
        raise ValueError("relative_sigma must be nonnegative")
    true_residual = np.asarray(true_residual, dtype=float)
    if relative_sigma == 0:
        return true_residual.copy()
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, relative_sigma, size=true_residual.shape)
    return np.maximum(true_residual * (1.0 + eps), 0.0)


class FreeEnergyResult(NamedTuple):
    value: float
    omits_log_partition: bool


def variational_free_energy(mu, h_star, net, nbhd, params):
    """The mu-dependent part of the variational free energy,

        sum_ij (-h*_ij mu_ij) + sum_ij sum_{mn not in N_ij} a_ij,mn mu_ij mu_mn,

    up to the -ln(Z_Q) term, whose omission the result flags.  At the
    mean-field fixed point the full objective is stationary in h*."""
    mu = np.asarray(mu, dtype=float)
    h_star = np.asarray(h_star, dtype=float)
    if np.any(mu < 0) or np.any(mu > 1):
        raise ValueError("mu must lie in [0, 1]")
    coeff = mf_coefficients(net, nbhd, params)
    value = float(-(h_star * mu).sum() + mu @ (coeff.pair_out @ mu))
    return FreeEnergyResult(value=value, omits_log_partition=True)
