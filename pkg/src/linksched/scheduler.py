"""Distributed link scheduling by message passing over a per-link factor graph.

Each link carries a variable node (its activity bit) and a function node
(its neighborhood-limited inverse SINR, with the out-of-neighborhood
interference supplied by a residual model).  Scheduling alternates two
phases until the configuration stops changing:

  (a) refresh the residual model per link: zero (ignore), a mean-field /
      measured estimate, or normal-approximation moments re-derived from
      the currently visible active links;
  (b) one synchronous round of randomized decisions: every inactive link
      whose own constraint check passes activates with probability
      persistence * message, every active link whose check fails switches
      off.

All message computations for a link read only the activity of links
inside its neighborhood plus that link's residual value; the exact
full-information SINR is used solely for evaluating the final result.
Random draws derive from (seed, round, link id), so reordering link
updates within a round cannot change a run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.special import ndtr

from linksched import meanfield as mf
from linksched import network as nc

__all__ = [
    "FactorGraph",
    "IgnoreResidual",
    "MeanFieldResidual",
    "NormalResidual",
    "ResidualMode",
    "SchedulePolicy",
    "RoundRecord",
    "ScheduleTrace",
    "build_factor_graph",
    "local_potential_normal",
    "msg_fn_to_var",
    "msg_var_to_fn_normal",
    "msg_meanfield",
    "message_vector",
    "schedule",
    "mode_from_string",
]

_BIG = 1e300


@dataclass(eq=False)
class FactorGraph:
    """Bipartite graph with one variable node and one function node per link;
    function node k connects to the variable nodes of N_k plus its own."""

    n_links: int
    edges: np.ndarray  # (L, L) bool, edges[k, m]: function k -- variable m

    def variables_of(self, k):
        """Variable nodes adjacent to function node k."""
        return np.flatnonzero(self.edges[k])

    def functions_of(self, m):
        """Function nodes adjacent to variable node m."""
        return np.flatnonzero(self.edges[:, m])


def build_factor_graph(net, nbhd):
    edges = nbhd.members.copy()
    np.fill_diagonal(edges, True)
    return FactorGraph(n_links=net.n_links, edges=edges)


@dataclass(frozen=True)
class IgnoreResidual:
    """Conventional baseline: out-of-neighborhood interference treated as zero."""


@dataclass(frozen=True)
class MeanFieldResidual:
    """Deterministic residual field.

    source "solve": full mean-field solve on the first round, then per-round
    refreshes of h* from the currently observed activities.
    source "measurement": the true residual perturbed by relative Gaussian
    measurement error (relative_sigma = 0 reproduces it exactly).
    """

    source: str = "solve"
    relative_sigma: float = 0.0

    def __post_init__(self):
        if self.source not in ("solve", "measurement"):
            raise ValueError("source must be 'solve' or 'measurement'")
        if self.relative_sigma < 0:
            raise ValueError("relative_sigma must be nonnegative")


@dataclass(frozen=True)
class NormalResidual:
    """Normal residual model with per-link frontier geometry.

    The spacing bounds (r_l, r_u) are re-derived every round from the
    nearest-neighbor distances of the active links each link can see.  A
    link seeing fewer than two falls back to the spacing at which a single
    interferer would exhaust its SINR budget (or the configured bounds),
    with the fallback estimate scaled by the visible activity count so the
    model bootstraps from nothing rather than blocking an idle network.
    Frontiers beyond ``max_radius`` (default: the area diagonal) are
    dropped: interferers cannot sit outside the deployment region.
    ``estimate_floor`` keeps the observed estimate from dropping below that
    fraction of the fallback level, guarding against sparse local samples.
    """

    fallback_r_l: Optional[float] = None
    fallback_r_u: Optional[float] = None
    estimate_floor: float = 0.5
    max_radius: Optional[float] = None
    variance_formula: str = "stated"

    def __post_init__(self):
        if (self.fallback_r_l is None) != (self.fallback_r_u is None):
            raise ValueError("give both fallback bounds or neither")
        if self.fallback_r_l is not None and not 0 < self.fallback_r_l <= self.fallback_r_u:
            raise ValueError("need 0 < fallback_r_l <= fallback_r_u")
        if self.variance_formula not in ("stated", "exact"):
            raise ValueError("variance_formula must be 'stated' or 'exact'")


ResidualMode = Union[IgnoreResidual, MeanFieldResidual, NormalResidual]


def mode_from_string(text):
    """Parse a mode label: 'ignore', 'mf', 'mf-meas:<sigma>' or 'clt'."""
    if text == "ignore":
        return IgnoreResidual()
    if text == "mf":
        return MeanFieldResidual(source="solve")
    if text.startswith("mf-meas:"):
        return MeanFieldResidual(source="measurement", relative_sigma=float(text.split(":", 1)[1]))
    if text == "mf-meas":
        return MeanFieldResidual(source="measurement", relative_sigma=0.0)
    if text == "clt":
        return NormalResidual()
    raise ValueError(f"unknown residual mode {text!r}")


def mode_label(mode):
    if isinstance(mode, IgnoreResidual):
        return "ignore"
    if isinstance(mode, MeanFieldResidual):
        if mode.source == "solve":
            return "mf"
        return f"mf-meas:{mode.relative_sigma:g}"
    if isinstance(mode, NormalResidual):
        return "clt"
    raise TypeError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class SchedulePolicy:
    """Decision-loop knobs.

    persistence       : probability scale of randomized activation attempts
    contention_target : expected activation attempts per neighborhood and
                        round; each link divides its attempt probability by
                        the eligible links it sees, which keeps the first
                        waves from mass-colliding
    explore           : attempt-probability factor for entrants whose entry
                        would visibly break an in-range incumbent; the
                        randomized escape hatch out of stuck configurations
    explore_decay     : per-round geometric decay of the exploration factor
                        (annealed randomization; 1 = no decay)
    backoff           : per-link attempt-probability decay after each failed
                        tenure or speculative entry
    activation_gate   : admission confidence: an inactive link is eligible
                        only when its activation probability exceeds this
                        (eviction stays at 0.5, giving admission hysteresis
                        under a noisy residual model)
    estimate_smoothing: per-round exponential-moving-average weight on the
                        learned residual estimate (1 = no smoothing)
    stability_window  : rounds without any change that define convergence
    initial_active    : link ids active at round zero
    asynchronous      : update a single uniformly drawn link per round
    record_snapshots  : keep the per-round configuration snapshots
    """

    persistence: float = 0.7
    contention_target: float = 12.0
    explore: float = 0.1
    explore_decay: float = 0.5
    backoff: float = 0.25
    activation_gate: float = 0.8
    estimate_smoothing: float = 0.5
    stability_window: int = 3
    initial_active: tuple = ()
    asynchronous: bool = False
    record_snapshots: bool = False

    @staticmethod
    def exploratory(**overrides):
        """Profile for small nets and escape-dance experiments: undamped
        randomized exploration, no backoff, plain 0.5 admission gate."""
        base = dict(persistence=0.5, contention_target=1000.0, explore=1.0,
                    explore_decay=1.0, backoff=1.0, activation_gate=0.5,
                    estimate_smoothing=1.0)
        base.update(overrides)
        return SchedulePolicy(**base)

    def __post_init__(self):
        if not 0 < self.persistence <= 1:
            raise ValueError("persistence must lie in (0, 1]")
        if self.contention_target <= 0:
            raise ValueError("contention_target must be positive")
        if not 0 <= self.explore <= 1:
            raise ValueError("explore must lie in [0, 1]")
        if not 0 < self.explore_decay <= 1:
            raise ValueError("explore_decay must lie in (0, 1]")
        if not 0 < self.backoff <= 1:
            raise ValueError("backoff must lie in (0, 1]")
        if not 0.5 <= self.activation_gate < 1:
            raise ValueError("activation_gate must lie in [0.5, 1)")
        if not 0 < self.estimate_smoothing <= 1:
            raise ValueError("estimate_smoothing must lie in (0, 1]")
        if self.stability_window < 1:
            raise ValueError("stability_window must be at least 1")


class RoundRecord(NamedTuple):
    round: int
    changed: int
    n_active: int


@dataclass(eq=False)
class ScheduleTrace:
    """Outcome of one scheduling run; outage and reuse are evaluated with the
    exact full-information SINR, not the approximated one."""

    mode: str
    seed: int
    iterations: int
    converged: bool
    rounds: list
    final_config: np.ndarray
    final_active: tuple
    final_outage: float
    final_reuse: int
    snapshots: Optional[list] = None

    def to_dict(self):
        doc = {
            "mode": self.mode,
            "seed": self.seed,
            "iterations": self.iterations,
            "converged": self.converged,
            "rounds": [r._asdict() for r in self.rounds],
            "final_active": list(self.final_active),
            "final_outage": self.final_outage,
            "final_reuse": self.final_reuse,
        }
        if self.snapshots is not None:
            doc["snapshots"] = [list(s) for s in self.snapshots]
        return doc


def local_potential_normal(link, config, moments, net, nbhd):
    """Mean and variance of a link's local inverse SINR when the residual is
    normal with the given (mean, variance) in raw power units:

        E = (in-range interference + N_b + E(n)) / signal,
        V = V(n) / signal^2.

    Only the activity of links inside the neighborhood enters.
    """
    mean_n, var_n = float(moments[0]), float(moments[1])
    if var_n < 0:
        raise ValueError("residual variance must be nonnegative")
    i_in = float(nc.in_range_interference(config, net, nbhd)[link])
    s = net.signal[link]
    return (i_in + net.noise + mean_n) / s, var_n / s**2


def msg_fn_to_var(psi, r_th):
    """Permission message U(R_th - psi): 1 iff the threshold strictly exceeds
    the local inverse SINR."""
    return 1 if r_th > psi else 0


def msg_var_to_fn_normal(mean, variance, r_th):
    """Activation probability of a link whose local inverse SINR is normal:
    Phi((R_th - mean) / sqrt(variance)), degenerating to the permission step
    when the variance vanishes."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    if variance == 0:
        return float(msg_fn_to_var(mean, r_th))
    return float(ndtr((r_th - mean) / np.sqrt(variance)))


def msg_meanfield(link, config, h_star, net, nbhd, r_th):
    """Permission message with a deterministic residual (point-mass local
    potential): the step applied to the local inverse SINR with Res = h*."""
    if h_star < 0:
        raise ValueError("h_star must be nonnegative")
    psi = nc.inverse_sinr_local(link, config, nbhd, h_star, net)
    return msg_fn_to_var(psi, r_th)


def message_vector(config, res_mean, res_var, net, nbhd, r_th, w_in=None):
    """Var-to-fn message of every link: step permissions for deterministic
    residuals (res_var None or all zero), activation probabilities for
    normal residuals.  Reads only in-neighborhood activity plus the
    supplied residual."""
    act = np.asarray(config, dtype=bool)
    if w_in is None:
        w = np.where(np.isfinite(net.cross_gains), net.cross_gains, _BIG)
        w_in = np.where(nbhd.members, w, 0.0)
    i_in = w_in[:, act].sum(axis=1)
    mean_psi = (i_in + net.noise + res_mean) / net.signal
    if res_var is None:
        return (mean_psi < r_th).astype(float)
    res_var = np.asarray(res_var, dtype=float)
    sd_psi = np.sqrt(res_var) / net.signal
    out = np.where(mean_psi < r_th, 1.0, 0.0)
    positive = sd_psi > 0
    if positive.any():
        out[positive] = ndtr((r_th - mean_psi[positive]) / sd_psi[positive])
    return out


def _round_rng(seed, round_index, stream):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(round_index, stream)))


def _derive_spacing_bounds(act, nbhd, txdist, fallback):
    """Per-link (r_l, r_u) bounding the active-link separations a link sees.

    The frontier spacings model the distance between an interferer and its
    closest active neighbor (the contention range), so the bounds are the
    smallest and largest nearest-neighbor distance among the visible active
    transmitters; the all-pairs maximum would degenerate to the
    neighborhood diameter.  A link seeing fewer than two active neighbors
    keeps the fallback bounds.  Returns the bounds plus the per-link
    confidence in them (0 nothing seen, 1/2 one interferer, 1 observed).
    """
    L = nbhd.members.shape[0]
    r_l = fallback[0].copy()
    r_u = fallback[1].copy()
    confidence = np.zeros(L)
    for k in range(L):
        vis = np.flatnonzero(act & nbhd.members[k])
        if len(vis) < 2:
            # bootstrap: with nothing observed there is nothing to
            # extrapolate; one visible interferer gives half confidence
            confidence[k] = 0.5 * len(vis)
            continue
        confidence[k] = 1.0
        dd = txdist[np.ix_(vis, vis)].copy()
        np.fill_diagonal(dd, np.inf)
        nearest = dd.min(axis=1)
        r_l[k] = max(float(nearest.min()), 1e-9)
        r_u[k] = max(float(nearest.max()), r_l[k])
    return r_l, r_u, confidence


def _budget_fallback_bounds(nbhd, net, r_th, budget_fraction=0.5):
    """Fallback frontier spacing for links that see no interferer pattern:
    the spacing at which the implied residual would consume a fixed
    fraction of the link's SINR budget.  Solved per link by bisection on
    s with (r_l, r_u) = (s, 1.5 s); never self-blocking because the
    implied guard stays below the budget."""
    L = net.n_links
    p0 = float(net.power.mean())
    max_radius = float(net.area_side) * np.sqrt(2.0)
    target = budget_fraction * r_th * net.signal
    lo = np.full(L, 1e-3)
    hi = np.full(L, max(4.0 * net.area_side, 10.0 * nbhd.gamma_f))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        mean, _ = _normal_moments_batch(nbhd.gamma_f, mid, 1.5 * mid, net.alpha, p0,
                                        max_radius, "stated")
        wide = mean > target  # spacing too tight, residual too large
        lo = np.where(wide, mid, lo)
        hi = np.where(wide, hi, mid)
    s = 0.5 * (lo + hi)
    return s, 1.5 * s


def _normal_moments_batch(gamma_f, r_l, r_u, alpha, p0, max_radius, variance_formula):
    """Summed frontier moments for per-link spacing bounds, truncating the
    frontier ladder at max_radius.  Returns (mean, variance) arrays."""
    L = len(r_l)
    rc_bar = 0.5 * (r_l + r_u)
    # frontier k contributes while its mean radius stays inside max_radius
    k_counts = np.maximum(np.floor((max_radius - gamma_f) / rc_bar).astype(int) + 1, 1)
    k_cap = int(k_counts.max())
    ks = np.arange(1, k_cap + 1)[None, :]
    base = gamma_f + (ks - 1) * rc_bar[:, None]
    d1 = base + r_u[:, None]
    d2 = base + r_l[:, None]
    width = (r_u - r_l)[:, None]
    degenerate = width[:, 0] <= 1e-12 * r_u
    with np.errstate(invalid="ignore", divide="ignore"):
        e1 = 2 * np.pi * p0 * (d1 ** (2 - alpha) - d2 ** (2 - alpha)) / ((2 - alpha) * width)
        e2 = 4 * np.pi**2 * p0**2 * (d1 ** (3 - 2 * alpha) - d2 ** (3 - 2 * alpha)) / ((3 - 2 * alpha) * width)
    if degenerate.any():
        e1[degenerate] = 2 * np.pi * p0 * d2[degenerate] ** (1 - alpha)
        e2[degenerate] = (2 * np.pi * p0) ** 2 * d2[degenerate] ** (2 * (1 - alpha))
    inv1 = np.where(degenerate, 1.0 / r_l, np.log(r_u / r_l) / np.where(width[:, 0] == 0, 1.0, width[:, 0]))
    inv2 = 1.0 / (r_l * r_u)
    mask = ks <= k_counts[:, None]
    ev = e1 * inv1[:, None]
    if variance_formula == "exact":
        vv = e2 * inv2[:, None] - ev**2
    else:
        vv = (e2 - e1**2) / (r_l * r_u)[:, None]
    mean = (ev * mask).sum(axis=1)
    var = np.maximum((vv * mask).sum(axis=1), 0.0)
    return mean, var


def schedule(net, nbhd, params, mode, seed, max_iter=200, policy=SchedulePolicy()):
    """Run the two-phase decision loop until the configuration is stable.

    Returns a trace with per-round change counts; non-convergence within
    ``max_iter`` rounds is reported on the trace, not raised.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    L = net.n_links
    sigma = nc.config_from_active(policy.initial_active, L)

    w = np.where(np.isfinite(net.cross_gains), net.cross_gains, _BIG)
    w_in = np.where(nbhd.members, w, 0.0)
    # damage[m, k]: how much activating k would add to link m's local inverse
    # SINR.  Gating applies where k is in m's neighborhood, i.e. m's receiver
    # lies within gamma_f of k's transmitter, so the headroom message k needs
    # travels no farther than its own information radius.
    damage = w / net.signal[:, None]
    visible_to = nbhd.members
    attempt_scale = np.ones(L)

    txp = net.positions[net.tx]
    txdist = None
    p0 = float(net.power.mean())
    fallback = None
    if isinstance(mode, NormalResidual):
        txdist = np.hypot(txp[:, None, 0] - txp[None, :, 0], txp[:, None, 1] - txp[None, :, 1])
        max_radius = mode.max_radius
        if max_radius is None:
            max_radius = float(net.area_side) * np.sqrt(2.0)
        max_radius = max(max_radius, nbhd.gamma_f * 1.5)
        if mode.fallback_r_l is not None:
            fallback = (np.full(L, mode.fallback_r_l), np.full(L, mode.fallback_r_u))
        else:
            fallback = _budget_fallback_bounds(nbhd, net, params.r_th)
        floor_mean, floor_var = _normal_moments_batch(
            nbhd.gamma_f, fallback[0], fallback[1], net.alpha, p0, max_radius,
            mode.variance_formula)
        floor_mean = mode.estimate_floor * floor_mean
        floor_var = mode.estimate_floor ** 2 * floor_var

    mf_h_norm = None  # normalized mean-field h*, refreshed per round
    res_smoothed = None

    rounds = []
    snapshots = [nc.active_ids(sigma)] if policy.record_snapshots else None
    quiet = 0
    converged = False
    iterations = 0

    for t in range(max_iter):
        iterations = t + 1
        act = sigma.astype(bool)

        # phase (a): residual refresh
        res_var = None
        if isinstance(mode, IgnoreResidual):
            res_mean = np.zeros(L)
        elif isinstance(mode, MeanFieldResidual):
            if mode.source == "solve":
                if mf_h_norm is None:
                    sol = mf.mf_solve(net, nbhd, params)
                    mf_h_norm = sol.h_star
                else:
                    coeff = mf.mf_coefficients(net, nbhd, params)
                    mf_h_norm = coeff.pair_out @ sigma.astype(float)
                res_mean = mf_h_norm * net.signal
            else:
                true_res = nc.residual_interference(sigma, net, nbhd)
                rng = _round_rng(seed, t, 1)
                eps = rng.normal(0.0, 1.0, size=L) * mode.relative_sigma
                res_mean = np.maximum(true_res * (1.0 + eps), 0.0)
        elif isinstance(mode, NormalResidual):
            r_l, r_u, confidence = _derive_spacing_bounds(act, nbhd, txdist, fallback)
            res_mean, res_var = _normal_moments_batch(
                nbhd.gamma_f, r_l, r_u, net.alpha, p0, max_radius, mode.variance_formula
            )
            # trust in the fallback extrapolation ramps up over the first
            # rounds: round 0 starts from an idle network (nothing to
            # extrapolate), after a few rounds a link with an empty
            # neighborhood still guards against unseen interferers
            confidence = np.maximum(confidence, min(1.0, t / 4.0))
            res_mean = res_mean * confidence
            res_var = res_var * confidence
            # a sparse local sample can badly undershoot the field beyond
            # the horizon; the budget-capped fallback acts as a prior floor
            ramp = min(1.0, t / 4.0)
            low = res_mean < ramp * floor_mean
            res_mean = np.where(low, ramp * floor_mean, res_mean)
            res_var = np.where(low, ramp ** 2 * floor_var, res_var)
            if policy.estimate_smoothing < 1.0:
                if res_smoothed is not None:
                    beta = policy.estimate_smoothing
                    res_mean = (1.0 - beta) * res_smoothed[0] + beta * res_mean
                    res_var = (1.0 - beta) * res_smoothed[1] + beta * res_var
                res_smoothed = (res_mean, res_var)
        else:
            raise TypeError(f"unknown residual mode {mode!r}")

        # phase (b): messages and randomized synchronous decisions
        p = message_vector(sigma, res_mean, res_var, net, nbhd, params.r_th, w_in=w_in)
        mean_psi = (w_in[:, act].sum(axis=1) + net.noise + res_mean) / net.signal
        # an entrant is rude when some visible incumbent would lose its
        # remaining local headroom; incumbents with a random residual model
        # shave the headroom they broadcast by one standard deviation.
        # Rude attempts run at the exploration rate, which is what lets
        # runs escape stuck configurations.
        headroom = params.r_th - mean_psi
        if res_var is not None:
            headroom = headroom - np.sqrt(res_var) / net.signal
        busts = (damage >= headroom[:, None]) & act[:, None] & visible_to
        rude = busts.any(axis=0)
        rng = _round_rng(seed, t, 0)
        draws = rng.uniform(size=L)
        priority = rng.uniform(size=L)
        eligible = (~act) & (p > policy.activation_gate)
        n_local = nbhd.members.astype(float) @ eligible.astype(float) + eligible
        contention = np.minimum(1.0, policy.contention_target / np.maximum(n_local, 1.0))
        explore_t = policy.explore * policy.explore_decay ** t
        attempt = (policy.persistence * p * attempt_scale * contention
                   * np.where(rude, explore_t, 1.0))
        candidate = eligible & (draws < attempt)
        # same-round contenders resolve locally by random priority: a
        # candidate defers to any visible higher-priority candidate whose
        # entry would use up its own remaining headroom
        defer = (
            candidate[None, :] & visible_to
            & (damage >= headroom[:, None])
            & (priority[None, :] > priority[:, None])
        ).any(axis=1)
        activate = candidate & ~defer
        deactivate = act & (p < 0.5)
        # failed tenures and speculative (rude) entries both ration future
        # attempts, so disturbance decays geometrically and runs quiesce
        attempt_scale = np.where(deactivate | (activate & rude),
                                 attempt_scale * policy.backoff, attempt_scale)
        flips = activate | deactivate
        if policy.asynchronous and flips.any():
            pick = _round_rng(seed, t, 2).choice(np.flatnonzero(flips))
            keep = np.zeros(L, dtype=bool)
            keep[pick] = True
            flips &= keep
        sigma = np.where(flips, 1 - sigma, sigma).astype(np.int8)

        changed = int(flips.sum())
        rounds.append(RoundRecord(round=t, changed=changed, n_active=int(sigma.sum())))
        if snapshots is not None:
            snapshots.append(nc.active_ids(sigma))

        quiet = quiet + 1 if changed == 0 else 0
        if quiet >= policy.stability_window:
            converged = True
            break

    out = nc.outage_probability(sigma, net, params)
    return ScheduleTrace(
        mode=mode_label(mode),
        seed=int(seed),
        iterations=iterations,
        converged=converged,
        rounds=rounds,
        final_config=sigma,
        final_active=nc.active_ids(sigma),
        final_outage=out.outage,
        final_reuse=out.n_active,
        snapshots=snapshots,
    )
