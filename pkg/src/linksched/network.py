"""Network topology, power-law channel gains, SINR accounting and the
scheduling objective.

Links are directed transmitter -> receiver pairs indexed 0..L-1.  A
configuration is a length-L binary vector: ``sigma[k] = 1`` means link k
is transmitting on the shared channel.  The inverse SINR of an active
link (i, j) is

    R_ij = (sum_{mn != ij} P_m * |X_m - X_j|^(-alpha) * sigma_mn + N_b)
           / (P_i * |X_i - X_j|^(-alpha))

and the scheduling constraint is R_ij <= R_th = 1/SINR_th.  Everything in
this module is exact, full-information bookkeeping; the approximation
machinery lives in :mod:`linksched.meanfield` and
:mod:`linksched.residual`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

__all__ = [
    "Network",
    "NeighborhoodSystem",
    "SchedulingParams",
    "LinkPlacement",
    "ObjectiveResult",
    "OutageResult",
    "channel_gain",
    "config_from_active",
    "active_ids",
    "inverse_sinr",
    "inverse_sinr_all",
    "inverse_sinr_local",
    "inverse_sinr_local_all",
    "residual_interference",
    "potential_energy",
    "objective_value",
    "outage_probability",
    "generate_topology",
    "linear_network",
    "neighborhood",
    "params_for",
    "save_network",
    "load_network",
]


def channel_gain(xi, xj, alpha):
    """Power-law gain ``|xi - xj|^(-alpha)`` between two points (meters)."""
    d = float(np.linalg.norm(np.asarray(xi, dtype=float) - np.asarray(xj, dtype=float)))
    if d == 0.0:
        raise ValueError("channel gain diverges for coincident points")
    return d ** (-float(alpha))


@dataclass(eq=False)
class Network:
    """Node positions, directed link set and channel parameters.

    positions : (n, 2) float array, node coordinates in meters
    links     : (L, 2) int array, rows are (tx node, rx node)
    power     : (n,) float array, per-node transmit power (P_0 = 1 default)
    alpha     : channel attenuation exponent, 2 <= alpha <= 6
    noise     : receiver noise power N_b (same units as received power)
    area_side : bounding square side length in meters
    """

    positions: np.ndarray
    links: np.ndarray
    power: np.ndarray
    alpha: float = 4.0
    noise: float = 1e-4
    area_side: float = 10.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.links = np.asarray(self.links, dtype=int)
        self.power = np.asarray(self.power, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must be an (n, 2) array")
        if self.links.ndim != 2 or self.links.shape[1] != 2:
            raise ValueError("links must be an (L, 2) array")
        if not 2.0 <= self.alpha <= 6.0:
            raise ValueError(f"alpha must lie in [2, 6], got {self.alpha}")
        if self.noise < 0:
            raise ValueError("noise power must be nonnegative")
        n = len(self.positions)
        if self.power.shape != (n,):
            raise ValueError("power must have one entry per node")
        if np.any(self.power <= 0):
            raise ValueError("transmit power must be positive for every node")
        if self.links.size and (self.links.min() < 0 or self.links.max() >= n):
            raise ValueError("link endpoints must reference existing nodes")
        if np.any(self.links[:, 0] == self.links[:, 1]):
            raise ValueError("links must connect distinct nodes")
        if np.any(self.link_lengths <= 0):
            raise ValueError("links must have positive length")

    @property
    def n_nodes(self):
        return len(self.positions)

    @property
    def n_links(self):
        return len(self.links)

    @property
    def tx(self):
        return self.links[:, 0]

    @property
    def rx(self):
        return self.links[:, 1]

    @cached_property
    def link_lengths(self):
        d = self.positions[self.links[:, 0]] - self.positions[self.links[:, 1]]
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def signal(self):
        """Per-link received signal power P_i * l_ij^(-alpha)."""
        return self.power[self.tx] * self.link_lengths ** (-self.alpha)

    @cached_property
    def cross_gains(self):
        """(L, L) matrix W with W[k, m] = P_tx(m) * |X_tx(m) - X_rx(k)|^(-alpha).

        Entry (k, m) is the interference power link m's transmitter deposits
        at link k's receiver.  The diagonal is zero.  Links whose transmitter
        coincides with another link's receiver (shared nodes on a chain)
        produce +inf, i.e. those two links can never be active together.
        """
        txp = self.positions[self.tx]
        rxp = self.positions[self.rx]
        d = np.hypot(
            rxp[:, None, 0] - txp[None, :, 0],
            rxp[:, None, 1] - txp[None, :, 1],
        )
        with np.errstate(divide="ignore"):
            w = self.power[self.tx][None, :] * d ** (-self.alpha)
        np.fill_diagonal(w, 0.0)
        return w

    @cached_property
    def diameter(self):
        """Largest node-to-node distance (meters)."""
        p = self.positions
        d = np.hypot(p[:, None, 0] - p[None, :, 0], p[:, None, 1] - p[None, :, 1])
        return float(d.max())


@dataclass(eq=False)
class NeighborhoodSystem:
    """Per-link complete-information sets for a radius gamma_f.

    ``members[k, m]`` is True iff link m's transmitter lies within gamma_f
    of link k's receiver (and m != k): the interferers link k can see.
    """

    gamma_f: float
    members: np.ndarray

    def __post_init__(self):
        if self.gamma_f <= 0:
            raise ValueError("gamma_f must be positive")
        self.members = np.asarray(self.members, dtype=bool)
        if np.any(np.diag(self.members)):
            raise ValueError("a link may not be its own neighbor")

    def neighbors(self, k):
        """Link ids in N_k."""
        return np.flatnonzero(self.members[k])


def neighborhood(net, gamma_f):
    """Build the neighborhood system of radius gamma_f for a network."""
    if gamma_f <= 0:
        raise ValueError("gamma_f must be positive")
    txp = net.positions[net.tx]
    rxp = net.positions[net.rx]
    d = np.hypot(
        rxp[:, None, 0] - txp[None, :, 0],
        rxp[:, None, 1] - txp[None, :, 1],
    )
    members = d <= gamma_f
    np.fill_diagonal(members, False)
    return NeighborhoodSystem(gamma_f=float(gamma_f), members=members)


@dataclass(frozen=True)
class SchedulingParams:
    """Objective constants: reward R0, inverse-SINR threshold R_th = 1/SINR_th
    and the constraint-violation penalty weight beta."""

    r0: float
    r_th: float
    beta: float = 100.0

    def __post_init__(self):
        if self.r_th <= 0:
            raise ValueError("r_th must be positive")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")

    @property
    def sinr_th(self):
        return 1.0 / self.r_th


def params_for(net, sinr_th=10.0, beta=100.0, r0=None):
    """Scheduling parameters sized for a network.

    R0 defaults to 10x the largest interference-free inverse SINR plus
    R_th, which keeps R0 > R_ij for every link whenever the constraint
    holds.
    """
    if sinr_th <= 0:
        raise ValueError("sinr_th must be positive")
    r_th = 1.0 / sinr_th
    floor = net.noise / net.signal
    if r0 is None:
        r0 = 10.0 * float(floor.max()) + r_th
    if r0 <= float(floor.max()):
        raise ValueError("r0 must exceed the interference-free inverse SINR of every link")
    return SchedulingParams(r0=float(r0), r_th=r_th, beta=float(beta))


def config_from_active(active, n_links):
    """Binary activity vector with the given links switched on."""
    sigma = np.zeros(n_links, dtype=np.int8)
    active = np.asarray(list(active), dtype=int)
    if active.size:
        if active.min() < 0 or active.max() >= n_links:
            raise ValueError("active link id out of range")
        sigma[active] = 1
    return sigma


def active_ids(config):
    """Sorted tuple of active link ids."""
    return tuple(int(k) for k in np.flatnonzero(np.asarray(config)))


def _as_config(config, net):
    sigma = np.asarray(config)
    if sigma.shape != (net.n_links,):
        raise ValueError("configuration must assign one bit to every link")
    if not np.isin(sigma, (0, 1)).all():
        raise ValueError("configuration entries must be 0 or 1")
    return sigma.astype(bool)


def inverse_sinr_all(config, net):
    """Exact inverse SINR of every link (active or not) under a configuration."""
    act = _as_config(config, net)
    interference = net.cross_gains[:, act].sum(axis=1)
    return (interference + net.noise) / net.signal


def inverse_sinr(link, config, net):
    """Exact inverse SINR ``R_ij`` of one link under a configuration."""
    return float(inverse_sinr_all(config, net)[link])


def in_range_interference(config, net, nbhd):
    """Per-link interference from active transmitters inside the neighborhood."""
    act = _as_config(config, net)
    w = np.where(nbhd.members, net.cross_gains, 0.0)
    return w[:, act].sum(axis=1)


def residual_interference(config, net, nbhd):
    """Exact out-of-neighborhood interference h_ij at each receiver (raw power)."""
    act = _as_config(config, net)
    out = ~nbhd.members.copy()
    np.fill_diagonal(out, False)
    w = np.where(out, net.cross_gains, 0.0)
    return w[:, act].sum(axis=1)


def inverse_sinr_local_all(config, nbhd, res, net):
    """Neighborhood-limited inverse SINR with a supplied residual estimate.

    ``res`` is the per-link approximation of the interference arriving from
    outside the neighborhood, in raw received-power units.  Passing the
    exact out-of-range interference recovers :func:`inverse_sinr_all`.
    """
    res = np.asarray(res, dtype=float)
    if res.shape == ():
        res = np.full(net.n_links, float(res))
    if np.any(res < 0):
        raise ValueError("residual interference must be nonnegative")
    return (in_range_interference(config, net, nbhd) + net.noise + res) / net.signal


def inverse_sinr_local(link, config, nbhd, res, net):
    """Neighborhood-limited inverse SINR of one link (Res >= 0 scalar)."""
    if res < 0:
        raise ValueError("residual interference must be nonnegative")
    full = np.zeros(net.n_links)
    full[link] = res
    return float(inverse_sinr_local_all(config, nbhd, full, net)[link])


def _unit_step(x):
    # U(x) = 1 for x > 0; the constraint penalty is off exactly at R = R_th.
    return (np.asarray(x) > 0).astype(float)


def potential_energy(config, net, nbhd, params, residual):
    """System potential energy of a configuration.

    ``residual`` supplies the per-link h_ij (raw power units).  With the
    exact out-of-range interference this is the exact energy

        H = sum (-R0 + R_ij) sigma_ij + beta * sum U(R_ij - R_th) sigma_ij

    expanded over the neighborhood split; with an estimate it is the
    approximated energy, the constraint term evaluated consistently with
    the estimate.
    """
    act = _as_config(config, net)
    residual = np.asarray(residual, dtype=float)
    if residual.shape != (net.n_links,):
        raise ValueError("residual must supply one value per link")
    if np.any(residual < 0):
        raise ValueError("residual interference must be nonnegative")

    # every term carries sigma_ij, so only active rows contribute (this also
    # keeps infinite interference on idle shared-node links out of the sums)
    sig = net.signal[act]
    base = float((-params.r0 + net.noise / sig).sum())
    i_in = in_range_interference(config, net, nbhd)[act]
    pair = float((i_in / sig).sum())
    res_term = float((residual[act] / sig).sum())
    r_local = (i_in + net.noise + residual[act]) / sig
    penalty = params.beta * float(_unit_step(r_local - params.r_th).sum())
    return base + pair + res_term + penalty


class ObjectiveResult(NamedTuple):
    value: float
    feasible: bool


def objective_value(config, net, params):
    """Channel-reuse objective sum (R0 - R_ij) sigma_ij with the exact R_ij,
    plus whether every active link satisfies R_ij <= R_th."""
    act = _as_config(config, net)
    r = inverse_sinr_all(config, net)
    value = float((params.r0 - r[act]).sum())
    feasible = bool(np.all(r[act] <= params.r_th))
    return ObjectiveResult(value=value, feasible=feasible)


class OutageResult(NamedTuple):
    outage: float
    n_active: int
    no_active_links: bool


def outage_probability(config, net, params):
    """Fraction of active links whose exact inverse SINR exceeds R_th.

    A configuration with no active links has no outage by definition; the
    result flags that case explicitly.
    """
    act = _as_config(config, net)
    n_active = int(act.sum())
    if n_active == 0:
        return OutageResult(outage=0.0, n_active=0, no_active_links=True)
    r = inverse_sinr_all(config, net)
    frac = float(np.mean(r[act] > params.r_th))
    return OutageResult(outage=frac, n_active=n_active, no_active_links=False)


@dataclass(frozen=True)
class LinkPlacement:
    """Random link placement: transmitter uniform in the square, receiver at
    a uniform angle and a length drawn uniformly from [min_length,
    max_length]; placements leaving the area are redrawn.

    The default places every receiver at a fixed 1.45 m.  Equal link
    lengths keep all links equally exposed to unseen far interference,
    which is the regime where the neighborhood cutoff visibly matters;
    area-uniform receiver disks instead yield a short-link majority whose
    selection under the local constraint hides the effect entirely.
    """

    min_length: float = 1.45
    max_length: float = 1.45
    max_attempts: int = 1000

    def __post_init__(self):
        if not 0 < self.min_length <= self.max_length:
            raise ValueError("need 0 < min_length <= max_length")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")


def generate_topology(seed, n_links, area_side=10.0, placement=LinkPlacement(), alpha=4.0, noise=1e-4):
    """Random network: ``n_links`` directed links with i.i.d. uniform
    transmitter positions on the square, reproducible bit-exactly per seed."""
    if n_links <= 0:
        raise ValueError("n_links must be positive")
    if area_side <= 0:
        raise ValueError("area_side must be positive")
    if placement.min_length >= area_side:
        raise ValueError("links cannot be longer than the area side")
    rng = np.random.default_rng(seed)
    positions = np.empty((2 * n_links, 2))
    links = np.empty((n_links, 2), dtype=int)
    for k in range(n_links):
        for attempt in range(placement.max_attempts):
            txp = rng.uniform(0.0, area_side, size=2)
            r = rng.uniform(placement.min_length, placement.max_length)
            theta = rng.uniform(0.0, 2.0 * np.pi)
            rxp = txp + r * np.array([np.cos(theta), np.sin(theta)])
            if (rxp >= 0).all() and (rxp <= area_side).all():
                break
        else:
            raise RuntimeError(f"could not place link {k} after {placement.max_attempts} attempts")
        positions[2 * k] = txp
        positions[2 * k + 1] = rxp
        links[k] = (2 * k, 2 * k + 1)
    return Network(
        positions=positions,
        links=links,
        power=np.ones(2 * n_links),
        alpha=alpha,
        noise=noise,
        area_side=float(area_side),
    )


def linear_network(n_nodes, spacing=1.0, alpha=4.0, noise=1e-4):
    """Chain of ``n_nodes`` equally spaced nodes with ``n_nodes - 1`` directed
    links all pointing the same way (node k -> node k+1)."""
    if n_nodes < 2:
        raise ValueError("a linear network needs at least two nodes")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    xs = np.arange(n_nodes) * spacing
    positions = np.column_stack([xs, np.zeros(n_nodes)])
    links = np.column_stack([np.arange(n_nodes - 1), np.arange(1, n_nodes)])
    return Network(
        positions=positions,
        links=links,
        power=np.ones(n_nodes),
        alpha=alpha,
        noise=noise,
        area_side=float(xs[-1]) if n_nodes > 1 else spacing,
    )


def network_to_dict(net):
    return {
        "nodes": [
            {"id": i, "x": float(net.positions[i, 0]), "y": float(net.positions[i, 1]), "power": float(net.power[i])}
            for i in range(net.n_nodes)
        ],
        "links": [
            {"id": k, "tx": int(net.links[k, 0]), "rx": int(net.links[k, 1])}
            for k in range(net.n_links)
        ],
        "alpha": float(net.alpha),
        "noise": float(net.noise),
        "area_side": float(net.area_side),
    }


def network_from_dict(doc):
    nodes = sorted(doc["nodes"], key=lambda n: n["id"])
    if [n["id"] for n in nodes] != list(range(len(nodes))):
        raise ValueError("node ids must be 0..n-1")
    links = sorted(doc["links"], key=lambda l: l["id"])
    if [l["id"] for l in links] != list(range(len(links))):
        raise ValueError("link ids must be 0..L-1")
    return Network(
        positions=np.array([[n["x"], n["y"]] for n in nodes]),
        links=np.array([[l["tx"], l["rx"]] for l in links]),
        power=np.array([n["power"] for n in nodes]),
        alpha=doc["alpha"],
        noise=doc["noise"],
        area_side=doc["area_side"],
    )


def save_network(net, path):
    """Write the network as JSON; floats round-trip at full double precision."""
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh, indent=1)
        fh.write("\n")


def load_network(path):
    with open(path) as fh:
        return network_from_dict(json.load(fh))
