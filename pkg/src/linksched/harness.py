"""Experiment orchestration: parameter sweeps, replication management and
outage statistics.

The key evaluation asymmetry: scheduling decisions see only neighborhood
state plus an approximated residual, but every converged configuration is
scored with the exact full-information inverse SINR.  Grid points and
replications are embarrassingly parallel; seeds derive deterministically
from (master seed, grid index, replication index), so reports are
byte-identical across runs and thread counts.
"""

from __future__ import annotations

import csv
import io
import json
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import NamedTuple, Optional

import numpy as np

from linksched import network as nc
from linksched import scheduler as sched

__all__ = [
    "TopologySpec",
    "ExperimentSpec",
    "RunRecord",
    "GridAggregate",
    "OutageReport",
    "ConvergenceStudy",
    "run_experiment",
    "convergence_study",
    "write_results_csv",
    "read_results_csv",
    "write_summary_csv",
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
]

RESULT_COLUMNS = ["mode", "gamma_f", "alpha", "sinr_th", "replication",
                  "outage", "active_links", "iterations", "converged"]

SUMMARY_COLUMNS = ["mode", "gamma_f", "alpha", "sinr_th", "replications",
                   "outage_mean", "outage_stderr", "reuse_mean",
                   "iterations_mean", "iterations_median", "nonconverged_rate"]


@dataclass(frozen=True)
class TopologySpec:
    """Random-topology family swept over: link count, area and placement.
    ``seeds`` optionally pins per-replication topology seeds; otherwise they
    derive from the master seed.  Topologies are shared across grid points
    (paired design), so mode comparisons see identical networks."""

    n_links: int = 200
    area_side: float = 10.0
    min_length: float = 1.45
    max_length: float = 1.45
    seeds: Optional[tuple] = None


@dataclass(frozen=True)
class ExperimentSpec:
    topology: TopologySpec = TopologySpec()
    gamma_f: tuple = (4.0,)
    alpha: tuple = (4.0,)
    sinr_th: tuple = (10.0,)
    modes: tuple = ("ignore", "clt")
    replications: int = 50
    master_seed: int = 0
    max_iter: int = 200
    beta: float = 100.0
    policy: Optional[dict] = None

    def __post_init__(self):
        if not (self.gamma_f and self.alpha and self.sinr_th and self.modes):
            raise ValueError("sweep lists must be nonempty")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.topology.seeds is not None and len(self.topology.seeds) < self.replications:
            raise ValueError("need one topology seed per replication")

    def grid(self):
        """Grid points in deterministic order with their indices."""
        pts = []
        i = 0
        for mode in self.modes:
            for gf in self.gamma_f:
                for al in self.alpha:
                    for th in self.sinr_th:
                        pts.append((i, mode, float(gf), float(al), float(th)))
                        i += 1
        return pts

    def to_dict(self):
        doc = asdict(self)
        doc["topology"] = asdict(self.topology)
        for key in ("gamma_f", "alpha", "sinr_th", "modes"):
            doc[key] = list(doc[key])
        if doc["topology"]["seeds"] is not None:
            doc["topology"]["seeds"] = list(doc["topology"]["seeds"])
        return doc

    @staticmethod
    def from_dict(doc):
        doc = dict(doc)
        topo = dict(doc.pop("topology", {}))
        if topo.get("seeds") is not None:
            topo["seeds"] = tuple(topo["seeds"])
        for key in ("gamma_f", "alpha", "sinr_th", "modes"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return ExperimentSpec(topology=TopologySpec(**topo), **doc)

    @staticmethod
    def load(path):
        with open(path) as fh:
            return ExperimentSpec.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


class RunRecord(NamedTuple):
    mode: str
    gamma_f: float
    alpha: float
    sinr_th: float
    replication: int
    outage: float
    active_links: int
    iterations: int
    converged: bool


@dataclass(eq=False)
class GridAggregate:
    mode: str
    gamma_f: float
    alpha: float
    sinr_th: float
    replications: int
    outage_mean: float
    outage_stderr: float
    reuse_mean: float
    iterations_mean: float
    iterations_median: float
    nonconverged_rate: float


@dataclass(eq=False)
class OutageReport:
    spec: ExperimentSpec
    rows: list
    grid: list
    failures: list = field(default_factory=list)

    def aggregate_for(self, mode=None, gamma_f=None, alpha=None, sinr_th=None):
        """Grid aggregates matching the given filters."""
        out = []
        for g in self.grid:
            if mode is not None and g.mode != mode:
                continue
            if gamma_f is not None and g.gamma_f != gamma_f:
                continue
            if alpha is not None and g.alpha != alpha:
                continue
            if sinr_th is not None and g.sinr_th != sinr_th:
                continue
            out.append(g)
        return out

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "grid": [vars(g) for g in self.grid],
            "failures": list(self.failures),
        }


def _topology_seed(spec, rep):
    if spec.topology.seeds is not None:
        return int(spec.topology.seeds[rep])
    return int(np.random.SeedSequence(entropy=spec.master_seed, spawn_key=(1, rep)).generate_state(1)[0])


def _run_seed(spec, grid_index, rep):
    return int(np.random.SeedSequence(entropy=spec.master_seed, spawn_key=(2, grid_index, rep)).generate_state(1)[0])


def _single_run(spec, grid_index, mode_text, gf, al, th, rep, record_rounds=False):
    net = nc.generate_topology(
        _topology_seed(spec, rep),
        spec.topology.n_links,
        spec.topology.area_side,
        nc.LinkPlacement(min_length=spec.topology.min_length,
                         max_length=spec.topology.max_length),
        alpha=al,
    )
    nbhd = nc.neighborhood(net, gf)
    params = nc.params_for(net, sinr_th=th, beta=spec.beta)
    policy = sched.SchedulePolicy(**(spec.policy or {}))
    trace = sched.schedule(
        net, nbhd, params,
        sched.mode_from_string(mode_text),
        seed=_run_seed(spec, grid_index, rep),
        max_iter=spec.max_iter,
        policy=policy,
    )
    # exact full-information recheck of the converged configuration
    out = nc.outage_probability(trace.final_config, net, params)
    row = RunRecord(
        mode=mode_text, gamma_f=gf, alpha=al, sinr_th=th, replication=rep,
        outage=out.outage, active_links=out.n_active,
        iterations=trace.iterations, converged=trace.converged,
    )
    if record_rounds:
        return row, [r.changed for r in trace.rounds]
    return row


def _aggregate(rows_for_point, mode, gf, al, th):
    outages = [r.outage for r in rows_for_point]
    iters = [r.iterations for r in rows_for_point]
    n = len(rows_for_point)
    mean = statistics.fmean(outages)
    stderr = statistics.stdev(outages) / np.sqrt(n) if n > 1 else 0.0
    return GridAggregate(
        mode=mode, gamma_f=gf, alpha=al, sinr_th=th, replications=n,
        outage_mean=mean,
        outage_stderr=float(stderr),
        reuse_mean=statistics.fmean(r.active_links for r in rows_for_point),
        iterations_mean=statistics.fmean(iters),
        iterations_median=float(statistics.median(iters)),
        nonconverged_rate=statistics.fmean(0.0 if r.converged else 1.0 for r in rows_for_point),
    )


def run_experiment(spec, threads=1):
    """Run every (grid point x replication), evaluate exact outage, aggregate.

    Individual replication failures are recorded on the report and excluded
    from aggregates rather than aborting the sweep.
    """
    jobs = []
    for grid_index, mode_text, gf, al, th in spec.grid():
        for rep in range(spec.replications):
            jobs.append((grid_index, mode_text, gf, al, th, rep))

    def work(job):
        grid_index, mode_text, gf, al, th, rep = job
        try:
            return _single_run(spec, grid_index, mode_text, gf, al, th, rep), None
        except Exception as exc:  # record, don't abort the sweep
            return None, {"mode": mode_text, "gamma_f": gf, "alpha": al,
                          "sinr_th": th, "replication": rep, "error": str(exc)}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    rows = [r for r, _ in results if r is not None]
    failures = [f for _, f in results if f is not None]

    grid = []
    for _, mode_text, gf, al, th in spec.grid():
        pts = [r for r in rows if (r.mode, r.gamma_f, r.alpha, r.sinr_th) == (mode_text, gf, al, th)]
        if pts:
            grid.append(_aggregate(pts, mode_text, gf, al, th))
    return OutageReport(spec=spec, rows=rows, grid=grid, failures=failures)


@dataclass(eq=False)
class ConvergenceStudy:
    spec: ExperimentSpec
    iterations: list           # per-run iteration counts
    curves: list               # per-run changed-links-per-round lists
    median_iterations: float
    histogram: dict            # iterations -> run count


def convergence_study(spec, threads=1):
    """Iterations-to-convergence and changed-link curves over the grid."""
    jobs = []
    for grid_index, mode_text, gf, al, th in spec.grid():
        for rep in range(spec.replications):
            jobs.append((grid_index, mode_text, gf, al, th, rep))

    def work(job):
        grid_index, mode_text, gf, al, th, rep = job
        return _single_run(spec, grid_index, mode_text, gf, al, th, rep, record_rounds=True)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    iters = [row.iterations for row, _ in results]
    curves = [curve for _, curve in results]
    hist = {}
    for it in iters:
        hist[it] = hist.get(it, 0) + 1
    return ConvergenceStudy(
        spec=spec,
        iterations=iters,
        curves=curves,
        median_iterations=float(statistics.median(iters)),
        histogram=dict(sorted(hist.items())),
    )


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_results_csv(rows, path_or_buf):
    """Per-replication results in the documented column order."""
    own = isinstance(path_or_buf, (str, bytes, os.PathLike))
    fh = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, c)) for c in RESULT_COLUMNS])
    finally:
        if own:
            fh.close()


def read_results_csv(path):
    """Read rows back with full precision (inverse of write_results_csv)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_COLUMNS:
            raise ValueError(f"unexpected result columns: {reader.fieldnames}")
        for rec in reader:
            rows.append(RunRecord(
                mode=rec["mode"],
                gamma_f=float(rec["gamma_f"]),
                alpha=float(rec["alpha"]),
                sinr_th=float(rec["sinr_th"]),
                replication=int(rec["replication"]),
                outage=float(rec["outage"]),
                active_links=int(rec["active_links"]),
                iterations=int(rec["iterations"]),
                converged=rec["converged"] == "true",
            ))
    return rows


def write_summary_csv(report, path_or_buf):
    """Per-grid-point aggregates (means, standard errors, convergence)."""
    own = isinstance(path_or_buf, (str, bytes, os.PathLike))
    fh = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for g in report.grid:
            writer.writerow([_fmt(getattr(g, c)) for c in SUMMARY_COLUMNS])
    finally:
        if own:
            fh.close()


def results_csv_text(rows):
    buf = io.StringIO()
    write_results_csv(rows, buf)
    return buf.getvalue()
