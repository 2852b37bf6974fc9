"""Command-line entry point.

Subcommands: gen (random topology), oracle (exhaustive enumeration),
mf (mean-field solve), clt (frontier moments and normality diagnostic),
schedule (one scheduling run), sweep (experiment grid).

Exit codes: 0 success, 1 argument error, 2 runtime or domain error.
Diagnostics go to stderr; data goes to files or stdout.  Stochastic
subcommands require an explicit --seed (or a master seed in the sweep
spec); nothing draws from ambient randomness.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys


from linksched import harness, meanfield, network, oracle, residual, scheduler

__all__ = ["dispatch", "main"]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="linksched",
        description="Distributed SINR link-scheduling simulator",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="cap on worker threads for sweep parallelism")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("gen", help="generate a random topology as JSON")
    p.add_argument("--seed", type=int, required=True, help="topology seed (required)")
    p.add_argument("--n-links", type=int, default=200)
    p.add_argument("--area-side", type=float, default=10.0)
    p.add_argument("--length", type=float, default=1.45, help="link length (fixed)")
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--noise", type=float, default=1e-4)
    p.add_argument("--out", required=True, help="output network JSON path")

    p = sub.add_parser("oracle", help="enumerate feasible configurations")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--net", help="network JSON path")
    src.add_argument("--linear", type=int, metavar="N", help="linear chain with N nodes")
    p.add_argument("--rule", choices=["separation", "sinr"], default="separation")
    p.add_argument("--contention", type=int, default=1)
    p.add_argument("--interference", type=int, default=2)
    p.add_argument("--sinr-th", type=float, default=10.0)
    p.add_argument("--alpha", type=float, default=4.0, help="attenuation for --linear nets")
    p.add_argument("--maximal", action="store_true", help="keep only set-inclusion maximal configurations")
    p.add_argument("--json", dest="json_out", help="also write the configurations as JSON")
    p.add_argument("--seed", type=int, help="unused; enumeration is deterministic")

    p = sub.add_parser("mf", help="solve the mean-field equations for a network")
    p.add_argument("--net", required=True)
    p.add_argument("--gamma-f", type=float, required=True)
    p.add_argument("--sinr-th", type=float, default=10.0)
    p.add_argument("--beta", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=4000)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--out", required=True, help="solution JSON path")
    p.add_argument("--seed", type=int, help="unused; the solver is deterministic")

    p = sub.add_parser("clt", help="frontier moments, normality diagnostic, optional MC check")
    p.add_argument("--gamma-f", type=float, required=True)
    p.add_argument("--r-l", type=float, default=1.0)
    p.add_argument("--r-u", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--p0", type=float, default=1.0)
    p.add_argument("--k", type=int, default=50, help="frontier count for the per-k table")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-json", required=True)
    p.add_argument("--mc", type=int, default=0, metavar="N", help="Monte-Carlo samples (0 = skip)")
    p.add_argument("--seed", type=int, help="required with --mc")

    p = sub.add_parser("schedule", help="one distributed scheduling run")
    p.add_argument("--net", required=True)
    p.add_argument("--mode", required=True,
                   help="ignore | mf | mf-meas:<sigma> | clt")
    p.add_argument("--gamma-f", type=float, required=True)
    p.add_argument("--sinr-th", type=float, default=10.0)
    p.add_argument("--alpha", type=float, help="override the network's attenuation factor")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--beta", type=float, default=100.0)
    p.add_argument("--profile", choices=["default", "exploratory"], default="default",
                   help="decision-policy profile")
    p.add_argument("--initial-active", default="", help="comma-separated link ids active at start")
    p.add_argument("--out", required=True, help="trace JSON path")

    p = sub.add_parser("sweep", help="run an experiment grid from a spec file")
    p.add_argument("--spec", required=True, help="experiment spec JSON")
    p.add_argument("--out", required=True, help="per-replication results CSV")
    p.add_argument("--summary-json", help="aggregate report JSON")
    p.add_argument("--summary-csv", help="aggregate report CSV")
    p.add_argument("--seed", type=int, help="override the spec's master seed")

    return parser


def _cmd_gen(args):
    net = network.generate_topology(
        args.seed, args.n_links, args.area_side,
        network.LinkPlacement(min_length=args.length, max_length=args.length),
        alpha=args.alpha, noise=args.noise,
    )
    network.save_network(net, args.out)
    print(f"wrote {args.n_links}-link network to {args.out}", file=sys.stderr)
    return 0


def _cmd_oracle(args):
    if args.linear is not None:
        net = network.linear_network(args.linear, alpha=args.alpha)
    else:
        net = network.load_network(args.net)
    if args.rule == "separation":
        rule = oracle.SeparationRule(args.contention, args.interference)
    else:
        rule = oracle.SinrRule(network.params_for(net, sinr_th=args.sinr_th))
    configs = oracle.enumerate_feasible(net, rule, maximal=args.maximal)
    for cfg in configs:
        print(" ".join(str(k) for k in cfg))
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump({"rule": args.rule, "maximal": args.maximal,
                       "configurations": [list(c) for c in configs]}, fh, indent=1)
            fh.write("\n")
    print(f"{len(configs)} configurations", file=sys.stderr)
    return 0


def _cmd_mf(args):
    net = network.load_network(args.net)
    nbhd = network.neighborhood(net, args.gamma_f)
    params = network.params_for(net, sinr_th=args.sinr_th, beta=args.beta)
    sol = meanfield.mf_solve(net, nbhd, params, tol=args.tol,
                             max_iter=args.max_iter, damping=args.damping)
    with open(args.out, "w") as fh:
        json.dump({
            "h_star": sol.h_star.tolist(),
            "mu": sol.mu.tolist(),
            "iterations": sol.iterations,
            "residual_norm": sol.residual_norm,
            "converged": sol.converged,
        }, fh, indent=1)
        fh.write("\n")
    if not sol.converged:
        print(f"warning: not converged after {sol.iterations} sweeps "
              f"(residual {sol.residual_norm:.3e})", file=sys.stderr)
    return 0


def _cmd_clt(args):
    p = residual.FrontierParams(gamma_f=args.gamma_f, r_l=args.r_l, r_u=args.r_u,
                                alpha=args.alpha, p0=args.p0)
    moments = residual.residual_moments(p)
    k = args.k
    means, v_stated, v_exact = residual.moment_terms(p, k)
    ratios = residual.lyapunov_profile(p, k)
    with open(args.out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "E_u", "V_u", "E_v", "V_v", "lyapunov_ratio_at_k"])
        for i in range(k):
            mu = residual.moment_u(i + 1, p)
            writer.writerow([i + 1, repr(mu.mean), repr(mu.variance),
                             repr(float(means[i])), repr(float(v_stated[i])), repr(float(ratios[i]))])
    doc = {
        "mean": moments.mean,
        "variance": moments.variance,
        "variance_exact": moments.variance_exact,
        "truncation_k": moments.truncation_k,
        "lyapunov_ratio": float(ratios[-1]),
    }
    if args.mc:
        if args.seed is None:
            print("error: --mc requires --seed", file=sys.stderr)
            return 1
        summary = residual.mc_residual_oracle(p, args.mc, args.seed)
        doc["ks_distance"] = summary.ks_distance
        doc["mc"] = {
            "mean": summary.mean, "variance": summary.variance,
            "third_central": summary.third_central,
            "se_mean": summary.se_mean, "ks_distance": summary.ks_distance,
            "n_samples": summary.n_samples, "truncation_k": summary.truncation_k,
        }
    with open(args.out_json, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return 0


def _cmd_schedule(args):
    net = network.load_network(args.net)
    if args.alpha is not None:
        net = network.Network(positions=net.positions, links=net.links, power=net.power,
                              alpha=args.alpha, noise=net.noise, area_side=net.area_side)
    nbhd = network.neighborhood(net, args.gamma_f)
    params = network.params_for(net, sinr_th=args.sinr_th, beta=args.beta)
    initial = tuple(int(x) for x in args.initial_active.split(",") if x.strip() != "")
    if args.profile == "exploratory":
        policy = scheduler.SchedulePolicy.exploratory(initial_active=initial)
    else:
        policy = scheduler.SchedulePolicy(initial_active=initial)
    trace = scheduler.schedule(net, nbhd, params, scheduler.mode_from_string(args.mode),
                               seed=args.seed, max_iter=args.max_iter, policy=policy)
    with open(args.out, "w") as fh:
        json.dump(trace.to_dict(), fh, indent=1)
        fh.write("\n")
    print(" ".join(str(k) for k in trace.final_active))
    if not trace.converged:
        print(f"warning: not converged within {args.max_iter} rounds", file=sys.stderr)
    return 0


def _cmd_sweep(args):
    spec = harness.ExperimentSpec.load(args.spec)
    if args.seed is not None:
        doc = spec.to_dict()
        doc["master_seed"] = args.seed
        spec = harness.ExperimentSpec.from_dict(doc)
    elif spec.master_seed is None:
        print("error: the spec carries no master_seed and no --seed was given", file=sys.stderr)
        return 1
    report = harness.run_experiment(spec, threads=max(1, args.threads))
    harness.write_results_csv(report.rows, args.out)
    if args.summary_csv:
        harness.write_summary_csv(report, args.summary_csv)
    if args.summary_json:
        with open(args.summary_json, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1)
            fh.write("\n")
    if report.failures:
        print(f"warning: {len(report.failures)} replication(s) failed", file=sys.stderr)
    print(f"wrote {len(report.rows)} rows to {args.out}", file=sys.stderr)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "oracle": _cmd_oracle,
    "mf": _cmd_mf,
    "clt": _cmd_clt,
    "schedule": _cmd_schedule,
    "sweep": _cmd_sweep,
}


def dispatch(argv):
    """Parse and run; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for bad arguments; map the
        # latter onto the documented argument-error code.
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, TypeError, OSError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
