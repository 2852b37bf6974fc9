"""Exhaustive ground truth on a small chain.

Enumerates the feasible link activations of a 10-node linear network under
the hop-separation rule, filters them to the set-inclusion maximal ones,
and compares with the configuration an exact Boltzmann minimization picks.
"""

import linksched as ls
from linksched import oracle

net = ls.linear_network(10)
print(f"chain: {net.n_nodes} nodes, {net.n_links} directed links, unit spacing")

rule = oracle.SeparationRule(contention_links=1, interference_links=2)
maximal = oracle.enumerate_feasible(net, rule, maximal=True)
print(f"\nmaximal feasible configurations under the separation rule "
      f"(>= 2 links between active links):")
for cfg in maximal:
    row = ["."] * net.n_links
    for k in cfg:
        row[k] = ">"
    print("  " + " ".join(row) + f"   links {tuple(k + 1 for k in cfg)}")
sizes = sorted(len(c) for c in maximal)
print(f"counts by size: " + ", ".join(f"{sizes.count(n)} with {n} active"
                                      for n in sorted(set(sizes))))

params = ls.params_for(net, sinr_th=10.0)
sinr_maximal = oracle.enumerate_feasible(net, oracle.SinrRule(params), maximal=True)
print(f"\nSINR rule (threshold 10, alpha 4) agrees: "
      f"{sorted(sinr_maximal) == sorted(maximal)}")

nbhd = ls.neighborhood(net, 20.0)
best = oracle.boltzmann_argmax(net, nbhd, params)
print(f"exact energy minimizer: links {tuple(k + 1 for k in ls.active_ids(best))} "
      f"(the maximally spread three-link configuration)")
