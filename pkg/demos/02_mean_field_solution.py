"""Mean-field approximation of the out-of-neighborhood interference.

Solves the coupled fixed-point equations on a random network, checks the
self-consistency of the solution, and shows the residual field vanishing
as the neighborhood radius grows to cover the whole area.
"""

import numpy as np

import linksched as ls
from linksched import meanfield

net = ls.generate_topology(seed=12, n_links=60, area_side=10.0)
params = ls.params_for(net, sinr_th=10.0)

print("gamma_f   max h*       mean mu   sweeps  residual")
for gamma_f in (1.5, 2.0, 3.0, 4.0, 6.0, 9.0, 15.0):
    nbhd = ls.neighborhood(net, gamma_f)
    sol = meanfield.mf_solve(net, nbhd, params)
    print(f"{gamma_f:7.1f}   {sol.h_star.max():.3e}   {sol.mu.mean():.4f}"
          f"   {sol.iterations:6d}  {sol.residual_norm:.1e}")

nbhd = ls.neighborhood(net, 4.0)
sol = meanfield.mf_solve(net, nbhd, params)
coeff = meanfield.mf_coefficients(net, nbhd, params)
resub = np.abs(sol.h_star - coeff.pair_out @ sol.mu).max()
print(f"\nfixed point substituted back into the field equation: "
      f"max deviation {resub:.2e}")

fe_fixed = meanfield.variational_free_energy(sol.mu, sol.h_star, net, nbhd, params)
fe_off = meanfield.variational_free_energy(sol.mu, sol.h_star * 1.5, net, nbhd, params)
print(f"mu-dependent free-energy terms: {fe_fixed.value:.3e} at the fixed "
      f"point (the two terms cancel there), {fe_off.value:.3e} with the "
      f"field scaled 1.5x (log-partition constant omitted in both)")

# emulate measuring the residual of an actual schedule
from linksched import scheduler
trace = scheduler.schedule(net, nbhd, params, scheduler.IgnoreResidual(),
                           seed=0, max_iter=100)
true_res = ls.residual_interference(trace.final_config, net, nbhd)
est = meanfield.mf_from_measurement(true_res, relative_sigma=0.1, seed=3)
print(f"measured residual of a scheduled configuration at 10% error: "
      f"true mean {true_res.mean():.3e}, estimated mean {est.mean():.3e}")
