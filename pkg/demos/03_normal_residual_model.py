"""Normal model of the far interference field.

Computes the closed-form frontier moments, validates the mean against a
direct Monte-Carlo simulation of the frontier geometry, reports the three
variance figures (stated formula, exact product-density form, empirical),
and tracks the Lyapunov-style normality diagnostic as frontiers accumulate.
"""


from linksched import residual

p = residual.FrontierParams(gamma_f=4.0, r_l=1.0, r_u=2.0, alpha=4.0, p0=1.0)
m = residual.residual_moments(p)
print(f"frontier model: gamma_f={p.gamma_f}, spacing U({p.r_l}, {p.r_u}), "
      f"alpha={p.alpha}")
print(f"summed mean E(n) = {m.mean:.6f} over {m.truncation_k} frontiers")
print(f"variance: stated {m.variance:.3e}, exact {m.variance_exact:.3e}")

s = residual.mc_residual_oracle(p, n_samples=100_000, seed=7,
                                k_trunc=m.truncation_k)
print(f"\nMonte-Carlo oracle ({s.n_samples} samples): "
      f"mean {s.mean:.6f} +- {s.se_mean:.6f}")
print(f"  deviation from the closed form: "
      f"{abs(s.mean - m.mean) / s.se_mean:.2f} standard errors")
print(f"  empirical variance {s.variance:.3e} "
      f"(> both per-term sums: one shared spacing per sample correlates the terms)")
print(f"  Kolmogorov-Smirnov distance to a fitted normal: {s.ks_distance:.4f}")

profile = residual.lyapunov_profile(p, 30)
print("\nnormality diagnostic (third-moment ratio) as frontiers accumulate:")
for k in (1, 2, 3, 5, 10, 20, 30):
    print(f"  K={k:3d}: {profile[k - 1]:.4f}")
print("the ratio settles at a small constant: only finitely many frontiers matter")

for alpha in (3.0, 4.0, 6.0):
    pa = residual.FrontierParams(gamma_f=4.0, alpha=alpha, k_max=50_000)
    print(f"alpha={alpha}: E(n) = {residual.residual_moments(pa).mean:.5f}")
