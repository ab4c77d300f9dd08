"""Randomized SVD on an ill-posed operator: accuracy vs rank and
oversampling, and the probabilistic error bounds.

Run:  python3 demos/01_randomized_svd_basics.py
"""

import numpy as np

from rsvdreg import RsvdConfig, generate, rsvd_auto, rsvd_error, refine_singular_values

# A severely ill-posed model operator: singular values decay exponentially,
# so a tiny factorization rank captures almost everything.
A, x_true, b = generate("shaw", 400)
sigma = np.linalg.svd(A, compute_uv=False)
print(f"shaw n=400: sigma_1={sigma[0]:.3e}  sigma_10={sigma[9]:.3e}  "
      f"sigma_20={sigma[19]:.3e}")

print("\nrank-k factorization error vs the optimal value sigma_(k+1):")
for k in (2, 5, 10, 15):
    approx = rsvd_auto(A, RsvdConfig(k=k, p=5, q=0, seed=0))
    report = rsvd_error(A, approx)
    print(f"  k={k:2d}  ||A - Ak|| = {report.err_rank_k:.3e}   "
          f"optimal = {sigma[k]:.3e}   capture bound = {report.bound_first:.3e}")

# The bounds hold with overwhelming probability; count violations by hand.
hits = 0
trials = 200
for seed in range(trials):
    report = rsvd_error(A, rsvd_auto(A, RsvdConfig(k=10, p=5, q=0, seed=seed)))
    hits += report.err_range <= report.bound_first
print(f"\ncapture bound held in {hits}/{trials} seeded trials")

# Rayleigh-quotient refinement of the singular value estimates.
approx = rsvd_auto(A, RsvdConfig(k=5, p=5, seed=1))
refined = refine_singular_values(A, approx)
print("\nraw estimates:    ", np.array2string(approx.sigma, precision=6))
print("refined estimates:", np.array2string(refined, precision=6))
print("exact values:     ", np.array2string(sigma[:5], precision=6))
