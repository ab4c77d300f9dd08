"""The seven Fredholm test problems: spectra, conditioning and noise model.

Run:  python3 demos/02_test_problem_gallery.py
"""

import numpy as np

from rsvdreg import NoiseSpec, PROBLEM_NAMES, SEVERELY_ILL_POSED, add_noise, decay_fit, generate

n = 200
print(f"{'problem':10s} {'decay law':12s} {'sigma20/sigma1':>14s}   classification")
for name in PROBLEM_NAMES:
    A, x_true, b_exact = generate(name, n)
    s = np.linalg.svd(A, compute_uv=False)
    fit = decay_fit(s[s > 1e-14 * s[0]][:40])
    kind = "severe" if name in SEVERELY_ILL_POSED else "mild"
    print(f"{name:10s} {fit.model:12s} {s[19] / s[0]:14.3e}   {kind}")

# The noise model perturbs each entry by delta * max|b| * N(0,1).
A, x_true, b_exact = generate("phillips", n)
for delta in (0.01, 0.05):
    b, realized = add_noise(b_exact, NoiseSpec(delta, seed=42))
    print(f"\ndelta={delta:.2f}: ||e|| = {realized:.4f} "
          f"(max|b| = {np.max(np.abs(b_exact)):.3f}, "
          f"expected ~ delta*max|b|*sqrt(n) = "
          f"{delta * np.max(np.abs(b_exact)) * np.sqrt(n):.4f})")
