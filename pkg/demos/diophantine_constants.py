"""Empirical Diophantine constants for a few frequency vectors.

The quality of a Birkhoff normal form is governed by how small the
combinations k.alpha can get as the integer vector k grows.  This script
probes three frequency vectors: the golden pair (the most robust possible
choice in two frequencies), a cubic irrational triple, and a nearly resonant
pair, and prints the record-setting small divisors together with the fitted
Diophantine exponent.
"""

import math

from hamlab.diophantine import check_nonresonant, envelope, estimate_gamma, fit_tau

GOLDEN = (1 + math.sqrt(5)) / 2

CASES = {
    "golden pair (1, phi)": (1.0, GOLDEN),
    "cubic triple (1, 2^(1/3), 2^(2/3))": (1.0, 2.0 ** (1 / 3), 2.0 ** (2 / 3)),
    "near resonance (1, 2 + 1e-6)": (1.0, 2.0 + 1e-6),
}


def main():
    for label, alpha in CASES.items():
        print(f"\n== {label} ==")
        rep = check_nonresonant(alpha, 10)
        print(f"  resonant up to order 10: {rep.resonant} (min |k.alpha| = {rep.min_abs:.3e})")

        K = 200 if len(alpha) == 2 else 40
        est = estimate_gamma(alpha, tau=1.0, K=K)
        print(f"  gamma_hat(tau=1, K={K}) = {est.gamma_hat:.6f} attained at k = {est.argmin_k}")

        print("  record small divisors (|k|_1, |k.alpha|):")
        for s, v, k in envelope(alpha, K)[:6]:
            print(f"    |k|_1 = {s:4d}   |k.alpha| = {v:.3e}   k = {k}")

        tau_fit, resid = fit_tau(alpha, K)
        print(f"  fitted exponent tau = {tau_fit:.3f} (rms residual {resid:.3f})")
        if "golden" in label:
            print("  (constant-type continued fractions give tau = 1 for the golden pair)")
        if "near resonance" in label:
            print("  (the near-resonance inflates the fitted exponent dramatically)")


if __name__ == "__main__":
    main()
