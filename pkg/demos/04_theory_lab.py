"""Closed-form distance bounds and their Monte-Carlo check.

In the latent-space model, nodes live on a unit torus and connect when
within radius r; the 2k-walk count between two nodes then upper-bounds
their latent distance. This script evaluates the closed-form bound over a
grid of orders, shows the effect of normalization, and validates the
guarantee empirically: the bound may fail on at most a delta fraction of
sampled pairs.
"""

import math

from hocn import (BoundInputs, LatentModelParams, bound_normalized,
                  bound_unnormalized, lambert_w, validate_bound)


def main():
    shared = dict(n=11, delta=0.01, dim=2, r_sum=0.1, r_m_max=5.0, eta_2k=0.3)
    print("bound value by walk order k (one fixed input tuple):")
    print("  k   raw          normalized")
    for k in range(2, 7):
        raw = bound_unnormalized(BoundInputs(k=k, **shared))
        norm = bound_normalized(BoundInputs(k=k, zeta=2, rho=0.98, **shared))
        print(f"  {k}   {raw.value:.6f}    {norm.value:.6f}")
    print("the raw bound is nearly flat in k; the normalized one tightens.")

    print("\nMonte-Carlo validation (delta = 0.1, 200 trials each):")
    for k, radius in ((1, 0.15), (2, 0.45)):
        params = LatentModelParams(n=500, dim=2, radius=radius, seed=0)
        rep = validate_bound("latent", params, "unnormalized", k=k,
                             delta=0.1, trials=200, seed=7, threads=4)
        print(f"  k={k} r={radius}: eligible={rep.eligible} "
              f"violations={rep.violations} "
              f"fraction={rep.violation_fraction:.4f} <= 0.1")

    print("\nLambert W underpins the preferential-attachment bound:")
    for x in (-0.25, 0.5, 3.0):
        w = lambert_w(x)
        print(f"  W({x}) = {w:.12f}   residual {abs(w * math.exp(w) - x):.1e}")


if __name__ == "__main__":
    main()
