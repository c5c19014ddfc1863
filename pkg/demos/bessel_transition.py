"""J_k(r) across the transition region k ~ r.

Prints the backward-recurrence value, the Airy-type leading term and their gap
for a few orders at r = 1.1 k, then the window average A_k(R) that the
lower-bound construction divides by.
"""

import numpy as np

from extension_energy.bessel import average_abs_many, bessel_vector, admissible_range, uniform_leading_term


def main():
    print(f"{'k':>6} {'J_k(1.1k)':>14} {'leading term':>14} {'gap':>10} {'gap k^(4/3)':>12}")
    for k in (200, 400, 800, 1600, 3200, 6400):
        r = 1.1 * k
        exact = bessel_vector(r, k)[k]
        lead = uniform_leading_term(k, r)
        gap = abs(exact - lead)
        print(f"{k:6d} {exact:14.6e} {lead:14.6e} {gap:10.2e} {gap * k ** (4 / 3):12.4f}")

    R = 2.0**16
    R3 = float(np.cbrt(R))
    print(f"\nwindow averages at R = {R:.0f}, normalised by 2^(p/2) R^(1/3)")
    for p in admissible_range(R):
        lo, hi = int(np.ceil(R - R3 * 4.0**p)), int(np.floor(R - 0.5 * R3 * 4.0**p))
        v = average_abs_many(lo, hi, R) * 2 ** (p / 2) * R3
        print(f"  p={p}: k in [{lo}, {hi}]  min {v.min():.3f}  max {v.max():.3f}")


if __name__ == "__main__":
    main()
