"""Energy against the geometric constant for the quarter-Cantor measure (s = 1/2)
and for Lebesgue measure (s = 1).

At s = 1/2 the ratio energy / M_R should creep upward like log R; at s = 1 it
should stay flat. Runs in about a minute up to R = 2^16.
"""

import math

from extension_energy import lebesgue, quarter_cantor
from extension_energy.bounds import m_r
from extension_energy.operator import energy
from extension_energy.sweep import fit_xy, table_for

SCHEDULE = [2.0**e for e in range(10, 17, 2)]


def main():
    for mu in (quarter_cantor(), lebesgue()):
        table = table_for(mu, max(SCHEDULE))
        ratios = []
        print(f"{mu.name}  (s = {mu.dimension:.4f})")
        print(f"{'R':>8} {'energy':>10} {'M_R':>10} {'ratio':>8}")
        for R in SCHEDULE:
            en = energy(table, R).energy
            mr = m_r(mu, R).value
            ratios.append(en / mr)
            print(f"{R:8.0f} {en:10.4g} {mr:10.4g} {en / mr:8.4f}")
        fit = fit_xy(SCHEDULE, ratios, "log_linear")
        print(f"ratio ~ {fit.intercept:.3f} + {fit.slope:.4f} log R  (r^2 = {fit.r_squared:.3f})")
        print(f"relative growth from R = 2^10 to 2^20 at this slope: {fit.slope * math.log(2**10) / ratios[0]:.2%}\n")


if __name__ == "__main__":
    main()
