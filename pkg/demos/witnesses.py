"""Two families of test functions against the top eigenvalue, at R = 2^14.

The Knapp arc should reach the energy up to a constant for the middle-thirds Cantor set
(s > 1/2), while the band construction is the relevant witness for the
quarter-Cantor and s = log 2 / log 9 measures.
"""

import warnings

from extension_energy import middle_thirds_cantor, ninth_cantor, quarter_cantor
from extension_energy.extremizer import DegenerateBandWarning, band_family, knapp_g, select_radius
from extension_energy.operator import energy
from extension_energy.sweep import table_for

R = 2.0**14


def main():
    print(f"{'measure':>15} {'s':>7} {'energy':>10} {'bands':>10} {'knapp':>10}")
    for mu in (middle_thirds_cantor(), quarter_cantor(), ninth_cantor()):
        table = table_for(mu, R)
        en = energy(table, R).energy
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateBandWarning)
            ex = select_radius(table, R, band_family(R))[1].rayleigh
        kn = knapp_g(R, table, mu).rayleigh
        print(f"{mu.name:>15} {mu.dimension:7.4f} {en:10.4g} {ex / en:10.3f} {kn / en:10.3f}")
    print("\ncolumns 'bands' and 'knapp' are Rayleigh quotients as fractions of the energy")


if __name__ == "__main__":
    main()
