"""N_ph assembled from the published error coefficients under each reading of the rate units."""
import dataclasses

from photonic_tns.budget import REFERENCE_BUDGET, bond_dim_scaling
from photonic_tns.config import PRESETS
from photonic_tns.pipeline import headline


def main():
    for preset in ("heeres", "besse"):
        for units in ("plain", "angular"):
            phys = dataclasses.replace(PRESETS[preset], units=units)
            h = headline(REFERENCE_BUDGET, phys)
            print(f"{preset:7s} {units:8s} T_em^opt = {h['T_em_opt_s'] * 1e6:6.3f} us   N_ph = {h['N_ph']:7.2f}")
    phys = PRESETS["heeres"]
    em = phys.emission(headline(REFERENCE_BUDGET, phys)["T_em_opt_s"])
    for D in (2, 4, 8, 16):
        xi = bond_dim_scaling(REFERENCE_BUDGET, D, phys.rates(), phys.chi, phys.alpha, em)
        print(f"D = {D:2d}: N_ph = {0.6931471805599453 / xi:7.2f}")


if __name__ == "__main__":
    main()
