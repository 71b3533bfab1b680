"""Entanglement length for the Besse parameter set, using Heeres pulses rescaled in chi.

    python scripts/besse_check.py --pulses out --out out/besse
"""
from _common import parser, pulses_for, setup
from photonic_tns.budget import REFERENCE_BUDGET, SweepPlan
from photonic_tns.config import PRESETS
from photonic_tns.pipeline import band_check, fit_cluster_budget, headline, write_json
from photonic_tns.pulses import cluster_targets, gate_fidelity


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    cfg, out = setup(args)
    heeres, besse = PRESETS["heeres"], PRESETS["besse"]
    pulses = pulses_for(cfg, args).rescaled(heeres.chi, besse.chi)
    infid = {name: 1 - gate_fidelity(p, t, besse.system())
             for name, p, t in zip(("bulk", "last"), (pulses.bulk, pulses.last), cluster_targets(5))}
    budget, _ = fit_cluster_budget(besse, pulses, SweepPlan())
    fitted = headline(budget, besse)
    published = headline(REFERENCE_BUDGET, besse)
    report = {"gate_infidelity": infid, "fitted": fitted, "published_coefficients": published,
              "band": band_check("besse", fitted["N_ph"]), "budget": budget.to_json()}
    write_json(out / "besse.json", report)
    print(f"rescaled gate infidelity: bulk {infid['bulk']:.1e}, last {infid['last']:.1e}")
    print(f"fitted coefficients:    T_em^opt = {fitted['T_em_opt_s'] * 1e6:.3f} us, N_ph = {fitted['N_ph']:.1f}")
    print(f"published coefficients: T_em^opt = {published['T_em_opt_s'] * 1e6:.3f} us, "
          f"N_ph = {published['N_ph']:.1f}")


if __name__ == "__main__":
    main()
