"""Isolated-channel sweeps and the fitted error coefficients.

    python scripts/scaling_sweeps.py --pulses out --out out/sweeps --jobs 4
"""
from concurrent.futures import ProcessPoolExecutor

from _common import parser, pulses_for, setup
from photonic_tns.budget import CHANNELS, SweepPlan, write_sweeps_csv
from photonic_tns.pipeline import fit_cluster_budget, headline, write_json


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--points", type=int, default=5)
    args = p.parse_args()
    cfg, out = setup(args)
    phys = cfg.physical()
    pulses = pulses_for(cfg, args)
    plan = SweepPlan(points=args.points)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            budget, sweeps = fit_cluster_budget(phys, pulses, plan, pool.map)
    else:
        budget, sweeps = fit_cluster_budget(phys, pulses, plan)
    write_sweeps_csv(sweeps, out / "sweeps.csv")
    (out / "budget.json").write_text(budget.to_json() + "\n")
    head = headline(budget, phys)
    write_json(out / "headline.json", head)
    for ch, (name, xlabel) in CHANNELS.items():
        print(f"{name:12s} = {getattr(budget, name):8.4f}   vs {xlabel:18s} R^2 = {budget.r_squared[ch]:.5f}")
    print(f"beta_0       = {budget.beta_0:.3e}")
    print(f"T_em^opt = {head['T_em_opt_s'] * 1e6:.3f} us, N_ph = {head['N_ph']:.1f}")


if __name__ == "__main__":
    main()
