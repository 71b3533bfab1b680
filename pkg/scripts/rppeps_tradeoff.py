"""rp-PEPS fidelity estimate over plaquette size and ancilla Fock levels.

    python scripts/rppeps_tradeoff.py --budget out/budget.json --size 10 10
"""
import argparse
import csv
import dataclasses
from pathlib import Path

from photonic_tns.budget import REFERENCE_BUDGET, ErrorBudget, tradeoff_table
from photonic_tns.config import PRESETS
from photonic_tns.pipeline import headline


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--budget", help="fitted budget JSON; the published coefficients otherwise")
    p.add_argument("--preset", default="heeres", choices=sorted(PRESETS))
    p.add_argument("--size", type=int, nargs=2, default=(10, 10), metavar=("N", "M"))
    p.add_argument("--out", default="out/scripts/rppeps_tradeoff.csv")
    args = p.parse_args()
    budget = ErrorBudget.from_json(Path(args.budget).read_text()) if args.budget else REFERENCE_BUDGET
    phys = PRESETS[args.preset]
    em = phys.emission(headline(budget, phys)["T_em_opt_s"])
    rows = tradeoff_table(budget, phys.rates(), phys.chi, phys.alpha, em, *args.size,
                          L_ps=(2, 3, 4), D_primes=(2, 3, 4, 8))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=[f.name for f in dataclasses.fields(rows[0])])
        w.writeheader()
        for r in rows:
            w.writerow(dataclasses.asdict(r))
    for r in rows:
        print(f"L_p={r.L_p} D'={r.D_prime} L_c={r.L_c}  xi_rp={r.xi_rp:.3e}  F={r.fidelity:.3e}")


if __name__ == "__main__":
    main()
