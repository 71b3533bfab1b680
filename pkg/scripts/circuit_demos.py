"""Simulate the 2D cluster, toric-code and isoTNS generation circuits and check their stabilizers."""
import argparse
from pathlib import Path

import numpy as np

from photonic_tns.tns import circuits, isotns
from photonic_tns.tns.simulate import circuit_depth, simulate_circuit, stabilizer_report


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="out/scripts/circuits")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for n, m in ((3, 3), (4, 4)):
        c = circuits.cluster2d_circuit(n, m)
        rep = stabilizer_report(simulate_circuit(c), "cluster", circuits.cluster_stabilizers(n, m))
        rep.to_csv(out / f"cluster_{n}x{m}.csv")
        print(f"cluster {n}x{m}: depth {circuit_depth(c)}, {len(rep.values)} stabilizers, all +1: {rep.all_plus()}")

    c = circuits.toric_circuit(4, 4)
    star, plaq = circuits.toric_stabilizers(4, 4)
    rep = stabilizer_report(simulate_circuit(c), "toric", {**star, **plaq})
    rep.to_csv(out / "toric_4x4.csv")
    (out / "toric_4x4_circuit.json").write_text(c.to_json())
    print(f"toric 4x4: depth {circuit_depth(c)}, {len(star)} star + {len(plaq)} plaquette, all +1: {rep.all_plus()}")

    for lam in (2, 3, 4):
        print(f"toric isoTNS tensor lambda={lam}: isometry defect "
              f"{isotns.verify_isometry(isotns.toric_isotns_tensor(lam)):.1e}")
    t = isotns.toric_isotns_tensor(2)
    grid = [[t, t], [t, t]]
    state = simulate_circuit(isotns.isotns_circuit(grid, 2, 2))
    overlap = abs(state.overlap(isotns.contract_tns_small(grid, 2, 2)))
    stars = isotns.toric_site_stars(state)
    print(f"isoTNS 2x2 from the source circuit: overlap with contraction {overlap:.12f}, "
          f"site stars {np.round(stars, 12).tolist()}")


if __name__ == "__main__":
    main()
