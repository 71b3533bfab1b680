"""Command-line entry point.

    photonic-tns optimize-pulse  [--config F] [--preset P] [--out D] [--seed S]
    photonic-tns fidelity-curve  ...
    photonic-tns fit-budget      ... [--jobs J]
    photonic-tns rppeps          ... [--lattice L]
    photonic-tns verify          ...

Exit codes: 0 success, 2 validation failure, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import pipeline
from .budget import REFERENCE_BUDGET, ErrorBudget, SweepPlan, rp_peps_estimate, tradeoff_table, write_sweeps_csv
from .config import PRESETS, UNITS, ConfigError, RunConfig, load_config
from .emission import build_emission_map, verify_cptp
from .hilbert import source_space, unitarity_defect
from .lindblad import PropagationError, build_liouvillian, propagate, trace_preservation_error
from .pulses import cluster_targets, piecewise_hamiltonian
from .tns import circuits, isotns
from .tns.simulate import circuit_depth, simulate_circuit, stabilizer_report

log = logging.getLogger("photonic_tns")

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3
LATTICES = ("cluster3x3", "toric4x4", "isotns2x2-toric", "generic")


class NotConverged(RuntimeError):
    pass


def _config(args) -> RunConfig:
    return load_config(args.config, preset=args.preset, out=args.out, seed=args.seed,
                       jobs=args.jobs, units=args.units)


@contextmanager
def _mapper(jobs: int):
    if jobs == 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield pool.map        # ordered merge


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _pulses(cfg: RunConfig) -> pipeline.PulsePair:
    return pipeline.PulsePair.load(cfg.pulse_dir or Path(cfg.out))


def _emission_time(cfg: RunConfig) -> float:
    if cfg.t_em_us is not None:
        return cfg.t_em_us * 1e-6
    budget_file = Path(cfg.out) / "budget.json"
    budget = ErrorBudget.from_json(budget_file.read_text()) if budget_file.is_file() else REFERENCE_BUDGET
    return pipeline.headline(budget, cfg.physical())["T_em_opt_s"]


def cmd_optimize_pulse(cfg: RunConfig) -> int:
    out = _out(cfg)
    pair, results = pipeline.optimize_cluster_pulses(cfg)
    paths = pair.save(out)
    report = {name: {"infidelity": r.infidelity, "converged": r.converged,
                     "target_infidelity": cfg.target_infidelity, "iterations": r.n_iterations,
                     "start": r.start_index, "artifact": paths[name].name}
              for name, r in results.items()}
    pipeline.write_json(out / "pulse_report.json", report)
    for name, r in results.items():
        print(f"{name}: infidelity {r.infidelity:.3e} (target {cfg.target_infidelity:g})")
    if not all(r.converged for r in results.values()):
        raise NotConverged("pulse optimisation did not reach the target infidelity")
    return EXIT_OK


def cmd_fidelity_curve(cfg: RunConfig) -> int:
    out = _out(cfg)
    phys = cfg.physical()
    pulses = _pulses(cfg)
    t_em = _emission_time(cfg)
    curve = pipeline.direct_curve(phys, pulses, t_em, cfg.n_grid)
    curve.to_csv(out / "fidelity_curve.csv")
    summary = pipeline.curve_summary(curve)
    summary.update(T_em_s=t_em, preset=cfg.preset, units=cfg.units,
                   band=pipeline.band_check(cfg.preset, summary["N_ph"]))
    pipeline.write_json(out / "fidelity_summary.json", summary)
    print(f"xi = {summary['xi']:.4e}, N_ph = {summary['N_ph']:.1f}, R^2 = {summary['R2']:.5f}")
    return EXIT_OK


def cmd_fit_budget(cfg: RunConfig) -> int:
    out = _out(cfg)
    phys = cfg.physical()
    pulses = _pulses(cfg)
    plan = SweepPlan(points=cfg.sweep_points)
    with _mapper(cfg.jobs) as mapper:
        budget, sweeps = pipeline.fit_cluster_budget(phys, pulses, plan, mapper)
    (out / "budget.json").write_text(budget.to_json() + "\n")
    write_sweeps_csv(sweeps, out / "budget_sweeps.csv")
    head = pipeline.headline(budget, phys)
    head["band"] = pipeline.band_check(cfg.preset, head["N_ph"])
    pipeline.write_json(out / "budget_summary.json", head)
    for ch, r2 in budget.r_squared.items():
        print(f"{ch:16s} R^2 = {r2:.5f}")
    for flag in budget.flags:
        print("flag:", flag)
    print(f"T_em^opt = {head['T_em_opt_s'] * 1e6:.3f} us, N_ph = {head['N_ph']:.1f}")
    return EXIT_OK


def _build_lattice(name: str):
    if name == "cluster3x3":
        c = circuits.cluster2d_circuit(3, 3)
        s = simulate_circuit(c)
        return c, stabilizer_report(s, "cluster", circuits.cluster_stabilizers(3, 3)), {}
    if name == "toric4x4":
        c = circuits.toric_circuit(4, 4)
        s = simulate_circuit(c)
        star, plaq = circuits.toric_stabilizers(4, 4)
        return c, stabilizer_report(s, "toric", {**star, **plaq}), {}
    if name == "isotns2x2-toric":
        t = isotns.toric_isotns_tensor(2)
        grid = [[t, t], [t, t]]
        c = isotns.isotns_circuit(grid, 2, 2)
        s = simulate_circuit(c)
        overlap = abs(s.overlap(isotns.contract_tns_small(grid, 2, 2)))
        report = stabilizer_report(s, "toric-star", {
            f"A{coord}": {coord: np.diag([(-1.0) ** bin(k).count("1") for k in range(16)])}
            for coord in s.coords if coord[0] == "site"})
        return c, report, {"overlap_with_contraction": overlap}
    c = circuits.rppeps_circuit(6, 6, 2, "none")
    return c, None, {}


def cmd_rppeps(cfg: RunConfig, lattice: str, L_p: int, D_prime: int, n: int, m: int) -> int:
    out = _out(cfg)
    c, report, extra = _build_lattice(lattice)
    depth = circuit_depth(c)
    (out / f"circuit_{lattice}.json").write_text(c.to_json())
    ok = True
    if report is not None:
        report.to_csv(out / f"stabilizers_{lattice}.csv")
        ok = report.all_plus()
        print(f"{lattice}: {len(report.values)} stabilizers, all +1: {ok}")
    if "overlap_with_contraction" in extra:
        ok = ok and extra["overlap_with_contraction"] >= 1 - 1e-9
    phys = cfg.physical()
    budget_file = Path(cfg.out) / "budget.json"
    budget = ErrorBudget.from_json(budget_file.read_text()) if budget_file.is_file() else REFERENCE_BUDGET
    t_em = _emission_time(cfg)
    est = rp_peps_estimate(budget, L_p, D_prime, phys.rates(), phys.chi, phys.alpha,
                           phys.emission(t_em), n, m)
    table = tradeoff_table(budget, phys.rates(), phys.chi, phys.alpha, phys.emission(t_em), n, m)
    pipeline.write_json(out / f"rppeps_{lattice}.json", {
        "depth": depth, "meta": c.meta, **extra, "estimate": vars(est),
        "tradeoff": [vars(e) for e in table]})
    print(f"depth {depth}; xi_rp = {est.xi_rp:.3e}, F_rp({n}x{m}) = {est.fidelity:.3e}")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_verify(cfg: RunConfig) -> int:
    """Physicality checks on the configured model."""
    phys = cfg.physical()
    failures = []
    bulk, last = cluster_targets(cfg.cavity_cutoff)
    for name, t in (("bulk", bulk), ("last", last)):
        d = unitarity_defect(t.matrix)
        print(f"target {name}: unitarity defect {d:.2e}")
        if d > 1e-12:
            failures.append(f"target {name}")
    space = source_space(cfg.cavity_cutoff, 3)
    rep = verify_cptp(build_emission_map(space, phys.emission(1e-6), phys.rates()))
    print(f"emission map: min Choi eigenvalue {rep.min_choi_eigenvalue:.2e}, trace defect {rep.trace_defect:.2e}")
    if not rep.passes:
        failures.append("emission map")
    try:
        pulses = _pulses(cfg)
    except FileNotFoundError:
        pulses = None
        print("no pulse artifacts; skipping propagator check")
    if pulses is not None:
        sp = source_space(cfg.cavity_cutoff, 3)
        L = build_liouvillian(piecewise_hamiltonian(phys.system(), pulses.bulk, sp), phys.rates(), sp)
        W = propagate(L, 0.0, pulses.bulk.duration, cfg.lindblad_rtol, cfg.lindblad_atol).W
        err = trace_preservation_error(W)
        print(f"gate propagator: trace error {err:.2e}")
        if err > 1e-8:
            failures.append("propagator")
    if failures:
        print("FAILED:", ", ".join(failures))
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--units", choices=UNITS)
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="photonic-tns", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize-pulse", parents=[common], help="optimise the two cluster-state pulses")
    sub.add_parser("fidelity-curve", parents=[common], help="state fidelity versus photon number")
    sub.add_parser("fit-budget", parents=[common], help="isolated-channel sweeps and coefficient fit")
    r = sub.add_parser("rppeps", parents=[common], help="2D circuits, stabilizers, depth and fidelity estimate")
    r.add_argument("--lattice", choices=LATTICES, default="cluster3x3")
    r.add_argument("--plaquette", type=int, default=2, help="plaquette side L_p")
    r.add_argument("--fock-levels", type=int, default=2, help="levels per ancilla cavity D'")
    r.add_argument("--size", type=int, nargs=2, default=(10, 10), metavar=("N", "M"))
    sub.add_parser("verify", parents=[common], help="physicality checks")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        if args.command == "optimize-pulse":
            return cmd_optimize_pulse(cfg)
        if args.command == "fidelity-curve":
            return cmd_fidelity_curve(cfg)
        if args.command == "fit-budget":
            return cmd_fit_budget(cfg)
        if args.command == "rppeps":
            return cmd_rppeps(cfg, args.lattice, args.plaquette, args.fock_levels, *args.size)
        return cmd_verify(cfg)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NotConverged, PropagationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
