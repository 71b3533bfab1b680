"""Acceptance criteria, one test each; every test logs a PASS/FAIL line."""
import itertools
import math
import time

import numpy as np
import pytest

from photonic_tns.budget import (REFERENCE_BUDGET, SweepPlan, bond_dim_scaling,
                                 optimal_emission_time, scan_emission_time)
from photonic_tns.emission import build_emission_map, verify_cptp
from photonic_tns.hilbert import source_space, unitarity_defect
from photonic_tns.lindblad import DecoherenceRates, build_liouvillian, propagate
from photonic_tns.mpdo import (PLUS, RoundChannel, brute_force_fidelity, cluster_mps, extract_xi,
                               initial_source_state, mps_fidelity)
from photonic_tns.pipeline import direct_curve, fit_cluster_budget, headline
from photonic_tns.protocol import round_propagator
from photonic_tns.pulses import (cluster_targets, finite_difference_gradient, gate_fidelity,
                                 gate_problem, piecewise_hamiltonian)
from photonic_tns.tns import circuits, isotns
from photonic_tns.tns.simulate import circuit_depth, simulate_circuit, stabilizer_report

# tolerances, fixed up front
ORACLE_TOL = 1e-8
LINEAR_R2 = 0.999
SCALING_R2 = 0.99
HEERES_BAND = (60.0, 250.0)
BESSE_BAND = (25.0, 95.0)
PUBLISHED_N_PH, PUBLISHED_REL = 123.0, 0.10
T_EM_REL = 0.01
D_SLOPE, D_SLOPE_TOL = -2.0, 0.05
STABILIZER_TOL = 1e-10
ISOMETRY_TOL = 1e-14
OVERLAP_TOL = 1e-9
TRACE_TOL = 1e-8
CHOI_TOL = 1e-10
UNITARITY_TOL = 1e-12
GATE_INFIDELITY = 1e-3
GRADIENT_REL = 1e-5
T_EM_PROBE = 0.85e-6


@pytest.fixture(scope="module")
def heeres_budget(cluster_pulses, heeres):
    start = time.perf_counter()
    budget, sweeps = fit_cluster_budget(heeres, cluster_pulses, SweepPlan())
    return budget, sweeps, time.perf_counter() - start


def test_oracle_equivalence(cluster_pulses, heeres, record):
    start = time.perf_counter()
    base = heeres.rates()
    worst = 0.0
    grid = [(2, f) for f in itertools.product((0.0, 1.0, 2.0), repeat=3)] + [(3, (1.0, 1.0, 1.0))]
    for levels, (ft, fp, fc) in grid:
        rates = DecoherenceRates(ft * base.transmon_decay, fc * base.cavity_decay, fp * base.dephasing)
        sp = source_space(5, levels)
        w_b = round_propagator(cluster_pulses.bulk, heeres.system(), rates, sp)
        w_l = round_propagator(cluster_pulses.last, heeres.system(), rates, sp)
        pmap = build_emission_map(sp, heeres.emission(T_EM_PROBE), rates)
        rho0 = initial_source_state(sp, PLUS)
        bulk, last = RoundChannel.compose(pmap, w_b), RoundChannel.compose(pmap, w_l)
        for n in range(1, 5):
            ws = [w_b] * (n - 1) + [w_l]
            f1 = mps_fidelity([bulk] * (n - 1) + [last], cluster_mps(n), rho0)
            f2 = brute_force_fidelity(ws, pmap, cluster_mps(n), rho0)
            worst = max(worst, abs(f1 - f2))
    elapsed = time.perf_counter() - start
    ok = worst <= ORACLE_TOL and elapsed <= 600
    record(1, "MPDO contraction vs brute force", ok,
           f"max |dF| = {worst:.2e} over {len(grid)} rate points, n = 1..4; {elapsed:.0f} s")
    assert ok


def test_exponential_law(cluster_pulses, heeres, record):
    start = time.perf_counter()
    curve = direct_curve(heeres, cluster_pulses, T_EM_PROBE, ns=(1, 2, 4, 8, 16, 32, 64))
    fit = extract_xi(curve)
    elapsed = time.perf_counter() - start
    ok = fit.r_squared >= LINEAR_R2 and elapsed <= 300
    record(2, "-ln F linear in n", ok,
           f"R^2 = {fit.r_squared:.6f}, xi = {fit.xi:.3e}, n <= 64; {elapsed:.0f} s")
    assert ok


def test_scaling_laws(heeres_budget, record):
    budget, sweeps, elapsed = heeres_budget
    worst = min(budget.r_squared.values())
    ok = worst >= SCALING_R2 and len(budget.r_squared) == 7 and elapsed <= 1800
    detail = ", ".join(f"{k} {v:.4f}" for k, v in budget.r_squared.items())
    record(3, "per-channel linear fits", ok, f"min R^2 = {worst:.4f} ({detail}); {elapsed:.0f} s")
    assert ok


def test_headline_band_heeres(heeres_budget, cluster_pulses, heeres, record):
    budget = heeres_budget[0]
    infid = max(cluster_pulses.infidelity.values())
    n_ph = headline(budget, heeres)["N_ph"]
    ok = infid <= GATE_INFIDELITY and HEERES_BAND[0] <= n_ph <= HEERES_BAND[1]
    record(4, "N_ph band, Heeres preset", ok,
           f"N_ph = {n_ph:.1f} in {HEERES_BAND}, gate infidelity {infid:.1e}")
    assert ok


def test_headline_band_besse(cluster_pulses, heeres, besse, record):
    # two-level pulses are chi-scale invariant, so the Heeres pulses are rescaled
    pulses = cluster_pulses.rescaled(heeres.chi, besse.chi)
    infid = max(1 - gate_fidelity(p, t, besse.system())
                for p, t in zip((pulses.bulk, pulses.last), cluster_targets(5)))
    budget, _ = fit_cluster_budget(besse, pulses, SweepPlan())
    n_ph = headline(budget, besse)["N_ph"]
    ok = infid <= GATE_INFIDELITY and BESSE_BAND[0] <= n_ph <= BESSE_BAND[1]
    record(4, "N_ph band, Besse preset", ok,
           f"N_ph = {n_ph:.1f} in {BESSE_BAND}, gate infidelity {infid:.1e}")
    assert ok


@pytest.mark.xfail(strict=True, reason="published coefficients assemble to N_ph = 88, outside 123 +/- 10%; "
                                       "see the decision ledger")
def test_headline_from_published_coefficients(heeres, record):
    n_ph = headline(REFERENCE_BUDGET, heeres)["N_ph"]
    lo, hi = PUBLISHED_N_PH * (1 - PUBLISHED_REL), PUBLISHED_N_PH * (1 + PUBLISHED_REL)
    ok = lo <= n_ph <= hi
    record(4, "N_ph from published coefficients", ok,
           f"N_ph = {n_ph:.2f}, required [{lo:.1f}, {hi:.1f}]")
    assert ok


def test_optimal_emission_time(heeres_budget, heeres, record):
    budget = heeres_budget[0]
    rates, em, g = heeres.rates(), heeres.emission(), heeres.gamma_em
    t_closed = optimal_emission_time(budget, em, rates)
    grid = np.linspace(2.0, 20.0, 100) / g     # 2 to 20 emission lifetimes
    t_scan = scan_emission_time(budget, em, rates, grid, heeres.chi, heeres.alpha)
    rel = abs(t_scan - t_closed) / t_closed
    ok = rel <= T_EM_REL
    record(5, "closed-form T_em^opt vs scan", ok,
           f"closed {t_closed * 1e6:.4f} us, scan {t_scan * 1e6:.4f} us, rel {rel:.2e}")
    assert ok


def test_bond_dimension_law(heeres_budget, heeres, record):
    # emission coefficients zeroed, so only the gate-time factor (D/2)^2 remains
    b = heeres_budget[0].without_emission()
    rates, em = heeres.rates(), heeres.emission(T_EM_PROBE)
    Ds = np.array([2, 4, 8, 16])
    n_ph = [math.log(2) / bond_dim_scaling(b, int(D), rates, heeres.chi, heeres.alpha, em) for D in Ds]
    slope = np.polyfit(np.log(Ds), np.log(n_ph), 1)[0]
    ok = abs(slope - D_SLOPE) <= D_SLOPE_TOL
    record(6, "N_ph ~ D^-2", ok, f"log-log slope {slope:.4f}")
    assert ok


def test_circuit_verification(record):
    start = time.perf_counter()
    s = simulate_circuit(circuits.cluster2d_circuit(3, 3))
    cl = stabilizer_report(s, "cluster", circuits.cluster_stabilizers(3, 3))
    s = simulate_circuit(circuits.toric_circuit(4, 4))
    star, plaq = circuits.toric_stabilizers(4, 4)
    tc = stabilizer_report(s, "toric", {**star, **plaq})
    stab_err = max(np.max(np.abs(cl.values - 1)), np.max(np.abs(tc.values - 1)))
    iso_err = max(isotns.verify_isometry(isotns.toric_isotns_tensor(lam)) for lam in (2, 3, 4))
    overlaps = []
    rng = np.random.default_rng(0)
    for grid in ([[isotns.toric_isotns_tensor(2)] * 2] * 2,
                 [[isotns.random_isometric_tensor(2, 2, rng) for _ in range(2)] for _ in range(2)]):
        st = simulate_circuit(isotns.isotns_circuit(grid, 2, 2))
        overlaps.append(abs(st.overlap(isotns.contract_tns_small(grid, 2, 2))))
    elapsed = time.perf_counter() - start
    ok = (stab_err <= STABILIZER_TOL and iso_err <= ISOMETRY_TOL
          and min(overlaps) >= 1 - OVERLAP_TOL and elapsed <= 300)
    record(7, "stabilizers, isometry, isoTNS overlap", ok,
           f"{len(cl.values)} cluster + {len(tc.values)} toric stabilizers, max |<S> - 1| = {stab_err:.1e}; "
           f"isometry defect {iso_err:.1e}; min overlap {min(overlaps):.12f}; {elapsed:.0f} s")
    assert ok


def test_depth_accounting(record):
    generic = []
    for L_p, n, m in [(2, 6, 6), (3, 6, 6), (2, 10, 4)]:
        d = circuit_depth(circuits.rppeps_circuit(n, m, L_p, "none"))
        generic.append((L_p, n, m, d, abs(d - (L_p * n + m)) <= 2 * L_p))
    d_cluster = circuit_depth(circuits.cluster2d_circuit(3, 3))
    d_toric = circuit_depth(circuits.toric_circuit(4, 4))
    ok = all(g[-1] for g in generic) and d_cluster == 5 and d_toric == 7
    record(8, "circuit depth", ok,
           "generic " + ", ".join(f"(L_p={a}, {b}x{c}) {d} vs {a * b + c}" for a, b, c, d, _ in generic)
           + f"; cluster 3x3 {d_cluster} (expect 5), toric 4x4 {d_toric} (expect 7)")
    assert ok


def test_physicality(cluster_pulses, heeres, record):
    sp = source_space(5, 3)
    L = build_liouvillian(piecewise_hamiltonian(heeres.system(), cluster_pulses.bulk, sp), heeres.rates(), sp)
    tr = propagate(L, 0.0, cluster_pulses.bulk.duration).trace_error
    rep = verify_cptp(build_emission_map(sp, heeres.emission(T_EM_PROBE), heeres.rates()))
    defect = max(unitarity_defect(t.matrix) for t in cluster_targets(5))
    ok = tr <= TRACE_TOL and rep.min_choi_eigenvalue >= -CHOI_TOL and defect <= UNITARITY_TOL
    record(9, "physicality", ok, f"trace error {tr:.1e}, min Choi eigenvalue {rep.min_choi_eigenvalue:.1e}, "
                                 f"unitarity defect {defect:.1e}")
    assert ok


def test_pulse_optimizer(cluster_pulses, heeres, record):
    infid = {k: 1 - gate_fidelity(p, t, heeres.system())
             for (k, p), t in zip((("bulk", cluster_pulses.bulk), ("last", cluster_pulses.last)),
                                  cluster_targets(5))}
    problem = gate_problem(cluster_targets(5)[0], heeres.system(), 3)
    sched = cluster_pulses.bulk
    theta = sched.theta() + 0.05 * np.random.default_rng(1).standard_normal(sched.theta().size)
    _, grad, _, _ = problem.evaluate(sched, theta, 0.1)
    fd = finite_difference_gradient(lambda th: problem.evaluate(sched, th, 0.1, want_grad=False)[0],
                                    theta, step=1e-5)
    rel = float(np.linalg.norm(grad - fd) / np.linalg.norm(fd))
    ok = max(infid.values()) <= GATE_INFIDELITY and rel <= GRADIENT_REL
    record(10, "pulse optimizer", ok,
           f"infidelity bulk {infid['bulk']:.1e}, last {infid['last']:.1e}; gradient rel error {rel:.1e}")
    assert ok
