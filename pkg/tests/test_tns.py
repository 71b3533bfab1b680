import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonic_tns.hilbert import unitarity_defect
from photonic_tns.mpdo import ZERO, cluster_mps
from photonic_tns.tns import circuits, isotns
from photonic_tns.tns.simulate import (CNOT, CZ, H, PAULI, X, CircuitTooLarge, PhotonicState,
                                       PlaquetteCircuit, circuit_depth, compose, simulate_circuit,
                                       stabilizer_report, swap_gate)


def test_compose_orders_factors():
    # steps apply left to right: H on qubit 0, then CNOT(0 -> 1) gives a Bell state
    u = compose([2, 2], [(H, [0]), (CNOT, [0, 1])])
    assert np.allclose(u @ np.array([1, 0, 0, 0]), np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert unitarity_defect(swap_gate(3)) == 0


def test_chain_circuit_matches_cluster_mps():
    for n in (1, 2, 4):
        s = simulate_circuit(circuits.chain_circuit(n))
        target = cluster_mps(n).statevector()
        assert abs(np.vdot(target, s.reordered(list(range(n))).vector)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n,m,depth", [(2, 2, 2), (3, 3, 5), (4, 3, 7)])
def test_cluster2d_is_graph_state(n, m, depth):
    c = circuits.cluster2d_circuit(n, m)
    s = simulate_circuit(c)
    ref = circuits.graph_state([(i, j) for i in range(n) for j in range(m)], circuits.grid_edges(n, m))
    assert abs(s.overlap(ref)) == pytest.approx(1.0, abs=1e-12)
    assert stabilizer_report(s, "cluster", circuits.cluster_stabilizers(n, m)).all_plus()
    assert circuit_depth(c) == depth


def _projected_code_state(stabs, coords):
    """Oracle: prod (1 + S)/2 |0...0>, normalised."""
    pos = {c: k for k, c in enumerate(coords)}
    psi = np.zeros([2] * len(coords), dtype=complex)
    psi[(0,) * len(coords)] = 1
    for ops in stabs.values():
        s = psi
        for q, p in ops.items():
            s = np.moveaxis(np.tensordot(PAULI[p], s, axes=([1], [pos[q]])), 0, pos[q])
        psi = 0.5 * (psi + s)
    psi = psi.reshape(-1)
    return PhotonicState(psi / np.linalg.norm(psi), list(coords), [2] * len(coords))


@pytest.mark.parametrize("n,m,depth", [(2, 2, 2), (3, 3, 5), (4, 4, 7), (5, 4, 9)])
def test_toric_circuit_stabilizers(n, m, depth):
    c = circuits.toric_circuit(n, m)
    s = simulate_circuit(c)
    star, plaq = circuits.toric_stabilizers(n, m)
    assert all(set(o.values()) == {"Z"} for o in star.values())
    assert all(set(o.values()) == {"X"} for o in plaq.values())
    assert len(star) + len(plaq) == n * m - 1
    assert stabilizer_report(s, "toric", {**star, **plaq}).all_plus()
    coords = [(i, j) for i in range(n) for j in range(m)]
    assert abs(s.overlap(_projected_code_state({**star, **plaq}, coords))) == pytest.approx(1, abs=1e-9)
    assert circuit_depth(c) == depth


def test_product_state_fails_plaquettes():
    s = circuits.product_zero_state(4, 4)
    star, plaq = circuits.toric_stabilizers(4, 4)
    assert stabilizer_report(s, "toric", star).all_plus()
    rep = stabilizer_report(s, "toric", plaq)
    assert not rep.all_plus() and np.allclose(rep.values, 0)


def test_stabilizer_csv(tmp_path):
    s = simulate_circuit(circuits.cluster2d_circuit(2, 2))
    rep = stabilizer_report(s, "cluster", circuits.cluster_stabilizers(2, 2))
    rep.to_csv(tmp_path / "s.csv")
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 5


@pytest.mark.parametrize("lam", [2, 3, 4])
def test_toric_tensor_isometric(lam):
    t = isotns.toric_isotns_tensor(lam)
    assert isotns.verify_isometry(t) <= 1e-14
    assert t.data.shape == (lam ** 4, lam, lam, lam, lam)


def test_toric_tensor_entries():
    B = isotns.toric_isotns_tensor(2).data
    assert B[0, 0, 0, 0, 0] == 0.5
    # k = 8 means (l - u) = 1 with all other differences 0, impossible on a closed loop
    assert np.all(B[8] == 0)


def test_qubit_tensor_lshaped_round_trip():
    t = isotns.toric_qubit_tensor()
    assert isotns.verify_isometry(t) <= 1e-15
    U = isotns.lshaped_unitary(t)
    assert U.shape == (8, 8) and unitarity_defect(U) <= 1e-14
    back = isotns.tensor_from_lshaped(U, t.data.shape, 2, 2)
    assert np.array_equal(back.data, t.data)


def test_lshaped_rejects_non_isometry():
    with pytest.raises(ValueError):
        isotns.lshaped_unitary(isotns.TnsTensor(np.ones((2, 2, 2, 2, 2))))


@pytest.mark.parametrize("which", ["qubit", "random", "toric"])
def test_isotns_circuit_matches_contraction(which):
    rng = np.random.default_rng(5)
    n, m = (3, 2) if which == "random" else (2, 2)
    if which == "qubit":
        grid = [[isotns.toric_qubit_tensor()] * m] * n
    elif which == "toric":
        grid = [[isotns.toric_isotns_tensor(2)] * m] * n
    else:
        grid = [[isotns.random_isometric_tensor(2, 2, rng) for _ in range(m)] for _ in range(n)]
    s = simulate_circuit(isotns.isotns_circuit(grid, n, m))
    ref = isotns.contract_tns_small(grid, n, m)
    assert abs(s.overlap(ref)) >= 1 - 1e-9


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_random_isotns_chain_property(seed):
    rng = np.random.default_rng(seed)
    grid = [[isotns.random_isometric_tensor(2, 2, rng, {"u": 1, "b": 1})] for _ in range(3)]
    s = simulate_circuit(isotns.isotns_circuit(grid, 3, 1))
    assert abs(s.overlap(isotns.contract_tns_small(grid, 3, 1))) >= 1 - 1e-9


def test_mps_tensor_chain_matches_direct_product():
    mats = np.stack([np.array([[1, 0], [1, 0]]), np.array([[0, 1], [0, -1]])]) / np.sqrt(2)
    n = 3
    s = isotns.contract_tns_small([[isotns.mps_tensor(mats)]] * n, n, 1)
    # oracle: left boundary |0>, open right bond as an extra photon
    amps = np.array([(mats[k3] @ mats[k2] @ mats[k1] @ ZERO)[r]
                     for k1 in range(2) for k2 in range(2) for k3 in range(2) for r in range(2)])
    coords = [("site", i, 0) for i in range(n)] + [("right", 0)] + [("top", i) for i in range(n)]
    got = s.reordered(coords).vector
    assert abs(np.vdot(amps / np.linalg.norm(amps), got)) == pytest.approx(1.0)


def test_periodic_toric_stars():
    t = isotns.toric_isotns_tensor(2)
    s = isotns.contract_tns_small([[t, t], [t, t]], 2, 2, boundary="periodic")
    assert np.allclose(isotns.toric_site_stars(s), 1.0)
    s = isotns.contract_tns_small([[t, t], [t, t]], 2, 2)
    assert np.allclose(isotns.toric_site_stars(s), 1.0)


def test_contraction_limits():
    t = isotns.toric_isotns_tensor(3)
    with pytest.raises(ValueError):
        isotns.contract_tns_small([[t] * 3] * 3, 3, 3)
    with pytest.raises(ValueError):
        isotns.contract_tns_small([[t]], 1, 1, boundary="twisted")


def test_rppeps_depth_band():
    for L_p, n, m in [(2, 6, 6), (3, 6, 6), (2, 8, 5)]:
        c = circuits.rppeps_circuit(n, m, L_p, "none")
        assert abs(circuit_depth(c) - (L_p * n + m)) <= 2 * L_p


def test_rppeps_identity_gives_product_state():
    s = simulate_circuit(circuits.rppeps_circuit(3, 3, 2, "identity"))
    assert len(s.coords) == (3 + 1) * 3
    assert abs(s.vector[0]) == pytest.approx(1.0)


def test_rppeps_random_unitaries_normalised():
    s = simulate_circuit(circuits.rppeps_circuit(3, 3, 2, "random", seed=2))
    assert np.linalg.norm(s.vector) == pytest.approx(1.0)


def test_lattice_spec_validation():
    assert circuits.LatticeSpec(4, 4, 3).L_c == 2
    with pytest.raises(ValueError):
        circuits.LatticeSpec(4, 4, 3, D_prime=2, L_c=1)
    with pytest.raises(ValueError):
        circuits.LatticeSpec(1, 4)
    with pytest.raises(ValueError):
        circuits.toric_circuit(1, 4)


def test_column_mps_view():
    c = circuits.cluster2d_circuit(2, 2)
    s = simulate_circuit(c)
    mps = circuits.column_mps(c, 2)
    coords = [(i, j) for i in range(2) for j in range(2)]
    assert abs(np.vdot(mps.statevector(), s.reordered(coords).vector)) == pytest.approx(1.0)


def test_json_round_trip_preserves_state():
    c = circuits.toric_circuit(3, 3)
    back = PlaquetteCircuit.from_json(c.to_json())
    assert abs(simulate_circuit(back).overlap(simulate_circuit(c))) == pytest.approx(1.0)
    assert circuit_depth(back) == circuit_depth(c)


def test_simulator_guards():
    c = PlaquetteCircuit({"a": 2})
    c.gate("x", ["a"], X)
    with pytest.raises(ValueError):
        simulate_circuit(c)                          # register left excited
    with pytest.raises(ValueError):
        c.gate("bad", ["a"], CZ)
    with pytest.raises(CircuitTooLarge):
        simulate_circuit(circuits.rppeps_circuit(4, 6, 2, "random"), max_amplitudes=2 ** 10)
    assert simulate_circuit(PlaquetteCircuit({})).vector.tolist() == [1]
