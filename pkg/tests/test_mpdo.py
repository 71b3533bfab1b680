import functools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonic_tns.emission import EmissionParams, build_emission_map, ideal_emission_map
from photonic_tns.hilbert import random_isometry, source_space
from photonic_tns.lindblad import DecoherenceRates, build_liouvillian, propagate
from photonic_tns.mpdo import (PLUS, ZERO, FidelityCurve, MpsTarget, RoundChannel,
                               brute_force_fidelity, cluster_mps, extract_xi, fidelity_curve,
                               initial_source_state, mps_fidelity, protocol_channels)
from photonic_tns.pulses import cluster_targets

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def _ideal_propagators(n_c=3):
    bulk, last = cluster_targets(n_c)
    return [np.kron(t.matrix, t.matrix.conj()) for t in (bulk, last)]


@pytest.mark.parametrize("n", [2, 3, 5])
def test_cluster_target_stabilizers(n):
    psi = cluster_mps(n).statevector()
    for i in range(n):
        ops = [np.eye(2)] * n
        ops[i] = X
        if i > 0:
            ops[i - 1] = Z
        if i < n - 1:
            ops[i + 1] = Z
        assert np.vdot(psi, functools.reduce(np.kron, ops) @ psi).real == pytest.approx(1.0)


def test_non_isometric_target_rejected():
    with pytest.raises(ValueError):
        MpsTarget(((np.eye(2), np.eye(2)),), PLUS, ZERO)
    with pytest.raises(ValueError):
        cluster_mps(0)


def test_ideal_protocol_has_unit_fidelity():
    w_b, w_l = _ideal_propagators()
    curve = fidelity_curve(ideal_emission_map(source_space(3, 2)), w_b, w_l, ns=(1, 2, 7, 16))
    assert np.allclose(curve.fidelities, 1.0, atol=1e-12)


def _noisy_channel_inputs(seed, n):
    rng = np.random.default_rng(seed)
    sp = source_space(3, 2)
    rates = DecoherenceRates(*(rng.uniform(0, 3e4, 3)))
    w_b, w_l = _ideal_propagators()
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    L = build_liouvillian((a + a.conj().T) * 1e5, rates, sp)
    kick = propagate(L, 0.0, 1e-6).W
    ws = [kick @ w_b] * (n - 1) + [kick @ w_l]
    em = EmissionParams(2 * np.pi * 1.95e6, rng.uniform(0.8, 1), 1e-6)
    pmap = build_emission_map(sp, em, DecoherenceRates(*(rng.uniform(0, 3e4, 3))))
    return sp, ws, pmap


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_contraction_matches_brute_force(seed, n):
    sp, ws, pmap = _noisy_channel_inputs(seed, n)
    rho0 = initial_source_state(sp, PLUS)
    chans = [RoundChannel.compose(pmap, w) for w in ws]
    f_mps = mps_fidelity(chans, cluster_mps(n), rho0)
    f_bf = brute_force_fidelity(ws, pmap, cluster_mps(n), rho0)
    assert 0.0 <= f_mps <= 1.0 + 1e-12
    assert abs(f_mps - f_bf) <= 1e-10


def test_contraction_matches_brute_force_random_target():
    rng = np.random.default_rng(7)
    sp, ws, pmap = _noisy_channel_inputs(1, 3)
    rounds = []
    for _ in range(3):
        iso = random_isometry(4, 2, rng)
        rounds.append((iso[:2], iso[2:]))
    target = MpsTarget(tuple(rounds), PLUS, ZERO)
    rho0 = initial_source_state(sp, PLUS)
    f_mps = mps_fidelity([RoundChannel.compose(pmap, w) for w in ws], target, rho0)
    assert f_mps == pytest.approx(brute_force_fidelity(ws, pmap, target, rho0), abs=1e-10)


def test_channels_trace_preserving():
    sp, ws, pmap = _noisy_channel_inputs(3, 2)
    for ch in protocol_channels(pmap, ws[0], ws[1], 3):
        assert ch.trace_defect() <= 1e-10


def test_shape_and_length_errors():
    sp, ws, pmap = _noisy_channel_inputs(0, 2)
    rho0 = initial_source_state(sp, PLUS)
    chans = [RoundChannel.compose(pmap, w) for w in ws]
    with pytest.raises(ValueError):
        mps_fidelity(chans, cluster_mps(3), rho0)
    with pytest.raises(ValueError):
        brute_force_fidelity(ws * 3, pmap, cluster_mps(6), rho0)


def test_xi_extraction_exact_on_synthetic_curve():
    ns = np.array([1, 2, 4, 8, 16, 32])
    curve = FidelityCurve(ns, np.exp(-(3e-3 * ns + 1e-3)))
    fit = extract_xi(curve)
    assert fit.xi == pytest.approx(3e-3)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.n_photon == pytest.approx(np.log(2) / 3e-3)
    with pytest.raises(ValueError):
        extract_xi(FidelityCurve(ns[:3], np.ones(3)))
    with pytest.raises(ValueError):
        FidelityCurve(ns, np.full(6, 1.5))


def test_curve_csv_carries_hash(tmp_path):
    curve = FidelityCurve([1, 2], [1.0, 0.9], {"a": 1})
    curve.to_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "n,F,params_hash"
    assert lines[1].endswith(curve.params_hash())
