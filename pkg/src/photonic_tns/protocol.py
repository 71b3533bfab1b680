"""Glue between pulses, Lindblad propagation, the emission map and the MPDO contraction."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .emission import EmissionParams, ProcessMap, build_emission_map
from .hilbert import CompositeSpace, source_space
from .lindblad import DecoherenceRates, build_liouvillian, propagate
from .mpdo import (DEFAULT_N_GRID, PLUS, FidelityCurve, RoundChannel, XiFit, cluster_mps,
                   extract_xi, initial_source_state, mps_fidelity)
from .pulses import PulseSchedule, SystemParams, piecewise_hamiltonian, pulse_unitary

NO_RATES = DecoherenceRates()


@dataclass(frozen=True)
class ProtocolSetup:
    """Everything needed to evaluate the cluster-state protocol for one parameter point.

    ``unit_rates`` act during the gates, ``emission_rates`` during photon emission.
    """

    params: SystemParams
    bulk: PulseSchedule
    last: PulseSchedule
    unit_rates: DecoherenceRates = NO_RATES
    emission: EmissionParams = EmissionParams(1.0)
    emission_rates: DecoherenceRates = NO_RATES
    transmon_levels: int = 2
    cavity_cutoff: int = 5
    method: str = "expm"

    @property
    def space(self) -> CompositeSpace:
        return source_space(self.cavity_cutoff, self.transmon_levels)

    def but(self, **changes) -> "ProtocolSetup":
        return replace(self, **changes)


def round_propagator(pulse: PulseSchedule, params: SystemParams, rates: DecoherenceRates,
                     space: CompositeSpace, method: str = "expm") -> np.ndarray:
    """W_L for one gate; closed systems use U (x) conj(U) directly."""
    if not rates.any:
        u = pulse_unitary(pulse, params, space)
        return np.kron(u, u.conj())
    L = build_liouvillian(piecewise_hamiltonian(params, pulse, space), rates, space)
    return propagate(L, 0.0, pulse.duration, method=method).W


def emission_map(setup: ProtocolSetup) -> ProcessMap:
    return build_emission_map(setup.space, setup.emission, setup.emission_rates)


def protocol_propagators(setup: ProtocolSetup) -> tuple[np.ndarray, np.ndarray]:
    sp = setup.space
    return (round_propagator(setup.bulk, setup.params, setup.unit_rates, sp, setup.method),
            round_propagator(setup.last, setup.params, setup.unit_rates, sp, setup.method))


def curve_from_propagators(pmap: ProcessMap, w_bulk: np.ndarray, w_last: np.ndarray,
                           ns: Sequence[int], meta: dict | None = None) -> FidelityCurve:
    bulk = RoundChannel.compose(pmap, w_bulk)
    last = RoundChannel.compose(pmap, w_last)
    rho0 = initial_source_state(pmap.space, PLUS)
    fids = [mps_fidelity([bulk] * (n - 1) + [last], cluster_mps(n), rho0) for n in ns]
    return FidelityCurve(np.asarray(ns), np.clip(fids, 0.0, 1.0), meta or {})


def simulate_curve(setup: ProtocolSetup, ns: Sequence[int] = DEFAULT_N_GRID) -> FidelityCurve:
    w_bulk, w_last = protocol_propagators(setup)
    meta = {"unit_rates": vars(setup.unit_rates), "emission_rates": vars(setup.emission_rates),
            "emission": vars(setup.emission), "chi": setup.params.chi, "alpha": setup.params.alpha,
            "transmon_levels": setup.transmon_levels}
    return curve_from_propagators(emission_map(setup), w_bulk, w_last, ns, meta)


def simulate_xi(setup: ProtocolSetup, ns: Sequence[int] = (2, 4, 8, 16, 32)) -> XiFit:
    return extract_xi(simulate_curve(setup, ns))
