"""Noisy photon-emission process map.

The emission step is modelled as an isometry from the source into
source (x) photon (x) env_T (x) env_C, where the environment modes record
lost photons (env_T) and cavity decay jumps (env_C). Tracing the environment
gives per-outcome blocks W^{ij}: rho_src -> <i|_ph W(rho) |j>_ph. Transmon
dephasing during emission then shrinks the photonic coherences W^{01}, W^{10}
by (1 - G_phi / G_em).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .hilbert import CAVITY, TRANSMON, CompositeSpace
from .lindblad import DecoherenceRates, vec

VALIDITY_RATIO = 0.1


@dataclass(frozen=True)
class EmissionParams:
    """Emission rate (1/s), retrieval efficiency and emission window (s, may be inf)."""

    rate: float
    efficiency: float = 1.0
    duration: float = np.inf

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("emission rate must be positive")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("retrieval efficiency must lie in [0, 1]")
        if not self.duration > 0:
            raise ValueError("emission duration must be positive")


@dataclass
class ProcessMap:
    """Blocks[i, j] are (d^2 x d^2) superoperators on the source for photon outcome |i><j|."""

    blocks: np.ndarray
    space: CompositeSpace
    kraus: np.ndarray | None = field(default=None, repr=False)
    coherence_factor: float = 1.0

    @property
    def source_dim(self) -> int:
        return self.space.dim

    def full_superoperator(self) -> np.ndarray:
        """Map rho_src -> rho_{src (x) ph}, source slow, photon fast."""
        d = self.source_dim
        w = self.blocks.reshape(2, 2, d, d, d, d)
        return w.transpose(2, 0, 3, 1, 4, 5).reshape(4 * d * d, d * d)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.source_dim
        return (self.full_superoperator() @ vec(rho)).reshape(2 * d, 2 * d)

    def with_block(self, i: int, j: int, block: np.ndarray) -> "ProcessMap":
        b = self.blocks.copy()
        b[i, j] = block
        return ProcessMap(b, self.space, None, self.coherence_factor)


def effective_efficiency(em: EmissionParams, rates: DecoherenceRates) -> float:
    """(1 - e^{-G_em T_em}) G_em / (G_em + G_T) p_em."""
    completed = 1.0 if np.isinf(em.duration) else -np.expm1(-em.rate * em.duration)
    return completed * em.rate / (em.rate + rates.transmon_decay) * em.efficiency


def cavity_jump_weights(n_levels: int, em: EmissionParams, rates: DecoherenceRates) -> np.ndarray:
    """Probability n G_C T_em of one cavity decay jump from Fock level n."""
    if rates.cavity_decay == 0:
        return np.zeros(n_levels)
    w = np.arange(n_levels) * rates.cavity_decay * em.duration
    if np.any(w >= 1):
        raise ValueError(
            f"cavity decay branch n*G_C*T_em reaches {w.max():.3g} >= 1; the map would be unphysical")
    return w


def _transmon_isometry(levels: int, eta: float) -> np.ndarray:
    """K[t_out, ph, env, t_in]; the emitter always ends in |0>."""
    k = np.zeros((levels, 2, levels, levels))
    k[0, 0, 0, 0] = 1.0
    k[0, 1, 0, 1] = np.sqrt(eta)
    k[0, 0, 1, 1] = np.sqrt(1.0 - eta)
    if levels > 2:
        # population left in |2> is reset without a photon
        k[0, 0, 2, 2] = 1.0
    return k


def _cavity_isometry(n_levels: int, weights: np.ndarray) -> np.ndarray:
    """K[c_out, env, c_in] for at most one decay jump."""
    k = np.zeros((n_levels, 2, n_levels))
    for n in range(n_levels):
        k[n, 0, n] = np.sqrt(1.0 - weights[n])
        if n > 0:
            k[n - 1, 1, n] = np.sqrt(weights[n])
    return k


def emission_isometry(space: CompositeSpace, eta: float, weights: np.ndarray) -> np.ndarray:
    """M[s_out, ph, env_T, env_C, s_in] with s = (transmon, cavity)."""
    if space.labels != (TRANSMON, CAVITY):
        raise ValueError("emission map expects the (transmon, cavity) layout")
    nt, nc = space.dims
    kt = _transmon_isometry(nt, eta)
    kc = _cavity_isometry(nc, weights)
    m = np.einsum("apeb,xfy->axpefby", kt, kc)
    d = space.dim
    return m.reshape(d, 2, nt, 2, d).astype(complex)


def _blocks_from_isometry(m: np.ndarray, coherence: float) -> np.ndarray:
    d = m.shape[0]
    env = m.shape[2] * m.shape[3]
    mk = m.reshape(d, 2, env, d)
    blocks = np.zeros((2, 2, d * d, d * d), dtype=complex)
    for i in range(2):
        for j in range(2):
            for e in range(env):
                blocks[i, j] += np.kron(mk[:, i, e, :], mk[:, j, e, :].conj())
            if i != j:
                blocks[i, j] *= coherence
    return blocks


def ideal_emission_map(space: CompositeSpace) -> ProcessMap:
    """|i>_T -> |0>_T |i>_ph with the cavity untouched."""
    if TRANSMON not in space.labels:
        raise ValueError("space has no transmon factor")
    m = emission_isometry(space, 1.0, np.zeros(space.factor_dim(CAVITY)))
    return ProcessMap(_blocks_from_isometry(m, 1.0), space, m, 1.0)


def build_emission_map(space: CompositeSpace, em: EmissionParams, rates: DecoherenceRates) -> ProcessMap:
    """Emission with finite efficiency, transmon decay, cavity decay and dephasing."""
    for name, r in (("transmon decay", rates.transmon_decay), ("cavity decay", rates.cavity_decay),
                    ("dephasing", rates.dephasing)):
        if r > VALIDITY_RATIO * em.rate:
            warnings.warn(f"{name} rate is not small compared to the emission rate", stacklevel=2)
    if rates.dephasing > em.rate:
        raise ValueError("dephasing rate exceeds the emission rate; coherence factor negative")
    eta = effective_efficiency(em, rates)
    weights = cavity_jump_weights(space.factor_dim(CAVITY), em, rates)
    m = emission_isometry(space, eta, weights)
    coherence = 1.0 - rates.dephasing / em.rate
    return ProcessMap(_blocks_from_isometry(m, coherence), space, m, coherence)


def choi_matrix(superop: np.ndarray, d_in: int) -> np.ndarray:
    """J = sum_ab |a><b| (x) Phi(|a><b|) for a row-major vectorised superoperator."""
    d_out = int(round(np.sqrt(superop.shape[0])))
    s = superop.reshape(d_out, d_out, d_in, d_in)
    return s.transpose(2, 0, 3, 1).reshape(d_in * d_out, d_in * d_out)


@dataclass(frozen=True)
class CptpReport:
    min_choi_eigenvalue: float
    trace_defect: float

    def passes(self, tol: float = 1e-10) -> bool:
        return self.min_choi_eigenvalue >= -tol and self.trace_defect <= tol


def verify_cptp(pmap: ProcessMap) -> CptpReport:
    d = pmap.source_dim
    choi = choi_matrix(pmap.full_superoperator(), d)
    herm = 0.5 * (choi + choi.conj().T)
    min_eig = float(np.linalg.eigvalsh(herm).min())
    # Tr_out J must equal the identity on the input
    tr_out = np.einsum("axbx->ab", choi.reshape(d, 2 * d, d, 2 * d))
    defect = float(np.max(np.abs(tr_out - np.eye(d))))
    asym = float(np.max(np.abs(choi - choi.conj().T)))
    if asym > 1e-10:
        min_eig = min(min_eig, -asym)
    return CptpReport(min_eig, defect)


def process_fidelity(pmap: ProcessMap, reference: ProcessMap) -> float:
    """Tr(J_ref J) / (Tr J_ref Tr J); the entanglement fidelity when the reference is pure."""
    d = pmap.source_dim
    j = choi_matrix(pmap.full_superoperator(), d)
    jr = choi_matrix(reference.full_superoperator(), d)
    ev = np.linalg.eigvalsh(0.5 * (jr + jr.conj().T))
    if ev[-2] > 1e-10:
        raise ValueError("reference map must have a single Kraus operator (use a two-level transmon)")
    return float(np.real(np.trace(jr @ j)) / (np.real(np.trace(jr)) * np.real(np.trace(j))))
