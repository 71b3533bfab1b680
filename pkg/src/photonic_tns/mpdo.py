"""n-photon state fidelity by transfer-matrix contraction of the noisy protocol.

Each round k acts on the source with W_L[k] and then emits one photon, so the
joint state after n rounds is

    rho = sum_{i,j} |i_n..i_1><j_n..j_1| (x) N^{i_n j_n} ... N^{i_1 j_1} rho_0,
    N^{ij} = W_ph^{ij} W_L.

The overlap with the target MPS is contracted site by site on the space
vec(source) (x) bond (x) conj(bond), so the cost is linear in n.
"""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .emission import ProcessMap
from .hilbert import CAVITY, TRANSMON, CompositeSpace
from .lindblad import vec

BRUTE_FORCE_MAX_N = 5
DEFAULT_N_GRID = (1, 2, 4, 8, 16, 32, 64, 128)


@dataclass(frozen=True)
class MpsTarget:
    """Per-round tuples (V^0, V^1, ...) of D x D matrices and boundary vectors."""

    rounds: tuple[tuple[np.ndarray, ...], ...]
    phi_I: np.ndarray
    phi_F: np.ndarray

    def __post_init__(self):
        for mats in self.rounds:
            d = sum(v.conj().T @ v for v in mats)
            if np.max(np.abs(d - np.eye(self.bond_dim))) > 1e-10:
                raise ValueError("round is not isometric")
        for v in (self.phi_I, self.phi_F):
            if abs(np.linalg.norm(v) - 1) > 1e-10:
                raise ValueError("boundary vectors must be normalised")

    @property
    def bond_dim(self) -> int:
        return len(self.phi_I)

    @property
    def physical_dim(self) -> int:
        return len(self.rounds[0])

    @property
    def length(self) -> int:
        return len(self.rounds)

    def amplitude(self, outcomes: Sequence[int]) -> complex:
        """<phi_F| V^{i_n} ... V^{i_1} |phi_I> for outcomes (i_1, ..., i_n)."""
        v = self.phi_I.astype(complex)
        for mats, i in zip(self.rounds, outcomes):
            v = mats[i] @ v
        return complex(np.vdot(self.phi_F, v))

    def statevector(self) -> np.ndarray:
        """Normalised photonic state, photon 1 as the slowest index."""
        p, n = self.physical_dim, self.length
        psi = np.array([self.amplitude(s) for s in itertools.product(range(p), repeat=n)])
        return psi / np.linalg.norm(psi)


CLUSTER_V0 = np.array([[1, 0], [1, 0]], dtype=complex) / np.sqrt(2)
CLUSTER_V1 = np.array([[0, 1], [0, -1]], dtype=complex) / np.sqrt(2)
CLUSTER_LAST_V0 = np.array([[1, 0], [0, 0]], dtype=complex)
CLUSTER_LAST_V1 = np.array([[0, 1], [0, 0]], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
ZERO = np.array([1, 0], dtype=complex)


def cluster_mps(n: int) -> MpsTarget:
    """n-photon linear cluster: (n-1) bulk rounds then the disentangling round."""
    if n < 1:
        raise ValueError("need at least one photon")
    rounds = [(CLUSTER_V0, CLUSTER_V1)] * (n - 1) + [(CLUSTER_LAST_V0, CLUSTER_LAST_V1)]
    return MpsTarget(tuple(rounds), PLUS, ZERO)


@dataclass
class RoundChannel:
    """N^{ij} = W_ph^{ij} W_L for one round; blocks shape (p, p, d^2, d^2)."""

    blocks: np.ndarray

    @classmethod
    def compose(cls, pmap: ProcessMap, w_l: np.ndarray) -> "RoundChannel":
        return cls(np.einsum("ijab,bc->ijac", pmap.blocks, w_l))

    def trace_defect(self) -> float:
        d2 = self.blocks.shape[2]
        tr = vec(np.eye(int(round(np.sqrt(d2)))))
        total = sum(self.blocks[i, i] for i in range(self.blocks.shape[0]))
        return float(np.max(np.abs(tr @ total - tr)))


def initial_source_state(space: CompositeSpace, phi_I: np.ndarray) -> np.ndarray:
    """|phi_I>_C |0>_T as a density matrix on the source."""
    psi = np.zeros(space.dim, dtype=complex)
    for c, amp in enumerate(phi_I):
        psi[space.flat_index({TRANSMON: 0, CAVITY: c})] = amp
    return np.outer(psi, psi.conj())


def protocol_channels(pmap: ProcessMap, w_bulk: np.ndarray, w_last: np.ndarray, n: int) -> list[RoundChannel]:
    """(n-1) bulk rounds and one final round, sharing the cached blocks."""
    bulk = RoundChannel.compose(pmap, w_bulk)
    last = RoundChannel.compose(pmap, w_last)
    return [bulk] * (n - 1) + [last]


def _target_norm(target: MpsTarget) -> float:
    y = np.outer(target.phi_I, target.phi_I.conj())
    for mats in target.rounds:
        y = sum(v @ y @ v.conj().T for v in mats)
    return float(np.real(np.vdot(target.phi_F, y @ target.phi_F)))


def mps_fidelity(channels: Sequence[RoundChannel], target: MpsTarget, rho0: np.ndarray) -> float:
    """<psi|rho_ph|psi> / <psi|psi> with rho_ph the photonic state after all rounds."""
    if len(channels) != target.length:
        raise ValueError(f"{len(channels)} channels for a target of length {target.length}")
    d2 = vec(rho0).size
    p = target.physical_dim
    for ch in channels:
        if ch.blocks.shape != (p, p, d2, d2):
            raise ValueError(f"channel blocks {ch.blocks.shape} do not match ({p}, {p}, {d2}, {d2})")
    # X[a, x, y]: a = vec(source), x = ket bond, y = bra bond
    x = vec(rho0)[:, None, None] * np.outer(target.phi_I, target.phi_I.conj())[None]
    for ch, mats in zip(channels, target.rounds):
        new = np.zeros_like(x)
        for i in range(p):
            for j in range(p):
                # pairs with conj(psi_i) psi_j: V^j on the ket bond, conj(V^i) on the bra bond
                t = np.einsum("ab,bxy->axy", ch.blocks[i, j], x)
                new += np.einsum("px,axy,qy->apq", mats[j], t, mats[i].conj())
        x = new
    tr = vec(np.eye(int(round(np.sqrt(d2)))))
    bond = np.einsum("a,axy->xy", tr, x)
    num = np.vdot(target.phi_F, bond @ target.phi_F)
    return float(np.real(num)) / _target_norm(target)


def brute_force_fidelity(round_propagators: Sequence[np.ndarray], pmap: ProcessMap,
                         target: MpsTarget, rho0: np.ndarray) -> float:
    """Explicit source (x) photons density matrix, for n <= 5 photons."""
    n = len(round_propagators)
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute-force oracle limited to n <= {BRUTE_FORCE_MAX_N}")
    if n != target.length:
        raise ValueError("propagator count differs from target length")
    if pmap.kraus is None:
        raise ValueError("process map has no Kraus isometry")
    d = rho0.shape[0]
    m = pmap.kraus
    env = m.shape[2] * m.shape[3]
    kraus = m.reshape(d, 2, env, d).transpose(2, 0, 1, 3)  # [e, s_out, ph, s_in]
    f = pmap.coherence_factor
    rho = rho0.astype(complex).reshape(d, 1, d, 1)
    for w in round_propagators:
        P = rho.shape[1]
        r = rho.transpose(0, 2, 1, 3).reshape(d * d, P * P)
        r = (w @ r).reshape(d, d, P, P).transpose(0, 2, 1, 3)
        out = np.einsum("esib,bPcQ,etjc->sPitQj", kraus, r, kraus.conj())
        out[:, :, 0, :, :, 1] *= f
        out[:, :, 1, :, :, 0] *= f
        rho = out.reshape(d, 2 * P, d, 2 * P)
    rho_ph = np.einsum("sPsQ->PQ", rho)
    psi = target.statevector()
    return float(np.real(np.vdot(psi, rho_ph @ psi)))


@dataclass
class FidelityCurve:
    ns: np.ndarray
    fidelities: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ns = np.asarray(self.ns, dtype=int)
        self.fidelities = np.asarray(self.fidelities, dtype=float)
        if np.any(self.fidelities < -1e-9) or np.any(self.fidelities > 1 + 1e-9):
            raise ValueError("fidelities must lie in [0, 1]")

    def params_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.meta, sort_keys=True, default=str).encode()).hexdigest()[:12]

    def to_csv(self, path):
        h = self.params_hash()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "F", "params_hash"])
            for n, f in zip(self.ns, self.fidelities):
                w.writerow([int(n), repr(float(f)), h])


def fidelity_curve(pmap: ProcessMap, w_bulk: np.ndarray, w_last: np.ndarray,
                   ns: Sequence[int] = DEFAULT_N_GRID, meta: dict | None = None) -> FidelityCurve:
    """Cluster-state fidelity over a grid of photon numbers.

    The contraction is run once up to max(ns) rounds of bulk channel, branching
    off with the final round at each requested n.
    """
    space = pmap.space
    bulk = RoundChannel.compose(pmap, w_bulk)
    last = RoundChannel.compose(pmap, w_last)
    fids = []
    for n in ns:
        fids.append(mps_fidelity([bulk] * (n - 1) + [last], cluster_mps(n),
                                 initial_source_state(space, PLUS)))
    return FidelityCurve(np.array(ns), np.array(fids), meta or {})


@dataclass(frozen=True)
class XiFit:
    xi: float
    intercept: float
    r_squared: float
    n_photon: float


def extract_xi(curve: FidelityCurve) -> XiFit:
    """Least-squares line -ln F = xi n + c; N_ph = ln 2 / xi."""
    if len(curve.ns) < 4:
        raise ValueError("need at least four samples")
    if np.any(curve.fidelities <= 0):
        raise ValueError("fidelities must be positive")
    y = -np.log(curve.fidelities)
    fit = stats.linregress(curve.ns.astype(float), y)
    resid = y - (fit.slope * curve.ns + fit.intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    n_ph = np.inf if fit.slope <= 0 else np.log(2) / fit.slope
    return XiFit(float(fit.slope), float(fit.intercept), r2, float(n_ph))
