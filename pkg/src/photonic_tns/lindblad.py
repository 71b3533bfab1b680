"""Vectorised Lindblad dynamics and round propagators.

Vectorisation: rho_vec = sum_ab rho_ab |a> (x) |conj b>, i.e. ``rho.reshape(-1)``
in numpy's row-major order. Under this convention vec(A rho B) = (A (x) B^T) vec(rho),
so the closed-system generator is -i (H (x) I - I (x) conj(H)).
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .hilbert import CAVITY, TRANSMON, CompositeSpace, OperatorMatrix, lowering, sigma

VEC_CONVENTION = "ket-conjbra"
HERMITICITY_TOL = 1e-10


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecoherenceRates:
    """Decay and dephasing rates in 1/s."""

    transmon_decay: float = 0.0
    cavity_decay: float = 0.0
    dephasing: float = 0.0

    def __post_init__(self):
        for name in ("transmon_decay", "cavity_decay", "dephasing"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def scaled(self, factor: float) -> "DecoherenceRates":
        return DecoherenceRates(self.transmon_decay * factor, self.cavity_decay * factor,
                                self.dephasing * factor)

    @property
    def any(self) -> bool:
        return bool(self.transmon_decay or self.cavity_decay or self.dephasing)


def transmon_ladder(levels: int) -> np.ndarray:
    """sigma_01 + sqrt(2) sigma_12 (+ ...), i.e. the truncated oscillator lowering operator."""
    return lowering(levels)


def jump_operators(space: CompositeSpace, rates: DecoherenceRates) -> list[np.ndarray]:
    """J_T = sqrt(G_T) b, J_C = sqrt(G_C) a, J_phi = sqrt(G_phi) (sigma_11 + 2 sigma_22)."""
    jumps = []
    if rates.transmon_decay:
        nt = space.factor_dim(TRANSMON)
        jumps.append(np.sqrt(rates.transmon_decay) * space.embed(TRANSMON, transmon_ladder(nt)))
    if rates.cavity_decay:
        nc = space.factor_dim(CAVITY)
        jumps.append(np.sqrt(rates.cavity_decay) * space.embed(CAVITY, lowering(nc)))
    if rates.dephasing:
        nt = space.factor_dim(TRANSMON)
        n_op = sum(k * sigma(nt, k, k) for k in range(1, nt))
        jumps.append(np.sqrt(rates.dephasing) * space.embed(TRANSMON, n_op))
    return jumps


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.conj()))


def dissipator(jumps: Sequence[np.ndarray], dim: int) -> np.ndarray:
    eye = np.eye(dim)
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for j in jumps:
        jdj = j.conj().T @ j
        out += np.kron(j, j.conj()) - 0.5 * (np.kron(jdj, eye) + np.kron(eye, jdj.T))
    return out


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(d, d)


@dataclass(frozen=True)
class PiecewiseHamiltonian:
    """Hamiltonian held constant on the intervals [edges[k], edges[k+1])."""

    edges: np.ndarray
    matrices: np.ndarray

    def __post_init__(self):
        if len(self.edges) != len(self.matrices) + 1:
            raise ValueError("need one more edge than segments")

    def segment(self, t: float) -> int:
        k = int(np.searchsorted(self.edges, t, side="right")) - 1
        return min(max(k, 0), len(self.matrices) - 1)

    def __call__(self, t: float) -> np.ndarray:
        if t < self.edges[0] - 1e-15 or t > self.edges[-1] + 1e-15:
            raise ValueError(f"t={t} outside [{self.edges[0]}, {self.edges[-1]}]")
        return self.matrices[self.segment(t)]


def _as_matrix(h) -> np.ndarray:
    return h.matrix if isinstance(h, OperatorMatrix) else np.asarray(h)


def _check_hermitian(h: np.ndarray):
    err = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if err > HERMITICITY_TOL:
        raise ValueError(f"Hamiltonian is not Hermitian (defect {err:.2e})")


@dataclass
class Liouvillian:
    """Time-dependent generator L(t) with optional piecewise-constant structure."""

    hamiltonian: Callable[[float], np.ndarray]
    dissipator: np.ndarray
    dim: int
    breakpoints: tuple[float, ...] = ()
    piecewise: PiecewiseHamiltonian | None = None
    convention: str = VEC_CONVENTION
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, t: float) -> np.ndarray:
        h = self.hamiltonian(t)
        _check_hermitian(h)
        return hamiltonian_superop(h) + self.dissipator

    def segment_generator(self, k: int) -> np.ndarray:
        if k not in self._cache:
            h = self.piecewise.matrices[k]
            _check_hermitian(h)
            self._cache[k] = hamiltonian_superop(h) + self.dissipator
        return self._cache[k]


def build_liouvillian(hamiltonian, rates: DecoherenceRates, space: CompositeSpace) -> Liouvillian:
    """Generator of d rho/dt = -i[H, rho] + sum_n D[J_n] rho.

    ``hamiltonian`` may be a constant matrix / OperatorMatrix, a
    :class:`PiecewiseHamiltonian`, or any callable ``t -> matrix``.
    """
    dim = space.dim
    diss = dissipator(jump_operators(space, rates), dim)
    if isinstance(hamiltonian, PiecewiseHamiltonian):
        for h in hamiltonian.matrices:
            _check_hermitian(h)
        return Liouvillian(hamiltonian, diss, dim, tuple(hamiltonian.edges), hamiltonian)
    if callable(hamiltonian) and not isinstance(hamiltonian, (np.ndarray, OperatorMatrix)):
        return Liouvillian(hamiltonian, diss, dim)
    h = _as_matrix(hamiltonian)
    _check_hermitian(h)
    const = PiecewiseHamiltonian(np.array([-np.inf, np.inf]), h[None])
    return Liouvillian(lambda t: h, diss, dim, (), const)


@dataclass
class PropagatorResult:
    W: np.ndarray
    trace_error: float
    steps: int
    wall_time: float
    convention: str = VEC_CONVENTION


def trace_preservation_error(w: np.ndarray) -> float:
    d = int(round(np.sqrt(w.shape[0])))
    tr = vec(np.eye(d))
    return float(np.max(np.abs(tr @ w - tr)))


def _segments(L: Liouvillian, t0: float, t1: float) -> list[tuple[float, float]]:
    cuts = [t for t in L.breakpoints if t0 < t < t1 and np.isfinite(t)]
    pts = [t0, *cuts, t1]
    return [(a, b) for a, b in zip(pts[:-1], pts[1:]) if b > a]


def _rk45(L: Liouvillian, y0: np.ndarray, a: float, b: float, rtol: float, atol: float,
          max_steps: int, t_eval=None, method: str = "RK45"):
    shape = y0.shape
    counter = [0]
    piece = L.piecewise
    k_fixed = None
    if piece is not None:
        k_fixed = piece.segment(0.5 * (a + b)) if np.isfinite(piece.edges).all() else 0

    def rhs(t, y):
        counter[0] += 1
        if counter[0] > 6 * max_steps:
            raise PropagationError(f"tolerance not met within {max_steps} steps")
        gen = L.segment_generator(k_fixed) if k_fixed is not None else L(t)
        return (gen @ y.reshape(shape)).reshape(-1)

    sol = solve_ivp(rhs, (a, b), y0.reshape(-1), method=method, rtol=rtol, atol=atol,
                    t_eval=t_eval)
    if sol.status != 0:
        raise PropagationError(sol.message)
    return sol


def propagate(L: Liouvillian, t0: float, t1: float, rtol: float = 1e-9, atol: float = 1e-12,
              method: str = "auto", max_steps: int = 200_000) -> PropagatorResult:
    """Time-ordered exponential W_L = T exp(int_t0^t1 L dt).

    ``method``: ``"rk45"`` (adaptive Dormand-Prince, segment by segment),
    ``"expm"`` (exact exponentials; requires a piecewise-constant generator)
    or ``"auto"`` (expm when piecewise-constant, otherwise rk45).
    """
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    start = time.perf_counter()
    if method == "auto":
        method = "expm" if L.piecewise is not None else "rk45"
    n = L.dim * L.dim
    w = np.eye(n, dtype=complex)
    steps = 0
    for a, b in _segments(L, t0, t1):
        if method == "expm":
            if L.piecewise is None:
                raise ValueError("expm propagation needs a piecewise-constant generator")
            k = L.piecewise.segment(0.5 * (a + b)) if np.isfinite(L.piecewise.edges).all() else 0
            w = scipy.linalg.expm(L.segment_generator(k) * (b - a)) @ w
            steps += 1
        elif method in ("rk45", "dop853"):
            sol = _rk45(L, w, a, b, rtol, atol, max_steps,
                        method="RK45" if method == "rk45" else "DOP853")
            w = sol.y[:, -1].reshape(n, n)
            steps += len(sol.t) - 1
        else:
            raise ValueError(f"unknown method {method!r}")
    return PropagatorResult(w, trace_preservation_error(w), steps, time.perf_counter() - start)


def validate_density_matrix(rho: np.ndarray, tol: float = 1e-10):
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density matrix must have unit trace")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix must be Hermitian")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise ValueError("density matrix must be positive semidefinite")


@dataclass
class Trajectory:
    times: np.ndarray
    values: dict[str, np.ndarray]

    def to_csv(self, path):
        names = list(self.values)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *names])
            for i, t in enumerate(self.times):
                w.writerow([repr(float(t)), *(repr(float(self.values[k][i])) for k in names)])


def evolve_state(rho0: np.ndarray, L: Liouvillian, times: Sequence[float],
                 observables: Mapping[str, np.ndarray], rtol: float = 1e-9,
                 atol: float = 1e-12) -> Trajectory:
    """Expectation values <O_k>(t) sampled at ``times`` (ascending, first = start)."""
    validate_density_matrix(rho0)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    obs = {k: np.asarray(v) for k, v in observables.items()}
    out = {k: np.empty(len(times)) for k in obs}
    y = vec(rho0).astype(complex)

    def record(i, yv):
        rho = unvec(yv)
        for k, o in obs.items():
            out[k][i] = float(np.real(np.trace(o @ rho)))

    record(0, y)
    for i in range(1, len(times)):
        for a, b in _segments(L, times[i - 1], times[i]):
            sol = _rk45(L, y, a, b, rtol, atol, 200_000)
            y = sol.y[:, -1]
        record(i, y)
    return Trajectory(times, out)
