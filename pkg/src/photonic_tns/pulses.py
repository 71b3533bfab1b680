"""Optimal-control pulses for the cavity-transmon source.

Controls are complex amplitudes eps_q(t) multiplying a lowering-type operator A_q
(H contains eps_q A_q + h.c.). Each amplitude is held constant over ``n_slices``
equal time slices and is parametrised as

    eps(t) = B z / sqrt(1 + |z|^2),   z(t) = w(t) sum_{k=-K..K} c_k exp(2 pi i k t / T),

with w a flat-top window with sin^2 ramps, so |eps| < B and eps(0) = eps(T) = 0.
Gradients are exact: derivative states d psi / d theta are propagated forward
alongside psi, using the Frechet derivative of each slice exponential.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.optimize

from .hilbert import (CAVITY, TRANSMON, CompositeSpace, OperatorMatrix, TargetUnitary,
                      embed_isometry, lowering, sigma, source_space, stack_isometry)
from .lindblad import PiecewiseHamiltonian
from .mpdo import CLUSTER_LAST_V0, CLUSTER_LAST_V1, CLUSTER_V0, CLUSTER_V1

CHANNELS = ("cavity", "transmon")


@dataclass(frozen=True)
class SystemParams:
    """Rotating-frame parameters in rad/s. omega_* are informational only."""

    chi: float
    alpha: float
    omega_T: float = 0.0
    omega_C: float = 0.0

    def __post_init__(self):
        if not abs(self.alpha) > abs(self.chi):
            raise ValueError("require |alpha| > |chi|")


@dataclass
class PulseSchedule:
    duration: float
    n_slices: int
    harmonics: int
    ramp_fraction: float
    amplitude_bound: float | tuple[float, ...]
    coefficients: np.ndarray
    channels: tuple[str, ...] = CHANNELS
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex).reshape(
            len(self.channels), 2 * self.harmonics + 1)
        if np.ndim(self.amplitude_bound):
            self.amplitude_bound = tuple(float(b) for b in self.amplitude_bound)
            if len(self.amplitude_bound) != len(self.channels):
                raise ValueError("need one amplitude bound per channel")

    @property
    def bounds(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.amplitude_bound, dtype=float), (len(self.channels),))

    @property
    def dt(self) -> float:
        return self.duration / self.n_slices

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, self.n_slices + 1)

    def basis(self, t: np.ndarray) -> np.ndarray:
        return fourier_basis(t, self.duration, self.harmonics, self.ramp_fraction)

    def envelope(self, t) -> np.ndarray:
        """Continuous control values at times t, shape (len(t), n_channels)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        z = self.basis(t) @ self.coefficients.T
        return saturate(z, self.bounds)

    def samples(self) -> np.ndarray:
        """Held values per slice (evaluated at slice midpoints)."""
        mids = (np.arange(self.n_slices) + 0.5) * self.dt
        return self.envelope(mids)

    def value(self, t: float) -> np.ndarray:
        if not 0.0 <= t <= self.duration:
            raise ValueError(f"t={t} outside [0, {self.duration}]")
        k = min(int(t / self.dt), self.n_slices - 1)
        return self.samples()[k]

    def theta(self) -> np.ndarray:
        return coeffs_to_theta(self.coefficients)

    def with_theta(self, theta: np.ndarray, **meta) -> "PulseSchedule":
        return PulseSchedule(self.duration, self.n_slices, self.harmonics, self.ramp_fraction,
                             self.amplitude_bound, theta_to_coeffs(theta, len(self.channels),
                                                                   2 * self.harmonics + 1),
                             self.channels, {**self.meta, **meta})

    def to_json(self) -> str:
        payload = {
            "duration_s": self.duration,
            "n_slices": self.n_slices,
            "harmonics": self.harmonics,
            "ramp_fraction": self.ramp_fraction,
            "amplitude_bound": (list(self.amplitude_bound) if isinstance(self.amplitude_bound, tuple)
                                else self.amplitude_bound),
            "coefficients": {ch: [[float(c.real), float(c.imag)] for c in row]
                             for ch, row in zip(self.channels, self.coefficients)},
            "controls": {ch: [[float(v.real), float(v.imag)] for v in col]
                         for ch, col in zip(self.channels, self.samples().T)},
            "channels": list(self.channels),
            "meta": self.meta,
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PulseSchedule":
        d = json.loads(text)
        chans = tuple(d["channels"])
        coeffs = np.array([[complex(re, im) for re, im in d["coefficients"][ch]] for ch in chans])
        bound = d["amplitude_bound"]
        bound = tuple(bound) if isinstance(bound, list) else bound
        return cls(d["duration_s"], d["n_slices"], d["harmonics"], d["ramp_fraction"],
                   bound, coeffs, chans, d["meta"])

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "PulseSchedule":
        with open(path) as fh:
            return cls.from_json(fh.read())


def window(t: np.ndarray, duration: float, ramp_fraction: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    r = ramp_fraction * duration
    w = np.ones_like(t)
    if r > 0:
        up = t < r
        down = t > duration - r
        w[up] = np.sin(0.5 * np.pi * t[up] / r) ** 2
        w[down] = np.sin(0.5 * np.pi * (duration - t[down]) / r) ** 2
    return w


def fourier_basis(t, duration, harmonics, ramp_fraction) -> np.ndarray:
    """Windowed exp(2 pi i k t / T), k = -K..K; shape (len(t), 2K + 1)."""
    t = np.asarray(t, dtype=float)
    k = np.arange(-harmonics, harmonics + 1)
    return window(t, duration, ramp_fraction)[:, None] * np.exp(2j * np.pi * np.outer(t, k) / duration)


def saturate(z: np.ndarray, bound: float) -> np.ndarray:
    return bound * z / np.sqrt(1.0 + np.abs(z) ** 2)


def coeffs_to_theta(c: np.ndarray) -> np.ndarray:
    return np.concatenate([np.stack([row.real, row.imag]).reshape(-1) for row in c])


def theta_to_coeffs(theta: np.ndarray, n_channels: int, harmonics: int) -> np.ndarray:
    t = np.asarray(theta, dtype=float).reshape(n_channels, 2, harmonics)
    return t[:, 0] + 1j * t[:, 1]


def quadrature_jacobian(schedule: PulseSchedule, theta: np.ndarray):
    """Quadratures u[s, 2q + (0|1)] = (Re, Im) eps_q and du/dtheta, shape (S, 2Q, P)."""
    nq, K, S = len(schedule.channels), 2 * schedule.harmonics + 1, schedule.n_slices
    mids = (np.arange(S) + 0.5) * schedule.dt
    basis = schedule.basis(mids)
    coeffs = theta_to_coeffs(theta, nq, K)
    z = basis @ coeffs.T
    x, y = z.real, z.imag
    s = 1.0 / np.sqrt(1.0 + x * x + y * y)
    B = schedule.bounds
    eps = B * z * s
    # d eps / dx and d eps / dy as complex numbers
    de_dx = B * (s - z * x * s ** 3)
    de_dy = B * (1j * s - z * y * s ** 3)
    u = np.empty((S, 2 * nq))
    u[:, 0::2], u[:, 1::2] = eps.real, eps.imag
    jac = np.zeros((S, 2 * nq, 2 * nq * K))
    for q in range(nq):
        re_cols = slice(2 * q * K, 2 * q * K + K)
        im_cols = slice(2 * q * K + K, 2 * q * K + 2 * K)
        dx, dy = de_dx[:, q, None], de_dy[:, q, None]
        # d z / d Re c = basis, d z / d Im c = i basis
        for part, dz in ((re_cols, basis), (im_cols, 1j * basis)):
            d = dx * dz.real + dy * dz.imag
            jac[:, 2 * q, part] = d.real
            jac[:, 2 * q + 1, part] = d.imag
    return u, jac


def control_operators(space: CompositeSpace) -> list[np.ndarray]:
    """Lowering-type operators multiplying eps_C and eps_T."""
    nt = space.factor_dim(TRANSMON)
    nc = space.factor_dim(CAVITY)
    return [space.embed(CAVITY, lowering(nc)), space.embed(TRANSMON, lowering(nt))]


def drift_hamiltonian(params: SystemParams, space: CompositeSpace) -> np.ndarray:
    """chi b^dag b a^dag a + alpha sigma_22 (the latter only with three levels)."""
    nt = space.factor_dim(TRANSMON)
    nc = space.factor_dim(CAVITY)
    n_t = np.diag(np.arange(nt)).astype(complex)
    n_c = np.diag(np.arange(nc)).astype(complex)
    h = params.chi * np.kron(n_t, n_c)
    if nt > 2:
        h = h + params.alpha * space.embed(TRANSMON, sigma(nt, 2, 2))
    return h


def quadrature_operators(lowering_ops: Sequence[np.ndarray]) -> np.ndarray:
    ops = []
    for a in lowering_ops:
        ops.append(a + a.conj().T)
        ops.append(1j * (a - a.conj().T))
    return np.array(ops)


def control_hamiltonian(params: SystemParams, pulse: PulseSchedule, t: float,
                        space: CompositeSpace | None = None) -> OperatorMatrix:
    """Rotating-frame Hamiltonian at time t (held slice value)."""
    if space is None:
        space = pulse_space(pulse)
    eps = pulse.value(t)
    h = drift_hamiltonian(params, space)
    for e, a in zip(eps, control_operators(space)):
        h = h + e * a + np.conj(e) * a.conj().T
    return OperatorMatrix(h, space)


def pulse_space(pulse: PulseSchedule) -> CompositeSpace:
    return source_space(pulse.meta.get("cavity_cutoff", 5), pulse.meta.get("transmon_levels", 2))


def piecewise_hamiltonian(params: SystemParams, pulse: PulseSchedule,
                          space: CompositeSpace | None = None, t0: float = 0.0) -> PiecewiseHamiltonian:
    if space is None:
        space = pulse_space(pulse)
    h0 = drift_hamiltonian(params, space)
    ops = quadrature_operators(control_operators(space))
    u = np.empty((pulse.n_slices, len(ops)))
    s = pulse.samples()
    u[:, 0::2], u[:, 1::2] = s.real, s.imag
    mats = h0[None] + np.einsum("sq,qij->sij", u, ops)
    return PiecewiseHamiltonian(t0 + pulse.edges, mats)


# ---------------------------------------------------------------------------
# Propagation with forward-mode derivatives


def _slice_step(h: np.ndarray, ops: np.ndarray, dt: float, want_grad: bool):
    lam, v = np.linalg.eigh(h)
    f = np.exp(-1j * lam * dt)
    u = (v * f) @ v.conj().T
    if not want_grad:
        return u, None
    dl = lam[:, None] - lam[None, :]
    df = f[:, None] - f[None, :]
    close = np.abs(dl * dt) < 1e-10
    gamma = np.where(close, -1j * dt * f[:, None] * np.ones_like(dl),
                     df / np.where(close, 1.0, dl))
    vh = v.conj().T
    du = v @ (gamma * (vh @ ops @ v)) @ vh
    return u, du


@dataclass
class EvolutionResult:
    psi: np.ndarray
    dpsi: np.ndarray | None
    penalty: float
    dpenalty: np.ndarray | None


def evolve_columns(h0: np.ndarray, ops: np.ndarray, u: np.ndarray, jac: np.ndarray | None,
                   dt: float, psi0: np.ndarray, projector: np.ndarray | None = None) -> EvolutionResult:
    """Propagate columns psi0 through the held slices, optionally with d psi/d theta.

    ``projector`` (if given) accumulates the time-averaged population
    sum_c <psi_c|P|psi_c> / (S * ncols) sampled after each slice.
    """
    want = jac is not None
    S = u.shape[0]
    psi = psi0.astype(complex)
    n_par = jac.shape[2] if want else 0
    dpsi = np.zeros((n_par,) + psi.shape, dtype=complex) if want else None
    pen, dpen = 0.0, (np.zeros(n_par) if want else None)
    norm = 1.0 / (S * psi.shape[1])
    for s in range(S):
        h = h0 + np.tensordot(u[s], ops, axes=1)
        us, dus = _slice_step(h, ops, dt, want)
        if want:
            dpsi = us @ dpsi
            dpsi += np.tensordot(jac[s].T, dus @ psi, axes=1)
        psi = us @ psi
        if projector is not None:
            ppsi = projector @ psi
            pen += norm * float(np.real(np.vdot(psi, ppsi)))
            if want:
                dpen += 2 * norm * np.real(dpsi.reshape(n_par, -1) @ ppsi.conj().reshape(-1))
    return EvolutionResult(psi, dpsi, pen, dpen)


# ---------------------------------------------------------------------------
# Gate problems


@dataclass
class ControlProblem:
    """Map the columns ``inputs`` onto ``targets`` with the given drift and controls."""

    drift: np.ndarray
    lowering_ops: list[np.ndarray]
    inputs: np.ndarray
    targets: np.ndarray
    projector: np.ndarray | None = None

    def __post_init__(self):
        self.ops = quadrature_operators(self.lowering_ops)

    @property
    def ncols(self) -> int:
        return self.inputs.shape[1]

    def fidelity_from_psi(self, psi: np.ndarray) -> tuple[float, complex]:
        g = np.vdot(self.targets, psi)
        return float(abs(g) ** 2 / self.ncols ** 2), g

    def evaluate(self, schedule: PulseSchedule, theta: np.ndarray, penalty_weight: float = 0.0,
                 want_grad: bool = True):
        """Return (cost, grad, infidelity, penalty)."""
        u, jac = quadrature_jacobian(schedule, theta)
        proj = self.projector if (penalty_weight or not want_grad) else None
        res = evolve_columns(self.drift, self.ops, u, jac if want_grad else None, schedule.dt,
                             self.inputs, proj)
        fid, g = self.fidelity_from_psi(res.psi)
        cost = 1.0 - fid + penalty_weight * res.penalty
        grad = None
        if want_grad:
            dg = res.dpsi.reshape(res.dpsi.shape[0], -1) @ self.targets.conj().reshape(-1)
            grad = -2.0 * np.real(np.conj(g) * dg) / self.ncols ** 2
            if penalty_weight:
                grad = grad + penalty_weight * res.dpenalty
        return cost, grad, 1.0 - fid, res.penalty


def _excited_projector(space: CompositeSpace) -> np.ndarray:
    nt = space.factor_dim(TRANSMON)
    return space.embed(TRANSMON, np.diag([0.0] + [1.0] * (nt - 1)).astype(complex))


def gate_problem(target: TargetUnitary, params: SystemParams, transmon_levels: int = 2) -> ControlProblem:
    n_c = target.space.factor_dim(CAVITY)
    space = source_space(n_c, transmon_levels)
    idx = target.input_indices
    n2 = target.space.dim
    inputs = np.zeros((space.dim, len(idx)), dtype=complex)
    targets = np.zeros((space.dim, len(idx)), dtype=complex)
    for c, i in enumerate(idx):
        inputs[i, c] = 1.0
        # transmon is the slow index, so the two-level block embeds as a prefix
        targets[:n2, c] = target.matrix[:, i]
    return ControlProblem(drift_hamiltonian(params, space), control_operators(space), inputs,
                          targets, _excited_projector(space))


@dataclass(frozen=True)
class OptimizerOptions:
    harmonics: int = 8
    max_iterations: int = 2000
    target_infidelity: float = 1e-3
    penalty_weight: float = 0.0
    gradient: str = "forward"
    seed: int = 1234
    n_starts: int = 4
    init_scale: float = 0.5
    include_zero_start: bool = False
    duration_chi: float = 6.0
    n_slices: int = 180
    ramp_fraction: float = 0.1
    amplitude_chi: float = 4.0
    transmon_amplitude_chi: float | None = 0.6
    transmon_levels: int = 2

    def __post_init__(self):
        if not self.target_infidelity > 0:
            raise ValueError("target infidelity must be positive")
        if self.gradient not in ("forward", "finite-difference"):
            raise ValueError(f"unknown gradient method {self.gradient!r}")


@dataclass
class OptimizationResult:
    pulse: PulseSchedule
    infidelity: float
    converged: bool
    history: list[float]
    n_iterations: int
    wall_time: float
    start_index: int


def finite_difference_gradient(fun, theta: np.ndarray, step: float = 1e-6,
                               indices: Sequence[int] | None = None) -> np.ndarray:
    idx = range(len(theta)) if indices is None else indices
    out = np.zeros(len(theta))
    for i in idx:
        e = np.zeros_like(theta)
        e[i] = step
        out[i] = (fun(theta + e) - fun(theta - e)) / (2 * step)
    return out


def blank_schedule(params: SystemParams, opts: OptimizerOptions, n_channels: int = 2,
                   channels: tuple[str, ...] = CHANNELS, **meta) -> PulseSchedule:
    chi = abs(params.chi)
    bound = opts.amplitude_chi * chi
    if opts.transmon_amplitude_chi is not None:
        # transmon drives (named "transmon" or "T<k>") get their own bound
        bound = tuple(opts.transmon_amplitude_chi * chi if (c == "transmon" or c[:1] == "T")
                      else opts.amplitude_chi * chi for c in channels)
    return PulseSchedule(opts.duration_chi / chi, opts.n_slices, opts.harmonics, opts.ramp_fraction,
                         bound, np.zeros((n_channels, 2 * opts.harmonics + 1)), channels, dict(meta))


def optimize_problem(problem: ControlProblem, schedule: PulseSchedule, opts: OptimizerOptions) -> OptimizationResult:
    """Multi-start L-BFGS-B on 1 - F + w * (mean excited population)."""
    start = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    n_par = 2 * len(schedule.channels) * (2 * schedule.harmonics + 1)
    inits = []
    if opts.include_zero_start:
        inits.append(np.zeros(n_par))
    while len(inits) < opts.n_starts:
        inits.append(opts.init_scale * rng.standard_normal(n_par))

    def value_only(th):
        return problem.evaluate(schedule, th, opts.penalty_weight, want_grad=False)[0]

    best = None
    for k, th0 in enumerate(inits):
        cache = {}

        def fun(th):
            key = th.tobytes()
            if key not in cache:
                if opts.gradient == "forward":
                    c, g, _, _ = problem.evaluate(schedule, th, opts.penalty_weight)
                else:
                    c = value_only(th)
                    g = finite_difference_gradient(value_only, th)
                cache.clear()
                cache[key] = (c, g)
            return cache[key]

        history = [fun(th0)[0]]
        res = scipy.optimize.minimize(
            fun, th0, jac=True, method="L-BFGS-B",
            callback=lambda xk: history.append(fun(xk)[0]),
            options={"maxiter": opts.max_iterations, "ftol": 1e-16, "gtol": 1e-12, "maxcor": 30})
        _, _, infid, _ = problem.evaluate(schedule, res.x, 0.0, want_grad=False)
        cand = (infid, k, res.x, history, res.nit)
        if best is None or infid < best[0]:
            best = cand
        if best[0] <= opts.target_infidelity:
            break
    infid, k, theta, history, nit = best
    pulse = schedule.with_theta(theta, infidelity=infid, seed=opts.seed)
    return OptimizationResult(pulse, infid, infid <= opts.target_infidelity, history, nit,
                              time.perf_counter() - start, k)


def optimize_pulse(target: TargetUnitary, params: SystemParams,
                   opts: OptimizerOptions = OptimizerOptions(), name: str = "target") -> OptimizationResult:
    problem = gate_problem(target, params, opts.transmon_levels)
    sched = blank_schedule(params, opts, target=name,
                           cavity_cutoff=target.space.factor_dim(CAVITY),
                           transmon_levels=opts.transmon_levels)
    return optimize_problem(problem, sched, opts)


def gate_fidelity(pulse: PulseSchedule, target: TargetUnitary, params: SystemParams,
                  transmon_levels: int | None = None) -> float:
    """|sum_c <target_c| U |c, 0>|^2 / D^2 over the D input columns."""
    levels = transmon_levels or pulse.meta.get("transmon_levels", 2)
    problem = gate_problem(target, params, levels)
    return 1.0 - problem.evaluate(pulse, pulse.theta(), want_grad=False)[2]


def peak_excited_population(pulse: PulseSchedule, target: TargetUnitary, params: SystemParams) -> float:
    """Largest transmon excited population over slices and input columns."""
    problem = gate_problem(target, params, pulse.meta.get("transmon_levels", 2))
    u, _ = quadrature_jacobian(pulse, pulse.theta())
    psi = problem.inputs.astype(complex)
    peak = 0.0
    for s in range(pulse.n_slices):
        h = problem.drift + np.tensordot(u[s], problem.ops, axes=1)
        psi = _slice_step(h, problem.ops, pulse.dt, False)[0] @ psi
        pops = np.real(np.einsum("ic,ij,jc->c", psi.conj(), problem.projector, psi))
        peak = max(peak, float(pops.max()))
    return peak


def pulse_unitary(pulse: PulseSchedule, params: SystemParams, space: CompositeSpace | None = None) -> np.ndarray:
    ph = piecewise_hamiltonian(params, pulse, space)
    u = np.eye(ph.matrices.shape[1], dtype=complex)
    for h in ph.matrices:
        u = _slice_step(h, np.zeros((0,) + h.shape), pulse.dt, False)[0] @ u
    return u


def rescale_pulse(pulse: PulseSchedule, chi_from: float, chi_to: float) -> PulseSchedule:
    """Map a two-level-transmon pulse to another chi (time x chi and eps / chi invariant)."""
    r = abs(chi_to / chi_from)
    return PulseSchedule(pulse.duration / r, pulse.n_slices, pulse.harmonics, pulse.ramp_fraction,
                         tuple(pulse.bounds * r), pulse.coefficients.copy(), pulse.channels,
                         dict(pulse.meta))


# ---------------------------------------------------------------------------
# Cluster-state targets


def cluster_targets(cavity_cutoff: int) -> tuple[TargetUnitary, TargetUnitary]:
    if cavity_cutoff < 3:
        raise ValueError("cluster targets need a cavity cutoff of at least 3")
    space = source_space(cavity_cutoff, 2)
    bulk = embed_isometry(stack_isometry(CLUSTER_V0, CLUSTER_V1), space)
    last = embed_isometry(stack_isometry(CLUSTER_LAST_V0, CLUSTER_LAST_V1), space)
    return bulk, last


# ---------------------------------------------------------------------------
# Two coupled sources


@dataclass(frozen=True)
class CouplerTerm:
    """Beam-splitter coupling g e^{i phi} a_1^dag a_2 + h.c. between two cavities."""

    max_coupling: float
    endpoints: tuple[str, str] = ("C1", "C2")
    enabled: bool = True


def two_source_space(cavity_cutoff: int, transmon_levels: int = 2) -> CompositeSpace:
    return CompositeSpace(("T1", "C1", "T2", "C2"),
                          (transmon_levels, cavity_cutoff, transmon_levels, cavity_cutoff))


def two_source_problem(params: SystemParams, coupler: CouplerTerm, target_gate: np.ndarray,
                       cavity_cutoff: int = 3) -> tuple[ControlProblem, CompositeSpace]:
    """Gate on the two D=2 cavity subspaces with both transmons in |0>."""
    sp = two_source_space(cavity_cutoff)
    a = {lab: sp.embed(lab, lowering(sp.factor_dim(lab))) for lab in sp.labels}
    drift = params.chi * (a["T1"].conj().T @ a["T1"] @ a["C1"].conj().T @ a["C1"]
                          + a["T2"].conj().T @ a["T2"] @ a["C2"].conj().T @ a["C2"])
    ops = [a["C1"], a["T1"], a["C2"], a["T2"]]
    if coupler.enabled:
        ops.append(a["C1"].conj().T @ a["C2"])
    cols = [sp.flat_index({"T1": 0, "C1": c1, "T2": 0, "C2": c2}) for c1 in range(2) for c2 in range(2)]
    inputs = np.zeros((sp.dim, 4), dtype=complex)
    inputs[cols, range(4)] = 1.0
    targets = np.zeros_like(inputs)
    targets[cols, :] = target_gate
    return ControlProblem(drift, ops, inputs, targets), sp


CZ = np.diag([1, 1, 1, -1]).astype(complex)


def two_source_demo(params: SystemParams, coupler: CouplerTerm, target_gate: np.ndarray = CZ,
                    opts: OptimizerOptions | None = None, cavity_cutoff: int = 3) -> OptimizationResult:
    if cavity_cutoff > 3:
        raise ValueError("two-source demonstration is limited to cavity cutoff <= 3")
    opts = opts or OptimizerOptions(duration_chi=24.0, n_slices=120, n_starts=1, harmonics=8,
                                    max_iterations=800, target_infidelity=1e-2)
    problem, _ = two_source_problem(params, coupler, target_gate, cavity_cutoff)
    channels = ("C1", "T1", "C2", "T2") + (("coupler",) if coupler.enabled else ())
    sched = blank_schedule(params, opts, len(channels), channels, target="two-source",
                           cavity_cutoff=cavity_cutoff)
    if coupler.enabled:
        bounds = list(sched.bounds)
        bounds[-1] = coupler.max_coupling
        sched = replace(sched, amplitude_bound=tuple(bounds))
    return optimize_problem(problem, sched, opts)
