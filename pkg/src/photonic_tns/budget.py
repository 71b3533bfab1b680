"""Error budget: per-channel sweeps, coefficient fits and the derived estimates.

The error per photon is modelled as

    xi = xi_unit + xi_em_src + xi_em_ph
    xi_unit   = b0 + (bC G_C + bT G_T + bphi G_phi) / |chi| + b_alpha chi^2 / alpha^2
    xi_em_src = b_phi_em G_phi / G_em + b_C_em G_C T_em
    xi_em_ph  = -b_em log[(1 - e^{-G_em T_em}) G_em / (G_em + G_T) p_em]
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .emission import EmissionParams, effective_efficiency
from .lindblad import DecoherenceRates
from .protocol import NO_RATES, ProtocolSetup, simulate_xi
from .pulses import SystemParams

R2_FLAG = 0.98

# channel -> (coefficient name, description of x)
CHANNELS = {
    "transmon_decay": ("beta_T", "Gamma_T/|chi|"),
    "dephasing": ("beta_phi", "Gamma_phi/|chi|"),
    "cavity_decay": ("beta_C", "Gamma_C/|chi|"),
    "anharmonicity": ("beta_alpha", "(chi/alpha)^2"),
    "dephasing_em": ("beta_phi_em", "Gamma_phi/Gamma_em"),
    "cavity_decay_em": ("beta_C_em", "Gamma_C*T_em"),
    "efficiency": ("beta_em", "-log(eta_eff)"),
}


@dataclass
class ChannelSweep:
    channel: str
    x: np.ndarray
    xi: np.ndarray
    xi_r2: np.ndarray | None = None

    def fit(self) -> tuple[float, float, float]:
        """(slope, intercept, R^2) of the unweighted line xi = slope x + intercept."""
        res = stats.linregress(self.x, self.xi)
        return float(res.slope), float(res.intercept), float(res.rvalue ** 2)


@dataclass
class ErrorBudget:
    beta_0: float = 0.0
    beta_C: float = 0.0
    beta_T: float = 0.0
    beta_phi: float = 0.0
    beta_alpha: float = 0.0
    beta_phi_em: float = 0.0
    beta_C_em: float = 0.0
    beta_em: float = 0.0
    r_squared: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ErrorBudget":
        return cls(**json.loads(text))

    def without_emission(self) -> "ErrorBudget":
        d = asdict(self)
        d.update(beta_phi_em=0.0, beta_C_em=0.0, beta_em=0.0)
        return ErrorBudget(**d)


REFERENCE_BUDGET = ErrorBudget(beta_0=2.58e-4, beta_C=2.20, beta_T=1.43, beta_phi=0.92,
                               beta_alpha=46.7, beta_phi_em=0.51, beta_C_em=0.47, beta_em=0.47,
                               provenance={"source": "published coefficients"})


def fit_budget(sweeps: Sequence[ChannelSweep], baseline_xi: float | None = None,
               provenance: dict | None = None) -> ErrorBudget:
    """Slopes of each isolated-channel sweep; beta_0 from the noiseless run."""
    b = ErrorBudget(provenance=dict(provenance or {}))
    intercepts = []
    for sw in sweeps:
        if sw.channel not in CHANNELS:
            raise ValueError(f"unknown channel {sw.channel!r}")
        if len(sw.x) < 5:
            raise ValueError(f"channel {sw.channel} needs at least 5 points")
        slope, icpt, r2 = sw.fit()
        name = CHANNELS[sw.channel][0]
        setattr(b, name, slope)
        b.r_squared[sw.channel] = r2
        if r2 < R2_FLAG:
            b.flags.append(f"{sw.channel}: poor fit R^2={r2:.4f}")
        if slope < 0:
            b.flags.append(f"{sw.channel}: negative coefficient {slope:.3g}")
        if sw.channel in ("transmon_decay", "dephasing", "cavity_decay"):
            intercepts.append(icpt)
    if baseline_xi is not None:
        b.beta_0 = float(baseline_xi)
    elif intercepts:
        b.beta_0 = float(np.mean(intercepts))
    return b


def xi_unit(b: ErrorBudget, rates: DecoherenceRates, chi: float, alpha: float) -> float:
    return (b.beta_0 + (b.beta_C * rates.cavity_decay + b.beta_T * rates.transmon_decay
                        + b.beta_phi * rates.dephasing) / abs(chi)
            + b.beta_alpha * chi ** 2 / alpha ** 2)


def xi_emission_source(b: ErrorBudget, rates: DecoherenceRates, em: EmissionParams) -> float:
    cav = 0.0 if rates.cavity_decay == 0 else b.beta_C_em * rates.cavity_decay * em.duration
    return b.beta_phi_em * rates.dephasing / em.rate + cav


def xi_emission_photon(b: ErrorBudget, rates: DecoherenceRates, em: EmissionParams) -> float:
    eta = effective_efficiency(em, rates)
    if eta <= 0:
        return math.inf
    return -b.beta_em * math.log(eta)


def xi_total(b: ErrorBudget, rates: DecoherenceRates, chi: float, alpha: float,
             em: EmissionParams) -> float:
    return (xi_unit(b, rates, chi, alpha) + xi_emission_source(b, rates, em)
            + xi_emission_photon(b, rates, em))


def optimal_emission_time(b: ErrorBudget, em: EmissionParams, rates: DecoherenceRates) -> float:
    """argmin over T_em of xi; infinite when cavity decay does not penalise long emission."""
    if rates.cavity_decay == 0 or b.beta_C_em == 0:
        return math.inf
    return math.log1p(b.beta_em * em.rate / (b.beta_C_em * rates.cavity_decay)) / em.rate


def scan_emission_time(b: ErrorBudget, em: EmissionParams, rates: DecoherenceRates,
                       grid: np.ndarray, chi: float, alpha: float) -> float:
    """Grid argmin of xi(T_em), the independent check of the closed form."""
    vals = [xi_total(b, rates, chi, alpha, EmissionParams(em.rate, em.efficiency, t)) for t in grid]
    return float(grid[int(np.argmin(vals))])


def entanglement_length(b: ErrorBudget, rates: DecoherenceRates, chi: float, alpha: float,
                        em: EmissionParams) -> float:
    xi = xi_total(b, rates, chi, alpha, em)
    return math.inf if xi == 0 else math.log(2) / xi


def bond_dim_scaling(b: ErrorBudget, D: int, rates: DecoherenceRates, chi: float, alpha: float,
                     em: EmissionParams) -> float:
    """xi(D) with the gate-time factor (D/2)^2 relative to the fitted D = 2 budget."""
    if D < 2:
        raise ValueError("bond dimension must be at least 2")
    return ((D / 2) ** 2 * xi_unit(b, rates, chi, alpha) + xi_emission_source(b, rates, em)
            + xi_emission_photon(b, rates, em))


def plan_ancilla(L_p: int, D_prime: int) -> int:
    """Smallest L_c with D'^L_c >= 2^(L_p - 1)."""
    if L_p < 2 or D_prime < 2:
        raise ValueError("need L_p >= 2 and D' >= 2")
    L_c = 1
    while D_prime ** L_c < 2 ** (L_p - 1):
        L_c += 1
    return L_c


@dataclass(frozen=True)
class RpPepsEstimate:
    xi_rp: float
    fidelity: float
    n: int
    m: int
    L_p: int
    D_prime: int
    L_c: int
    T_rp: float
    prefactor: float
    budget_is_proxy: bool = True


def rp_peps_estimate(b: ErrorBudget, L_p: int, D_prime: int, rates: DecoherenceRates, chi: float,
                     alpha: float, em: EmissionParams, n: int, m: int, L_c: int | None = None,
                     proxy: bool = True) -> RpPepsEstimate:
    """xi_rp = 4^{L_p^2} (L_p - 1) L_p xi'_unit / log2 D' + xi'_em_src + xi'_em_ph."""
    L_c = plan_ancilla(L_p, D_prime) if L_c is None else L_c
    if D_prime ** L_c < 2 ** (L_p - 1):
        raise ValueError(f"D'^L_c = {D_prime ** L_c} cannot hold L_p - 1 = {L_p - 1} qubits")
    primed = DecoherenceRates(rates.transmon_decay, (D_prime - 1) * rates.cavity_decay,
                              rates.dephasing)
    t_rp = 4.0 ** (L_p ** 2)
    prefactor = t_rp * (L_p - 1) * L_p / math.log2(D_prime)
    xi = (prefactor * xi_unit(b, primed, chi, alpha) + xi_emission_source(b, primed, em)
          + xi_emission_photon(b, primed, em))
    return RpPepsEstimate(xi, math.exp(-xi * n * m), n, m, L_p, D_prime, L_c, t_rp, prefactor, proxy)


def tradeoff_table(b: ErrorBudget, rates: DecoherenceRates, chi: float, alpha: float,
                   em: EmissionParams, n: int, m: int, L_ps: Sequence[int] = (2, 3),
                   D_primes: Sequence[int] = (2, 4, 8)) -> list[RpPepsEstimate]:
    return [rp_peps_estimate(b, L_p, dp, rates, chi, alpha, em, n, m)
            for L_p in L_ps for dp in D_primes]


# ---------------------------------------------------------------------------
# Sweeps


@dataclass(frozen=True)
class SweepPlan:
    """Largest x per channel; grids are linspace(0, x_max, points) (alpha starts above 0)."""

    points: int = 5
    x_max: dict = field(default_factory=lambda: {
        "transmon_decay": 2e-3, "dephasing": 2e-3, "cavity_decay": 2e-3,
        "anharmonicity": 4e-4, "dephasing_em": 8e-3, "cavity_decay_em": 8e-3,
        "efficiency": 8e-3})
    emission_window: float = 1e-6

    def grid(self, channel: str) -> np.ndarray:
        top = self.x_max[channel]
        if channel == "anharmonicity":
            return np.linspace(top / self.points, top, self.points)
        return np.linspace(0.0, top, self.points)


def channel_setup(base: ProtocolSetup, channel: str, x: float, plan: SweepPlan) -> ProtocolSetup:
    """Isolated-channel protocol: only ``channel`` is imperfect, at strength x."""
    chi = abs(base.params.chi)
    ideal = base.but(unit_rates=NO_RATES, emission_rates=NO_RATES, transmon_levels=2,
                     emission=EmissionParams(base.emission.rate))
    if channel == "transmon_decay":
        return ideal.but(unit_rates=DecoherenceRates(transmon_decay=x * chi))
    if channel == "dephasing":
        return ideal.but(unit_rates=DecoherenceRates(dephasing=x * chi))
    if channel == "cavity_decay":
        return ideal.but(unit_rates=DecoherenceRates(cavity_decay=x * chi))
    if channel == "anharmonicity":
        return ideal.but(params=SystemParams(base.params.chi, -chi / math.sqrt(x)), transmon_levels=3)
    rate = base.emission.rate
    if channel == "dephasing_em":
        return ideal.but(emission_rates=DecoherenceRates(dephasing=x * rate))
    if channel == "cavity_decay_em":
        t = plan.emission_window
        return ideal.but(emission=EmissionParams(rate, 1.0, t),
                         emission_rates=DecoherenceRates(cavity_decay=x / t))
    if channel == "efficiency":
        return ideal.but(emission=EmissionParams(rate, math.exp(-x)))
    raise ValueError(f"unknown channel {channel!r}")


def sweep_point(args) -> tuple[float, float]:
    """(xi, R^2) for one point; top level so process pools can pickle it."""
    base, channel, x, plan, ns = args
    fit = simulate_xi(channel_setup(base, channel, x, plan), ns)
    return fit.xi, fit.r_squared


def run_sweeps(base: ProtocolSetup, plan: SweepPlan = SweepPlan(),
               channels: Sequence[str] = tuple(CHANNELS), ns: Sequence[int] = (2, 4, 8, 16, 32),
               mapper: Callable = map) -> list[ChannelSweep]:
    """Evaluate every channel grid; ``mapper`` may be an ordered parallel map."""
    jobs = [(base, ch, float(x), plan, tuple(ns)) for ch in channels for x in plan.grid(ch)]
    results = list(mapper(sweep_point, jobs))
    out, k = [], 0
    for ch in channels:
        g = plan.grid(ch)
        res = results[k:k + len(g)]
        k += len(g)
        out.append(ChannelSweep(ch, g, np.array([r[0] for r in res]), np.array([r[1] for r in res])))
    return out


def baseline_xi(base: ProtocolSetup, ns: Sequence[int] = (2, 4, 8, 16, 32)) -> float:
    ideal = base.but(unit_rates=NO_RATES, emission_rates=NO_RATES, transmon_levels=2,
                     emission=EmissionParams(base.emission.rate))
    return simulate_xi(ideal, ns).xi


def write_sweeps_csv(sweeps: Sequence[ChannelSweep], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "x", "xi", "R2"])
        for sw in sweeps:
            r2 = sw.fit()[2]
            for x, xi in zip(sw.x, sw.xi):
                w.writerow([sw.channel, repr(float(x)), repr(float(xi)), repr(r2)])
