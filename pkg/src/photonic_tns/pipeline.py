"""End-to-end steps shared by the CLI, scripts and tests."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .budget import (ErrorBudget, SweepPlan, baseline_xi, entanglement_length, fit_budget,
                     optimal_emission_time, run_sweeps)
from .config import PhysicalParams, RunConfig
from .emission import EmissionParams
from .mpdo import FidelityCurve, extract_xi
from .protocol import ProtocolSetup, simulate_curve
from .pulses import (OptimizationResult, PulseSchedule, cluster_targets, optimize_pulse,
                     rescale_pulse)

log = logging.getLogger(__name__)

PULSE_FILES = {"bulk": "pulse_bulk.json", "last": "pulse_last.json"}
REFERENCE_N_PH = {"heeres": (123.0, (60.0, 250.0)), "besse": (47.0, (25.0, 95.0))}


@dataclass
class PulsePair:
    bulk: PulseSchedule
    last: PulseSchedule
    infidelity: dict

    def save(self, directory) -> dict[str, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {}
        for key, pulse in (("bulk", self.bulk), ("last", self.last)):
            paths[key] = d / PULSE_FILES[key]
            pulse.save(paths[key])
        return paths

    @classmethod
    def load(cls, directory) -> "PulsePair":
        d = Path(directory)
        missing = [f for f in PULSE_FILES.values() if not (d / f).is_file()]
        if missing:
            raise FileNotFoundError(f"missing pulse artifacts in {d}: {missing}")
        bulk = PulseSchedule.load(d / PULSE_FILES["bulk"])
        last = PulseSchedule.load(d / PULSE_FILES["last"])
        return cls(bulk, last, {"bulk": bulk.meta.get("infidelity"), "last": last.meta.get("infidelity")})

    def rescaled(self, chi_from: float, chi_to: float) -> "PulsePair":
        return PulsePair(rescale_pulse(self.bulk, chi_from, chi_to),
                         rescale_pulse(self.last, chi_from, chi_to), dict(self.infidelity))


def optimize_cluster_pulses(cfg: RunConfig) -> tuple[PulsePair, dict[str, OptimizationResult]]:
    phys = cfg.physical()
    params = phys.system()
    bulk_t, last_t = cluster_targets(cfg.cavity_cutoff)
    opts = cfg.optimizer()
    results = {}
    for name, target in (("bulk", bulk_t), ("last", last_t)):
        log.info("optimizing %s pulse", name)
        res = optimize_pulse(target, params, opts, name)
        res.pulse.meta["infidelity"] = float(res.infidelity)
        results[name] = res
    pair = PulsePair(results["bulk"].pulse, results["last"].pulse,
                     {k: float(r.infidelity) for k, r in results.items()})
    return pair, results


def protocol_setup(phys: PhysicalParams, pulses: PulsePair, t_em: float,
                   transmon_levels: int = 3, cavity_cutoff: int | None = None) -> ProtocolSetup:
    """All noise on: decoherence during gates and emission, finite emission window."""
    rates = phys.rates()
    return ProtocolSetup(phys.system(), pulses.bulk, pulses.last, unit_rates=rates,
                         emission=phys.emission(t_em), emission_rates=rates,
                         transmon_levels=transmon_levels,
                         cavity_cutoff=cavity_cutoff or pulses.bulk.meta.get("cavity_cutoff", 5))


def ideal_setup(phys: PhysicalParams, pulses: PulsePair) -> ProtocolSetup:
    return ProtocolSetup(phys.system(), pulses.bulk, pulses.last,
                         emission=EmissionParams(phys.gamma_em),
                         cavity_cutoff=pulses.bulk.meta.get("cavity_cutoff", 5))


def fit_cluster_budget(phys: PhysicalParams, pulses: PulsePair, plan: SweepPlan = SweepPlan(),
                       mapper: Callable = map) -> tuple[ErrorBudget, list]:
    base = ideal_setup(phys, pulses)
    sweeps = run_sweeps(base, plan, mapper=mapper)
    prov = {"target": "linear cluster", "pulse_infidelity": pulses.infidelity,
            "duration_chi": pulses.bulk.duration * abs(phys.chi)}
    return fit_budget(sweeps, baseline_xi(base), prov), sweeps


def headline(budget: ErrorBudget, phys: PhysicalParams) -> dict:
    """Optimal emission time and entanglement length for a parameter set."""
    rates = phys.rates()
    em = phys.emission()
    t_opt = optimal_emission_time(budget, em, rates)
    n_ph = entanglement_length(budget, rates, phys.chi, phys.alpha, phys.emission(t_opt))
    return {"T_em_opt_s": t_opt, "N_ph": n_ph, "units": phys.units}


def band_check(preset: str, n_ph: float) -> dict:
    ref, (lo, hi) = REFERENCE_N_PH.get(preset, (math.nan, (math.nan, math.nan)))
    return {"reference": ref, "band": [lo, hi], "in_band": bool(lo <= n_ph <= hi)}


def direct_curve(phys: PhysicalParams, pulses: PulsePair, t_em: float,
                 ns=(1, 2, 4, 8, 16, 32, 64, 128)) -> FidelityCurve:
    return simulate_curve(protocol_setup(phys, pulses, t_em), ns)


def curve_summary(curve: FidelityCurve) -> dict:
    fit = extract_xi(curve)
    return {"xi": fit.xi, "intercept": fit.intercept, "R2": fit.r_squared, "N_ph": fit.n_photon}


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1, default=_default) + "\n")


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))
