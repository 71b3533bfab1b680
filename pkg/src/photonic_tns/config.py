"""Run configuration, parameter presets and unit handling.

Config files are flat ``key = value`` text; ``#`` starts a comment. Rates are
quoted in kHz and frequencies in MHz as in the experimental literature. The
``units`` switch decides how kHz rates become 1/s:

    plain:   Gamma [1/s] = Gamma [kHz] * 1e3
    angular: Gamma [1/s] = 2 pi * Gamma [kHz] * 1e3

chi, alpha and Gamma_em are always quoted as 2 pi x (value in MHz).
"""
from __future__ import annotations

import configparser
import dataclasses
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .emission import EmissionParams
from .lindblad import DecoherenceRates
from .pulses import OptimizerOptions, SystemParams

UNITS = ("plain", "angular")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalParams:
    gamma_c_khz: float
    gamma_t_khz: float
    gamma_phi_khz: float
    alpha_mhz: float
    chi_mhz: float
    gamma_em_mhz: float
    p_em: float = 1.0
    units: str = "plain"

    def __post_init__(self):
        if self.units not in UNITS:
            raise ConfigError(f"units must be one of {UNITS}, got {self.units!r}")

    @property
    def rate_factor(self) -> float:
        return 1e3 * (2 * np.pi if self.units == "angular" else 1.0)

    def rates(self) -> DecoherenceRates:
        f = self.rate_factor
        return DecoherenceRates(self.gamma_t_khz * f, self.gamma_c_khz * f, self.gamma_phi_khz * f)

    @property
    def chi(self) -> float:
        return 2 * np.pi * self.chi_mhz * 1e6

    @property
    def alpha(self) -> float:
        return 2 * np.pi * self.alpha_mhz * 1e6

    @property
    def gamma_em(self) -> float:
        return 2 * np.pi * self.gamma_em_mhz * 1e6

    def system(self) -> SystemParams:
        return SystemParams(self.chi, self.alpha)

    def emission(self, duration: float = np.inf) -> EmissionParams:
        return EmissionParams(self.gamma_em, self.p_em, duration)


PRESETS = {
    "heeres": PhysicalParams(0.37, 5.88, 23.26, -236.0, -2.194, 1.95, 1.0),
    "besse": PhysicalParams(0.37, 47.62, 58.82, -303.0, -5.0, 1.95, 1.0),
}


@dataclass(frozen=True)
class RunConfig:
    preset: str = "heeres"
    units: str = "plain"
    gamma_c_khz: float | None = None
    gamma_t_khz: float | None = None
    gamma_phi_khz: float | None = None
    alpha_mhz: float | None = None
    chi_mhz: float | None = None
    gamma_em_mhz: float | None = None
    p_em: float | None = None
    cavity_cutoff: int = 5
    transmon_levels: int = 2
    duration_chi: float = 6.0
    harmonics: int = 8
    n_slices: int = 180
    amplitude_chi: float = 4.0
    transmon_amplitude_chi: float | None = 0.6
    max_iterations: int = 2000
    n_starts: int = 4
    target_infidelity: float = 1e-3
    penalty_weight: float = 0.0
    t_em_us: float | None = None
    n_grid: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128)
    sweep_points: int = 5
    lindblad_rtol: float = 1e-9
    lindblad_atol: float = 1e-12
    out: str = "out"
    seed: int = 1234
    jobs: int = 1
    pulse_dir: str | None = None

    def __post_init__(self):
        if self.units not in UNITS:
            raise ConfigError(f"units must be one of {UNITS}")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.transmon_levels not in (2, 3):
            raise ConfigError("transmon_levels must be 2 or 3")
        if self.sweep_points < 5:
            raise ConfigError("sweep_points must be at least 5")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        if self.pulse_dir is not None and not Path(self.pulse_dir).is_dir():
            raise ConfigError(f"pulse_dir {self.pulse_dir!r} does not exist")

    def physical(self) -> PhysicalParams:
        base = PRESETS[self.preset]
        over = {f.name: getattr(self, f.name) for f in fields(PhysicalParams)
                if f.name != "units" and getattr(self, f.name, None) is not None}
        return dataclasses.replace(base, units=self.units, **over)

    def optimizer(self) -> OptimizerOptions:
        return OptimizerOptions(harmonics=self.harmonics, max_iterations=self.max_iterations,
                                target_infidelity=self.target_infidelity,
                                penalty_weight=self.penalty_weight, seed=self.seed,
                                n_starts=self.n_starts, duration_chi=self.duration_chi,
                                n_slices=self.n_slices, amplitude_chi=self.amplitude_chi,
                                transmon_amplitude_chi=self.transmon_amplitude_chi,
                                transmon_levels=self.transmon_levels)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["n_grid"] = list(self.n_grid)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def _coerce(name: str, raw: str):
    ftype = {f.name: f.type for f in fields(RunConfig)}[name]
    raw = raw.strip()
    if name == "n_grid":
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if raw.lower() in ("none", ""):
        return None
    if "int" in ftype and "float" not in ftype:
        return int(raw)
    if "float" in ftype:
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for key, raw in cp["run"].items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return out


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} not found")
        values.update(parse_config_text(p.read_text()))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)
