"""Experiment configuration files (TOML).

Layout::

    [bandplan]            # inline plan, or `path = "plan.toml"`
    f_min_hz = 0.0
    f_max_hz = 500e6
    n_bins = 500
    [[bandplan.band]]
    f_lo_hz = 30e6
    f_hi_hz = 70e6
    label = "PU1"

    [signal]
    psd_ranges = [[0.0277, 0.1126], ...]   # one per active band, in order
    snr_db = 13.0                          # inf for noiseless
    mode = "complex"                       # or "real"

    [measurement]
    kind = "selection"                     # selection | gaussian | bernoulli
    m = 250
    policy = "fresh"                       # fresh operator per trial, or "fixed"
    seed = 7                               # optional; defaults to run.seed

    [[solver]]
    name = "lasso"
    program = "lasso"                      # bp | lasso | block_l2l1 | mndo
    epsilon = 0.1                          # eta for mndo, d0 for block_l2l1
    relative = true                        # bounds as multiples of ||y||

    [run]
    trials = 200
    seed = 2010
    normalize = "total"                    # or "raw"
    baseline = "lasso"                     # reference solver for EBR
    include_unconverged = true
    redraw_signal = true
    redraw_noise = true
    workers = 1
    out = "results"

    [run.detection]
    mode = "calibrate"                     # none | fixed | calibrate
    threshold = 0.01                       # fixed mode
    false_alarm = 0.01                     # calibrate mode
    calibration_trials = 100

Unknown keys anywhere are rejected with :class:`ConfigError`.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..bandplan import BandPlan, BandPlanError, bandplan_from_dict, load_bandplan
from ..detect import NORMALIZE_MODES
from ..sampling import KINDS
from ..sigmodel import SignalSpec
from ..solvers import SolverConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "DetectionPolicy",
    "ExperimentConfig",
    "MeasurementSpec",
    "NamedSolver",
    "load_config",
    "load_plan_file",
    "parse_config",
]


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


@dataclass(frozen=True)
class MeasurementSpec:
    kind: str = "selection"
    m: int = 1
    policy: str = "fresh"
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"measurement.kind must be one of {KINDS}, got {self.kind!r}")
        if self.policy not in ("fresh", "fixed"):
            raise ConfigError(f"measurement.policy must be 'fresh' or 'fixed', got {self.policy!r}")
        if self.m < 1:
            raise ConfigError("measurement.m must be >= 1")


@dataclass(frozen=True)
class NamedSolver:
    name: str
    config: SolverConfig


@dataclass(frozen=True)
class DetectionPolicy:
    mode: str = "none"
    threshold: float = 0.0
    false_alarm: float = 0.01
    calibration_trials: int = 100

    def __post_init__(self):
        if self.mode not in ("none", "fixed", "calibrate"):
            raise ConfigError(f"detection.mode must be none|fixed|calibrate, got {self.mode!r}")
        if self.threshold < 0:
            raise ConfigError("detection.threshold must be >= 0")
        if not 0 < self.false_alarm < 1:
            raise ConfigError("detection.false_alarm must lie in (0, 1)")
        if self.calibration_trials < 1:
            raise ConfigError("detection.calibration_trials must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    plan: BandPlan
    signal: SignalSpec
    measurement: MeasurementSpec
    solvers: tuple[NamedSolver, ...]
    trials: int = 200
    seed: int = 0
    normalize: str = "total"
    baseline: str | None = None
    include_unconverged: bool = True
    redraw_signal: bool = True
    redraw_noise: bool = True
    workers: int = 1
    detection: DetectionPolicy = field(default_factory=DetectionPolicy)
    out: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("run.trials must be >= 1")
        if not self.solvers:
            raise ConfigError("at least one [[solver]] is required")
        names = [s.name for s in self.solvers]
        if len(set(names)) != len(names):
            raise ConfigError(f"solver names must be unique, got {names}")
        if self.measurement.m > self.plan.n_bins:
            raise ConfigError(
                f"measurement.m={self.measurement.m} exceeds n_bins={self.plan.n_bins}"
            )
        if self.normalize not in NORMALIZE_MODES:
            raise ConfigError(f"run.normalize must be one of {NORMALIZE_MODES}")
        if self.baseline is not None and self.baseline not in names:
            raise ConfigError(f"run.baseline {self.baseline!r} is not a configured solver")
        if self.workers < 1:
            raise ConfigError("run.workers must be >= 1")
        n_active = sum(bool(s.active_truth) for s in self.plan.sections)
        if len(self.signal.psd_ranges) != n_active:
            raise ConfigError(
                f"signal.psd_ranges has {len(self.signal.psd_ranges)} entries "
                f"for {n_active} active bands"
            )
        for s in self.solvers:
            if s.config.program == "block_l2l1" and self.plan.n_bins % s.config.d0:
                raise ConfigError(
                    f"solver {s.name!r}: d0={s.config.d0} does not divide n_bins={self.plan.n_bins}"
                )

    @property
    def solver_names(self) -> list[str]:
        return [s.name for s in self.solvers]

    def with_overrides(self, trials=None, seed=None, solvers=None) -> "ExperimentConfig":
        """Copy with CLI overrides applied; `solvers` is a list of names to keep."""
        kw = {}
        if trials is not None:
            kw["trials"] = trials
        if seed is not None:
            kw["seed"] = seed
        if solvers is not None:
            known = {s.name: s for s in self.solvers}
            missing = [n for n in solvers if n not in known]
            if missing:
                raise ConfigError(f"unknown solver(s) {missing}; configured: {list(known)}")
            kw["solvers"] = tuple(known[n] for n in solvers)
            if self.baseline is not None and self.baseline not in solvers:
                kw["baseline"] = None
        try:
            return replace(self, **kw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


_SECTIONS = {"bandplan", "signal", "measurement", "solver", "run"}
_SIGNAL_KEYS = {"psd_ranges", "snr_db", "mode"}
_MEASUREMENT_KEYS = {"kind", "m", "policy", "seed"}
_SOLVER_KEYS = {"name"} | {f.name for f in fields(SolverConfig)}
_RUN_KEYS = {
    "trials", "seed", "normalize", "baseline", "include_unconverged",
    "redraw_signal", "redraw_noise", "workers", "detection", "out",
}
_DETECTION_KEYS = {f.name for f in fields(DetectionPolicy)}


def _check_keys(table, allowed, where):
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) in [{where}]: {sorted(unknown)}")


def _parse_plan(data, base: Path) -> BandPlan:
    try:
        if "path" in data:
            if set(data) != {"path"}:
                raise ConfigError("[bandplan] takes either `path` or inline fields, not both")
            return load_bandplan(base / data["path"])
        return bandplan_from_dict(data)
    except BandPlanError as exc:
        raise ConfigError(f"bandplan: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"bandplan: cannot read {exc.filename}: {exc.strerror}") from exc


def _parse_solver(i, data) -> NamedSolver:
    _check_keys(data, _SOLVER_KEYS, f"solver #{i}")
    data = dict(data)
    name = data.pop("name", None) or data.get("program")
    if name is None:
        raise ConfigError(f"solver #{i} needs a name or program")
    for key in ("epsilon", "eta", "abs_tol", "rel_tol", "rho"):
        if key in data:
            data[key] = float(data[key])
    try:
        return NamedSolver(str(name), SolverConfig(**data))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver {name!r}: {exc}") from exc


def parse_config(data: dict, base: str | Path = ".") -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a parsed TOML document."""
    base = Path(base)
    _check_keys(data, _SECTIONS, "top level")
    for sec in ("bandplan", "signal", "measurement", "solver"):
        if sec not in data:
            raise ConfigError(f"missing [{sec}] section")
    plan = _parse_plan(data["bandplan"], base)

    sig = data["signal"]
    _check_keys(sig, _SIGNAL_KEYS, "signal")
    mode = sig.get("mode", "complex")
    if mode not in ("complex", "real"):
        raise ConfigError(f"signal.mode must be 'complex' or 'real', got {mode!r}")
    try:
        signal = SignalSpec(
            tuple(tuple(r) for r in sig.get("psd_ranges", ())),
            float(sig.get("snr_db", math.inf)),
            0,
            real=(mode == "real"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"signal: {exc}") from exc

    meas = data["measurement"]
    _check_keys(meas, _MEASUREMENT_KEYS, "measurement")
    measurement = MeasurementSpec(**meas)

    solvers = data["solver"]
    if not isinstance(solvers, list):
        raise ConfigError("solvers must be given as [[solver]] entries")
    named = tuple(_parse_solver(i, s) for i, s in enumerate(solvers))

    run = dict(data.get("run", {}))
    _check_keys(run, _RUN_KEYS, "run")
    det = run.pop("detection", {})
    _check_keys(det, _DETECTION_KEYS, "run.detection")
    try:
        return ExperimentConfig(
            plan=plan,
            signal=signal,
            measurement=measurement,
            solvers=named,
            detection=DetectionPolicy(**det),
            **run,
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return parse_config(data, path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_plan_file(path: str | Path) -> BandPlan:
    """Band plan from either a plan file or an experiment config's [bandplan]."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if "bandplan" in data:
        return _parse_plan(data["bandplan"], path.parent)
    try:
        return bandplan_from_dict(data)
    except BandPlanError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

