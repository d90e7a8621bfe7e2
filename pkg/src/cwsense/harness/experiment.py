"""Seeded Monte Carlo trials over several recovery programs.

Every random draw comes from ``SeedSequence(master_seed, spawn_key=(stream, index))``
so a trial's inputs depend only on its index, never on how many trials ran
before it. Within one trial all solvers see the same operator and
measurement vector.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from ..bandplan import BandPlan
from ..detect import (
    calibrate_threshold,
    detect_occupancy,
    ebr,
    normalize_energies,
    per_bin_energy,
    subband_energies,
)
from ..sampling import make_operator, measure, sensing_map
from ..sigmodel import (
    SpectrumVector,
    TimeSignal,
    add_awgn,
    generate_spectrum,
    noise_variance,
    spectrum_to_time,
    white_noise,
)
from ..solvers import solve
from .config import ExperimentConfig

__all__ = [
    "AggregateReport",
    "ExperimentResult",
    "TrialRecord",
    "aggregate",
    "calibrate_thresholds",
    "expected_signal_energy",
    "iter_trials",
    "run_experiment",
    "trial_inputs",
]

log = logging.getLogger(__name__)

STREAM_SIGNAL = 0
STREAM_NOISE = 1
STREAM_OPERATOR = 2
STREAM_CAL_NOISE = 3
STREAM_CAL_OPERATOR = 4


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    solver: str
    program: str
    converged: bool
    iterations: int
    objective: float
    residual_norm: float
    bound: float
    normalization: str
    energies: tuple[float, ...]
    decisions: tuple[bool, ...] | None = None
    # wall time is excluded from equality so record streams compare bitwise
    solve_time: float = field(default=math.nan, compare=False)


@dataclass
class AggregateReport:
    n_trials: int
    solvers: list[str]
    normalization: str
    baseline: str | None
    section_labels: list[str]
    active: list[bool]
    included: dict[str, int]
    convergence_rate: dict[str, float]
    mean_iterations: dict[str, float]
    mean_energy: dict[str, list[float]]
    std_energy: dict[str, list[float]]
    ebr: dict[str, list[float]]
    detection_rate: dict[str, list[float]] | None = None
    all_active_detected: dict[str, float] | None = None
    thresholds: dict[str, float] | None = None
    ebr_averaging: str = "ebr of mean energies"
    timing: dict[str, dict[str, float]] | None = field(default=None, compare=False)

    def to_dict(self, with_timing: bool = False) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "timing"}
        if with_timing:
            out["timing"] = self.timing
        return out


def _rng(master: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=(stream, index)))


def expected_signal_energy(cfg: ExperimentConfig) -> float:
    """``E||r||^2`` under uniform per-bin magnitudes (closed form)."""
    lengths = [n for (_, n), s in zip(_ranges(cfg.plan), cfg.plan.sections) if s.active_truth]
    total = 0.0
    for (lo, hi), n in zip(cfg.signal.psd_ranges, lengths):
        second = lo * lo if hi == lo else (hi**3 - lo**3) / (3.0 * (hi - lo))
        total += n * second
    if cfg.signal.real:
        # mirrored bins double the energy of every non-self-mirrored bin
        total *= 2.0
    return total


def _ranges(plan: BandPlan):
    from ..bandplan import section_index_ranges

    return section_index_ranges(plan)


def _operator(cfg: ExperimentConfig, index: int, stream: int = STREAM_OPERATOR):
    ms = cfg.measurement
    master = cfg.seed if ms.seed is None else ms.seed
    idx = index if ms.policy == "fresh" else 0
    op = make_operator(ms.kind, ms.m, cfg.plan.n_bins, _rng(master, stream, idx))
    return op


def trial_inputs(cfg: ExperimentConfig, t: int):
    """``(truth, operator, y)`` for trial `t`."""
    sig_idx = t if cfg.redraw_signal else 0
    noise_idx = t if cfg.redraw_noise else 0
    truth = generate_spectrum(cfg.plan, cfg.signal, _rng(cfg.seed, STREAM_SIGNAL, sig_idx))
    x = spectrum_to_time(truth)
    if cfg.signal.snr_db != math.inf and np.any(truth.values):
        x = add_awgn(x, cfg.signal.snr_db, _rng(cfg.seed, STREAM_NOISE, noise_idx))
    op = _operator(cfg, t)
    return truth, op, measure(op, x)


def _solve_trial(cfg: ExperimentConfig, t: int, thresholds: dict[str, float] | None):
    truth, op, y = trial_inputs(cfg, t)
    A = sensing_map(op, cfg.plan.n_bins)
    records = []
    recoveries = {}
    for named in cfg.solvers:
        t0 = time.perf_counter()
        res = solve(A, y, named.config, cfg.plan)
        elapsed = time.perf_counter() - t0
        raw = subband_energies(res.r_hat, cfg.plan, "raw")
        shown = normalize_energies(raw) if cfg.normalize == "total" else raw
        decisions = None
        if thresholds is not None:
            rep = detect_occupancy(raw, cfg.plan, thresholds[named.name])
            decisions = tuple(bool(d) for d in rep.occupied)
        records.append(
            TrialRecord(
                trial=t,
                solver=named.name,
                program=named.config.program,
                converged=bool(res.converged),
                iterations=int(res.iterations),
                objective=float(res.objective),
                residual_norm=float(res.residual_norm),
                bound=float(res.bound),
                normalization=cfg.normalize,
                energies=tuple(float(e) for e in shown.values),
                decisions=decisions,
                solve_time=elapsed,
            )
        )
        recoveries[named.name] = res.r_hat
    return records, truth, recoveries


def _solve_trial_records(args):
    cfg, t, thresholds = args
    return _solve_trial(cfg, t, thresholds)[0]


def calibrate_thresholds(cfg: ExperimentConfig) -> dict[str, float] | None:
    """Per-solver detection thresholds from the config's policy.

    In calibrate mode each solver recovers ``calibration_trials`` noise-only
    measurement vectors (noise variance set by the expected signal power) and
    the threshold is the ``1 - false_alarm`` quantile of the resulting
    per-bin section energies.
    """
    pol = cfg.detection
    if pol.mode == "none":
        return None
    if pol.mode == "fixed":
        return {name: pol.threshold for name in cfg.solver_names}

    n = cfg.plan.n_bins
    if cfg.signal.snr_db == math.inf:
        raise ValueError("threshold calibration needs a finite SNR")
    sigma2 = noise_variance(expected_signal_energy(cfg), n, cfg.signal.snr_db)
    levels = {name: [] for name in cfg.solver_names}
    for c in range(pol.calibration_trials):
        noise = white_noise(n, sigma2, not cfg.signal.real, _rng(cfg.seed, STREAM_CAL_NOISE, c))
        op = _operator(cfg, c, STREAM_CAL_OPERATOR)
        A = sensing_map(op, n)
        y = measure(op, TimeSignal(noise, 0.0))
        for named in cfg.solvers:
            res = solve(A, y, named.config, cfg.plan)
            raw = subband_energies(res.r_hat, cfg.plan, "raw")
            levels[named.name].append(per_bin_energy(raw, cfg.plan))
    return {name: calibrate_threshold(lv, pol.false_alarm) for name, lv in levels.items()}


def iter_trials(
    cfg: ExperimentConfig,
    thresholds: dict[str, float] | None = None,
) -> Iterator[list[TrialRecord]]:
    """Yield each trial's records in trial order (parallel when ``workers > 1``)."""
    jobs = ((cfg, t, thresholds) for t in range(cfg.trials))
    if cfg.workers == 1:
        for job in jobs:
            yield _solve_trial_records(job)
        return
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        # map preserves submission order, so output stays deterministic
        yield from pool.map(_solve_trial_records, jobs)


def aggregate(
    records: list[TrialRecord],
    plan: BandPlan,
    baseline: str | None = None,
    include_unconverged: bool = True,
    thresholds: dict[str, float] | None = None,
) -> AggregateReport:
    """Summaries per solver; a pure function of the records."""
    solvers = list(dict.fromkeys(r.solver for r in records))
    modes = {r.normalization for r in records}
    if len(modes) > 1:
        raise ValueError(f"records mix normalizations {sorted(modes)}")
    mode = modes.pop() if modes else "total"
    n_trials = len({r.trial for r in records})
    active = plan.active_mask

    by_solver = {s: [r for r in records if r.solver == s] for s in solvers}
    used = {
        s: [r for r in rs if include_unconverged or r.converged] for s, rs in by_solver.items()
    }
    mean_e, std_e = {}, {}
    for s, rs in used.items():
        if rs:
            e = np.array([r.energies for r in rs])
            mean_e[s] = e.mean(axis=0).tolist()
            std_e[s] = e.std(axis=0).tolist()
        else:
            mean_e[s] = std_e[s] = [math.nan] * plan.n_sections

    ebrs = {}
    if baseline is not None and baseline in mean_e:
        for s in solvers:
            if s != baseline:
                ebrs[s] = ebr(np.array(mean_e[s]), np.array(mean_e[baseline]), plan).tolist()

    det_rate = all_det = None
    if records and all(r.decisions is not None for r in records):
        det_rate, all_det = {}, {}
        for s, rs in used.items():
            d = np.array([r.decisions for r in rs], dtype=bool).reshape(len(rs), plan.n_sections)
            det_rate[s] = d.mean(axis=0).tolist() if rs else [math.nan] * plan.n_sections
            all_det[s] = float(np.mean(d[:, active].all(axis=1))) if rs else math.nan

    times = {}
    for s, rs in by_solver.items():
        ts = [r.solve_time for r in rs if not math.isnan(r.solve_time)]
        if ts:
            times[s] = {"mean_solve_time_s": float(np.mean(ts))}
    if baseline in times:
        for s in times:
            times[s]["relative_to_baseline"] = (
                times[s]["mean_solve_time_s"] / times[baseline]["mean_solve_time_s"]
            )

    return AggregateReport(
        n_trials=n_trials,
        solvers=solvers,
        normalization=mode,
        baseline=baseline,
        section_labels=[s.label for s in plan.sections],
        active=active.tolist(),
        included={s: len(rs) for s, rs in used.items()},
        convergence_rate={s: float(np.mean([r.converged for r in rs])) for s, rs in by_solver.items()},
        mean_iterations={s: float(np.mean([r.iterations for r in rs])) for s, rs in by_solver.items()},
        mean_energy=mean_e,
        std_energy=std_e,
        ebr=ebrs,
        detection_rate=det_rate,
        all_active_detected=all_det,
        thresholds=thresholds,
        timing=times or None,
    )


@dataclass
class ExperimentResult:
    report: AggregateReport
    records: list[TrialRecord]
    thresholds: dict[str, float] | None
    # trial-0 data behind a spectrum comparison figure
    truth: SpectrumVector | None = None
    recoveries: dict[str, np.ndarray] = field(default_factory=dict)


def run_experiment(
    cfg: ExperimentConfig,
    on_trial: Callable[[int, list[TrialRecord]], None] | None = None,
) -> ExperimentResult:
    """Run every trial, aggregate, and keep trial 0's spectra for plotting."""
    thresholds = calibrate_thresholds(cfg)
    if thresholds is not None:
        log.info("detection thresholds: %s", thresholds)
    _, truth, recoveries = _solve_trial(cfg, 0, thresholds)
    records: list[TrialRecord] = []
    for t, recs in enumerate(iter_trials(cfg, thresholds)):
        records.extend(recs)
        if on_trial is not None:
            on_trial(t, recs)
    report = aggregate(records, cfg.plan, cfg.baseline, cfg.include_unconverged, thresholds)
    return ExperimentResult(report, records, thresholds, truth, recoveries)
