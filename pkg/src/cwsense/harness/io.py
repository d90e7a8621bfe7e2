"""CSV, JSON and npz outputs of the harness.

Floats are written with ``repr`` (17 significant digits at most) so every
file parses back to bit-identical values. Wall-clock timings go to a
separate file so that the trial and summary files are deterministic.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..bandplan import BandPlan
from ..sampling import MeasurementOperator
from .experiment import AggregateReport, TrialRecord

__all__ = [
    "TRIAL_COLUMNS",
    "emit_csv",
    "emit_spectrum_plotdata",
    "emit_summary_json",
    "emit_timing_csv",
    "load_measurement_dump",
    "read_plotdata",
    "read_trial_csv",
    "save_measurement_dump",
]

TRIAL_COLUMNS = (
    "trial", "solver", "program", "converged", "iterations", "objective",
    "residual_norm", "bound", "normalization",
)


def _fmt(x: float) -> str:
    return repr(float(x))


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _n_sections(records) -> int:
    return len(records[0].energies) if records else 0


def _trial_header(n_sections: int, with_decisions: bool) -> list[str]:
    head = list(TRIAL_COLUMNS) + [f"e{k}" for k in range(n_sections)]
    if with_decisions:
        head += [f"occupied{k}" for k in range(n_sections)]
    return head


def emit_csv(obj, path, n_sections: int | None = None) -> Path:
    """Write trial records, or an aggregate report, as CSV.

    Records give one row per (trial, solver). A report gives one row per
    (solver, section) with mean, std, EBR and detection rate. An empty record
    list writes the header alone; pass `n_sections` to size its energy columns.
    """
    path = Path(path)
    if isinstance(obj, AggregateReport):
        return _emit_report_csv(obj, path)
    records = list(obj)
    if n_sections is None:
        n_sections = _n_sections(records)
    with_dec = bool(records) and records[0].decisions is not None
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_trial_header(n_sections, with_dec))
        for r in records:
            row = [
                r.trial, r.solver, r.program, int(r.converged), r.iterations,
                _fmt(r.objective), _fmt(r.residual_norm), _fmt(r.bound), r.normalization,
            ]
            row += [_fmt(e) for e in r.energies]
            if with_dec:
                row += [int(d) for d in r.decisions]
            w.writerow(row)
    return path


def _emit_report_csv(rep: AggregateReport, path: Path) -> Path:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["solver", "section", "label", "active", "mean_energy", "std_energy",
                    "ebr_percent", "detection_rate"])
        for s in rep.solvers:
            for k, label in enumerate(rep.section_labels):
                e = rep.ebr.get(s)
                d = rep.detection_rate.get(s) if rep.detection_rate else None
                w.writerow([
                    s, k, label, int(rep.active[k]),
                    _fmt(rep.mean_energy[s][k]), _fmt(rep.std_energy[s][k]),
                    _fmt(e[k]) if e is not None else "",
                    _fmt(d[k]) if d is not None else "",
                ])
    return path


def read_trial_csv(path) -> list[TrialRecord]:
    """Parse a file written by :func:`emit_csv` back into records."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    n_sec = sum(1 for h in head if h.startswith("e") and h[1:].isdigit())
    with_dec = any(h.startswith("occupied") for h in head)
    base = len(TRIAL_COLUMNS)
    out = []
    for row in body:
        energies = tuple(float(v) for v in row[base:base + n_sec])
        dec = tuple(bool(int(v)) for v in row[base + n_sec:]) if with_dec else None
        out.append(TrialRecord(
            trial=int(row[0]),
            solver=row[1],
            program=row[2],
            converged=bool(int(row[3])),
            iterations=int(row[4]),
            objective=float(row[5]),
            residual_norm=float(row[6]),
            bound=float(row[7]),
            normalization=row[8],
            energies=energies,
            decisions=dec,
        ))
    return out


def emit_timing_csv(records, path) -> Path:
    """Per-record wall times (non-deterministic, kept apart from trials.csv)."""
    path = Path(path)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "solver", "solve_time_s"])
        for r in records:
            w.writerow([r.trial, r.solver, _fmt(r.solve_time)])
    return path


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def emit_summary_json(rep: AggregateReport, path, with_timing: bool = False) -> Path:
    """Aggregate report as JSON; NaN (undefined EBR) becomes null."""
    path = Path(path)
    with _open(path) as fh:
        json.dump(_json_safe(rep.to_dict(with_timing)), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def emit_spectrum_plotdata(truth, recoveries: dict, path) -> Path:
    """Magnitude spectra behind a truth-vs-recovery figure.

    Columns are ``freq_hz``, ``truth`` and one ``|r_hat|`` column per named
    recovery; row ``k`` is bin ``k``.
    """
    path = Path(path)
    plan: BandPlan = truth.plan
    freqs = plan.bin_frequencies()
    mags = {name: np.abs(np.asarray(getattr(r, "values", r))) for name, r in recoveries.items()}
    for name, m in mags.items():
        if m.shape != (plan.n_bins,):
            raise ValueError(f"recovery {name!r} has shape {m.shape}, expected ({plan.n_bins},)")
    truth_mag = np.abs(truth.values)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "truth", *mags])
        for k in range(plan.n_bins):
            w.writerow([_fmt(freqs[k]), _fmt(truth_mag[k]), *(_fmt(m[k]) for m in mags.values())])
    return path


def read_plotdata(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    cols = list(zip(*rows[1:])) if len(rows) > 1 else [()] * len(rows[0])
    return {h: np.array([float(v) for v in c]) for h, c in zip(rows[0], cols)}


def save_measurement_dump(path, y, op: MeasurementOperator, plan: BandPlan) -> Path:
    """Everything the `solve` subcommand needs: y, the operator and the plan."""
    path = Path(path)
    arrays = {
        "y": np.asarray(y, dtype=complex),
        "kind": np.array(op.kind),
        "n": np.array(op.n),
        "plan": np.array(json.dumps(plan.to_dict())),
    }
    if op.rows is not None:
        arrays["rows"] = op.rows
    else:
        arrays["matrix"] = op.matrix
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("wb") as fh:
            np.savez(fh, **arrays)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def load_measurement_dump(path):
    """Return ``(y, operator, plan)`` from a dump written by :func:`save_measurement_dump`."""
    from ..bandplan import bandplan_from_dict

    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as z:
            data = {k: z[k] for k in z.files}
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    kind = str(data["kind"])
    n = int(data["n"])
    if "rows" in data:
        op = MeasurementOperator(kind, len(data["rows"]), n, rows=data["rows"])
    else:
        op = MeasurementOperator(kind, data["matrix"].shape[0], n, matrix=data["matrix"])
    plan = bandplan_from_dict(json.loads(str(data["plan"])))
    return data["y"], op, plan
