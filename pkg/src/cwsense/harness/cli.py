"""Command line: ``cwsense {simulate,solve,plan,version}``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .. import __version__
from ..bandplan import section_index_ranges
from ..detect import subband_energies
from ..sampling import sensing_map
from ..solvers import solve
from .config import ConfigError, load_config, load_plan_file
from .experiment import run_experiment, trial_inputs
from .io import (
    emit_csv,
    emit_spectrum_plotdata,
    emit_summary_json,
    emit_timing_csv,
    load_measurement_dump,
    save_measurement_dump,
)

__all__ = ["cli_main", "main"]

log = logging.getLogger("cwsense")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; we reserve 2 for runtime failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="experiment or band-plan TOML file")
    p.add_argument("--trials", type=int, help="override run.trials")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--solver", help="comma-separated subset of configured solver names")
    p.add_argument("--out", type=Path, help="output directory (overrides run.out)")
    p.add_argument("--quiet", action="store_true", help="only print errors")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cwsense", description="Compressive wideband spectrum sensing harness.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment from a config file")
    _common(p)
    p.add_argument("--dump-measurement", type=int, metavar="T",
                   help="also write trial T's measurement dump (for `solve`)")

    p = sub.add_parser("solve", help="single recovery from a measurement dump")
    _common(p)
    p.add_argument("--input", type=Path, required=True, help=".npz written by simulate")

    p = sub.add_parser("plan", help="validate and print a band plan")
    _common(p)

    sub.add_parser("version", help="print the package version")
    return parser


def _say(args, *msg):
    if not args.quiet:
        print(*msg)


def _load(args):
    if args.config is None:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    names = None if args.solver is None else [s for s in args.solver.split(",") if s]
    return cfg.with_overrides(trials=args.trials, seed=args.seed, solvers=names)


def _out_dir(args, cfg) -> Path:
    if args.out is not None:
        return args.out
    if cfg.out is not None:
        return args.config.parent / cfg.out
    return Path(".")


def _cmd_plan(args) -> int:
    if args.config is None:
        raise ConfigError("--config is required")
    plan = load_plan_file(args.config)
    _say(args, f"{plan.n_sections} sections, {plan.n_bins} bins of {plan.bin_width:g} Hz")
    for s, (start, length) in zip(plan.sections, section_index_ranges(plan)):
        state = {True: "active", False: "vacant", None: "-"}[s.active_truth]
        _say(args, f"  {s.label:<8} {s.f_lo:>14.6g} {s.f_hi:>14.6g}  "
                   f"bins {start:>5}-{start + length - 1:<5} {state}")
    return EXIT_OK


def _print_report(args, rep):
    labels = rep.section_labels
    _say(args, "section   " + " ".join(f"{lb:>9}" for lb in labels))
    for s in rep.solvers:
        _say(args, f"{s:<9} " + " ".join(f"{v:9.4f}" for v in rep.mean_energy[s]))
    for s, row in rep.ebr.items():
        _say(args, f"EBR {s:<5} " + " ".join(f"{v:8.1f}%" for v in row))
    if rep.timing:
        for s, t in rep.timing.items():
            rel = t.get("relative_to_baseline")
            extra = f" ({rel:.3f}x baseline)" if rel is not None else ""
            _say(args, f"time {s}: {t['mean_solve_time_s']:.4g} s/solve{extra}")


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    result = run_experiment(cfg)
    rep = result.report
    emit_csv(result.records, out / "trials.csv", n_sections=cfg.plan.n_sections)
    emit_csv(rep, out / "summary.csv")
    emit_summary_json(rep, out / "summary.json")
    emit_timing_csv(result.records, out / "timing.csv")
    emit_spectrum_plotdata(result.truth, result.recoveries, out / "spectrum_trial0.csv")
    if args.dump_measurement is not None:
        _, op, y = trial_inputs(cfg, args.dump_measurement)
        save_measurement_dump(out / f"measurement_{args.dump_measurement}.npz", y, op, cfg.plan)
    _print_report(args, rep)
    _say(args, f"wrote {out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    cfg = _load(args)
    y, op, plan = load_measurement_dump(args.input)
    if plan != cfg.plan:
        raise ConfigError("the dump's band plan differs from the config's")
    A = sensing_map(op, plan.n_bins)
    out = args.out
    recoveries = {}
    for named in cfg.solvers:
        res = solve(A, y, named.config, plan)
        recoveries[named.name] = res.r_hat
        e = subband_energies(res.r_hat, plan, cfg.normalize)
        _say(args, f"{named.name}: converged={res.converged} iters={res.iterations} "
                   f"objective={res.objective:.6g} residual={res.residual_norm:.3g}/{res.bound:.3g}")
        _say(args, "  energies " + " ".join(f"{v:.4f}" for v in e.values))
    if out is not None:
        for name, r in recoveries.items():
            path = out / f"recovery_{name}.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            np.savetxt(path, np.column_stack([r.real, r.imag]), delimiter=",",
                       header="re,im", comments="", fmt="%.17g")
        _say(args, f"wrote {out}")
    return EXIT_OK


def cli_main(argv=None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    if args.command == "version":
        print(__version__)
        return EXIT_OK

    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"simulate": _cmd_simulate, "solve": _cmd_solve, "plan": _cmd_plan}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(cli_main())
