"""Command-line harness: simulate, rate experiments, moment check, bound checks, selftest."""

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

from pydantic import ValidationError

from .bounds import BoundError
from .experiments import (
    ExperimentError, failing_reports, run_check_bounds, run_galerkin_rate, run_moment_check, run_noise_tail_rate,
    run_simulation, run_time_rate,
)
from .noise import NoiseError
from .nonlinearity import NonlinearityError
from .params import RunConfig
from .results import (
    load_config, write_bounds_csv, write_config, write_json, write_moment_csv, write_rate_csv,
    write_rate_summary_csv,
)
from .selftest import run_selftest
from .settings import Settings
from .solver import SolverError
from .spectral import SpectralError

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID = 2

_quiet = False


def _log(msg: str, **kwargs) -> None:
    if not _quiet:
        print(msg, **kwargs)


def _json_out(data: dict) -> None:
    json.dump(data, sys.stdout, indent=2)
    print()


def _json_error(error: str) -> None:
    json.dump({"error": error}, sys.stdout)
    print()


def _fail(args: argparse.Namespace, message: str, code: int) -> int:
    if args.json:
        _json_error(message)
    else:
        print(f"\n  Error: {message}", file=sys.stderr)
    return code


def _resolve_config(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """Config file (or per-experiment defaults with settings), then CLI overrides."""
    if args.config:
        data = load_config(Path(args.config)).model_dump()
        if data["experiment"] != args.command:
            raise ValueError(f"config is for {data['experiment']!r}, not {args.command!r}")
    else:
        data = RunConfig.defaults(args.command).model_dump()
        data |= {"seed": settings.seed, "threads": settings.threads, "out_dir": settings.out_dir}
    overrides = {"seed": args.seed, "out_dir": args.out, "paths": args.paths, "threads": args.threads}
    data |= {k: v for k, v in overrides.items() if v is not None}
    return RunConfig.model_validate(data)


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.4g}"


# -- commands --

def cmd_simulate(args: argparse.Namespace, config: RunConfig, out: Path) -> int:
    traj, noise = run_simulation(config)
    traj.write_csv(out / "trajectory.csv")
    noise.write_csv(out / "noise.csv", config.solver.n_modes)
    summary = traj.summary(config.model)
    (out / "trajectory.json").write_text(json.dumps(summary, indent=2) + "\n")
    if args.json:
        _json_out({"config_hash": traj.config_hash, "seed": traj.seed, "out": str(out),
                   "final_norm_H": summary["norm_H"][-1]})
    else:
        _log(f"  N={traj.n_modes} K={len(traj.times) - 1} seed={traj.seed}")
        _log(f"  sup ||X||_H = {max(summary['norm_H']):.6g}, final = {summary['norm_H'][-1]:.6g}")
        _log(f"  Wrote {out / 'trajectory.csv'}")
    return EXIT_PASS


RATE_RUNNERS = {
    "rates-noise": run_noise_tail_rate,
    "rates-galerkin": run_galerkin_rate,
    "rates-time": run_time_rate,
}


def _rates(args: argparse.Namespace, config: RunConfig, out: Path) -> int:
    report = RATE_RUNNERS[args.command](config)
    write_rate_csv(report, out / "rates.csv")
    write_rate_summary_csv(report, out / "rates_summary.csv")
    write_json(report, out / "report.json")
    if args.json:
        data = asdict(report)
        _json_out({k: data[k] for k in ("experiment", "ladder", "mean_errors", "slope", "stderr",
                                        "threshold", "threshold_source", "tolerance", "passed", "degenerate")})
    else:
        unit = "K" if args.command == "rates-time" else "N"
        for n, err in zip(report.ladder, report.mean_errors):
            _log(f"  {unit}={n:>5}  mean error {err:.6g}")
        verdict = "PASS" if report.passed else "FAIL"
        side = "+/-" if args.command == "rates-time" else "-"
        _log(f"  slope {_fmt(report.slope)} +/- {_fmt(report.stderr)}  "
             f"threshold {report.threshold:.5g} ({report.threshold_source}) {side} {report.tolerance}  {verdict}")
        if report.degenerate:
            _log("  degenerate ladder: some errors are exactly zero, no slope fitted")
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_moments(args: argparse.Namespace, config: RunConfig, out: Path) -> int:
    report = run_moment_check(config)
    write_moment_csv(report, out / "moments.csv")
    write_json(report, out / "report.json")
    if args.json:
        _json_out({k: getattr(report, k) for k in ("lhs", "rhs", "ratio", "stderr", "n_paths", "passed")})
    else:
        verdict = "PASS" if report.passed else "FAIL"
        _log(f"  (E sup ||P O||^p)^(1/p) = {report.lhs:.6g} +/- {report.stderr:.2g}")
        _log(f"  bound = {report.rhs:.6g}  ratio = {report.ratio:.4f}  {verdict}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_check_bounds(args: argparse.Namespace, config: RunConfig, out: Path) -> int:
    reports = run_check_bounds(config)
    write_json(reports, out / "bounds.json")
    write_bounds_csv(reports, out / "bounds.csv")
    failed = failing_reports(reports)
    coarse = sum(r.under_resolved for r in reports)
    if args.json:
        _json_out({"reports": len(reports), "failed": [asdict(r) for r in failed], "under_resolved": coarse,
                   "passed": not failed})
    else:
        names = sorted({r.bound_name for r in reports})
        for name in names:
            group = [r for r in reports if r.bound_name == name]
            worst = min(group, key=lambda r: r.slack)
            ok = sum(r.passed for r in group)
            _log(f"  {name:<22} {ok}/{len(group)} pass  worst slack {worst.slack:.4g}")
        if coarse:
            _log(f"  {coarse} report(s) under-resolved in time, not counted as failures")
    return EXIT_PASS if not failed else EXIT_FAIL


def cmd_selftest(args: argparse.Namespace) -> int:
    results = run_selftest()
    failed = [r for r in results if not r.passed]
    if args.json:
        _json_out({"checks": [asdict(r) for r in results], "passed": not failed})
    else:
        for r in results:
            _log(f"  [{'ok' if r.passed else 'FAIL':>4}] {r.name}" + (f"  {r.detail}" if r.detail else ""))
        _log(f"\n  {len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_PASS if not failed else EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate,
    "rates-noise": _rates,
    "rates-galerkin": _rates,
    "rates-time": _rates,
    "moments": cmd_moments,
    "check-bounds": cmd_check_bounds,
}


def run_command(args: argparse.Namespace, settings: Settings) -> int:
    global _quiet
    _quiet = args.json

    if args.command == "selftest":
        return cmd_selftest(args)

    try:
        config = _resolve_config(args, settings)
    except (ValidationError, ValueError, OSError) as e:
        return _fail(args, f"invalid config: {e}", EXIT_INVALID)

    out = Path(config.out_dir)
    write_config(config, out)
    _log(f"\n  {args.command}: {config.paths} path(s), seed {config.seed}, out {out}")
    try:
        return COMMANDS[args.command](args, config, out)
    except (NoiseError, BoundError, NonlinearityError, SpectralError) as e:
        return _fail(args, f"{type(e).__name__}: {e}", EXIT_INVALID)
    except (ExperimentError, SolverError) as e:
        return _fail(args, f"{type(e).__name__}: {e}", EXIT_FAIL)


def _build_parser(prog: str = "sburgers") -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=prog,
        description="Spectral Galerkin simulator and verification harness for stochastic Burgers.",
    )
    subs = parser.add_subparsers(dest="command")

    helps = {
        "simulate": "Simulate one Galerkin trajectory",
        "rates-noise": "Noise tail rate experiment",
        "rates-galerkin": "Galerkin convergence rate experiment",
        "rates-time": "Time-step convergence order experiment",
        "moments": "Monte-Carlo check of the stochastic convolution moment bound",
        "check-bounds": "Evaluate the a priori bounds on simulated trajectories",
    }
    for name, text in helps.items():
        p = subs.add_parser(name, help=text)
        p.add_argument("--config", help="RunConfig JSON file")
        p.add_argument("--seed", type=int, default=None, help="Root seed (unsigned 64-bit)")
        p.add_argument("--out", default=None, help="Output directory")
        p.add_argument("--paths", type=int, default=None, help="Number of Monte-Carlo paths")
        p.add_argument("--threads", type=int, default=None, help="Worker threads")
        p.add_argument("--json", action="store_true", help="Output structured JSON")

    st = subs.add_parser("selftest", help="Run the deterministic invariant suite")
    st.add_argument("--json", action="store_true", help="Output structured JSON")
    return parser


def main() -> None:
    parser = _build_parser()
    args = parser.parse_args()
    if args.command is None:
        parser.print_help()
        sys.exit(EXIT_INVALID)

    try:
        settings = Settings()
    except ValidationError as e:
        print(f"  Invalid environment: {e}", file=sys.stderr)
        sys.exit(EXIT_INVALID)
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    sys.exit(run_command(args, settings))


if __name__ == "__main__":
    main()
