"""Command-line surface: one subcommand per experiment driver.

Every subcommand loads the (optional) config file, runs its driver at the
resolved seed, writes machine-readable output into --out (summary CSV plus
per-series time-series CSVs, or a JSON report with --format json), renders
matplotlib figures alongside, prints one line per thresholded check, and
exits 0 on pass, 1 on threshold failure, 2 on configuration errors, 3 on
numerical instability.
"""
from __future__ import annotations

import argparse
import os
import sys

from .config import load_config
from .errors import (ConfigurationError, InstabilityError, ParameterError,
                     ResolutionError)
from .experiments import (exp_convergence, exp_identities, exp_lipschitz,
                          exp_multiplier, exp_norm_persistence, exp_partition,
                          exp_picard_contraction, exp_reduce_check,
                          exp_reduction_equivalence, exp_simulate, exp_taylor)
from .plots import render_report_figures
from .reporting import (write_json_report, write_summary_csv,
                        write_timeseries_csv)

EXIT_PASS = 0
EXIT_THRESHOLD = 1
EXIT_CONFIG = 2
EXIT_INSTABILITY = 3

DRIVERS = {
    "identities": exp_identities,
    "taylor": exp_taylor,
    "multiplier": exp_multiplier,
    "partition": exp_partition,
    "reduce-check": exp_reduce_check,
    "simulate": exp_simulate,
    "norms": exp_norm_persistence,
    "lipschitz": exp_lipschitz,
    "picard": exp_picard_contraction,
    "convergence": exp_reduction_equivalence,
}

HELP = {
    "identities": "chart identity suite against the complex-step oracle",
    "taylor": "derivative closed forms, pairing counts, truncation decay",
    "multiplier": "characteristic multiplier factorization and brackets",
    "partition": "dyadic/cone partitions of unity and the negative control",
    "reduce-check": "scalar vs geometric right-hand-side residual ensemble",
    "simulate": "one configured run with diagnostics and a final snapshot",
    "norms": "Besov norm persistence over an amplitude sweep",
    "lipschitz": "flow stability in the sphere Besov distance",
    "picard": "Duhamel fixed-point contraction ratios",
    "convergence": "co-evolution discrepancy and refinement gains",
    "all": "every suite above, aggregated exit status",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsmap",
        description="pseudo-spectral laboratory for the fractional "
                    "Schrodinger map and its stereographic reduction")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(DRIVERS) + ["all"]:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", metavar="PATH", default=None,
                       help="key=value config file (defaults otherwise)")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="override [experiment] seed")
        p.add_argument("--out", default="fsmap-out", metavar="DIR",
                       help="output directory (default: fsmap-out)")
        p.add_argument("--threads", type=int, default=1, metavar="K",
                       help="worker threads for sampling loops")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="machine-readable report format")
        if name == "simulate":
            p.add_argument("--from-snapshot", metavar="PATH", default=None,
                           help="resume from a binary snapshot instead of "
                                "random initial data")
    return parser


def _emit(report, outdir: str, fmt: str):
    os.makedirs(outdir, exist_ok=True)
    if fmt == "json":
        write_json_report(os.path.join(outdir, f"{report.experiment}_report.json"),
                          report)
    else:
        write_summary_csv(os.path.join(outdir, f"{report.experiment}_summary.csv"),
                          report)
        for name, diag in report.series.items():
            safe = name.replace("/", "_").replace(" ", "_")
            write_timeseries_csv(
                os.path.join(outdir, f"{report.experiment}_{safe}.csv"), diag)
    render_report_figures(report, outdir)


def _print_checks(report):
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {report.experiment}: {c.metric} = {c.value:.6e} "
              f"({c.op} {c.threshold:.6e})")


def _run_simulate(cfg, args):
    from .solver import write_snapshot, read_snapshot, run as run_sim
    from .reporting import ExperimentReport, timed
    import numpy as np
    from .experiments import scaled_random_field
    from .stereographic import lift

    snap = getattr(args, "from_snapshot", None)
    report = ExperimentReport("simulate", cfg.as_flat_dict(),
                              seed=cfg.experiment["seed"])
    sim = cfg.sim_config()
    with timed(report):
        if snap is not None:
            initial, t0, s_snap = read_snapshot(snap)
            if abs(s_snap - sim.s) > 1e-12:
                raise ConfigurationError(
                    f"snapshot s={s_snap} disagrees with config s={sim.s}")
        else:
            rng = np.random.default_rng(cfg.experiment["seed"])
            f0 = scaled_random_field(sim.grid, rng, cfg.experiment["cutoff"],
                                     cfg.physics["amplitude"], "sup")
            initial = lift(f0) if sim.integrator == "rk4" else f0
        res = run_sim(sim, initial)
        report.series["run"] = res.diagnostics
        report.check_lower("completed", float(res.completed), 1.0)
        report.record("final_besov", res.diagnostics["besov_sigma"][-1])
        report.record("final_l2", res.diagnostics["l2"][-1])
        report.record("final_energy_s", res.diagnostics["energy_s"][-1])
        report.record("max_sphere_drift",
                      float(np.max(res.diagnostics["sphere_drift"])))
        os.makedirs(args.out, exist_ok=True)
        if res.sphere_frames is not None:
            from .stereographic import SphereField
            final = SphereField(sim.grid, res.sphere_frames[-1])
        else:
            from .spectral import Field, PHYSICAL
            final = Field(sim.grid, res.trajectory.frames[-1], PHYSICAL)
        write_snapshot(os.path.join(args.out, "final_state.snap"),
                       final, float(res.times[-1]), sim.s)
    # the partial trajectory and snapshot are preserved either way; the
    # caller maps an instability to exit code 3 after emitting the report
    report.instability_message = res.instability
    return report


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigurationError("--seed must be a nonnegative integer")
            cfg.experiment["seed"] = args.seed

        names = list(DRIVERS) if args.command == "all" else [args.command]
        all_passed = True
        for name in names:
            if name == "simulate":
                report = _run_simulate(cfg, args)
            else:
                report = DRIVERS[name](cfg, threads=args.threads)
            _emit(report, args.out, args.format)
            _print_checks(report)
            message = getattr(report, "instability_message", None)
            if message:
                raise InstabilityError(message)
            all_passed = all_passed and report.passed
        print("PASS" if all_passed else "FAIL")
        return EXIT_PASS if all_passed else EXIT_THRESHOLD
    except (ConfigurationError, ParameterError, ResolutionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY


if __name__ == "__main__":
    sys.exit(main())
