"""
Command-line driver: `adaptsgd {run,bounds,verify,study}`.

Exit codes: 0 success, 1 a check or embedded study assertion failed, 2 usage, config or
parameter error, 3 numerical divergence.
"""

import argparse
import os
import sys
import time
from collections.abc import Sequence

from adaptsgd.core.bounds import get_bound
from adaptsgd.core.errors import (
    AdaptSGDError,
    ConfigError,
    DivergenceError,
    ParameterError,
)
from adaptsgd.core.experiments import (
    bound_validation,
    fit_given_rates,
    noise_adaptation_study,
    rates_study,
    report_text,
    run_ensemble,
)
from adaptsgd.core.optimizer import sgd_run
from adaptsgd.core.types import BoundInputs, RestartParams, RunMetadata, StudyReport
from adaptsgd.core.verify import SUITES, run_suite
from adaptsgd.logger import RunLogger, VerbosePrinter
from adaptsgd.utils.config import (
    Config,
    build_objective,
    build_oracle,
    build_run_config,
    build_schedule,
    build_settings,
    load_config,
)
from adaptsgd.utils.csv_utils import (
    BOUNDS_HEADER,
    CURVE_HEADER,
    RATES_HEADER,
    STUDY_HEADER,
    SUMMARY_HEADER,
    bound_rows,
    csv_text,
    rates_rows,
    study_rows,
    summary_rows,
    write_csv,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

STUDIES = ("noise-adaptation", "bound-validation", "rates")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jobs", type=int, default=1, help="Worker threads for ensembles.")
    parser.add_argument(
        "--output-dir", default=None, help="Directory for CSV output (overrides output.path)."
    )
    parser.add_argument("--verbose", action="store_true", help="Rich progress on stderr.")
    parser.add_argument("--log-dir", default=None, help="Write a JSON-lines run log here.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptsgd",
        description="Noise-adaptive SGD step-size schedules: runs, bounds and studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one seed ensemble from a config file.")
    run.add_argument("config", help="Path to a config file.")
    _add_common(run)

    bounds = sub.add_parser("bounds", help="Evaluate a theorem bound.")
    bounds.add_argument("theorem", help="exp-pl, cos-pl, exp-nc, cos-nc, poly-pl or restart.")
    for name, kind in (
        ("L", float),
        ("mu", float),
        ("a", float),
        ("b", float),
        ("T", int),
        ("beta", float),
        ("c", float),
        ("delta1", float),
        ("T0", int),
        ("r", float),
        ("l", int),
    ):
        bounds.add_argument(f"--{name}", type=kind, default=None)
    bounds.add_argument(
        "--as-printed", action="store_true", help="exp-pl: use L + a in the transient exponent."
    )
    bounds.add_argument(
        "--proof-form", action="store_true", help="cos-pl: noise constant from the proof."
    )
    bounds.add_argument(
        "--recursion", action="store_true", help="restart: evaluate the stage recursion."
    )
    _add_common(bounds)

    verify = sub.add_parser("verify", help="Run an invariant suite.")
    verify.add_argument("suite", choices=sorted(SUITES))
    _add_common(verify)

    study = sub.add_parser("study", help="Run a study from a config file.")
    study.add_argument("study", choices=STUDIES)
    study.add_argument("config", help="Path to a config file.")
    _add_common(study)
    return parser


def _logger(args: argparse.Namespace, metadata: RunMetadata) -> RunLogger | None:
    if not args.log_dir:
        return None
    logger = RunLogger(args.log_dir)
    logger.log_metadata(metadata)
    return logger


########################################################
########    Subcommands                        #########
########################################################


def cmd_run(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    config = load_config(args.config)
    out = args.output_dir or config.output.path
    metadata = RunMetadata("run", args.config, config.to_dict(), args.jobs)
    verbose = VerbosePrinter(enabled=args.verbose)
    verbose.print_metadata(metadata)
    logger = _logger(args, metadata)

    obj = build_objective(config)
    oracle = build_oracle(config, obj.dim)
    spec = build_schedule(config, obj, oracle)
    settings = build_settings(config, args.jobs)

    trace = sgd_run(obj, oracle, build_run_config(config, obj, spec))
    result = run_ensemble(
        obj, oracle, spec, spec.T, config.run.n_seeds, config.run.base_seed, settings
    )
    record = result.records[0]
    if logger:
        logger.log(record)
    verbose.print_record(record)

    outputs = [
        write_trace_csv(trace, os.path.join(out, "trace.csv")),
        write_csv(os.path.join(out, "summary.csv"), SUMMARY_HEADER, summary_rows(result.records)),
    ]
    if record.curve is not None:
        outputs.append(write_csv(os.path.join(out, "curve.csv"), CURVE_HEADER, record.curve))
    verbose.print_summary(time.perf_counter() - start, outputs)
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    evaluate = get_bound(args.theorem)
    values = {
        k: getattr(args, k)
        for k in ("L", "mu", "a", "b", "T", "beta", "c", "delta1")
        if getattr(args, k) is not None
    }
    inputs = BoundInputs(**values)
    if args.T0 is not None:
        r = args.r if args.r is not None else 1.0
        inputs.restart = RestartParams(T0=args.T0, r=r, l=args.l or 0)

    options = {}
    for flag, theorem in (
        ("as_printed", "exp-pl"),
        ("proof_form", "cos-pl"),
        ("recursion", "restart"),
    ):
        if getattr(args, flag):
            if args.theorem != theorem:
                raise ParameterError(f"--{flag.replace('_', '-')} applies to {theorem} only")
            options[flag] = True

    metadata = RunMetadata("bounds", args.theorem, inputs.to_dict(), args.jobs)
    verbose = VerbosePrinter(enabled=args.verbose)
    verbose.print_metadata(metadata)
    logger = _logger(args, metadata)

    bound = evaluate(inputs, **options)
    if logger:
        logger.log(bound)
    verbose.print_bound(bound)
    sys.stdout.write(csv_text(BOUNDS_HEADER, bound_rows(bound)))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    metadata = RunMetadata("verify", args.suite, {}, args.jobs)
    logger = _logger(args, metadata)

    checks = run_suite(args.suite)
    if logger:
        for check in checks:
            logger.log(check)
    VerbosePrinter(enabled=True).print_checks(f"verify {args.suite}", checks)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILED


def _run_study(
    args: argparse.Namespace,
    config: Config,
    logger: RunLogger | None,
    verbose: VerbosePrinter,
) -> StudyReport:
    obj = build_objective(config)
    oracle = build_oracle(config, obj.dim)
    settings = build_settings(config, args.jobs)
    study = config.study
    seeds = dict(n_seeds=study.n_seeds, base_seed=config.run.base_seed)

    if args.study == "noise-adaptation":
        return noise_adaptation_study(
            obj,
            study.levels,
            study.schedules,
            T=study.T,
            settings=settings,
            logger=logger,
            verbose=verbose,
            **seeds,
        )
    elif args.study == "bound-validation":
        return bound_validation(
            obj,
            oracle,
            config.schedule.kind,
            study.Ts,
            settings=settings,
            nonconvex=study.nonconvex,
            logger=logger,
            verbose=verbose,
            **seeds,
        )
    rates = config.rates
    if rates.Ts is not None or rates.gaps is not None:
        if rates.Ts is None or rates.gaps is None:
            raise ConfigError("rates.Ts and rates.gaps must be given together")
        return fit_given_rates(rates.Ts, rates.gaps, rates.max_slope, rates.min_r2)
    return rates_study(
        obj,
        oracle,
        study.schedules,
        study.Ts,
        settings=settings,
        max_slope=rates.max_slope,
        min_r2=rates.min_r2,
        logger=logger,
        verbose=verbose,
        **seeds,
    )


def cmd_study(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    config = load_config(args.config)
    out = args.output_dir or config.output.path
    metadata = RunMetadata("study", args.study, config.to_dict(), args.jobs)
    verbose = VerbosePrinter(enabled=args.verbose)
    verbose.print_metadata(metadata)
    logger = _logger(args, metadata)

    report = _run_study(args, config, logger, verbose)
    if logger:
        for check in report.checks:
            logger.log(check)
    if report.checks:
        verbose.print_checks(args.study, report.checks)

    if args.study == "rates":
        csv_path = write_csv(os.path.join(out, "rates.csv"), RATES_HEADER, rates_rows(report))
    else:
        path = os.path.join(out, f"{args.study}.csv")
        csv_path = write_csv(path, STUDY_HEADER, study_rows(report))
    text_path = os.path.join(out, f"{args.study}.txt")
    with open(text_path, "w", encoding="utf-8") as f:
        f.write(report_text(report))

    verbose.print_summary(time.perf_counter() - start, [csv_path, text_path])
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "run": cmd_run,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "study": cmd_study,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except DivergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AdaptSGDError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
