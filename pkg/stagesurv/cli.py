"""Command-line entry point: `stagesurv <command> --config run.json [overrides]`."""

import argparse
import logging
from collections.abc import Sequence
from pathlib import Path

from stagesurv.cohort import Stage
from stagesurv.config import RunConfig
from stagesurv.const import DEFAULT_TOP_K
from stagesurv.exceptions import EXIT_OK, ConfigError, StageSurvException
from stagesurv.learners import LearnerKind
from stagesurv.pipeline import SYNTH_COHORT_FILE, Phase, run_pipeline
from stagesurv.reporting import compile_report
from stagesurv.synth import generate_synth

log = logging.getLogger(__name__)

ALL = "all"

# phases each pipeline command runs; evaluation reads the grid search so it trains first
COMMAND_PHASES: dict[str, frozenset[Phase]] = {
    "ingest": frozenset({Phase.INGEST}),
    "train": frozenset({Phase.INGEST, Phase.TRAIN}),
    "evaluate": frozenset({Phase.INGEST, Phase.TRAIN, Phase.EVALUATE}),
    "explain": frozenset({Phase.INGEST, Phase.EXPLAIN}),
    "run": frozenset(Phase),
}


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, required=True, help="run config JSON")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", type=Path, help="override the output directory")
    parser.add_argument("--stage", choices=[*(s.value for s in Stage), ALL], default=ALL)
    parser.add_argument("--learner", choices=[*(k.value for k in LearnerKind), ALL], default=ALL)
    parser.add_argument("--n-jobs", type=int, dest="n_jobs", help="parallel workers for grid points and explanations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stagesurv", description="Stage-specific five-year survivability models")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug detail")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="write the synthetic cohort of a run config")
    _add_run_options(synth)

    for name, text in (
        ("ingest", "parse, label and split the cohort and write the ingest reports"),
        ("train", "grid-search every learner per stage and save the explained model"),
        ("evaluate", "train, then write metrics, ROC curves and the metrics table"),
        ("explain", "explain the saved models with SHAP and LIME"),
        ("run", "the full pipeline"),
    ):
        _add_run_options(commands.add_parser(name, help=text))

    report = commands.add_parser("report", help="combine finished runs into cross-cancer reports")
    report.add_argument("runs", type=Path, nargs="+", help="run directories, one per cancer type")
    report.add_argument("--out", type=Path, required=True)
    report.add_argument("--top-k", type=int, dest="top_k", default=DEFAULT_TOP_K)

    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.load(args.config)
    return config.with_overrides(
        seed=args.seed,
        output_dir=args.out,
        stages=None if args.stage == ALL else (Stage(args.stage),),
        learners=None if args.learner == ALL else (LearnerKind(args.learner),),
        n_jobs=args.n_jobs,
    )


def _synth(config: RunConfig) -> int:
    if config.synth is None:
        raise ConfigError("Run config has no synth block")
    cohort = generate_synth(config.synth, config.load_schema())
    path = config.output_dir / SYNTH_COHORT_FILE
    cohort.write(path)
    log.info(f"Wrote {len(cohort.labels)} rows to {path}")
    return EXIT_OK


def run_command(args: argparse.Namespace) -> int:
    match args.command:
        case "report":
            compile_report(args.runs, args.out, args.top_k)
            return EXIT_OK
        case "synth":
            return _synth(load_config(args))
        case command:
            result = run_pipeline(load_config(args), COMMAND_PHASES[command])
            return result.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return run_command(args)
    except StageSurvException as e:
        log.error(str(e))
        return e.exit_code
