"""Command-line entry point: ingest, score, carousels, evaluate, synth"""
import argparse
import logging
import shutil
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Optional

# Add the repository root to path for direct script runs
current_dir = Path(__file__).parent
sys.path.insert(0, str(current_dir.parent.parent))

from carousel_recommender.src.carousel.selection import select_carousels_cold_start, select_carousels_with_history
from carousel_recommender.src.carousel.strategies import STRATEGIES, get_strategy
from carousel_recommender.src.catalog.dataset import Dataset, filter_users_by_annual_loans
from carousel_recommender.src.config import ENV_PREFIX, Config
from carousel_recommender.src.models.errors import CarouselError, InsufficientDataError
from carousel_recommender.src.models.schema import CarouselSpec, FilledCarousel, PredictionList
from carousel_recommender.src.orchestrator import ExperimentRunner, map_users, resolve_dates, strategy_params
from carousel_recommender.src.providers.base import PROVIDER_NAMES, build_provider
from carousel_recommender.src.providers.imported import import_predictions
from carousel_recommender.src.utils.file_io import (
    ITEMS_FILE,
    LOAD_REPORT_FILE,
    MANIFEST_FILE,
    TRANSACTIONS_FILE,
    load_dataset,
    load_items,
    load_transactions,
    save_dataset,
    write_carousels,
    write_json,
    write_load_report,
    write_measurements,
    write_predictions,
)
from carousel_recommender.src.utils.manifest import finish_manifest, start_manifest
from carousel_recommender.src.utils.synth import SynthParams, write_synthetic

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_FILE = Path("logs") / "run.log"

PREDICTIONS_FILE = "predictions.csv"
CAROUSELS_FILE = "carousels.jsonl"
REPORT_FILE = "report.json"
MEASUREMENTS_FILE = "measurements.csv"
STATS_FILE = "stats.json"

logger = logging.getLogger("carousel_recommender")


def setup_logging(level: str = "INFO", log_file: Optional[Path] = None) -> logging.Logger:
    """Setup application logging"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT, handlers=handlers, force=True)
    return logging.getLogger(__name__)


def _close_file_handlers() -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, logging.FileHandler):
            handler.close()
            root.removeHandler(handler)


@contextmanager
def staged_output(out_dir: Path, log_level: str) -> Iterator[Path]:
    """Yield a scratch directory whose contents replace out_dir entries only if the block succeeds"""
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}-", dir=out_dir.parent))
    setup_logging(log_level, stage / LOG_FILE)
    try:
        yield stage
    except BaseException:
        _close_file_handlers()
        shutil.rmtree(stage, ignore_errors=True)
        raise
    _close_file_handlers()
    out_dir.mkdir(parents=True, exist_ok=True)
    for entry in sorted(stage.iterdir()):
        target = out_dir / entry.name
        if target.is_dir():
            shutil.rmtree(target)
        elif target.exists():
            target.unlink()
        shutil.move(str(entry), str(target))
    shutil.rmtree(stage, ignore_errors=True)
    setup_logging(log_level)


def _outputs(stage: Path, names: List[str]) -> List[Path]:
    return [stage / name for name in names]


def cmd_ingest(args, config: Config, stage: Path) -> int:
    manifest = start_manifest("ingest", config.to_dict(), config.get("run.seed"), [args.items, args.transactions])
    items, item_report = load_items(args.items, args.items_format)
    transactions, tx_report = load_transactions(args.transactions, items)
    ds = Dataset(items, transactions)
    logger.info("Loaded dataset: %s", ds.stats())

    if not args.no_loan_filter:
        low, high = config.loan_filter()
        before = len(ds.users())
        ds = filter_users_by_annual_loans(ds, low, high)
        logger.info("Annual-loan filter kept %d of %d users", len(ds.users()), before)

    save_dataset(ds, stage)
    write_load_report([item_report, tx_report], stage / LOAD_REPORT_FILE)
    write_json(
        {
            **ds.stats(),
            "items_dropped": item_report.dropped,
            "transactions_dropped": tx_report.dropped,
        },
        stage / STATS_FILE,
    )
    outputs = _outputs(stage, [ITEMS_FILE, TRANSACTIONS_FILE, LOAD_REPORT_FILE, STATS_FILE])
    write_json(finish_manifest(manifest, outputs).model_dump(mode="json"), stage / MANIFEST_FILE)
    logger.info("Ingest dropped %d item rows and %d transaction rows", item_report.dropped, tx_report.dropped)
    return 0


def cmd_score(args, config: Config, stage: Path) -> int:
    ds = load_dataset(args.dataset)
    seed = config.get("run.seed")
    manifest = start_manifest("score", config.to_dict(), seed, [args.dataset])
    provider = build_provider(args.provider, ds, seed=seed)
    users = ds.users()

    def predict(user: str) -> PredictionList:
        try:
            return provider.predict(user, args.n)
        except CarouselError as e:
            raise e.with_context(user_id=user) from e

    predictions = map_users(predict, users, config.get("run.workers"), "score", not args.quiet)
    rows = write_predictions(predictions, stage / PREDICTIONS_FILE)
    logger.info("Wrote %d predictions for %d users with provider %s", rows, len(users), provider.name)
    write_json(finish_manifest(manifest, _outputs(stage, [PREDICTIONS_FILE])).model_dump(mode="json"), stage / MANIFEST_FILE)
    return 0


def cmd_carousels(args, config: Config, stage: Path) -> int:
    ds = load_dataset(args.dataset)
    experiment = config.experiment_config()
    fill = get_strategy(args.strategy)
    manifest = start_manifest("carousels", config.to_dict(), experiment.seed, [args.dataset, args.predictions])

    predictions, report = import_predictions(args.predictions, ds)
    if report.dropped:
        logger.warning("Dropped %d prediction rows from %s", report.dropped, args.predictions)
    evaluation_date, cutoff = resolve_dates(ds, experiment)
    params = strategy_params(experiment, cutoff)

    users = sorted(set(args.user)) if args.user else sorted(set(ds.users()) | set(predictions))

    warm = {u for u in users if u in predictions and predictions[u].entries and ds.history(u)}
    cold_specs: List[CarouselSpec] = []
    if len(warm) < len(users):
        cold_specs = select_carousels_cold_start(ds, predictions, experiment.events, evaluation_date)
        logger.info("%d users take the cold-start path", len(users) - len(warm))

    def carousels_for(user: str) -> List[FilledCarousel]:
        preds = predictions.get(user) or PredictionList(user_id=user)
        try:
            if user in warm:
                specs = select_carousels_with_history(user, preds, ds, experiment.events, evaluation_date)
            else:
                specs = cold_specs
        except CarouselError as e:
            raise e.with_context(user_id=user) from e
        filled = []
        for spec in specs:
            try:
                filled.append(fill(spec, user, preds, ds, params))
            except CarouselError as e:
                raise e.with_context(user_id=user, carousel=spec.key()) from e
        return filled

    per_user = map_users(carousels_for, users, experiment.workers, "carousels", not args.quiet)
    count = write_carousels((c for filled in per_user for c in filled), stage / CAROUSELS_FILE)
    logger.info("Wrote %d %s carousels for %d users", count, args.strategy, len(users))
    write_json(finish_manifest(manifest, _outputs(stage, [CAROUSELS_FILE])).model_dump(mode="json"), stage / MANIFEST_FILE)
    return 0


def cmd_evaluate(args, config: Config, stage: Path) -> int:
    experiment = config.experiment_config()
    ds = load_dataset(args.dataset)
    manifest = start_manifest("evaluate", config.to_dict(), experiment.seed, [args.dataset])

    run = ExperimentRunner(experiment, show_progress=not args.quiet).run(ds)
    write_json(run.report.model_dump(mode="json"), stage / REPORT_FILE)
    write_measurements(run.measurements, stage / MEASUREMENTS_FILE)
    carousel_dir = stage / "carousels"
    carousel_dir.mkdir()
    for strategy, carousels in run.carousels.items():
        write_carousels(carousels, carousel_dir / f"{strategy}.jsonl")

    for strategy, summary in run.report.strategies.items():
        if summary.internal_similarity is not None:
            logger.info("%s: %d carousels, median internal similarity %.3f",
                        strategy, summary.carousel_count, summary.internal_similarity.median)
    outputs = _outputs(stage, [REPORT_FILE, MEASUREMENTS_FILE, "carousels"])
    write_json(finish_manifest(manifest, outputs).model_dump(mode="json"), stage / MANIFEST_FILE)
    return 0


def cmd_synth(args, config: Config, stage: Path) -> int:
    params = SynthParams(
        n_users=args.users,
        n_items=args.items,
        n_clusters=args.clusters,
        cluster_purity=args.purity,
        recent_share=args.recent_share,
        seed=config.get("run.seed"),
    )
    manifest = start_manifest("synth", params.model_dump(mode="json"), params.seed, [])
    write_synthetic(params, stage)
    outputs = _outputs(stage, [ITEMS_FILE, TRANSACTIONS_FILE])
    write_json(finish_manifest(manifest, outputs).model_dump(mode="json"), stage / MANIFEST_FILE)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "score": cmd_score,
    "carousels": cmd_carousels,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
}


def _csv_list(value: str) -> List[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _int_list(value: str) -> List[int]:
    try:
        return [int(part) for part in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carousel",
        description="Multi-carousel book recommendations and their evaluation",
        epilog=f"Any config key can also be set through the environment, e.g. {ENV_PREFIX}STRATEGY__CAROUSEL_SIZE=10",
    )
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--seed", type=int, help="master seed (run.seed)")
    parser.add_argument("--workers", type=int, help="worker threads for per-user work (run.workers)")
    parser.add_argument("--out-dir", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--quiet", action="store_true", help="hide progress bars")
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="validate, filter and archive a catalog and its transactions")
    ingest.add_argument("--items", type=Path, required=True)
    ingest.add_argument("--transactions", type=Path, required=True)
    ingest.add_argument("--items-format", choices=("csv", "jsonl"))
    ingest.add_argument("--min-annual-loans", type=float)
    ingest.add_argument("--max-annual-loans", type=float)
    ingest.add_argument("--no-loan-filter", action="store_true")

    score = sub.add_parser("score", help="write ranked predictions for every user")
    score.add_argument("--dataset", type=Path, required=True, help="archive written by ingest")
    score.add_argument("--provider", default="cooccurrence", help=" | ".join(PROVIDER_NAMES))
    score.add_argument("--n", type=int, default=250)

    carousels = sub.add_parser("carousels", help="select and fill carousels with one strategy")
    carousels.add_argument("--dataset", type=Path, required=True)
    carousels.add_argument("--predictions", type=Path, required=True)
    carousels.add_argument("--strategy", required=True, help=" | ".join(STRATEGIES))
    carousels.add_argument("--user", action="append", help="restrict to this user (repeatable)")
    carousels.add_argument("--carousel-size", type=int)
    carousels.add_argument("--predicted-take", type=int)
    carousels.add_argument("--pool-size", type=int)
    carousels.add_argument("--evaluation-date")

    evaluate = sub.add_parser("evaluate", help="run the full experiment and write the report")
    evaluate.add_argument("--dataset", type=Path, required=True)
    evaluate.add_argument("--strategies", type=_csv_list)
    evaluate.add_argument("--k-values", type=_int_list)
    evaluate.add_argument("--n-test-users", type=int)
    evaluate.add_argument("--provider")
    evaluate.add_argument("--carousel-size", type=int)
    evaluate.add_argument("--predicted-take", type=int)
    evaluate.add_argument("--pool-size", type=int)
    evaluate.add_argument("--evaluation-date")

    synth = sub.add_parser("synth", help="generate a synthetic catalog and transactions")
    synth.add_argument("--users", type=int, default=500)
    synth.add_argument("--items", type=int, default=5000)
    synth.add_argument("--clusters", type=int, default=2)
    synth.add_argument("--purity", type=float, default=0.9)
    synth.add_argument("--recent-share", type=float, default=0.2)
    return parser


def flag_overrides(args) -> Dict[str, object]:
    """Dotted config keys set by command-line flags; flags left unset are skipped"""
    mapping = {
        "seed": "run.seed",
        "workers": "run.workers",
        "min_annual_loans": "data.min_annual_loans",
        "max_annual_loans": "data.max_annual_loans",
        "n_test_users": "data.n_test_users",
        "strategies": "experiment.strategies",
        "k_values": "experiment.k_values",
        "carousel_size": "strategy.carousel_size",
        "predicted_take": "strategy.predicted_take",
        "pool_size": "strategy.candidate_pool_size",
        "evaluation_date": "strategy.evaluation_date",
    }
    overrides = {key: getattr(args, attr, None) for attr, key in mapping.items()}
    if args.command == "evaluate":
        overrides["experiment.provider"] = args.provider
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    logger.info("Starting carousel %s", args.command)

    try:
        config = Config(args.config, overrides=flag_overrides(args))
        with staged_output(args.out_dir, args.log_level) as stage:
            status = COMMANDS[args.command](args, config, stage)
        logger.info("Finished carousel %s; outputs in %s", args.command, args.out_dir)
        return status
    except InsufficientDataError as e:
        logger.error("Not enough data: %s", e)
        return e.exit_code
    except CarouselError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except FileNotFoundError as e:
        logger.error("%s", e)
        return 1
    except Exception as e:
        logger.exception("Unexpected failure: %s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
