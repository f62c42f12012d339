"""Experiment orchestrator: split, predict, select, fill and measure for every test user"""
import logging
from concurrent.futures import ThreadPoolExecutor
from datetime import date, timedelta
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

from pydantic import BaseModel, Field, ValidationError
from tqdm import tqdm

from .carousel.selection import select_carousels_cold_start, select_carousels_with_history
from .carousel.strategies import get_strategy
from .catalog.dataset import Dataset, recent_transactions, split_train_test
from .evaluation.metrics import catalog_coverage, novelty_percentage
from .evaluation.report import accuracy_rows, summarize_measurements
from .models.errors import CarouselError, ConfigError, DataError, InvariantViolation
from .models.schema import (
    CarouselMeasurement,
    CarouselSpec,
    ExperimentConfig,
    ExperimentReport,
    FilledCarousel,
    PredictionList,
    StrategyParams,
)
from .providers.base import PredictionProvider, build_provider
from .providers.random_baseline import RandomProvider
from .similarity.bis import avg_set_bis, internal_similarity

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int, str], None]
T = TypeVar("T")


def map_users(
    fn: Callable[[str], T],
    users: Sequence[str],
    workers: int = 1,
    label: str = "users",
    show_progress: bool = True,
    progress_callback: Optional[ProgressCallback] = None,
) -> List[T]:
    """Apply fn to every user on a thread pool; results come back in input order"""
    results: List[T] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        stream = tqdm(pool.map(fn, users), total=len(users), desc=label, disable=not show_progress)
        for i, result in enumerate(stream, 1):
            results.append(result)
            if progress_callback:
                progress_callback(i, len(users), label)
    return results


def latest_transaction_date(ds: Dataset) -> date:
    if not ds.transactions:
        raise DataError("dataset has no transactions")
    return max(tx.timestamp for tx in ds.transactions).date()


def resolve_dates(ds: Dataset, config: ExperimentConfig) -> Tuple[date, date]:
    """(evaluation date, novelty cutoff); both default from the latest transaction"""
    evaluation_date = config.evaluation_date or latest_transaction_date(ds)
    cutoff = config.novelty_cutoff or evaluation_date - timedelta(days=config.novelty_window_days)
    return evaluation_date, cutoff


def strategy_params(config: ExperimentConfig, cutoff: date) -> StrategyParams:
    try:
        return StrategyParams(
            carousel_size=config.carousel_size,
            predicted_take=config.predicted_take,
            combined_predicted_take=config.combined_predicted_take,
            candidate_pool_size=config.pool_size,
            recency_window=config.recency_window,
            novelty_cutoff_date=cutoff,
            seed=config.seed,
            weights=config.weights,
        )
    except ValidationError as e:
        raise ConfigError(f"strategy.{err['loc'][0] if err['loc'] else 'params'}: {err['msg']}" for err in e.errors())


def measure_carousel(
    carousel: FilledCarousel,
    strategy: str,
    catalog,
    window,
    params: StrategyParams,
    exclude_diagonal: bool = False,
) -> CarouselMeasurement:
    """Internal similarity, similarity to the recency window and novelty share of one carousel"""
    row = CarouselMeasurement(
        user_id=carousel.user_id,
        strategy=strategy,
        kind=carousel.spec.kind,
        constraint=carousel.spec.label(),
        n_items=len(carousel.items),
    )
    if not carousel.items:
        return row
    items = [catalog[i] for i in carousel.items]
    row.internal_similarity = internal_similarity(items, params.weights, exclude_diagonal)
    if window:
        row.transactions_similarity = avg_set_bis(items, window, params.weights)
    row.novelty_pct = novelty_percentage(carousel, catalog, params.novelty_cutoff_date)
    return row


class ExperimentRun(BaseModel):
    """Report plus the per-carousel artefacts it was aggregated from"""

    report: ExperimentReport
    measurements: List[CarouselMeasurement] = Field(default_factory=list)
    carousels: Dict[str, List[FilledCarousel]] = Field(default_factory=dict)


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig, show_progress: bool = True):
        self.config = config
        self.show_progress = show_progress
        self.progress_callback: Optional[ProgressCallback] = None

    def set_progress_callback(self, callback: ProgressCallback):
        """Set callback for per-user progress updates"""
        self.progress_callback = callback

    def _map_users(self, fn, users: List[str], label: str) -> list:
        return map_users(fn, users, self.config.workers, label, self.show_progress, self.progress_callback)

    def _predict(self, provider: PredictionProvider, users: List[str], depth: int, label: str) -> Dict[str, PredictionList]:
        def one(user: str) -> PredictionList:
            try:
                return provider.predict(user, depth)
            except CarouselError as e:
                raise e.with_context(user_id=user) from e

        return dict(zip(users, self._map_users(one, users, label)))

    def run(self, ds: Dataset) -> ExperimentRun:
        config = self.config
        logger.info("Running experiment: %d test users, strategies %s", config.n_test_users, ", ".join(config.strategies))

        evaluation_date, cutoff = resolve_dates(ds, config)
        params = strategy_params(config, cutoff)
        fillers = {name: get_strategy(name) for name in config.strategies}

        train, ground_truth = split_train_test(ds, config.n_test_users, config.holdout, config.seed)
        users = sorted(ground_truth)
        depth = min(max(config.prediction_depth, max(config.k_values)), len(train.items))

        provider = build_provider(config.provider, train, seed=config.seed)
        predictions = self._predict(provider, users, depth, "predict")

        cold_specs: List[CarouselSpec] = []
        if any(not predictions[u].entries for u in users):
            cold_specs = select_carousels_cold_start(train, predictions, config.events, evaluation_date)

        def evaluate_user(user: str) -> Tuple[Dict[str, List[FilledCarousel]], List[CarouselMeasurement]]:
            try:
                return self._evaluate_user(user, predictions[user], train, fillers, params, cold_specs, evaluation_date)
            except CarouselError as e:
                raise e.with_context(user_id=user) from e
            except Exception as e:
                raise InvariantViolation(f"{type(e).__name__}: {e}", user_id=user) from e

        per_user = self._map_users(evaluate_user, users, "carousels")

        carousels: Dict[str, List[FilledCarousel]] = {name: [] for name in config.strategies}
        measurements: List[CarouselMeasurement] = []
        for user_carousels, user_measurements in per_user:
            for name, filled in user_carousels.items():
                carousels[name].extend(filled)
            measurements.extend(user_measurements)

        coverage = {name: catalog_coverage(carousels[name], len(train.items)) for name in config.strategies}
        summaries = summarize_measurements(measurements, config.strategies, coverage)

        accuracy = {provider.name: accuracy_rows(predictions, ground_truth, train.items, config.k_values, config.weights)}
        if config.compare_random and provider.name != "random":
            baseline = RandomProvider(train.items, seed=config.seed, train=train)
            random_predictions = self._predict(baseline, users, depth, "random baseline")
            accuracy[baseline.name] = accuracy_rows(
                random_predictions, ground_truth, train.items, config.k_values, config.weights
            )

        report = ExperimentReport(
            n_test_users=len(users),
            seed=config.seed,
            strategies=summaries,
            accuracy=accuracy,
            config=config.model_dump(mode="json", exclude={"workers"}),
        )
        logger.info("Experiment finished: %d carousels measured", len(measurements))
        return ExperimentRun(report=report, measurements=measurements, carousels=carousels)

    def _evaluate_user(
        self,
        user: str,
        preds: PredictionList,
        train: Dataset,
        fillers,
        params: StrategyParams,
        cold_specs: List[CarouselSpec],
        evaluation_date: date,
    ):
        config = self.config
        if preds.entries:
            specs = select_carousels_with_history(user, preds, train, config.events, evaluation_date)
        else:
            logger.warning("No predictions for %s; using cold-start carousels", user)
            specs = cold_specs

        window = [train.items[i] for i in recent_transactions(train, user, config.recency_window)]
        carousels: Dict[str, List[FilledCarousel]] = {}
        measurements: List[CarouselMeasurement] = []
        for name, fill in fillers.items():
            filled_for_strategy = []
            for spec in specs:
                try:
                    carousel = fill(spec, user, preds, train, params)
                except CarouselError as e:
                    raise e.with_context(user_id=user, carousel=spec.key()) from e
                filled_for_strategy.append(carousel)
                measurements.append(
                    measure_carousel(carousel, name, train.items, window, params, config.exclude_diagonal)
                )
            carousels[name] = filled_for_strategy
        return carousels, measurements


def run_experiment(
    ds: Dataset, config: ExperimentConfig, progress_callback: Optional[ProgressCallback] = None
) -> ExperimentReport:
    runner = ExperimentRunner(config, show_progress=False)
    if progress_callback:
        runner.set_progress_callback(progress_callback)
    return runner.run(ds).report
