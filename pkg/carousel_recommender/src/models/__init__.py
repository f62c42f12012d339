from .errors import (
    CarouselError,
    ConfigError,
    DataError,
    InsufficientDataError,
    InvariantViolation,
    ProviderError,
)
from .schema import (
    BisWeights,
    BoxplotSummary,
    CarouselSpec,
    ExperimentConfig,
    ExperimentReport,
    FilledCarousel,
    Item,
    LoadReport,
    PredictionEntry,
    PredictionList,
    RunManifest,
    StrategyParams,
    Transaction,
)

__all__ = [
    "BisWeights",
    "BoxplotSummary",
    "CarouselError",
    "CarouselSpec",
    "ConfigError",
    "DataError",
    "ExperimentConfig",
    "ExperimentReport",
    "FilledCarousel",
    "InsufficientDataError",
    "InvariantViolation",
    "Item",
    "LoadReport",
    "PredictionEntry",
    "PredictionList",
    "ProviderError",
    "RunManifest",
    "StrategyParams",
    "Transaction",
]
