from .base import PROVIDER_NAMES, PredictionProvider, build_provider, top_k
from .cooccurrence import CooccurrenceProvider, score_cooccurrence
from .imported import ImportedProvider, import_predictions
from .random_baseline import RandomProvider, random_baseline

__all__ = [
    "PROVIDER_NAMES",
    "CooccurrenceProvider",
    "ImportedProvider",
    "PredictionProvider",
    "RandomProvider",
    "build_provider",
    "import_predictions",
    "random_baseline",
    "score_cooccurrence",
    "top_k",
]
