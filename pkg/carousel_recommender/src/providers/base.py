"""Provider interface and factory"""
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List

from ..catalog.dataset import Dataset
from ..models.errors import ProviderError
from ..models.schema import PredictionList

logger = logging.getLogger(__name__)

PROVIDER_NAMES = ("cooccurrence", "random", "import:<path>")


class PredictionProvider(ABC):
    """Produces a ranked PredictionList per user"""

    name: str = "provider"

    @abstractmethod
    def predict(self, user_id: str, n: int) -> PredictionList:
        ...


def top_k(p: PredictionList, k: int) -> List[str]:
    """First min(k, len) item ids of a prediction list"""
    if k <= 0:
        return []
    return [e.item_id for e in p.entries[:k]]


def build_provider(spec: str, train: Dataset, seed: int = 0) -> PredictionProvider:
    """Provider from its CLI name: cooccurrence, random or import:<path>"""
    from .cooccurrence import CooccurrenceProvider
    from .imported import ImportedProvider
    from .random_baseline import RandomProvider

    if spec == "cooccurrence":
        return CooccurrenceProvider(train)
    if spec == "random":
        return RandomProvider(train.items, seed=seed, train=train)
    if spec.startswith("import:"):
        raw = spec[len("import:"):].strip()
        if not raw:
            raise ProviderError("import provider needs a path: import:<path>")
        return ImportedProvider(Path(raw), train)
    raise ProviderError(f"unknown provider {spec!r}; valid providers: {', '.join(PROVIDER_NAMES)}")
