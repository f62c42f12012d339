import logging
from typing import Collection, Mapping, Optional

from ..catalog.dataset import Dataset
from ..models.errors import ProviderError
from ..models.schema import Item, PredictionEntry, PredictionList
from ..utils.seeding import rng_for
from .base import PredictionProvider

logger = logging.getLogger(__name__)

START_SCORE = 1.0
SCORE_STEP = 0.001


def random_baseline(
    catalog: Mapping[str, Item], user: str, n: int, seed: int, exclude: Collection[str] = ()
) -> PredictionList:
    """n seeded-uniform distinct items scored 1.000, 0.999, 0.998, ..."""
    if n > len(catalog):
        raise ProviderError(f"cannot draw {n} random items from a catalog of {len(catalog)}", user_id=user)
    if n <= 0:
        return PredictionList(user_id=user)

    excluded = set(exclude)
    pool = [item_id for item_id in sorted(catalog) if item_id not in excluded]
    if len(pool) < n:
        logger.warning("Random baseline for user %s: only %d of %d requested items are unborrowed", user, len(pool), n)
    rng = rng_for(seed, "random", user)
    picks = rng.choice(len(pool), size=min(n, len(pool)), replace=False)
    return PredictionList(
        user_id=user,
        entries=[
            PredictionEntry(item_id=pool[idx], score=round(START_SCORE - SCORE_STEP * rank, 10))
            for rank, idx in enumerate(picks)
        ],
    )


class RandomProvider(PredictionProvider):
    """Random ranking baseline; skips items the user already borrowed when a training set is given"""

    name = "random"

    def __init__(self, catalog: Mapping[str, Item], seed: int = 0, train: Optional[Dataset] = None):
        self.catalog = catalog
        self.seed = seed
        self.train = train

    def predict(self, user_id: str, n: int) -> PredictionList:
        borrowed = self.train.borrowed(user_id) if self.train is not None else set()
        return random_baseline(self.catalog, user_id, n, self.seed, exclude=borrowed)
