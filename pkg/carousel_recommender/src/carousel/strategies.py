"""The five ways of filling a selected carousel with items.

All strategies start from the user's highest-ranked matching predictions
that were not borrowed before, then complete the carousel from the rest
of the collection. Random draws come from streams keyed on
(seed, user, carousel), so results do not depend on processing order.
"""
import logging
from datetime import date
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..catalog.dataset import Dataset, recent_transactions
from ..models.errors import ConfigError, InvariantViolation
from ..models.schema import CarouselSpec, FilledCarousel, Item, PredictionList, SourceTag, StrategyParams
from ..similarity.bis import pairwise_bis
from ..utils.seeding import rng_for
from .constraints import matches_constraint, matching_items

logger = logging.getLogger(__name__)

# similarity values are compared at this precision so the item_id tie-break is stable
TIE_DECIMALS = 12


class _CarouselDraft:
    """Mutable working state of one carousel while it is being filled"""

    def __init__(self, spec: CarouselSpec, user: str, ds: Dataset):
        self.spec = spec
        self.user = user
        self.ds = ds
        self.borrowed = ds.borrowed(user)
        self.eligible = [i for i in matching_items(spec, ds) if i not in self.borrowed]
        self.items: List[str] = []
        self.sources: List[SourceTag] = []
        self.chosen: Set[str] = set()

    def add(self, item_id: str, source: SourceTag) -> None:
        self.items.append(item_id)
        self.sources.append(source)
        self.chosen.add(item_id)

    def take_predicted(self, preds: PredictionList, limit: int) -> None:
        # users without history have no usable predictions
        if not self.ds.history(self.user):
            return
        eligible = set(self.eligible)
        for item_id in preds.item_ids():
            if len(self.items) >= limit:
                break
            if item_id in eligible and item_id not in self.chosen:
                self.add(item_id, "predicted")

    def remaining(self) -> List[str]:
        return [i for i in self.eligible if i not in self.chosen]

    def candidate_pool(self, size: int, seed: int) -> List[str]:
        """Seeded-random sample of remaining eligible items, returned in item_id order"""
        remaining = self.remaining()
        if len(remaining) <= size:
            return remaining
        rng = rng_for(seed, self.user, self.spec.key(), "pool")
        picks = rng.choice(len(remaining), size=size, replace=False)
        return sorted(remaining[i] for i in picks)

    def finish(self, limit: int) -> FilledCarousel:
        carousel = FilledCarousel(user_id=self.user, spec=self.spec, items=self.items, sources=self.sources)
        if len(carousel.items) > limit:
            raise InvariantViolation(f"carousel holds {len(carousel.items)} items, limit {limit}",
                                     user_id=self.user, carousel=self.spec.key())
        for item_id in carousel.items:
            if item_id in self.borrowed or not matches_constraint(self.ds.items[item_id], self.spec):
                raise InvariantViolation(f"item {item_id} is not eligible",
                                         user_id=self.user, carousel=self.spec.key())
        return carousel

    def item(self, item_id: str) -> Item:
        return self.ds.items[item_id]


class _DiversityTracker:
    """Mean BIS of every pool candidate to the carousel built so far, updated per addition"""

    def __init__(self, pool: Sequence[str], draft: _CarouselDraft, weights):
        self.pool = list(pool)
        self.weights = weights
        self.pool_items = [draft.item(i) for i in self.pool]
        self.sums = np.zeros(len(self.pool))
        self.size = 0
        for item_id in draft.items:
            self.observe(draft.item(item_id))

    def observe(self, item: Item) -> None:
        if self.pool_items:
            self.sums = self.sums + pairwise_bis(self.pool_items, [item], self.weights)[:, 0]
        self.size += 1

    def best(self, exclude: Set[str]) -> Optional[str]:
        available = np.array([i not in exclude for i in self.pool], dtype=bool)
        if not available.any():
            return None
        if self.size:
            means = np.round(self.sums / self.size, TIE_DECIMALS)
        else:
            means = np.zeros(len(self.pool))
        return self.pool[int(np.argmin(np.where(available, means, np.inf)))]


def _history_ranking(pool: Sequence[str], draft: _CarouselDraft, p: StrategyParams) -> List[str]:
    """Pool ordered by increasing mean BIS to the user's recent borrowing window"""
    window = [draft.item(i) for i in recent_transactions(draft.ds, draft.user, p.recency_window)]
    if not pool:
        return []
    means = np.round(pairwise_bis([draft.item(i) for i in pool], window, p.weights).mean(axis=1), TIE_DECIMALS)
    return [pool[i] for i in np.lexsort((np.arange(len(pool)), means))]


def novelty_ranking(candidates: Sequence[str], draft: _CarouselDraft, cutoff: date) -> List[str]:
    """Items added on or after the cutoff; first-published since the cutoff year first, then newest"""
    novel = [draft.item(i) for i in candidates if _is_novel(draft.item(i), cutoff)]
    novel.sort(
        key=lambda item: (
            not (item.first_published_year is not None and item.first_published_year >= cutoff.year),
            -item.added_date.toordinal(),
            item.item_id,
        )
    )
    return [item.item_id for item in novel]


def _is_novel(item: Item, cutoff: date) -> bool:
    return item.added_date is not None and item.added_date >= cutoff


def fill_original(spec: CarouselSpec, user: str, preds: PredictionList, ds: Dataset, p: StrategyParams) -> FilledCarousel:
    draft = _CarouselDraft(spec, user, ds)
    draft.take_predicted(preds, p.carousel_size)

    remaining = draft.remaining()
    needed = p.carousel_size - len(draft.items)
    if needed > 0 and remaining:
        rng = rng_for(p.seed, user, spec.key(), "topup")
        for idx in rng.permutation(len(remaining))[:needed]:
            draft.add(remaining[idx], "topup")
    return draft.finish(p.carousel_size)


def fill_diversity(spec: CarouselSpec, user: str, preds: PredictionList, ds: Dataset, p: StrategyParams) -> FilledCarousel:
    draft = _CarouselDraft(spec, user, ds)
    draft.take_predicted(preds, p.predicted_take)

    tracker = _DiversityTracker(draft.candidate_pool(p.candidate_pool_size, p.seed), draft, p.weights)
    while len(draft.items) < p.carousel_size:
        pick = tracker.best(draft.chosen)
        if pick is None:
            break
        draft.add(pick, "diversity")
        tracker.observe(draft.item(pick))
    return draft.finish(p.carousel_size)


def fill_serendipity(spec: CarouselSpec, user: str, preds: PredictionList, ds: Dataset, p: StrategyParams) -> FilledCarousel:
    if not ds.history(user):
        logger.debug("No history for %s; serendipity falls back to diversity", user)
        return fill_diversity(spec, user, preds, ds, p)

    draft = _CarouselDraft(spec, user, ds)
    draft.take_predicted(preds, p.predicted_take)
    for item_id in _history_ranking(draft.candidate_pool(p.candidate_pool_size, p.seed), draft, p):
        if len(draft.items) >= p.carousel_size:
            break
        draft.add(item_id, "serendipity")
    return draft.finish(p.carousel_size)


def fill_novelty(spec: CarouselSpec, user: str, preds: PredictionList, ds: Dataset, p: StrategyParams) -> FilledCarousel:
    draft = _CarouselDraft(spec, user, ds)
    draft.take_predicted(preds, p.predicted_take)
    for item_id in novelty_ranking(draft.remaining(), draft, p.novelty_cutoff_date):
        if len(draft.items) >= p.carousel_size:
            break
        draft.add(item_id, "novelty")
    return draft.finish(p.carousel_size)


def fill_combined(spec: CarouselSpec, user: str, preds: PredictionList, ds: Dataset, p: StrategyParams) -> FilledCarousel:
    """Predicted head, then one item each from novelty, serendipity and diversity in turn"""
    draft = _CarouselDraft(spec, user, ds)
    draft.take_predicted(preds, min(p.combined_predicted_take, p.carousel_size))

    novel = iter(novelty_ranking(draft.remaining(), draft, p.novelty_cutoff_date))
    pool = draft.candidate_pool(p.candidate_pool_size, p.seed)
    tracker = _DiversityTracker(pool, draft, p.weights)
    serendipitous = iter(_history_ranking(pool, draft, p) if ds.history(user) else [])

    def next_novel() -> Optional[str]:
        return next((i for i in novel if i not in draft.chosen), None)

    def next_serendipitous() -> Optional[str]:
        return next((i for i in serendipitous if i not in draft.chosen), None)

    def next_diverse() -> Optional[str]:
        return tracker.best(draft.chosen)

    sources: List[Tuple[SourceTag, Callable[[], Optional[str]]]] = [
        ("novelty", next_novel),
        ("serendipity", next_serendipitous),
        ("diversity", next_diverse),
    ]
    if not ds.history(user):
        # without history the serendipity slot has no criterion
        sources = [s for s in sources if s[0] != "serendipity"]
    exhausted: Set[str] = set()
    while len(draft.items) < p.carousel_size and len(exhausted) < len(sources):
        for tag, pick_next in sources:
            if len(draft.items) >= p.carousel_size:
                break
            if tag in exhausted:
                continue
            pick = pick_next()
            if pick is None:
                exhausted.add(tag)
                continue
            draft.add(pick, tag)
            tracker.observe(draft.item(pick))
    return draft.finish(p.carousel_size)


Filler = Callable[[CarouselSpec, str, PredictionList, Dataset, StrategyParams], FilledCarousel]

STRATEGIES: Dict[str, Filler] = {
    "original": fill_original,
    "diversity": fill_diversity,
    "serendipity": fill_serendipity,
    "novelty": fill_novelty,
    "combined": fill_combined,
}


def get_strategy(name: str) -> Filler:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise ConfigError(f"unknown strategy {name!r}; valid strategies: {', '.join(STRATEGIES)}") from None
