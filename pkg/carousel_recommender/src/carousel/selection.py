"""Choosing which carousels a user sees.

Carousel constraints come from attribute frequencies in two item samples:
what the model predicts (or, for cold-start, everyone's top-1 predictions)
and what was borrowed recently (or, for cold-start, the most recent
checkouts across the library).
"""
import logging
from collections import Counter
from datetime import date
from typing import Iterable, List, Mapping, Optional, Sequence, Set

from ..catalog.dataset import Dataset, recent_global_transactions, recent_transactions
from ..models.errors import DataError, InsufficientDataError
from ..models.schema import CarouselSpec, EventWindow, Item, PredictionList, Provenance
from ..providers.base import top_k

logger = logging.getLogger(__name__)

TOP_PREDICTED = 5
RECENT_BORROWED = 5
GLOBAL_RECENT = 1000

GENRES_PER_SOURCE = 3
COMBINATIONS_PER_SOURCE = 2
SUBJECTS_PER_SOURCE = 3
AUTHORS_PER_SOURCE = 3


def _sort_value(value) -> tuple:
    if isinstance(value, frozenset):
        return tuple(sorted(value))
    return (value,)


def most_frequent(counts: Counter, limit: int, exclude: Iterable = ()) -> List:
    """Top values by frequency, ties broken lexicographically"""
    excluded = set(exclude)
    ranked = sorted((v for v in counts if v not in excluded), key=lambda v: (-counts[v], _sort_value(v)))
    return ranked[:limit]


def _genre_counts(items: Sequence[Item]) -> Counter:
    return Counter(g for item in items for g in item.genres)


def _combination_counts(items: Sequence[Item]) -> Counter:
    return Counter(item.genres for item in items if len(item.genres) >= 2)


def _subject_counts(items: Sequence[Item]) -> Counter:
    return Counter(s for item in items for s in item.subjects)


def _author_counts(items: Sequence[Item]) -> Counter:
    return Counter(item.main_author for item in items if item.main_author is not None)


def _frequency_specs(
    predicted: Sequence[Item],
    recent: Sequence[Item],
    provenances: Sequence[Provenance],
    individual_genres: bool,
) -> List[CarouselSpec]:
    plan = []
    if individual_genres:
        plan.append(("genre", _genre_counts, GENRES_PER_SOURCE))
    plan.append(("genre_combination", _combination_counts, COMBINATIONS_PER_SOURCE))
    plan.append(("subject", _subject_counts, SUBJECTS_PER_SOURCE))
    plan.append(("author", _author_counts, AUTHORS_PER_SOURCE))

    by_kind = {}
    for kind, counter, limit in plan:
        picked: List = []
        by_kind[kind] = []
        for source, provenance in zip((predicted, recent), provenances):
            values = most_frequent(counter(source), limit, exclude=picked)
            picked.extend(values)
            by_kind[kind].extend(CarouselSpec(kind=kind, constraint=v, provenance=provenance) for v in values)

    # genre carousels of one source stay together: individual genres, then combinations
    specs: List[CarouselSpec] = []
    for provenance in dict.fromkeys(provenances):
        for kind in ("genre", "genre_combination"):
            specs.extend(s for s in by_kind.get(kind, []) if s.provenance == provenance)
    for kind in ("subject", "author"):
        specs.extend(by_kind[kind])
    return specs


def event_specs(events: Sequence[EventWindow], when: Optional[date]) -> List[CarouselSpec]:
    """At most one cyclic-event carousel: the first configured window containing the date"""
    if when is None:
        return []
    for window in events:
        if window.contains(when):
            return [window.to_spec()]
    return []


def _distinct_recent(ds: Dataset, user: str, limit: int) -> List[Item]:
    seen: Set[str] = set()
    items: List[Item] = []
    for item_id in recent_transactions(ds, user, len(ds.history(user))):
        if item_id not in seen:
            seen.add(item_id)
            items.append(ds.items[item_id])
            if len(items) == limit:
                break
    return items


def select_carousels_with_history(
    user: str,
    preds: PredictionList,
    ds: Dataset,
    events: Sequence[EventWindow] = (),
    evaluation_date: Optional[date] = None,
) -> List[CarouselSpec]:
    if not preds.entries:
        raise InsufficientDataError("no predictions; use cold-start selection", user_id=user)
    if not ds.history(user):
        raise DataError("no borrowing history; use cold-start selection", user_id=user)

    predicted = [ds.items[i] for i in top_k(preds, TOP_PREDICTED) if i in ds.items]
    recent = _distinct_recent(ds, user, RECENT_BORROWED)
    specs = _frequency_specs(predicted, recent, ("from_predictions", "from_history"), individual_genres=True)
    specs.extend(event_specs(events, evaluation_date))
    logger.debug("Selected %d carousels for %s", len(specs), user)
    return specs


def select_carousels_cold_start(
    ds: Dataset,
    all_preds: Mapping[str, PredictionList],
    events: Sequence[EventWindow] = (),
    evaluation_date: Optional[date] = None,
) -> List[CarouselSpec]:
    """Selection for users without history, from pooled top-1 predictions and global recent checkouts"""
    pooled = [
        ds.items[p.entries[0].item_id]
        for _, p in sorted(all_preds.items())
        if p.entries and p.entries[0].item_id in ds.items
    ]
    if not pooled:
        raise InsufficientDataError("cold-start selection needs at least one user with predictions")
    recent_ids = recent_global_transactions(ds, GLOBAL_RECENT)
    if not recent_ids:
        raise InsufficientDataError("cold-start selection needs at least one transaction")

    recent = [ds.items[i] for i in recent_ids]
    specs = _frequency_specs(pooled, recent, ("global", "global"), individual_genres=False)
    specs.extend(event_specs(events, evaluation_date))
    return specs
