"""Exact-match ranking metrics, carousel novelty share and distribution summaries"""
import math
from datetime import date
from typing import Iterable, List, Mapping, Sequence

import numpy as np

from ..models.schema import BoxplotSummary, FilledCarousel, Item, RelevanceJudgment


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")


def _hits(j: RelevanceJudgment, k: int) -> List[int]:
    return [1 if item in j.relevant else 0 for item in j.ranked_items[:k]]


def precision_at_k(j: RelevanceJudgment, k: int) -> float:
    """Relevant share of the top-k; short lists divide by their own length"""
    _check_k(k)
    if not j.ranked_items:
        return 0.0
    return sum(_hits(j, k)) / min(k, len(j.ranked_items))


def recall_at_k(j: RelevanceJudgment, k: int) -> float:
    _check_k(k)
    if not j.relevant:
        raise ValueError("recall is undefined without relevant items")
    return sum(_hits(j, k)) / len(j.relevant)


def hit_rate_at_k(j: RelevanceJudgment, k: int) -> float:
    _check_k(k)
    return 1.0 if any(_hits(j, k)) else 0.0


def average_precision_at_k(j: RelevanceJudgment, k: int) -> float:
    """Mean of precision@i over the relevant ranks i <= k, divided by the relevant hits in the top-k"""
    _check_k(k)
    hits = _hits(j, k)
    found = sum(hits)
    if found == 0:
        return 0.0
    total, so_far = 0.0, 0
    for rank, rel in enumerate(hits, 1):
        if rel:
            so_far += 1
            total += so_far / rank
    return total / found


def mean_average_precision(js: Sequence[RelevanceJudgment], k: int) -> float:
    if not js:
        raise ValueError("MAP needs at least one judgment")
    return float(np.mean([average_precision_at_k(j, k) for j in js]))


def dcg_at_k(relevances: Sequence[int], k: int) -> float:
    return sum(rel / math.log2(rank + 1) for rank, rel in enumerate(relevances[:k], 1))


def ndcg_at_k(j: RelevanceJudgment, k: int) -> float:
    """Binary-relevance nDCG; the ideal ranking puts min(k, |relevant|) hits first"""
    _check_k(k)
    if not j.relevant:
        return 0.0
    ideal = dcg_at_k([1] * min(k, len(j.relevant)), k)
    return dcg_at_k(_hits(j, k), k) / ideal


def novelty_percentage(c: FilledCarousel, catalog: Mapping[str, Item], cutoff: date) -> float:
    if not c.items:
        raise ValueError(f"novelty percentage of an empty carousel ({c.spec.key()})")
    novel = sum(
        1 for item_id in c.items
        if catalog[item_id].added_date is not None and catalog[item_id].added_date >= cutoff
    )
    return 100.0 * novel / len(c.items)


def boxplot_summary(values: Iterable[float]) -> BoxplotSummary:
    """Median and quartiles by linear interpolation; whiskers are the data extremes"""
    data = np.sort(np.asarray(list(values), dtype=np.float64))
    if data.size == 0:
        raise ValueError("cannot summarise an empty list")
    q1, median, q3 = np.percentile(data, [25, 50, 75], method="linear")
    return BoxplotSummary(
        median=float(median),
        lower_quartile=float(q1),
        upper_quartile=float(q3),
        lower_whisker=float(data[0]),
        upper_whisker=float(data[-1]),
        n=int(data.size),
    )


def catalog_coverage(carousels: Iterable[FilledCarousel], catalog_size: int) -> float:
    if catalog_size <= 0:
        return 0.0
    shown = {item_id for c in carousels for item_id in c.items}
    return len(shown) / catalog_size
