"""Aggregation of per-carousel measurements and per-user rankings into report blocks"""
import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set

import numpy as np

from ..models.schema import AccuracyRow, CarouselMeasurement, Item, PredictionList, RelevanceJudgment, StrategySummary
from ..providers.base import top_k
from ..similarity.bis import abis
from .metrics import (
    average_precision_at_k,
    boxplot_summary,
    hit_rate_at_k,
    ndcg_at_k,
    precision_at_k,
    recall_at_k,
)

logger = logging.getLogger(__name__)

MEASURES = ("internal_similarity", "transactions_similarity", "novelty_pct")
BASELINE_STRATEGY = "original"


def _summary(values: List[float]):
    return boxplot_summary(sorted(values)) if values else None


def summarize_measurements(
    measurements: Iterable[CarouselMeasurement],
    strategies: Sequence[str],
    coverage: Optional[Mapping[str, float]] = None,
) -> Dict[str, StrategySummary]:
    """One StrategySummary per strategy; empty carousels are counted but not measured"""
    rows: Dict[str, List[CarouselMeasurement]] = defaultdict(list)
    for m in measurements:
        rows[m.strategy].append(m)

    summaries: Dict[str, StrategySummary] = {}
    for strategy in strategies:
        block = rows.get(strategy, [])
        measured = [m for m in block if m.internal_similarity is not None]
        by_kind: Dict[str, List[float]] = defaultdict(list)
        for m in measured:
            by_kind[m.kind].append(m.internal_similarity)
        summaries[strategy] = StrategySummary(
            carousel_count=len(block),
            measured_count=len(measured),
            internal_similarity=_summary([m.internal_similarity for m in measured]),
            transactions_similarity=_summary(
                [m.transactions_similarity for m in measured if m.transactions_similarity is not None]
            ),
            novelty_pct=_summary([m.novelty_pct for m in measured if m.novelty_pct is not None]),
            internal_similarity_by_kind={kind: _summary(v) for kind, v in sorted(by_kind.items())},
            catalog_coverage=(coverage or {}).get(strategy, 0.0),
        )

    baseline = summaries.get(BASELINE_STRATEGY)
    if baseline is not None:
        for summary in summaries.values():
            summary.relative_change = relative_change(summary, baseline)
    return summaries


def relative_change(summary: StrategySummary, baseline: StrategySummary) -> Dict[str, float]:
    """Relative difference of each median against the baseline strategy's median"""
    changes: Dict[str, float] = {}
    for measure in MEASURES:
        ours, theirs = getattr(summary, measure), getattr(baseline, measure)
        if ours is None or theirs is None or theirs.median == 0:
            continue
        changes[measure] = (ours.median - theirs.median) / theirs.median
    return changes


def accuracy_rows(
    predictions: Mapping[str, PredictionList],
    ground_truth: Mapping[str, Set[str]],
    catalog: Mapping[str, Item],
    k_values: Sequence[int],
    weights,
) -> List[AccuracyRow]:
    users = sorted(u for u in ground_truth if ground_truth[u])
    rows: List[AccuracyRow] = []
    for k in k_values:
        judgments = [
            RelevanceJudgment(ranked_items=top_k(predictions[u], k), relevant=frozenset(ground_truth[u]))
            for u in users
        ]
        eligible = [u for u in users if len(predictions[u].entries) >= k]
        skipped = len(users) - len(eligible)
        if skipped:
            logger.warning("ABIS@%d skips %d users with fewer than %d predictions", k, skipped, k)
        abis_value = None
        if eligible:
            abis_value = abis(
                {u: [catalog[i] for i in ground_truth[u]] for u in eligible},
                {u: [catalog[i] for i in top_k(predictions[u], k)] for u in eligible},
                k,
                weights,
            )

        def mean(values) -> float:
            values = list(values)
            return float(np.mean(values)) if values else 0.0

        rows.append(
            AccuracyRow(
                k=k,
                precision=mean(precision_at_k(j, k) for j in judgments),
                recall=mean(recall_at_k(j, k) for j in judgments),
                hit_rate=mean(hit_rate_at_k(j, k) for j in judgments),
                map=mean(average_precision_at_k(j, k) for j in judgments),
                ndcg=mean(ndcg_at_k(j, k) for j in judgments),
                abis=abis_value,
                abis_users=len(eligible),
                abis_skipped=skipped,
            )
        )
    return rows
