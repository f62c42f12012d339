from .metrics import (
    average_precision_at_k,
    boxplot_summary,
    catalog_coverage,
    hit_rate_at_k,
    mean_average_precision,
    ndcg_at_k,
    novelty_percentage,
    precision_at_k,
    recall_at_k,
)
from .report import accuracy_rows, relative_change, summarize_measurements

__all__ = [
    "accuracy_rows",
    "average_precision_at_k",
    "boxplot_summary",
    "catalog_coverage",
    "hit_rate_at_k",
    "mean_average_precision",
    "ndcg_at_k",
    "novelty_percentage",
    "precision_at_k",
    "recall_at_k",
    "relative_change",
    "summarize_measurements",
]
