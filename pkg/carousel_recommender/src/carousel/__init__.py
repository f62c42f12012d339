from .constraints import matches_constraint, matching_items
from .selection import event_specs, select_carousels_cold_start, select_carousels_with_history
from .strategies import (
    STRATEGIES,
    fill_combined,
    fill_diversity,
    fill_novelty,
    fill_original,
    fill_serendipity,
    get_strategy,
)

__all__ = [
    "STRATEGIES",
    "event_specs",
    "fill_combined",
    "fill_diversity",
    "fill_novelty",
    "fill_original",
    "fill_serendipity",
    "get_strategy",
    "matches_constraint",
    "matching_items",
    "select_carousels_cold_start",
    "select_carousels_with_history",
]
