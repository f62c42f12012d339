"""Predictions computed elsewhere (for example by a trained graph model)"""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Tuple

from ..catalog.dataset import Dataset
from ..models.schema import LoadReport, PredictionEntry, PredictionList
from ..utils.file_io import read_prediction_rows
from .base import PredictionProvider

logger = logging.getLogger(__name__)


def import_predictions(path: Path, train: Dataset) -> Tuple[Dict[str, PredictionList], LoadReport]:
    """Validate an external predictions file against the training data.

    Rows with unknown or already-borrowed items are dropped; a repeated
    (user, item) keeps its highest score.
    """
    rows, report = read_prediction_rows(path)
    best: Dict[str, Dict[str, float]] = defaultdict(dict)
    duplicates = 0
    borrowed_cache: Dict[str, set] = {}

    for row, user_id, item_id, score in rows:
        if item_id not in train.items:
            report.add(row, f"unknown item {item_id!r}")
            continue
        if user_id not in borrowed_cache:
            borrowed_cache[user_id] = train.borrowed(user_id)
        if item_id in borrowed_cache[user_id]:
            report.add(row, f"item {item_id!r} already borrowed by {user_id!r}")
            continue
        scores = best[user_id]
        if item_id in scores:
            duplicates += 1
            scores[item_id] = max(scores[item_id], score)
        else:
            scores[item_id] = score

    if duplicates:
        logger.warning("Merged %d duplicate (user, item) rows in %s, keeping the max score", duplicates, path)
    if report.dropped:
        logger.warning("Dropped %d prediction rows from %s", report.dropped, path)

    predictions = {
        user_id: PredictionList(
            user_id=user_id,
            entries=[
                PredictionEntry(item_id=i, score=s)
                for i, s in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
            ],
        )
        for user_id, scores in sorted(best.items())
    }
    report.loaded = sum(len(p.entries) for p in predictions.values())
    return predictions, report


class ImportedProvider(PredictionProvider):
    name = "import"

    def __init__(self, path: Path, train: Dataset):
        self.path = Path(path)
        self.predictions, self.report = import_predictions(self.path, train)
        logger.info("Imported predictions for %d users from %s", len(self.predictions), self.path)

    def predict(self, user_id: str, n: int) -> PredictionList:
        found = self.predictions.get(user_id)
        if found is None:
            return PredictionList(user_id=user_id)
        return PredictionList(user_id=user_id, entries=found.entries[: max(n, 0)])
