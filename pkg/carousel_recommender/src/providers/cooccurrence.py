"""Item-item co-occurrence ranking over implicit checkouts"""
import logging

import numpy as np
import scipy.sparse as sp

from ..catalog.dataset import Dataset
from ..models.errors import DataError
from ..models.schema import PredictionEntry, PredictionList
from .base import PredictionProvider

logger = logging.getLogger(__name__)

# scores are rounded before ranking so that summation noise cannot reorder ties
SCORE_DECIMALS = 12


class CooccurrenceProvider(PredictionProvider):
    """Scores a candidate by the summed cosine-normalised co-borrow counts with the user's items.

    co-borrow count(a, b) is the number of distinct users who borrowed both.
    """

    name = "cooccurrence"

    def __init__(self, train: Dataset):
        self.train = train
        self.item_ids = train.item_ids
        self.item_index = {item_id: idx for idx, item_id in enumerate(self.item_ids)}
        self.users = train.users()
        self.user_index = {user_id: idx for idx, user_id in enumerate(self.users)}

        pairs = {(self.user_index[tx.user_id], self.item_index[tx.item_id]) for tx in train.transactions}
        rows = np.fromiter((u for u, _ in pairs), dtype=np.int64, count=len(pairs))
        cols = np.fromiter((i for _, i in pairs), dtype=np.int64, count=len(pairs))
        self.user_item = sp.csr_matrix(
            (np.ones(len(pairs)), (rows, cols)), shape=(len(self.users), len(self.item_ids))
        )

        co_counts = (self.user_item.T @ self.user_item).tocsr()
        popularity = np.asarray(self.user_item.sum(axis=0)).ravel()
        co_counts = (co_counts - sp.diags(co_counts.diagonal())).tocsr()
        co_counts.eliminate_zeros()

        inv_sqrt = np.zeros_like(popularity)
        np.divide(1.0, np.sqrt(popularity), out=inv_sqrt, where=popularity > 0)
        scale = sp.diags(inv_sqrt)
        self.similarity = (scale @ co_counts @ scale).tocsr()
        logger.info(
            "Co-occurrence index built: %d users, %d items, %d non-zero pairs",
            len(self.users), len(self.item_ids), self.similarity.nnz,
        )

    def predict(self, user_id: str, n: int) -> PredictionList:
        if user_id not in self.user_index:
            raise DataError("no training transactions for co-occurrence scoring", user_id=user_id)

        row = self.user_item.getrow(self.user_index[user_id])
        scores = np.round(np.asarray((row @ self.similarity).todense()).ravel(), SCORE_DECIMALS)
        scores[row.indices] = 0.0

        candidates = np.flatnonzero(scores > 0)
        # item ids are sorted, so the index is the item_id tie-break
        order = candidates[np.lexsort((candidates, -scores[candidates]))][: max(n, 0)]
        return PredictionList(
            user_id=user_id,
            entries=[PredictionEntry(item_id=self.item_ids[i], score=float(scores[i])) for i in order],
        )


def score_cooccurrence(train: Dataset, user: str, n: int) -> PredictionList:
    return CooccurrenceProvider(train).predict(user, n)
