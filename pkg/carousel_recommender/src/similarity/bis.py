"""Basic item similarity (BIS) and the set-level aggregates built on it.

Every aggregate is a reduction of the pairwise BIS matrix. Exact-match
attributes contribute 0 whenever either side is missing, and the Jaccard
similarity of two empty sets is 0, so poorly catalogued items never look
alike because of what they lack.
"""
import logging
from typing import Collection, Dict, Hashable, List, Mapping, Optional, Sequence

import numpy as np

from ..models.errors import DataError
from ..models.schema import BisWeights, Item

logger = logging.getLogger(__name__)

SimilarityScore = float

DEFAULT_WEIGHTS = BisWeights()


def jaccard(x: Collection[Hashable], y: Collection[Hashable]) -> SimilarityScore:
    x, y = set(x), set(y)
    union = len(x | y)
    if union == 0:
        return 0.0
    return len(x & y) / union


def _exact(a, b) -> float:
    return 1.0 if a is not None and b is not None and a == b else 0.0


def bis(i: Item, j: Item, w: BisWeights = DEFAULT_WEIGHTS) -> SimilarityScore:
    total = (
        w.author * _exact(i.main_author, j.main_author)
        + w.genre * jaccard(i.genres, j.genres)
        + w.subject * jaccard(i.subjects, j.subjects)
        + w.age_category * _exact(i.age_category, j.age_category)
        + w.medium_type * _exact(i.medium_type, j.medium_type)
        + w.fiction * _exact(i.fiction, j.fiction)
    )
    return total / w.denominator


def _codes(values: Sequence, vocab: Dict) -> np.ndarray:
    return np.array([-1 if v is None else vocab.setdefault(v, len(vocab)) for v in values], dtype=np.int64)


def _exact_matrix(left: Sequence[Item], right: Sequence[Item], field: str) -> np.ndarray:
    vocab: Dict = {}
    a = _codes([getattr(i, field) for i in left], vocab)
    b = _codes([getattr(j, field) for j in right], vocab)
    return ((a[:, None] == b[None, :]) & (a[:, None] >= 0)).astype(np.float64)


def _jaccard_matrix(left: Sequence[Item], right: Sequence[Item], field: str) -> np.ndarray:
    vocab: Dict[str, int] = {}
    for item in list(left) + list(right):
        for code in sorted(getattr(item, field)):
            vocab.setdefault(code, len(vocab))

    def multi_hot(items: Sequence[Item]) -> np.ndarray:
        m = np.zeros((len(items), max(len(vocab), 1)), dtype=np.float64)
        for row, item in enumerate(items):
            for code in getattr(item, field):
                m[row, vocab[code]] = 1.0
        return m

    a, b = multi_hot(left), multi_hot(right)
    inter = a @ b.T
    union = a.sum(axis=1)[:, None] + b.sum(axis=1)[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0)
    return out


def pairwise_bis(left: Sequence[Item], right: Sequence[Item], w: BisWeights = DEFAULT_WEIGHTS) -> np.ndarray:
    """|left| x |right| matrix of BIS values"""
    left, right = list(left), list(right)
    if not left or not right:
        return np.zeros((len(left), len(right)))
    total = (
        w.author * _exact_matrix(left, right, "main_author")
        + w.genre * _jaccard_matrix(left, right, "genres")
        + w.subject * _jaccard_matrix(left, right, "subjects")
        + w.age_category * _exact_matrix(left, right, "age_category")
        + w.medium_type * _exact_matrix(left, right, "medium_type")
        + w.fiction * _exact_matrix(left, right, "fiction")
    )
    return total / w.denominator


def _require(items: Collection[Item], what: str) -> List[Item]:
    items = list(items)
    if not items:
        raise ValueError(f"{what} must not be empty")
    return items


def max_bis(i: Item, J: Collection[Item], w: BisWeights = DEFAULT_WEIGHTS) -> SimilarityScore:
    J = _require(J, "J")
    return float(pairwise_bis([i], J, w).max())


def avg_bis(i: Item, J: Collection[Item], w: BisWeights = DEFAULT_WEIGHTS) -> SimilarityScore:
    J = _require(J, "J")
    return float(pairwise_bis([i], J, w).mean())


def avg_set_bis(I: Collection[Item], J: Collection[Item], w: BisWeights = DEFAULT_WEIGHTS) -> SimilarityScore:
    I = _require(I, "I")
    J = _require(J, "J")
    return float(pairwise_bis(I, J, w).mean(axis=1).mean())


def internal_similarity(
    I: Sequence[Item], w: BisWeights = DEFAULT_WEIGHTS, exclude_diagonal: bool = False
) -> SimilarityScore:
    """Mean pairwise BIS over all ordered pairs, diagonal included unless excluded"""
    I = _require(I, "I")
    matrix = pairwise_bis(I, I, w)
    n = len(I)
    # a singleton has no distinct pairs, so both variants use the diagonal
    if not exclude_diagonal or n == 1:
        return float(matrix.sum() / (n * n))
    return float((matrix.sum() - np.trace(matrix)) / (n * (n - 1)))


def bis_at_k(G: Collection[Item], G_hat_k: Sequence[Item], w: BisWeights = DEFAULT_WEIGHTS) -> SimilarityScore:
    """Mean over predicted items of their best match among the held-out items"""
    G = _require(G, "ground truth")
    G_hat_k = _require(G_hat_k, "predictions")
    return float(pairwise_bis(G_hat_k, G, w).max(axis=1).mean())


def abis(
    ground_truth: Mapping[str, Collection[Item]],
    predictions: Mapping[str, Sequence[Item]],
    k: int,
    w: BisWeights = DEFAULT_WEIGHTS,
    users: Optional[Collection[str]] = None,
) -> SimilarityScore:
    """Average BIS@K over users; every user needs ground truth and at least k predictions"""
    users = sorted(users if users is not None else ground_truth)
    if not users:
        raise ValueError("abis needs at least one user")

    scores: List[float] = []
    for user in users:
        truth = ground_truth.get(user)
        if not truth:
            raise DataError("no ground truth", user_id=user)
        predicted = predictions.get(user)
        if predicted is None or len(predicted) < k:
            raise DataError(f"fewer than {k} predictions", user_id=user)
        scores.append(bis_at_k(truth, list(predicted)[:k], w))
    return float(np.mean(scores))

