from .bis import (
    DEFAULT_WEIGHTS,
    abis,
    avg_bis,
    avg_set_bis,
    bis,
    bis_at_k,
    internal_similarity,
    jaccard,
    max_bis,
    pairwise_bis,
)

__all__ = [
    "DEFAULT_WEIGHTS",
    "abis",
    "avg_bis",
    "avg_set_bis",
    "bis",
    "bis_at_k",
    "internal_similarity",
    "jaccard",
    "max_bis",
    "pairwise_bis",
]
