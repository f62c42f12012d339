"""Seeded synthetic library: clustered catalog, taste-driven borrowers and recently added items.

Every user belongs to one cluster and borrows a fixed share of their loans
inside it (cluster purity). Within the cluster, item choice is weighted by
popularity and by the user's favourite genre, age category, medium and
fiction preference, which gives co-occurrence scoring real neighbourhoods.
"""
import logging
import math
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..catalog.dataset import Dataset
from ..models.schema import Item, Transaction
from .file_io import save_dataset
from .seeding import rng_for

logger = logging.getLogger(__name__)

AGE_CATEGORIES = ("adult", "young_adult", "children")
AGE_SHARES = (0.6, 0.25, 0.15)
MEDIUM_TYPES = ("book", "ebook", "audiobook", "large_print")
MEDIUM_SHARES = (0.7, 0.15, 0.1, 0.05)
FICTION_SHARE = 0.6

# multiplicative preference boosts applied to in-cluster items
GENRE_BOOST = 4.0
AGE_BOOST = 3.0
MEDIUM_BOOST = 3.0
FICTION_BOOST = 2.0

SECONDS_PER_DAY = 86400


class SynthParams(BaseModel):
    n_users: int = Field(default=500, ge=1)
    n_items: int = Field(default=5000, ge=1)
    n_clusters: int = Field(default=2, ge=1)
    cluster_purity: float = Field(default=0.9, ge=0.0, le=1.0)
    genres_per_cluster: int = Field(default=4, ge=2)
    subjects_per_cluster: int = Field(default=12, ge=1)
    authors_per_cluster: int = Field(default=60, ge=1)
    recent_share: float = Field(default=0.2, ge=0.0, le=1.0)
    missing_share: float = Field(default=0.02, ge=0.0, le=1.0)
    min_loans_per_year: int = Field(default=12, ge=1)
    max_loans_per_year: int = Field(default=40, ge=1)
    start_date: date = date(2021, 1, 1)
    end_date: date = date(2023, 12, 31)
    seed: int = 0

    @model_validator(mode="after")
    def check_ranges(self):
        if self.min_loans_per_year > self.max_loans_per_year:
            raise ValueError("min_loans_per_year exceeds max_loans_per_year")
        if self.start_date >= self.end_date:
            raise ValueError("start_date must precede end_date")
        if self.n_items < self.n_clusters:
            raise ValueError("need at least one item per cluster")
        return self


def _genre(cluster: int, k: int) -> str:
    return f"g{cluster}{k:02d}"


def _pick(rng: np.random.Generator, values, shares):
    return values[int(rng.choice(len(values), p=shares))]


class SyntheticLibrary:
    """Generator for one parameter set; every draw uses a stream keyed on the seed and a purpose"""

    def __init__(self, params: SynthParams):
        self.params = params
        self.recent_from = params.end_date - timedelta(days=365)

    def _item(self, idx: int, cluster: int, rng: np.random.Generator) -> Item:
        p = self.params
        n_genres = int(rng.integers(1, min(3, p.genres_per_cluster) + 1))
        genres = [_genre(cluster, int(k)) for k in rng.choice(p.genres_per_cluster, size=n_genres, replace=False)]
        n_subjects = int(rng.integers(1, min(3, p.subjects_per_cluster) + 1))
        subjects = [f"s{cluster}{int(k):02d}" for k in rng.choice(p.subjects_per_cluster, size=n_subjects, replace=False)]
        author = f"Author {cluster}-{int(rng.integers(p.authors_per_cluster)):03d}"

        if rng.random() < p.recent_share:
            span = (p.end_date - self.recent_from).days
            added = self.recent_from + timedelta(days=int(rng.integers(span + 1)))
            published = p.end_date.year if rng.random() < 0.5 else int(rng.integers(1990, p.end_date.year))
        else:
            added = date(2005, 1, 1) + timedelta(days=int(rng.integers((p.start_date - date(2005, 1, 1)).days)))
            published = int(rng.integers(1950, added.year + 1))

        def maybe(value):
            return None if rng.random() < p.missing_share else value

        return Item(
            item_id=f"I{idx:05d}",
            title=f"Title {idx}",
            main_author=author,
            genres=genres,
            subjects=subjects,
            age_category=maybe(_pick(rng, AGE_CATEGORIES, AGE_SHARES)),
            medium_type=maybe(_pick(rng, MEDIUM_TYPES, MEDIUM_SHARES)),
            fiction=maybe(bool(rng.random() < FICTION_SHARE)),
            added_date=added,
            first_published_year=published,
        )

    def catalog(self) -> Tuple[List[Item], List[int]]:
        """Items in id order and the cluster of each item"""
        rng = rng_for(self.params.seed, "synth", "items")
        items, clusters = [], []
        for idx in range(self.params.n_items):
            cluster = idx % self.params.n_clusters
            items.append(self._item(idx, cluster, rng))
            clusters.append(cluster)
        return items, clusters

    @staticmethod
    def _attribute_arrays(items: List[Item]) -> Dict[str, np.ndarray]:
        return {
            "age_category": np.array([i.age_category for i in items], dtype=object),
            "medium_type": np.array([i.medium_type for i in items], dtype=object),
            "fiction": np.array([i.fiction for i in items], dtype=object),
        }

    def _taste_weights(self, items: List[Item], attrs, members: np.ndarray, popularity: np.ndarray, taste) -> np.ndarray:
        genre, age, medium, fiction = taste
        in_genre = np.array([genre in items[idx].genres for idx in members])
        weights = (
            popularity[members]
            * np.where(in_genre, GENRE_BOOST, 1.0)
            * np.where(attrs["age_category"][members] == age, AGE_BOOST, 1.0)
            * np.where(attrs["medium_type"][members] == medium, MEDIUM_BOOST, 1.0)
            * np.where(attrs["fiction"][members] == fiction, FICTION_BOOST, 1.0)
        )
        return weights / weights.sum()

    def _timestamp(self, rng: np.random.Generator, year: int, not_before: date) -> datetime:
        start = max(date(year, 1, 1), self.params.start_date, not_before)
        end = min(date(year, 12, 31), self.params.end_date)
        if start > end:
            start = max(not_before, self.params.start_date)
            end = self.params.end_date
        offset = int(rng.integers(((end - start).days + 1) * SECONDS_PER_DAY))
        return datetime.combine(start, datetime.min.time()) + timedelta(seconds=offset)

    def transactions(self, items: List[Item], clusters: List[int]) -> List[Transaction]:
        p = self.params
        cluster_arr = np.asarray(clusters)
        members = {c: np.flatnonzero(cluster_arr == c) for c in range(p.n_clusters)}
        outsiders = {c: np.flatnonzero(cluster_arr != c) for c in range(p.n_clusters)}
        popularity = 1.0 / np.sqrt(10.0 + rng_for(p.seed, "synth", "popularity").permutation(len(items)))
        years = list(range(p.start_date.year, p.end_date.year + 1))
        attrs = self._attribute_arrays(items)

        out: List[Transaction] = []
        for u in range(p.n_users):
            rng = rng_for(p.seed, "synth", "user", u)
            user_id = f"U{u:04d}"
            cluster = u % p.n_clusters
            taste = (
                _genre(cluster, int(rng.integers(p.genres_per_cluster))),
                _pick(rng, AGE_CATEGORIES, AGE_SHARES),
                _pick(rng, MEDIUM_TYPES, MEDIUM_SHARES),
                bool(rng.random() < FICTION_SHARE),
            )
            per_year = [int(rng.integers(p.min_loans_per_year, p.max_loans_per_year + 1)) for _ in years]
            total = sum(per_year)
            # floor keeps the in-cluster share at or above the purity
            n_out = 0 if not len(outsiders[cluster]) else int(math.floor(total * (1.0 - p.cluster_purity) + 1e-9))
            n_in = total - n_out

            pool = members[cluster]
            weights = self._taste_weights(items, attrs, pool, popularity, taste)
            chosen_in = rng.choice(pool, size=n_in, replace=n_in > len(pool), p=weights)
            chosen_out = rng.choice(outsiders[cluster], size=n_out, replace=n_out > len(outsiders[cluster]))
            chosen = rng.permutation(np.concatenate([chosen_in, chosen_out]).astype(int))

            slots = [year for year, count in zip(years, per_year) for _ in range(count)]
            for year, idx in zip(slots, chosen):
                item = items[int(idx)]
                out.append(
                    Transaction(
                        user_id=user_id,
                        item_id=item.item_id,
                        timestamp=self._timestamp(rng, year, item.added_date),
                    )
                )
        return out

    def generate(self) -> Dataset:
        items, clusters = self.catalog()
        transactions = self.transactions(items, clusters)
        logger.info("Generated %d items and %d transactions for %d users",
                    len(items), len(transactions), self.params.n_users)
        return Dataset({item.item_id: item for item in items}, transactions)


def generate_dataset(params: SynthParams) -> Dataset:
    return SyntheticLibrary(params).generate()


def user_clusters(params: SynthParams) -> Dict[str, int]:
    """Planted cluster of every generated user"""
    return {f"U{u:04d}": u % params.n_clusters for u in range(params.n_users)}


def item_clusters(params: SynthParams) -> Dict[str, int]:
    return {f"I{idx:05d}": idx % params.n_clusters for idx in range(params.n_items)}


def write_synthetic(params: SynthParams, out_dir: Path) -> List[Path]:
    return save_dataset(generate_dataset(params), out_dir)
