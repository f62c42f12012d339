import sys
import pathlib
from collections import Counter

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[3]))

import pytest
from pydantic import ValidationError

from carousel_recommender.src.utils.file_io import load_dataset
from carousel_recommender.src.utils.synth import (
    SynthParams,
    generate_dataset,
    item_clusters,
    user_clusters,
    write_synthetic,
)

SMALL = SynthParams(n_users=40, n_items=400, seed=5)


@pytest.fixture(scope="module")
def small_library():
    return generate_dataset(SMALL)


def test_generation_is_deterministic(small_library):
    again = generate_dataset(SMALL)
    assert again.transactions == small_library.transactions
    assert dict(again.items) == dict(small_library.items)


def test_seed_changes_the_library(small_library):
    other = generate_dataset(SMALL.model_copy(update={"seed": 6}))
    assert other.transactions != small_library.transactions


def test_every_user_meets_cluster_purity(small_library):
    users, items = user_clusters(SMALL), item_clusters(SMALL)
    assert set(small_library.users()) == set(users)
    for user, history in small_library.user_index.items():
        inside = sum(1 for tx in history if items[tx.item_id] == users[user])
        assert inside / len(history) >= SMALL.cluster_purity


def test_loans_respect_added_dates_and_period(small_library):
    for tx in small_library.transactions:
        item = small_library.items[tx.item_id]
        assert tx.timestamp.date() >= item.added_date
        assert SMALL.start_date <= tx.timestamp.date() <= SMALL.end_date


def test_clusters_have_disjoint_genres(small_library):
    clusters = item_clusters(SMALL)
    by_cluster = {c: set() for c in range(SMALL.n_clusters)}
    for item_id, item in small_library.items.items():
        by_cluster[clusters[item_id]] |= item.genres
    assert not by_cluster[0] & by_cluster[1]


def test_recent_items_are_added_in_the_final_year(small_library):
    recent = [i for i in small_library.items.values() if i.added_date.year == SMALL.end_date.year]
    assert 0.1 < len(recent) / len(small_library.items) < 0.3


def test_loan_counts_per_user_are_bounded(small_library):
    years = SMALL.end_date.year - SMALL.start_date.year + 1
    counts = Counter(tx.user_id for tx in small_library.transactions)
    assert min(counts.values()) >= SMALL.min_loans_per_year * years
    assert max(counts.values()) <= SMALL.max_loans_per_year * years


def test_written_library_loads_without_dropped_rows(tmp_path, small_library):
    paths = write_synthetic(SMALL, tmp_path / "synth")
    assert [p.name for p in paths] == ["items.csv", "transactions.csv"]
    loaded = load_dataset(tmp_path / "synth")
    assert len(loaded.items) == SMALL.n_items
    assert loaded.transactions == small_library.transactions


@pytest.mark.parametrize(
    "update",
    [
        {"min_loans_per_year": 50, "max_loans_per_year": 10},
        {"n_items": 1, "n_clusters": 2},
        {"cluster_purity": 1.5},
    ],
)
def test_invalid_parameters_are_rejected(update):
    with pytest.raises(ValidationError):
        SynthParams(**{**SMALL.model_dump(), **update})
