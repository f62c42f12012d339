import sys
import pathlib
import logging

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[3]))

import pytest

from carousel_recommender.src.catalog.dataset import Dataset
from carousel_recommender.src.models.errors import DataError, ProviderError
from carousel_recommender.src.models.schema import PredictionEntry, PredictionList
from carousel_recommender.src.providers import (
    CooccurrenceProvider,
    ImportedProvider,
    RandomProvider,
    build_provider,
    import_predictions,
    random_baseline,
    score_cooccurrence,
    top_k,
)
from carousel_recommender.tests.conftest import make_item, make_transactions


@pytest.fixture
def co_borrow_dataset():
    """B is co-borrowed with A by three users, C by one"""
    catalog = {k: make_item(k) for k in ["A", "B", "C", "D"]}
    transactions = (
        make_transactions("target", ["A"])
        + make_transactions("x1", ["A", "B"])
        + make_transactions("x2", ["A", "B"])
        + make_transactions("x3", ["A", "B", "C"])
        + make_transactions("x4", ["D"])
    )
    return Dataset(catalog, transactions)


def test_cooccurrence_ranks_by_co_borrows(co_borrow_dataset):
    preds = score_cooccurrence(co_borrow_dataset, "target", 10)
    assert preds.item_ids() == ["B", "C"]
    assert preds.entries[0].score > preds.entries[1].score


def test_cooccurrence_excludes_borrowed_and_unknown_users(co_borrow_dataset):
    provider = CooccurrenceProvider(co_borrow_dataset)
    assert "A" not in provider.predict("x1", 10).item_ids()
    with pytest.raises(DataError):
        provider.predict("stranger", 10)


def test_cooccurrence_ties_break_by_item_id():
    catalog = {k: make_item(k) for k in ["A", "Z", "M"]}
    ds = Dataset(catalog, make_transactions("u", ["A"]) + make_transactions("v", ["A", "Z", "M"]))
    assert score_cooccurrence(ds, "u", 5).item_ids() == ["M", "Z"]


def test_cooccurrence_user_with_everything_gets_nothing(co_borrow_dataset):
    ds = co_borrow_dataset.with_transactions(
        list(co_borrow_dataset.transactions) + make_transactions("all", ["A", "B", "C", "D"])
    )
    assert score_cooccurrence(ds, "all", 10).entries == []


def test_cooccurrence_never_crosses_disjoint_communities(toy_dataset):
    provider = CooccurrenceProvider(toy_dataset)
    for user in ["u1", "u2", "u3"]:
        assert all(i.startswith("A") for i in provider.predict(user, 20).item_ids())
    for user in ["u4", "u5"]:
        assert all(i.startswith("B") for i in provider.predict(user, 20).item_ids())


def test_random_baseline_scores(toy_catalog):
    preds = random_baseline(toy_catalog, "u1", 3, seed=1)
    assert [e.score for e in preds.entries] == [1.0, 0.999, 0.998]
    assert len(set(preds.item_ids())) == 3
    assert random_baseline(toy_catalog, "u1", 3, seed=1) == preds
    assert random_baseline(toy_catalog, "u1", 0, seed=1).entries == []


def test_random_baseline_rank_scores_are_exact(toy_catalog):
    preds = random_baseline(toy_catalog, "u1", len(toy_catalog), seed=4)
    for rank, entry in enumerate(preds.entries):
        assert entry.score == round(1 - 0.001 * rank, 10)


def test_random_baseline_rejects_oversized_request(toy_catalog):
    with pytest.raises(ProviderError):
        random_baseline(toy_catalog, "u1", len(toy_catalog) + 1, seed=0)


def test_random_provider_skips_borrowed(toy_dataset):
    provider = RandomProvider(toy_dataset.items, seed=2, train=toy_dataset)
    preds = provider.predict("u1", 9)
    assert not set(preds.item_ids()) & toy_dataset.borrowed("u1")


def test_random_provider_warns_when_unborrowed_pool_is_short(toy_dataset, caplog):
    provider = RandomProvider(toy_dataset.items, seed=2, train=toy_dataset)
    with caplog.at_level(logging.WARNING):
        preds = provider.predict("u1", len(toy_dataset.items))
    assert len(preds.entries) == len(toy_dataset.items) - 3
    assert "only 9 of 12 requested items" in caplog.text


def test_import_predictions(tmp_path, toy_dataset):
    path = tmp_path / "preds.csv"
    path.write_text(
        "user_id,item_id,score\n"
        "u1,A3,0.4\n"
        "u1,A3,0.9\n"
        "u1,A4,0.5\n"
        "u1,A0,0.99\n"
        "u1,ghost,0.3\n"
        "u2,B1,0.2\n"
        "u2,B2,abc\n"
    )
    predictions, report = import_predictions(path, toy_dataset)
    assert predictions["u1"].item_ids() == ["A3", "A4"]
    assert predictions["u1"].entries[0].score == 0.9
    assert predictions["u2"].item_ids() == ["B1"]
    assert report.dropped == 3


def test_import_predictions_drops_non_finite_scores(tmp_path, toy_dataset):
    path = tmp_path / "preds.csv"
    path.write_text("user_id,item_id,score\nu1,A3,0.5\nu1,A4,nan\nu1,B0,0.9\nu1,B1,inf\n")
    predictions, report = import_predictions(path, toy_dataset)
    assert predictions["u1"].item_ids() == ["B0", "A3"]
    assert report.dropped == 2
    assert all("non-finite score" in issue.reason for issue in report.issues)


def test_imported_provider_truncates_and_handles_missing_users(tmp_path, toy_dataset):
    path = tmp_path / "preds.csv"
    path.write_text("user_id,item_id,score\nu1,A3,0.9\nu1,A4,0.5\n")
    provider = ImportedProvider(path, toy_dataset)
    assert provider.predict("u1", 1).item_ids() == ["A3"]
    assert provider.predict("u4", 5).entries == []


def test_build_provider(tmp_path, toy_dataset):
    assert build_provider("cooccurrence", toy_dataset).name == "cooccurrence"
    assert build_provider("random", toy_dataset, seed=1).name == "random"
    with pytest.raises(ProviderError, match="valid providers"):
        build_provider("lightgcn", toy_dataset)
    with pytest.raises(ProviderError):
        build_provider("import:", toy_dataset)


def test_top_k():
    preds = PredictionList(user_id="u", entries=[PredictionEntry(item_id=str(k), score=1 - k / 10) for k in range(10)])
    assert top_k(preds, 5) == ["0", "1", "2", "3", "4"]
    assert top_k(preds, 0) == []
    assert len(top_k(preds, 50)) == 10
