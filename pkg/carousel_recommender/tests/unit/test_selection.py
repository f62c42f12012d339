import sys
import pathlib
from collections import Counter
from datetime import date

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[3]))

import pytest

from carousel_recommender.src.carousel.constraints import matches_constraint, matching_items
from carousel_recommender.src.carousel.selection import (
    event_specs,
    most_frequent,
    select_carousels_cold_start,
    select_carousels_with_history,
)
from carousel_recommender.src.catalog.dataset import Dataset
from carousel_recommender.src.models.errors import DataError, InsufficientDataError
from carousel_recommender.src.models.schema import CarouselSpec, EventWindow, PredictionEntry, PredictionList
from carousel_recommender.tests.conftest import make_item, make_transactions


def preds_for(user, item_ids):
    return PredictionList(
        user_id=user,
        entries=[PredictionEntry(item_id=i, score=1.0 - k / 100) for k, i in enumerate(item_ids)],
    )


def test_most_frequent_ties_are_lexicographic():
    counts = Counter({"b": 2, "a": 2, "c": 3, "d": 1})
    assert most_frequent(counts, 3) == ["c", "a", "b"]
    assert most_frequent(counts, 3, exclude={"c"}) == ["a", "b", "d"]


def test_constraints(toy_dataset):
    combo = CarouselSpec(kind="genre_combination", constraint={"fantasy", "adventure"}, provenance="global")
    assert matching_items(combo, toy_dataset) == ["A1", "A3"]
    author = CarouselSpec(kind="author", constraint="author 3", provenance="global")
    assert matching_items(author, toy_dataset) == ["B1", "B3"]
    assert not matches_constraint(make_item("x", main_author=None), author)


def test_cyclic_event_constraint_fields(toy_dataset):
    by_subject = EventWindow(start_date="01-01", end_date="12-31", tag="dragons", match_field="subjects").to_spec()
    assert matching_items(by_subject, toy_dataset) == ["A0", "A1", "A2", "A3", "A4", "N0", "N1"]
    any_field = CarouselSpec(kind="cyclic_event", constraint="crime", provenance="global")
    assert matching_items(any_field, toy_dataset) == ["B0", "B1", "B2", "B3", "B4", "N1"]
    assert all(matches_constraint(toy_dataset.items[i], any_field) for i in matching_items(any_field, toy_dataset))


@pytest.fixture
def rich_dataset():
    """One user whose predictions and history emphasise different attributes"""
    catalog = {}
    for k in range(6):
        catalog[f"P{k}"] = make_item(f"P{k}", main_author=f"pa{k % 3}", genres={"sf", "space opera"} if k % 2 else {"sf"},
                                     subjects={f"ps{k % 4}"})
        catalog[f"H{k}"] = make_item(f"H{k}", main_author=f"ha{k % 2}", genres={"crime", "noir"} if k % 2 else {"sf", "crime"},
                                     subjects={f"hs{k % 2}"})
    return Dataset(catalog, make_transactions("u", [f"H{k}" for k in range(6)]))


def test_with_history_selection(rich_dataset):
    specs = select_carousels_with_history("u", preds_for("u", [f"P{k}" for k in range(6)]), rich_dataset)
    keys = [s.key() for s in specs]
    # predictions: top five P0..P4; history: five most recent H5..H1
    assert keys[:3] == ["genre:sf", "genre:space opera", "genre_combination:sf+space opera"]
    assert specs[0].provenance == "from_predictions"
    assert [k for k, s in zip(keys, specs) if s.provenance == "from_history" and s.kind == "genre"] == [
        "genre:crime", "genre:noir",
    ]
    # sf was already chosen from predictions, so history cannot pick it again
    assert keys.count("genre:sf") == 1
    assert len(keys) == len(set(keys))
    assert [s.kind for s in specs][-1] == "author"


def test_with_history_selection_errors(rich_dataset):
    with pytest.raises(InsufficientDataError):
        select_carousels_with_history("u", PredictionList(user_id="u"), rich_dataset)
    with pytest.raises(DataError):
        select_carousels_with_history("ghost", preds_for("ghost", ["P0"]), rich_dataset)


def test_cold_start_selection_is_global(toy_dataset):
    all_preds = {"u1": preds_for("u1", ["A3", "A4"]), "u4": preds_for("u4", ["B3"])}
    specs = select_carousels_cold_start(toy_dataset, all_preds)
    assert specs
    assert {s.provenance for s in specs} == {"global"}
    assert "genre" not in {s.kind for s in specs}


def test_cold_start_needs_predictions(toy_dataset):
    with pytest.raises(InsufficientDataError):
        select_carousels_cold_start(toy_dataset, {"u1": PredictionList(user_id="u1")})


def test_event_specs_picks_first_matching_window():
    windows = [
        EventWindow(start_date="12-01", end_date="12-31", tag="christmas"),
        EventWindow(start_date="12-20", end_date="01-05", tag="winter"),
    ]
    assert [s.constraint for s in event_specs(windows, date(2023, 12, 24))] == ["christmas"]
    assert [s.constraint for s in event_specs(windows, date(2024, 1, 2))] == ["winter"]
    assert event_specs(windows, date(2024, 6, 1)) == []
    assert event_specs(windows, None) == []


def test_with_history_selection_appends_event(rich_dataset):
    window = EventWindow(start_date="01-01", end_date="12-31", tag="sf")
    specs = select_carousels_with_history("u", preds_for("u", ["P0"]), rich_dataset, [window], date(2023, 5, 1))
    assert specs[-1].kind == "cyclic_event"


@pytest.fixture
def distinct_dataset():
    """Five predicted and five borrowed items that share no genre, subject or author"""
    catalog = {}
    for prefix in ("P", "H"):
        for k in range(5):
            item_id = f"{prefix}{k}"
            catalog[item_id] = make_item(item_id, main_author=f"{prefix.lower()}a{k}",
                                         genres={f"{prefix.lower()}g{k}", f"{prefix.lower()}h{k}"},
                                         subjects={f"{prefix.lower()}s{k}"})
    return Dataset(catalog, make_transactions("u", [f"H{k}" for k in range(5)]))


def test_maximal_distinct_metadata_gives_every_carousel(distinct_dataset):
    specs = select_carousels_with_history("u", preds_for("u", [f"P{k}" for k in range(5)]), distinct_dataset)
    assert len(specs) == 22
    counts = Counter((s.provenance, s.kind) for s in specs)
    for provenance in ("from_predictions", "from_history"):
        assert counts[(provenance, "genre")] == 3
        assert counts[(provenance, "genre_combination")] == 2
        assert counts[(provenance, "subject")] == 3
        assert counts[(provenance, "author")] == 3


def test_single_genre_single_author_predictions():
    catalog = {f"P{k}": make_item(f"P{k}", genres={"fantasy"}, subjects={"dragons"}, main_author="one")
               for k in range(5)}
    catalog["H0"] = make_item("H0", genres={"crime"}, subjects={"detectives"}, main_author="two")
    ds = Dataset(catalog, make_transactions("u", ["H0"]))
    specs = select_carousels_with_history("u", preds_for("u", [f"P{k}" for k in range(5)]), ds)
    assert [s.key() for s in specs if s.provenance == "from_predictions"] == [
        "genre:fantasy", "subject:dragons", "author:one",
    ]


def test_cold_start_matches_history_on_identical_frequencies(distinct_dataset):
    with_history = select_carousels_with_history("u", preds_for("u", [f"P{k}" for k in range(5)]), distinct_dataset)
    pooled = {f"v{k}": preds_for(f"v{k}", [f"P{k}"]) for k in range(5)}
    cold = select_carousels_cold_start(distinct_dataset, pooled)

    def subject_and_author(specs):
        return [(s.kind, s.constraint) for s in specs if s.kind in ("subject", "author")]

    assert subject_and_author(cold) == subject_and_author(with_history)
    assert len(subject_and_author(cold)) == 12
