import sys
import pathlib
from datetime import date

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[3]))

import numpy as np
import pytest

from carousel_recommender.src.carousel.constraints import matches_constraint
from carousel_recommender.src.carousel.strategies import (
    STRATEGIES,
    fill_combined,
    fill_diversity,
    fill_novelty,
    fill_original,
    fill_serendipity,
    get_strategy,
)
from carousel_recommender.src.catalog.dataset import Dataset
from carousel_recommender.src.models.errors import ConfigError
from carousel_recommender.src.models.schema import CarouselSpec, Item, PredictionEntry, PredictionList, StrategyParams
from carousel_recommender.src.similarity.bis import bis
from carousel_recommender.tests.conftest import make_item, make_transactions

GENRE = CarouselSpec(kind="genre", constraint="g", provenance="from_predictions")
CUTOFF = date(2023, 1, 1)


def preds_for(user, item_ids):
    return PredictionList(
        user_id=user,
        entries=[PredictionEntry(item_id=i, score=1.0 - k / 1000) for k, i in enumerate(item_ids)],
    )


def varied_item(rng, item_id, **fields):
    values = dict(
        main_author=f"author {rng.integers(5)}",
        genres={"g"} | ({"h"} if rng.random() < 0.5 else set()),
        subjects={f"s{rng.integers(4)}"},
        age_category=["adult", "children", "young_adult"][rng.integers(3)],
        medium_type=["book", "ebook"][rng.integers(2)],
        fiction=bool(rng.integers(2)),
        added_date=date(2015, 1, 1),
        first_published_year=2010,
    )
    values.update(fields)
    return Item(item_id=item_id, **values)


@pytest.fixture
def library():
    """Sixty matching items, twenty of them new, and a reader with a long history"""
    rng = np.random.default_rng(11)
    items = [varied_item(rng, f"C{k:02d}") for k in range(40)]
    items += [varied_item(rng, f"N{k:02d}", added_date=date(2023, 1 + k % 12, 1),
                          first_published_year=2023 if k % 2 else 2001) for k in range(20)]
    items += [make_item(f"H{k:02d}", genres={"other"}) for k in range(10)]
    catalog = {i.item_id: i for i in items}
    ds = Dataset(catalog, make_transactions("reader", [f"H{k:02d}" for k in range(10)] + ["C00"]))
    preds = preds_for("reader", [f"C{k:02d}" for k in range(1, 31)])
    return ds, preds


def check_invariants(carousel, ds, user, size):
    assert len(carousel.items) <= size
    assert len(set(carousel.items)) == len(carousel.items)
    assert not set(carousel.items) & ds.borrowed(user)
    assert all(matches_constraint(ds.items[i], carousel.spec) for i in carousel.items)


@pytest.mark.parametrize("name", sorted(STRATEGIES))
def test_every_strategy_respects_carousel_invariants(library, name):
    ds, preds = library
    params = StrategyParams(carousel_size=15, novelty_cutoff_date=CUTOFF, seed=3)
    carousel = get_strategy(name)(GENRE, "reader", preds, ds, params)
    check_invariants(carousel, ds, "reader", 15)
    assert len(carousel.items) == 15
    assert carousel == get_strategy(name)(GENRE, "reader", preds, ds, params)


def test_original_uses_predictions_first(library):
    ds, preds = library
    carousel = fill_original(GENRE, "reader", preds, ds, StrategyParams(seed=1))
    assert carousel.items == [f"C{k:02d}" for k in range(1, 16)]
    assert set(carousel.sources) == {"predicted"}


def test_original_tops_up_when_predictions_run_out(library):
    ds, _ = library
    carousel = fill_original(GENRE, "reader", preds_for("reader", ["C05", "H00", "C06"]), ds, StrategyParams(seed=1))
    assert carousel.items[:2] == ["C05", "C06"]
    assert carousel.sources[2:] == ["topup"] * 13


def test_original_short_when_few_items_match(library):
    ds, preds = library
    narrow = CarouselSpec(kind="genre", constraint="other", provenance="from_history")
    assert fill_original(narrow, "reader", preds, ds, StrategyParams()).items == []


def test_diversity_keeps_predicted_head(library):
    ds, preds = library
    carousel = fill_diversity(GENRE, "reader", preds, ds, StrategyParams(seed=2))
    assert carousel.items[:10] == [f"C{k:02d}" for k in range(1, 11)]
    assert carousel.sources[10:] == ["diversity"] * 5


def oracle_greedy(ds, head, pool, slots):
    chosen = list(head)
    remaining = sorted(pool)
    for _ in range(slots):
        if not remaining:
            break
        if chosen:
            def score(c):
                return round(sum(bis(ds.items[c], ds.items[x]) for x in chosen) / len(chosen), 12)
        else:
            def score(c):
                return 0.0
        best = min(remaining, key=lambda c: (score(c), c))
        chosen.append(best)
        remaining.remove(best)
    return chosen


def test_diversity_replays_stepwise_argmin():
    rng = np.random.default_rng(2024)
    for instance in range(100):
        n_pool = int(rng.integers(1, 9))
        take = int(rng.integers(0, 3))
        slots = int(rng.integers(1, 5))
        items = [varied_item(rng, f"i{k}") for k in range(n_pool + take)]
        items.append(make_item("seen", genres={"g"}))
        ds = Dataset({i.item_id: i for i in items}, make_transactions("u", ["seen"]))
        order = [f"i{k}" for k in rng.permutation(n_pool + take)]
        head = order[:take]
        params = StrategyParams(carousel_size=take + slots, predicted_take=take, candidate_pool_size=8, seed=instance)
        carousel = fill_diversity(GENRE, "u", preds_for("u", order), ds, params)

        pool = [i for i in sorted(ds.items) if i not in head and i != "seen"]
        assert carousel.items == oracle_greedy(ds, head, pool, slots), f"instance {instance}"


def test_serendipity_prefers_items_unlike_history():
    history = [make_item(f"h{k}", genres={"g"}, main_author="same", subjects={"s"}) for k in range(3)]
    alike = make_item("alike", genres={"g"}, main_author="same", subjects={"s"})
    unlike = make_item("unlike", genres={"g", "x"}, main_author="other", subjects={"t"}, age_category="children",
                       medium_type="ebook", fiction=False)
    ds = Dataset({i.item_id: i for i in history + [alike, unlike]}, make_transactions("u", ["h0", "h1", "h2"]))
    params = StrategyParams(carousel_size=1, predicted_take=0, candidate_pool_size=5)
    carousel = fill_serendipity(GENRE, "u", PredictionList(user_id="u"), ds, params)
    assert carousel.items == ["unlike"]
    assert carousel.sources == ["serendipity"]


def test_serendipity_without_history_falls_back_to_diversity(library):
    ds, preds = library
    carousel = fill_serendipity(GENRE, "newcomer", PredictionList(user_id="newcomer"), ds, StrategyParams(seed=4))
    assert set(carousel.sources) == {"diversity"}
    assert len(carousel.items) == 15


def test_novelty_ranks_recent_publications_first(library):
    ds, preds = library
    carousel = fill_novelty(GENRE, "reader", preds, ds, StrategyParams(novelty_cutoff_date=CUTOFF))
    tail = carousel.items[10:]
    assert carousel.sources[10:] == ["novelty"] * 5
    assert all(ds.items[i].first_published_year == 2023 for i in tail)
    added = [ds.items[i].added_date for i in tail]
    assert added == sorted(added, reverse=True)


def test_novelty_stops_when_nothing_is_new(library):
    ds, preds = library
    carousel = fill_novelty(GENRE, "reader", preds, ds, StrategyParams(novelty_cutoff_date=date(2030, 1, 1)))
    assert len(carousel.items) == 10


def test_combined_structure_with_rich_sources(library):
    ds, preds = library
    carousel = fill_combined(GENRE, "reader", preds, ds, StrategyParams(novelty_cutoff_date=CUTOFF, seed=5))
    assert carousel.sources[:9] == ["predicted"] * 9
    assert carousel.sources[9:] == ["novelty", "serendipity", "diversity"] * 2


def test_combined_skips_exhausted_sources(library):
    ds, preds = library
    params = StrategyParams(novelty_cutoff_date=date(2030, 1, 1), seed=5)
    carousel = fill_combined(GENRE, "reader", preds, ds, params)
    assert carousel.sources[9:] == ["serendipity", "diversity"] * 3
    check_invariants(carousel, ds, "reader", 15)


def test_get_strategy_rejects_unknown_name():
    with pytest.raises(ConfigError, match="valid strategies"):
        get_strategy("popular")
