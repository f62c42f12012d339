import sys
import pathlib
import itertools

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[3]))

import numpy as np
import pytest

from carousel_recommender.src.models.errors import DataError
from carousel_recommender.src.models.schema import BisWeights, Item
from carousel_recommender.src.similarity.bis import (
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
from carousel_recommender.tests.conftest import make_item

GENRES = ["fantasy", "sf", "crime", "romance", "horror"]
SUBJECTS = ["dragons", "space", "police", "love", "ghosts", "ships"]


def random_item(rng, item_id, complete=False):
    def maybe(value):
        return value if complete or rng.random() > 0.2 else None

    return Item(
        item_id=item_id,
        main_author=maybe(f"author {rng.integers(4)}"),
        genres=set(rng.choice(GENRES, size=rng.integers(0 if not complete else 1, 3), replace=False)),
        subjects=set(rng.choice(SUBJECTS, size=rng.integers(0 if not complete else 1, 3), replace=False)),
        age_category=maybe(["adult", "children"][rng.integers(2)]),
        medium_type=maybe(["book", "ebook"][rng.integers(2)]),
        fiction=maybe(bool(rng.integers(2))),
    )


def brute_internal(items, w):
    return sum(bis(a, b, w) for a in items for b in items) / len(items) ** 2


def test_jaccard():
    assert jaccard({"a", "b"}, {"b", "c"}) == pytest.approx(1 / 3)
    assert jaccard(set(), set()) == 0.0
    assert jaccard({"a"}, {"a"}) == 1.0


def test_hand_computed_case():
    i = make_item("i", main_author="x", genres={"fantasy", "sf"}, subjects={"s1"}, age_category="adult",
                  medium_type="book", fiction=True)
    j = make_item("j", main_author="x", genres={"fantasy"}, subjects={"s2"}, age_category="adult",
                  medium_type="ebook", fiction=True)
    # (1*1 + 2*0.5 + 1*0 + 2*1 + 1*0 + 1*1) / 8
    assert bis(i, j) == 0.625


def test_missing_attributes_contribute_nothing():
    i = Item(item_id="i")
    assert bis(i, i) == 0.0
    assert bis(i, make_item("j")) == 0.0


def test_bis_properties_on_random_pairs():
    rng = np.random.default_rng(1234)
    scaled = BisWeights(author=3, genre=1, subject=2, age_category=1, medium_type=2, fiction=1)
    for n in range(1000):
        i, j = random_item(rng, f"i{n}"), random_item(rng, f"j{n}")
        value = bis(i, j)
        assert value == bis(j, i)
        assert 0.0 <= value <= 1.0
        assert bis(i, j, scaled) == pytest.approx(bis(i, j, scaled.scaled(2.5)), abs=1e-12)
        complete = random_item(rng, f"c{n}", complete=True)
        assert bis(complete, complete) == pytest.approx(1.0, abs=1e-12)


def test_pairwise_matrix_matches_scalar():
    rng = np.random.default_rng(5)
    left = [random_item(rng, f"l{k}") for k in range(7)]
    right = [random_item(rng, f"r{k}") for k in range(4)]
    matrix = pairwise_bis(left, right)
    assert matrix.shape == (7, 4)
    for a, b in itertools.product(range(7), range(4)):
        assert matrix[a, b] == pytest.approx(bis(left[a], right[b]), abs=1e-12)


def test_aggregates():
    i = make_item("i", genres={"fantasy"})
    same = make_item("s", genres={"fantasy"})
    other = make_item("o", main_author="z", genres={"crime"}, subjects={"police"}, age_category="children",
                      medium_type="ebook", fiction=False)
    assert max_bis(i, [same, other]) == 1.0
    assert avg_bis(i, [same, other]) == pytest.approx(0.5)
    assert avg_set_bis([i, same], [other]) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        avg_bis(i, [])


def test_internal_similarity_matches_double_loop():
    rng = np.random.default_rng(99)
    w = BisWeights()
    for n in range(200):
        items = [random_item(rng, f"{n}-{k}") for k in range(int(rng.integers(1, 11)))]
        assert abs(internal_similarity(items, w) - brute_internal(items, w)) <= 1e-12


def test_internal_similarity_singleton_and_variant():
    assert internal_similarity([make_item("a")]) == 1.0
    assert internal_similarity([make_item("a")], exclude_diagonal=True) == 1.0
    a = make_item("a")
    b = make_item("b", main_author="z", genres={"crime"}, subjects={"police"}, age_category="children",
                  medium_type="ebook", fiction=False)
    assert internal_similarity([a, b]) == pytest.approx(0.5)
    assert internal_similarity([a, b], exclude_diagonal=True) == pytest.approx(0.0)


def test_bis_at_k_and_abis():
    truth = [make_item("t", genres={"fantasy"})]
    hit = make_item("h", genres={"fantasy"})
    miss = make_item("m", main_author="z", genres={"crime"}, subjects={"police"}, age_category="children",
                     medium_type="ebook", fiction=False)
    assert bis_at_k(truth, [hit, miss]) == pytest.approx(0.5)
    score = abis({"u1": truth, "u2": truth}, {"u1": [hit, miss], "u2": [hit, hit]}, k=2)
    assert score == pytest.approx(0.75)


def test_abis_requires_k_predictions_and_ground_truth():
    truth = [make_item("t")]
    with pytest.raises(DataError, match="fewer than 3 predictions"):
        abis({"u1": truth}, {"u1": [make_item("p")]}, k=3)
    with pytest.raises(DataError, match="no ground truth"):
        abis({"u1": []}, {"u1": [make_item("p")]}, k=1)
