import sys
import pathlib
from datetime import date, datetime, timedelta

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[2]))

import pytest

from carousel_recommender.src.catalog.dataset import Dataset
from carousel_recommender.src.models.schema import Item, Transaction


def make_item(item_id, **fields):
    """Complete item with neutral defaults; override any attribute by keyword"""
    values = {
        "main_author": "author a",
        "genres": {"fantasy"},
        "subjects": {"dragons"},
        "age_category": "adult",
        "medium_type": "book",
        "fiction": True,
        "added_date": date(2015, 1, 1),
        "first_published_year": 2014,
    }
    values.update(fields)
    return Item(item_id=item_id, **values)


def make_transactions(user_id, item_ids, start=datetime(2022, 1, 1), step=timedelta(days=1)):
    return [
        Transaction(user_id=user_id, item_id=item_id, timestamp=start + i * step)
        for i, item_id in enumerate(item_ids)
    ]


@pytest.fixture
def item_factory():
    return make_item


@pytest.fixture
def toy_catalog():
    """Two genre communities of five items each, plus two recently added items"""
    items = [make_item(f"A{i}", genres={"fantasy", "adventure"} if i % 2 else {"fantasy"},
                       subjects={"dragons"}, main_author=f"author {i % 2}") for i in range(5)]
    items += [make_item(f"B{i}", genres={"crime", "thriller"} if i % 2 else {"crime"},
                        subjects={"detectives"}, main_author=f"author {2 + i % 2}",
                        age_category="young_adult", fiction=False) for i in range(5)]
    items += [
        make_item("N0", genres={"fantasy"}, added_date=date(2023, 6, 1), first_published_year=2023),
        make_item("N1", genres={"crime"}, added_date=date(2023, 3, 1), first_published_year=2019),
    ]
    return {item.item_id: item for item in items}


@pytest.fixture
def toy_dataset(toy_catalog):
    """Five users: u1-u3 read fantasy, u4-u5 read crime"""
    transactions = (
        make_transactions("u1", ["A0", "A1", "A2"])
        + make_transactions("u2", ["A0", "A1", "A3"])
        + make_transactions("u3", ["A0", "A1", "A4"])
        + make_transactions("u4", ["B0", "B1", "B2"])
        + make_transactions("u5", ["B0", "B3", "B4"])
    )
    return Dataset(toy_catalog, transactions)
