"""In-memory dataset: catalog, checkout history, per-user index and the views built on them"""
import logging
from collections import defaultdict
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Set, Tuple

import numpy as np

from ..models.errors import DataError, InsufficientDataError
from ..models.schema import Item, Transaction

logger = logging.getLogger(__name__)


class Dataset:
    """Immutable catalog plus transactions ordered by (user_id, timestamp, item_id)"""

    def __init__(self, items: Mapping[str, Item], transactions: Iterable[Transaction]):
        self._items: Dict[str, Item] = dict(items)
        self._transactions: Tuple[Transaction, ...] = tuple(sorted(transactions, key=Transaction.sort_key))

        index: Dict[str, List[Transaction]] = defaultdict(list)
        for tx in self._transactions:
            index[tx.user_id].append(tx)
        self._user_index: Dict[str, Tuple[Transaction, ...]] = {u: tuple(index[u]) for u in sorted(index)}

    @property
    def items(self) -> Mapping[str, Item]:
        return self._items

    @property
    def transactions(self) -> Tuple[Transaction, ...]:
        return self._transactions

    @property
    def user_index(self) -> Mapping[str, Tuple[Transaction, ...]]:
        return self._user_index

    def users(self) -> List[str]:
        return list(self._user_index)

    def has_user(self, user_id: str) -> bool:
        return user_id in self._user_index

    def history(self, user_id: str) -> Tuple[Transaction, ...]:
        """Oldest-first transactions of a user; empty for users without history"""
        return self._user_index.get(user_id, ())

    def borrowed(self, user_id: str) -> Set[str]:
        return {tx.item_id for tx in self.history(user_id)}

    @cached_property
    def item_ids(self) -> List[str]:
        return sorted(self._items)

    @cached_property
    def items_by_genre(self) -> Dict[str, Set[str]]:
        return self._invert("genres")

    @cached_property
    def items_by_subject(self) -> Dict[str, Set[str]]:
        return self._invert("subjects")

    @cached_property
    def items_by_author(self) -> Dict[str, Set[str]]:
        index: Dict[str, Set[str]] = defaultdict(set)
        for item in self._items.values():
            if item.main_author is not None:
                index[item.main_author].add(item.item_id)
        return dict(index)

    def _invert(self, field: str) -> Dict[str, Set[str]]:
        index: Dict[str, Set[str]] = defaultdict(set)
        for item in self._items.values():
            for code in getattr(item, field):
                index[code].add(item.item_id)
        return dict(index)

    def with_transactions(self, transactions: Iterable[Transaction]) -> "Dataset":
        return Dataset(self._items, transactions)

    def stats(self) -> Dict[str, object]:
        years = sorted({tx.timestamp.year for tx in self._transactions})
        return {
            "users": len(self._user_index),
            "items": len(self._items),
            "transactions": len(self._transactions),
            "first_year": years[0] if years else None,
            "last_year": years[-1] if years else None,
        }

    def __repr__(self) -> str:
        return f"Dataset(users={len(self._user_index)}, items={len(self._items)}, transactions={len(self._transactions)})"


def annual_loan_rate(history: Iterable[Transaction]) -> float:
    """Loans divided by the number of distinct calendar years with at least one loan"""
    history = list(history)
    if not history:
        return 0.0
    years = {tx.timestamp.year for tx in history}
    return len(history) / len(years)


def filter_users_by_annual_loans(ds: Dataset, min_loans: float = 10, max_loans: float = 50) -> Dataset:
    """Keep users whose annual loan rate lies in [min_loans, max_loans]"""
    if min_loans > max_loans:
        raise ValueError(f"min annual loans {min_loans} exceeds max {max_loans}")

    kept: List[Transaction] = []
    removed = 0
    for user_id, history in ds.user_index.items():
        if min_loans <= annual_loan_rate(history) <= max_loans:
            kept.extend(history)
        else:
            removed += 1

    logger.info("Annual-loan filter [%s, %s] removed %d of %d users", min_loans, max_loans, removed, len(ds.user_index))
    return ds.with_transactions(kept)


def split_train_test(
    ds: Dataset, n_test_users: int, per_user_holdout: int, seed: int
) -> Tuple[Dataset, Dict[str, Set[str]]]:
    """Hold out the most recent transactions of seeded-randomly chosen users"""
    if n_test_users == 0:
        return ds, {}

    eligible = [u for u, history in ds.user_index.items() if len(history) > per_user_holdout]
    if len(eligible) < n_test_users:
        raise InsufficientDataError(
            f"need {n_test_users} users with more than {per_user_holdout} transactions, found {len(eligible)}"
        )

    rng = np.random.default_rng(seed)
    chosen = sorted(eligible[i] for i in rng.choice(len(eligible), size=n_test_users, replace=False))

    held_out: Set[Tuple[str, int]] = set()
    test: Dict[str, Set[str]] = {}
    for user_id in chosen:
        history = ds.user_index[user_id]
        tail = history[-per_user_holdout:]
        test[user_id] = {tx.item_id for tx in tail}
        held_out.update((user_id, len(history) - per_user_holdout + i) for i in range(per_user_holdout))

    train = [
        tx
        for user_id, history in ds.user_index.items()
        for position, tx in enumerate(history)
        if (user_id, position) not in held_out
    ]
    logger.info("Split %d test users, %d held-out transactions", len(test), len(held_out))
    return ds.with_transactions(train), test


def recent_transactions(ds: Dataset, user: str, n: int) -> List[str]:
    """The user's n most recent transaction items, most recent first, re-borrows kept"""
    if not ds.has_user(user):
        raise DataError(f"unknown user {user!r}")
    history = ds.history(user)
    return [tx.item_id for tx in reversed(history[-n:])] if n > 0 else []


def recent_global_transactions(ds: Dataset, n: int) -> List[str]:
    """Item ids of the n most recent transactions across all users, most recent first"""
    ordered = sorted(ds.transactions, key=lambda tx: (tx.timestamp, tx.user_id, tx.item_id), reverse=True)
    return [tx.item_id for tx in ordered[:n]]
