from .dataset import (
    Dataset,
    annual_loan_rate,
    filter_users_by_annual_loans,
    recent_global_transactions,
    recent_transactions,
    split_train_test,
)

__all__ = [
    "Dataset",
    "annual_loan_rate",
    "filter_users_by_annual_loans",
    "recent_global_transactions",
    "recent_transactions",
    "split_train_test",
]
