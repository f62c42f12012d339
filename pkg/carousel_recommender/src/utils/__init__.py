from .file_io import load_dataset, load_items, load_transactions, save_dataset
from .manifest import file_digest, finish_manifest, start_manifest
from .seeding import derive_seed, rng_for

__all__ = [
    "derive_seed",
    "file_digest",
    "finish_manifest",
    "load_dataset",
    "load_items",
    "load_transactions",
    "rng_for",
    "save_dataset",
    "start_manifest",
]
