"""Seeded random streams derived from stable string keys"""
import hashlib

import numpy as np


def derive_seed(seed: int, *parts: object) -> int:
    """64-bit seed from a base seed and context parts; independent of call order"""
    key = ":".join([str(seed)] + [str(p) for p in parts]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def rng_for(seed: int, *parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *parts))
