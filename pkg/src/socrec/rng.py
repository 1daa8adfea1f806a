"""Deterministic random-stream fanout.

All randomness in a run flows from one root seed. Each consumer asks for a
named stream; the name is hashed with crc32 (stable across platforms and
Python processes, unlike the builtin hash) so the same (seed, name) pair
always yields the same generator.
"""

import zlib

import numpy as np


def stream(root_seed: int, name: str) -> np.random.Generator:
    """Return the generator for the named substream of ``root_seed``."""
    tag = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=root_seed, spawn_key=(tag,)))
