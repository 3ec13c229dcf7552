"""Deterministic expansion of one root seed into per-component streams."""

import zlib

import numpy as np


def derive_seed(root: int, label: str) -> int:
    """64-bit seed for the component named ``label``; stable across processes."""
    ss = np.random.SeedSequence([int(root) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode())])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def component_rng(root: int, label: str, *index: int) -> np.random.Generator:
    """Generator for ``label`` (and optional trial index); independent of chunking."""
    key = [int(root) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode()), *map(int, index)]
    return np.random.default_rng(np.random.SeedSequence(key))
