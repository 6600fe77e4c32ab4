"""Independent random sub-streams derived from one 64-bit master seed."""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive(seed: int, *labels) -> int:
    """Hash ``seed`` and a label path into a new 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed) & MASK64).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "little")


def generator(seed: int, *labels) -> np.random.Generator:
    s = derive(seed, *labels) if labels else int(seed) & MASK64
    return np.random.Generator(np.random.PCG64(s))
