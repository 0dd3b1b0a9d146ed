"""Seeded random streams.

Every stochastic routine draws from numpy's PCG64 bit generator seeded by a
``SeedSequence`` whose spawn key is ``(crc32(purpose), *indices)``.  The
master seed therefore fixes every stream, and independent purposes (GBM
controls, bootstrap trials, shuffles) never share state.  Trial ``i`` of a
bootstrap always sees the same substream whether trials run serially or in
parallel.
"""
import zlib

import numpy as np


def purpose_code(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """Return the generator for ``purpose`` (and optional sub-indices) under ``seed``."""
    key = (purpose_code(purpose),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))
