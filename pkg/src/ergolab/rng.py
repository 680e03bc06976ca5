"""Reproducible random streams.

Every stream is a Philox4x64 generator (counter based, so independent
streams are cheap) keyed by a master seed plus a tuple of integer or string
keys, typically ``(experiment_id, replica)``.
"""
import zlib

import numpy as np

GENERATOR_NAME = "philox4x64"


def _key(k):
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    return int(k)


def make_rng(seed, *keys):
    """Return a ``numpy.random.Generator`` for ``seed`` and the stream keys."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
