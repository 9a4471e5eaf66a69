"""Deterministic random streams.

Every stochastic routine takes a ``seed`` that is either an int, a
``numpy.random.SeedSequence`` or an already constructed ``Generator``.
Monte Carlo replications derive their own stream from
``(master_seed, replication_id)`` so results never depend on execution order.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replication_seed(master_seed: int, replication_id: int, *scope: int) -> np.random.SeedSequence:
    """Seed sequence for one replication, independent of all others."""
    if replication_id < 0:
        raise ValueError("replication_id must be non-negative")
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(*scope, int(replication_id)))


def child_streams(seq: np.random.SeedSequence, names: tuple[str, ...]) -> dict[str, np.random.Generator]:
    """Named generators derived from ``seq``.

    Children are built from the spawn key directly rather than ``seq.spawn``
    so repeated calls on the same sequence return identical streams.
    """
    return {
        name: np.random.default_rng(
            np.random.SeedSequence(entropy=seq.entropy, spawn_key=(*seq.spawn_key, i))
        )
        for i, name in enumerate(names)
    }
