"""
Seed derivation

Every random stream of a run is derived from the single run seed with a
counter-based rule, so one number reproduces everything:

    SeedSequence(seed, spawn_key=(stream, *counters))

Stream ids are fixed; new streams get new ids, existing ids never move.
"""
from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    INIT = 0
    KNOWLEDGE_SHUFFLE = 1    # counters: epoch, language index, pass
    ALIGNMENT_SHUFFLE = 2    # counters: epoch, pass
    RERANDOMIZE = 3          # counters: language index (alignment pass: number of languages)
    MONOLINGUAL_SPLIT = 4    # counters: language index
    TWA_HOLDOUT = 5          # counters: pair index
    NEGATIVES = 6
    CROSS_VALIDATION = 7     # counters: attempt


def derive_rng(seed: int, stream: Stream, *counters: int) -> np.random.Generator:
    """Independent generator for (seed, stream, counters)"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(stream),) + tuple(int(c) for c in counters))
    return np.random.Generator(np.random.PCG64(sequence))
