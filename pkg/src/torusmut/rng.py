"""Counter-based random substreams.

Every stream used by the simulator is a Philox (4x64) generator keyed by
(master_seed, replicate_index, mutation_type, purpose).  Philox is counter
based, so streams with distinct keys are independent and any replicate can
be regenerated in isolation, in any order, on any worker.  The generator
name is recorded in output metadata so runs can be reproduced later.
"""

import numpy as np

GENERATOR_NAME = "philox4x64"

PURPOSE_TIMES = 0
PURPOSE_LOCATIONS = 1
PURPOSE_VOLUME = 2

_MASK64 = (1 << 64) - 1

# Packing limits for the second key word: replicate < 2**48, type < 2**8,
# purpose < 2**8.
_REPLICATE_LIMIT = 1 << 48
_TYPE_LIMIT = 1 << 8
_PURPOSE_LIMIT = 1 << 8


def substream_key(master_seed, replicate, mtype, purpose):
    """Return the 128-bit Philox key for one logical stream as two uint64 words."""
    if replicate < 0 or replicate >= _REPLICATE_LIMIT:
        raise ValueError(f"replicate index {replicate} out of range [0, 2**48)")
    if mtype < 0 or mtype >= _TYPE_LIMIT:
        raise ValueError(f"mutation type {mtype} out of range [0, 256)")
    if purpose < 0 or purpose >= _PURPOSE_LIMIT:
        raise ValueError(f"purpose tag {purpose} out of range [0, 256)")
    word0 = int(master_seed) & _MASK64
    word1 = (replicate << 16) | (mtype << 8) | purpose
    return np.array([word0, word1], dtype=np.uint64)


def substream(master_seed, replicate, mtype, purpose):
    """Generator for the (replicate, type, purpose) stream under a master seed."""
    key = substream_key(master_seed, replicate, mtype, purpose)
    return np.random.Generator(np.random.Philox(key=key))
