"""Counter-based random streams.

Every random quantity in a broadcast run is a pure function of
``(key, node, counter)``.  Node ``v`` therefore owns the stream
``hash(key, v, 0), hash(key, v, 1), ...`` and no result depends on the
order in which nodes are visited, which keeps serial and parallel
execution bit-identical.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SALT = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def derive_key(*words):
    """Collapse non-negative integers into a 64-bit stream key."""
    for w in words:
        if int(w) < 0:
            raise ValueError(f"seed words must be non-negative, got {w}")
    state = np.random.SeedSequence([int(w) for w in words]).generate_state(1, np.uint64)
    return int(state[0])


def trial_seed(master_seed, trial_index):
    """Seed of trial ``trial_index``; independent of how many trials run."""
    return derive_key(master_seed, trial_index)


def mix64(z):
    """splitmix64 finalizer, vectorised over uint64 arrays."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def node_keys(key, nodes):
    """Per-node stream keys derived from a master key."""
    nodes = np.asarray(nodes, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(key) ^ (nodes * _GOLDEN))


def keyed_bits(keys, counter):
    """Draw ``counter`` of the streams identified by ``keys``."""
    counter = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(keys ^ ((counter + np.uint64(1)) * _SALT))


def stream_bits(key, nodes, counter):
    """64 random bits from draw ``counter`` of each node's stream."""
    return keyed_bits(node_keys(key, nodes), counter)


def uniform_below(bits, bound):
    """Map 64-bit words to integers in ``[0, bound)`` by multiply-shift.

    ``bound`` must be below 2**32; the bias is at most ``bound / 2**32``.
    """
    hi = np.asarray(bits, dtype=np.uint64) >> np.uint64(32)
    return ((hi * np.uint64(bound)) >> np.uint64(32)).astype(np.int64)
