"""Round-synchronous push broadcast on the complete graph.

Three variants share one engine:

* ``push-random``: every informed node pushes to a uniformly random
  neighbour each round.
* ``quasi``: a newly informed node picks a uniform start position on its
  cyclic list and then walks the list one entry per round.
* ``gate``: as ``quasi``, but the start position is drawn only from the
  gate positions ``1, 1 + ell, 1 + 2 ell, ...``.

A node informed in round ``t`` draws its start pointer at the end of round
``t`` and sends its first message in round ``t + 1``; the source draws
before round 1.  Pushes to already-informed nodes are wasted but still
advance the sender's pointer.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_key, stream_bits, uniform_below
from .errors import ConfigurationError, RunawayError

PUSH_RANDOM = "push-random"
QUASI = "quasi"
GATE = "gate"
VARIANTS = (PUSH_RANDOM, QUASI, GATE)

ROUND_CAP_FACTOR = 64


@dataclass(frozen=True)
class ProtocolKind:
    """Protocol variant plus gate spacing (``ell`` is 1 unless ``variant == 'gate'``)."""

    variant: str
    ell: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown protocol {self.variant!r}; expected one of {VARIANTS}")
        if int(self.ell) != self.ell or self.ell < 1:
            raise ConfigurationError(f"gate spacing must be a positive integer, got {self.ell}")
        if self.variant != GATE and self.ell != 1:
            raise ConfigurationError(f"protocol {self.variant!r} takes no gate spacing")

    @property
    def list_based(self):
        return self.variant != PUSH_RANDOM

    def __str__(self):
        return f"gate(ell={self.ell})" if self.variant == GATE else self.variant


def fully_random():
    return ProtocolKind(PUSH_RANDOM)


def quasi_random():
    return ProtocolKind(QUASI)


def gate_model(ell):
    return ProtocolKind(GATE, int(ell))


def make_protocol(name, ell=1):
    """Build a protocol from its CLI name (``push-random``, ``quasi`` or ``gate``)."""
    if name == GATE:
        return gate_model(ell)
    return ProtocolKind(name)


def gate_positions(n, ell):
    """Gate positions ``1, 1 + ell, ...`` not exceeding ``n - 1``.

    ``ell`` may be anything in ``[1, n]``; both ``n - 1`` and ``n`` leave the
    single gate at position 1.
    """
    if int(n) != n or n < 2:
        raise ConfigurationError(f"node count must be an integer >= 2, got {n}")
    if int(ell) != ell or not 1 <= ell <= n:
        raise ConfigurationError(f"gate spacing must lie in [1, {n}], got {ell}")
    return np.arange(1, n, int(ell), dtype=np.int64)


def check_protocol(n, protocol, allow_nondivisible=False):
    """Raise if ``protocol`` cannot run on ``n`` nodes."""
    gate_positions(n, protocol.ell)
    if protocol.variant == GATE and n % protocol.ell and not allow_nondivisible:
        raise ConfigurationError(
            f"gate spacing {protocol.ell} does not divide n={n} (use allow_nondivisible to override)"
        )


def admissible_starts(n, protocol):
    """List positions a newly informed node may start from."""
    return gate_positions(n, protocol.ell)


def round_cap(n, ell=1):
    return math.ceil(ROUND_CAP_FACTOR * (math.log2(n) + math.log(n) + ell))


@dataclass
class EngineState:
    """Mutable state of one broadcast run.

    ``informed`` and ``pointer`` are indexed by node id (slot 0 unused);
    ``pointer[v] == 0`` means node ``v`` has no pointer.  ``senders`` holds
    the informed node ids.  All randomness derives from ``key``: node ``v``
    draws its start pointer from counter 0 of its stream and, under
    ``push-random``, its round-``t`` target from counter ``t``.
    """

    n: int
    round: int
    informed: np.ndarray
    pointer: np.ndarray
    senders: np.ndarray
    key: int
    seed: int
    source: int
    informed_counts: list = field(default_factory=list)

    @property
    def n_informed(self):
        return len(self.senders)

    @property
    def done(self):
        return self.n_informed == self.n

    def copy(self):
        return EngineState(
            self.n, self.round, self.informed.copy(), self.pointer.copy(),
            self.senders.copy(), self.key, self.seed, self.source, list(self.informed_counts),
        )


def _draw_starts(key, nodes, starts):
    return starts[uniform_below(stream_bits(key, nodes, 0), len(starts))]


def init_state(lists, protocol, source, seed, allow_nondivisible=False):
    n = lists.n
    check_protocol(n, protocol, allow_nondivisible)
    if int(source) != source or not 1 <= source <= n:
        raise ConfigurationError(f"source must lie in [1, {n}], got {source}")
    source = int(source)
    key = derive_key(seed)
    informed = np.zeros(n + 1, dtype=bool)
    informed[source] = True
    pointer = np.zeros(n + 1, dtype=np.int64)
    senders = np.array([source], dtype=np.int64)
    if protocol.list_based:
        pointer[senders] = _draw_starts(key, senders, admissible_starts(n, protocol))
    return EngineState(n, 0, informed, pointer, senders, key, int(seed), source, [1])


def simulate_round(state, lists, protocol):
    """Advance ``state`` by one synchronous round, in place, and return it."""
    if state.done:
        return state
    n = state.n
    senders = state.senders
    if protocol.list_based:
        pos = state.pointer[senders]
        targets = lists.neighbors(senders, pos)
        state.pointer[senders] = pos % (n - 1) + 1
    else:
        offsets = uniform_below(stream_bits(state.key, senders, state.round + 1), n - 1)
        targets = offsets + 1
        targets += targets >= senders
    fresh = np.unique(targets[~state.informed[targets]])
    state.informed[fresh] = True
    if protocol.list_based and fresh.size:
        state.pointer[fresh] = _draw_starts(state.key, fresh, admissible_starts(n, protocol))
    state.senders = np.concatenate([senders, fresh])
    state.round += 1
    state.informed_counts.append(len(state.senders))
    return state


@dataclass(frozen=True)
class BroadcastResult:
    rounds: int
    informed_counts: tuple
    protocol: ProtocolKind
    seed: int
    source: int

    @property
    def n(self):
        return self.informed_counts[-1]


def run_broadcast(lists, protocol, source, seed, allow_nondivisible=False, max_rounds=None):
    """Run rounds until every node is informed.

    ``max_rounds`` defaults to ``64 * (log2 n + ln n + ell)``; exceeding it
    raises :class:`RunawayError`.
    """
    state = init_state(lists, protocol, source, seed, allow_nondivisible)
    cap = round_cap(lists.n, protocol.ell) if max_rounds is None else max_rounds
    while not state.done:
        if state.round >= cap:
            raise RunawayError(
                f"broadcast exceeded {cap} rounds with {state.n_informed}/{state.n} informed"
            )
        simulate_round(state, lists, protocol)
    return BroadcastResult(
        state.round, tuple(state.informed_counts), protocol, state.seed, state.source
    )


def trace_violations(counts, n):
    """Invariant breaches in an informed-count trace (empty list when clean)."""
    problems = []
    counts = list(counts)
    if not counts or counts[0] != 1:
        problems.append("trace must start at 1 informed node")
    if counts and counts[-1] != n:
        problems.append(f"trace ends at {counts[-1]}, expected {n}")
    for t in range(len(counts) - 1):
        if counts[t + 1] < counts[t]:
            problems.append(f"informed count decreased at round {t + 1}")
        if counts[t + 1] > 2 * counts[t]:
            problems.append(f"informed count more than doubled at round {t + 1}")
    if len(counts) - 1 < math.ceil(math.log2(n)):
        problems.append(f"{len(counts) - 1} rounds beats the doubling bound ceil(log2 n)")
    return problems
