"""Marking experiments, the exact negative-correlation oracle and the
two-phase pessimistic broadcast process.

Positions are 1-based.  Intervals are linear (never wrap around).
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, EnumerationBudgetError

ENUMERATION_BUDGET = 10**7
MAX_BLOCKS = 16
_EPS = 1e-9


def largest_unmarked_interval(marks):
    """Length of the longest contiguous run of ``False`` in ``marks``."""
    marks = np.asarray(marks, dtype=bool)
    if marks.size == 0:
        raise ConfigurationError("marks must be non-empty")
    hits = np.flatnonzero(np.concatenate(([True], marks, [True])))
    return int(np.diff(hits).max() - 1)


@dataclass(frozen=True)
class MarkingConfig:
    n: int
    pre_marked: frozenset = frozenset()
    i: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"sequence length must be >= 1, got {self.n}")
        if self.i < 0:
            raise ConfigurationError(f"draw count must be >= 0, got {self.i}")
        object.__setattr__(self, "pre_marked", frozenset(int(p) for p in self.pre_marked))
        if any(not 1 <= p <= self.n for p in self.pre_marked):
            raise ConfigurationError(f"pre-marked positions must lie in [1, {self.n}]")

    @property
    def m(self):
        return len(self.pre_marked)


@dataclass(frozen=True, eq=False)
class MarkingOutcome:
    marks: np.ndarray = field(repr=False)
    largest_gap: int
    distinct_random_marks: int


def spread_positions(n, m):
    """``m`` distinct positions in ``[1, n]``, as evenly spaced as possible."""
    if not 0 <= m <= n:
        raise ConfigurationError(f"cannot pre-mark {m} of {n} positions")
    return frozenset(int(p) for p in (np.arange(m) * n) // max(m, 1) + 1) if m else frozenset()


def run_marking_experiment(config):
    """Mark ``pre_marked``, then ``i`` uniform positions drawn with replacement."""
    marks = np.zeros(config.n, dtype=bool)
    if config.pre_marked:
        marks[np.fromiter(config.pre_marked, dtype=np.int64) - 1] = True
    distinct = 0
    if config.i:
        rng = np.random.default_rng(config.seed)
        draws = rng.integers(0, config.n, size=config.i)
        hit = np.zeros(config.n, dtype=bool)
        hit[draws] = True
        distinct = int(hit.sum())
        marks |= hit
    return MarkingOutcome(marks, largest_unmarked_interval(marks), distinct)


@dataclass
class CorrelationReport:
    """Exact probabilities over all ``n**i`` equally likely draw sequences.

    ``marginals[b]`` is P[block b marked].  ``conditionals[(b, others)]`` is
    P[block b marked | every block in ``others`` marked]; conditioning
    events of probability zero are left out.  Blocks are 0-based.
    """

    n: int
    k: int
    i: int
    total: int
    marginals: list
    conditionals: dict
    violations: list
    formula_matches: bool

    @property
    def blocks(self):
        return self.n // self.k

    @property
    def holds(self):
        return not self.violations and self.formula_matches

    def to_dict(self):
        return {
            "n": self.n,
            "k": self.k,
            "i": self.i,
            "sequences": self.total,
            "blocks": self.blocks,
            "marginals": [str(p) for p in self.marginals],
            "conditionals": [
                {"block": b, "given": sorted(given), "probability": str(p)}
                for (b, given), p in sorted(
                    self.conditionals.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1]))
                )
            ],
            "violations": self.violations,
            "formula_matches": self.formula_matches,
            "holds": self.holds,
        }


def _hit_mask_counts(n, k, i):
    """``counts[mask]`` = number of draw sequences whose set of hit blocks is ``mask``."""
    total = n**i
    seq = np.arange(total, dtype=np.int64)
    mask = np.zeros(total, dtype=np.int64)
    for _ in range(i):
        seq, draw = np.divmod(seq, n)
        mask |= np.left_shift(1, draw // k)
    return np.bincount(mask, minlength=1 << (n // k))


def negative_correlation_oracle(n, k, i, budget=ENUMERATION_BUDGET):
    """Check that conditioning on marked blocks never raises another block's probability.

    ``[1, n]`` is cut into ``n / k`` blocks of length ``k``.  Every draw
    sequence is enumerated; all comparisons are exact integer arithmetic.
    Also checks P[block marked] against ``1 - (1 - k/n)**i``.
    """
    if n < 1 or k < 1 or n % k:
        raise ConfigurationError(f"block length k={k} must divide n={n}")
    if i < 0:
        raise ConfigurationError(f"draw count must be >= 0, got {i}")
    blocks = n // k
    if n**i > budget or blocks > MAX_BLOCKS:
        raise EnumerationBudgetError(
            f"n**i = {n**i} sequences over {blocks} blocks exceeds the budget "
            f"of {budget} sequences / {MAX_BLOCKS} blocks"
        )
    total = n**i
    exact = [int(c) for c in _hit_mask_counts(n, k, i)]
    # superset sums: at_least[S] = #sequences hitting every block of S
    at_least = list(exact)
    for b in range(blocks):
        bit = 1 << b
        for s in range(1 << blocks):
            if not s & bit:
                at_least[s] += at_least[s | bit]

    marginals = [Fraction(at_least[1 << b], total) for b in range(blocks)]
    expected = 1 - Fraction(n - k, n) ** i
    formula_matches = all(p == expected for p in marginals)

    conditionals = {}
    violations = []
    for b in range(blocks):
        bit = 1 << b
        for s in range(1 << blocks):
            if s & bit or at_least[s] == 0:
                continue
            joint = at_least[s | bit]
            given = frozenset(c for c in range(blocks) if s >> c & 1)
            conditionals[(b, given)] = Fraction(joint, at_least[s])
            # P[b | S] <= P[b]  <=>  joint * total <= at_least[b] * at_least[S]
            if joint * total > at_least[bit] * at_least[s]:
                violations.append({"block": b, "given": sorted(given)})
    return CorrelationReport(n, k, i, total, marginals, conditionals, violations, formula_matches)


@dataclass(frozen=True)
class PhaseTrace:
    n: int
    ell: int
    epsilon: float
    seed: int
    t1: int
    pre_marked_gates: int
    n0: int
    k_obs: int
    lower_bound_estimate: int


def _floor(x):
    return math.floor(x + _EPS)


def _ceil(x):
    return math.ceil(x - _EPS)


def phase_one_gates(n, ell, epsilon):
    """``(t1, gates)``: phase-1 length and the informed-gate count it allows."""
    gates = n // ell
    t1 = _floor((1 - epsilon) * math.log2(gates))
    return t1, min(2**t1, _ceil(gates ** (1 - epsilon)))


def phase_two_choosers(n, ell, pre_marked_gates):
    """Vertices whose gate choice is brought forward in phase 2.

    Each informed gate stands for ``ell`` informed vertices.
    """
    return n - ell * pre_marked_gates


def two_phase_simulation(n, ell, epsilon, seed):
    """Pessimistic two-phase process; finishes no later than the gate model.

    Phase 1 doubles the informed gates for ``t1`` rounds.  Phase 2 lets
    every remaining vertex pick a gate uniformly with replacement; the
    longest run of untouched gates ``k_obs`` then costs ``ell - 1`` rounds
    to reach plus ``ell * k_obs`` rounds to cover.
    """
    if int(ell) != ell or ell < 1 or n % ell:
        raise ConfigurationError(f"ell={ell} must be a positive divisor of n={n}")
    if not 0 < epsilon < 1:
        raise ConfigurationError(f"epsilon must lie in (0, 1), got {epsilon}")
    gates = n // ell
    if gates < 2:
        raise ConfigurationError(f"need at least 2 gates, n/ell = {gates}")
    t1, informed_gates = phase_one_gates(n, ell, epsilon)
    n0 = phase_two_choosers(n, ell, informed_gates)
    outcome = run_marking_experiment(
        MarkingConfig(gates, spread_positions(gates, informed_gates), n0, seed)
    )
    k_obs = outcome.largest_gap
    return PhaseTrace(
        n, ell, epsilon, seed, t1, informed_gates, n0, k_obs, t1 + (ell - 1) + ell * k_obs
    )
