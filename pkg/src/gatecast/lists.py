"""Neighbour-list families for the complete graph.

A family assigns every node ``v`` in ``1..n`` a cyclic list of the other
``n - 1`` nodes.  Node ids and list positions are 1-based throughout.

Large families are never materialised: :class:`AdversarialLists` is a
closed-form rule and :class:`RandomLists` evaluates a keyed pseudo-random
permutation per node, so a lookup costs O(1) regardless of ``n``.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._rng import derive_key, keyed_bits, node_keys
from .errors import ConfigurationError, ListFileError

_FEISTEL_ROUNDS = 6
_LISTS_TAG = 0x4C495354
_BLOCK_ENTRIES = 1 << 22


def _check_n(n):
    if int(n) != n or n < 2:
        raise ConfigurationError(f"node count must be an integer >= 2, got {n}")
    return int(n)


class ListFamily:
    """Explicit per-node lists; ``lists[v - 1]`` is node ``v``'s list.

    Rows are stored as given so that malformed families can still be
    inspected by :func:`validate_lists`.  Lookups through
    :meth:`neighbors` require a well-formed family.
    """

    def __init__(self, n, lists):
        self.n = _check_n(n)
        if len(lists) != self.n:
            raise ConfigurationError(f"expected {self.n} lists, got {len(lists)}")
        self._rows = [np.asarray(row, dtype=np.int64) for row in lists]
        self._matrix = None

    def list_of(self, v):
        """Node ``v``'s list as an int array of node ids."""
        return self._rows[v - 1]

    def neighbors(self, nodes, positions):
        """Vectorised lookup: entry at ``positions[j]`` of list ``nodes[j]``."""
        if self._matrix is None:
            violation = validate_lists(self)
            if violation is not None:
                raise ConfigurationError(f"invalid list family: {violation}")
            self._matrix = np.vstack(self._rows)
        return self._matrix[np.asarray(nodes) - 1, np.asarray(positions) - 1]

    def to_array(self):
        """All lists stacked as an ``(n, n - 1)`` array (row ``v - 1`` is node ``v``)."""
        return np.vstack([self.list_of(v) for v in range(1, self.n + 1)])

    def __iter__(self):
        for v in range(1, self.n + 1):
            yield self.list_of(v)

    def __eq__(self, other):
        if not isinstance(other, ListFamily) or other.n != self.n:
            return NotImplemented if not isinstance(other, ListFamily) else False
        return all(
            len(a) == len(b) and np.array_equal(a, b) for a, b in zip(self, other)
        )

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class AdversarialLists(ListFamily):
    """Every node holds ``[1, 2, ..., n]`` with itself removed."""

    def __init__(self, n):
        self.n = _check_n(n)

    def neighbors(self, nodes, positions):
        nodes = np.asarray(nodes)
        positions = np.asarray(positions)
        return positions + (positions >= nodes)

    def list_of(self, v):
        pos = np.arange(1, self.n, dtype=np.int64)
        return self.neighbors(np.full_like(pos, v), pos)


class RandomLists(ListFamily):
    """Independent pseudo-random permutation per node, keyed by ``seed``.

    Each list is a cycle-walking Feistel permutation of ``[0, n - 1)``
    mapped onto the node's neighbours, so every list is a true permutation
    and any single entry can be evaluated without building the rest.
    """

    def __init__(self, n, seed):
        self.n = _check_n(n)
        self.seed = int(seed)
        self._key = derive_key(self.seed, _LISTS_TAG)
        domain_bits = max(2, int(self.n - 2).bit_length())
        self._half = (domain_bits + 1) // 2
        self._mask = np.uint64((1 << self._half) - 1)

    def _round_trip(self, x, keys):
        half = np.uint64(self._half)
        left = x >> half
        right = x & self._mask
        for r in range(_FEISTEL_ROUNDS):
            counter = (np.uint64(r) << np.uint64(32)) | right
            f = keyed_bits(keys, counter) & self._mask
            left, right = right, left ^ f
        return (left << half) | right

    def _permute(self, offsets, nodes):
        size = np.uint64(self.n - 1)
        keys = node_keys(self._key, nodes)
        y = self._round_trip(offsets.astype(np.uint64), keys)
        outside = y >= size
        while outside.any():
            y[outside] = self._round_trip(y[outside], keys[outside])
            outside = y >= size
        return y.astype(np.int64)

    def neighbors(self, nodes, positions):
        nodes = np.atleast_1d(np.asarray(nodes, dtype=np.int64))
        positions = np.atleast_1d(np.asarray(positions, dtype=np.int64))
        nodes, positions = np.broadcast_arrays(nodes, positions)
        ids = self._permute(positions - 1, nodes.astype(np.uint64)) + 1
        return ids + (ids >= nodes)

    def list_of(self, v):
        pos = np.arange(1, self.n, dtype=np.int64)
        return self.neighbors(np.full_like(pos, v), pos)

    def __eq__(self, other):
        if isinstance(other, RandomLists) and other.n == self.n and other.seed == self.seed:
            return True
        return super().__eq__(other)

    def __repr__(self):
        return f"RandomLists(n={self.n}, seed={self.seed})"


def build_adversarial_lists(n):
    """The lower-bound family: node ``v`` holds ``[1..n]`` minus ``v``, in order."""
    return AdversarialLists(n)


def build_random_lists(n, seed):
    return RandomLists(n, seed)


@dataclass(frozen=True)
class ListViolation:
    node: int
    position: int | None
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def _row_violation(v, row, n):
    if len(row) != n - 1:
        return ListViolation(
            v, None, "wrong length", f"node {v} has {len(row)} entries, expected {n - 1}"
        )
    bad = np.flatnonzero((row < 1) | (row > n))
    if bad.size:
        p = int(bad[0]) + 1
        return ListViolation(
            v, p, "out of range", f"node {v} position {p} holds {int(row[p - 1])}"
        )
    first_self = np.flatnonzero(row == v)
    first_dup = None
    counts = np.bincount(row, minlength=n + 1)
    if (counts > 1).any():
        # position of the first repeated entry in list order
        _, first_index = np.unique(row, return_index=True)
        seen = np.zeros(len(row), dtype=bool)
        seen[first_index] = True
        first_dup = int(np.flatnonzero(~seen)[0])
    if first_self.size and (first_dup is None or first_self[0] < first_dup):
        p = int(first_self[0]) + 1
        return ListViolation(v, p, "self-inclusion", f"node {v} lists itself at position {p}")
    if first_dup is not None:
        p = first_dup + 1
        return ListViolation(
            v, p, "duplicate", f"node {v} repeats {int(row[p - 1])} at position {p}"
        )
    return None


def validate_lists(lists):
    """First invariant violation of ``lists`` in node order, or ``None``.

    Checks, per node: list length ``n - 1``, ids within ``1..n``, no
    self-inclusion and no repeated entry.
    """
    n = lists.n
    if type(lists) is ListFamily:
        for v in range(1, n + 1):
            violation = _row_violation(v, np.asarray(lists.list_of(v), dtype=np.int64), n)
            if violation is not None:
                return violation
        return None
    # implicit families: screen blocks of rows at once, report via the row check
    chunk = max(1, _BLOCK_ENTRIES // (n - 1))
    pos = np.arange(1, n, dtype=np.int64)
    for start in range(1, n + 1, chunk):
        nodes = np.arange(start, min(start + chunk, n + 1), dtype=np.int64)
        block = lists.neighbors(np.repeat(nodes, n - 1), np.tile(pos, len(nodes)))
        block = block.reshape(len(nodes), n - 1)
        ordered = np.sort(block, axis=1)
        bad = (
            (ordered[:, 0] < 1)
            | (ordered[:, -1] > n)
            | (block == nodes[:, None]).any(axis=1)
            | (np.diff(ordered, axis=1) == 0).any(axis=1)
        )
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            return _row_violation(int(nodes[j]), block[j], n)
    return None


def format_lists(lists):
    """Render a family in the line-oriented list-file format."""
    out = [f"{lists.n}\n"]
    for row in lists:
        out.append(",".join(str(int(x)) for x in row) + "\n")
    return "".join(out)


def save_lists(lists, path):
    Path(path).write_text(format_lists(lists), encoding="utf-8")


def parse_lists(text):
    """Parse list-file text; errors carry the 1-based line number."""
    lines = text.splitlines()
    if not lines:
        raise ListFileError("empty list file", line=1)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ListFileError("malformed node count", line=1, detail=repr(lines[0])) from None
    if n < 2:
        raise ListFileError("node count must be >= 2", line=1)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n:
        raise ListFileError(
            "wrong number of list lines",
            line=min(len(body), n) + 2 if len(body) < n else n + 2,
            detail=f"expected {n}, found {len(body)}",
        )
    rows = []
    for v, raw in enumerate(body, start=1):
        try:
            rows.append([int(tok) for tok in raw.split(",")])
        except ValueError:
            raise ListFileError("malformed entry", line=v + 1, detail=repr(raw)) from None
    family = ListFamily(n, rows)
    violation = validate_lists(family)
    if violation is not None:
        raise ListFileError(violation.kind, line=violation.node + 1, detail=violation.detail)
    return family


def load_lists(path):
    """Read and validate a list file.  I/O failures propagate as ``OSError``."""
    return parse_lists(Path(path).read_text(encoding="utf-8"))
