"""Seeded Monte Carlo batches, bound comparison and result export."""

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

import numpy as np

from . import bounds
from ._rng import trial_seed
from .errors import ConfigurationError, GatecastError
from .lists import build_adversarial_lists, build_random_lists, load_lists
from .protocol import ProtocolKind, check_protocol, run_broadcast

TRIAL_COLUMNS = ("trial_index", "seed", "n", "ell", "protocol", "source", "rounds")
RANDOM_SOURCE = "random"
DECIMALS = 6


@dataclass(frozen=True)
class TrialConfig:
    """One batch of broadcast trials.

    ``list_source`` is ``"adversarial"``, ``"random"`` (re-drawn per trial)
    or ``"file:PATH"``.  ``source_node`` is a node id or ``"random"``
    (uniform per trial).
    """

    n: int
    protocol: ProtocolKind
    list_source: str = "adversarial"
    source_node: object = RANDOM_SOURCE
    trials: int = 1
    master_seed: int = 0
    epsilon: float = 0.0
    allow_nondivisible: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.list_source not in ("adversarial", "random") and not self.list_source.startswith("file:"):
            raise ConfigurationError(f"unknown list source {self.list_source!r}")
        if self.source_node != RANDOM_SOURCE and not 1 <= int(self.source_node) <= self.n:
            raise ConfigurationError(f"source must be 'random' or lie in [1, {self.n}]")
        check_protocol(self.n, self.protocol, self.allow_nondivisible)

    def to_dict(self):
        return {
            "n": self.n,
            "protocol": self.protocol.variant,
            "ell": self.protocol.ell,
            "list_source": self.list_source,
            "source_node": self.source_node,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "epsilon": self.epsilon,
            "allow_nondivisible": self.allow_nondivisible,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            n=d["n"],
            protocol=ProtocolKind(d["protocol"], d["ell"]),
            list_source=d["list_source"],
            source_node=d["source_node"],
            trials=d["trials"],
            master_seed=d["master_seed"],
            epsilon=d["epsilon"],
            allow_nondivisible=d["allow_nondivisible"],
        )


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    seed: int
    n: int
    ell: int
    protocol: str
    source: int
    rounds: int


def nearest_rank(sorted_values, q):
    """Nearest-rank quantile: the ``ceil(q * N)``-th smallest value (rank >= 1)."""
    rank = max(1, math.ceil(q * len(sorted_values) - 1e-12))
    return sorted_values[rank - 1]


@dataclass
class TrialSummary:
    config: TrialConfig
    records: list
    mean: float
    median: int
    min: int
    max: int
    q05: int
    q95: int
    theoretical_lower: float
    theoretical_upper: float
    fraction_at_or_above_lower: float
    results: list = field(default=None, repr=False, compare=False)

    @property
    def rounds(self):
        return [r.rounds for r in self.records]

    @classmethod
    def from_records(cls, config, records, results=None):
        if not records:
            raise ConfigurationError("a summary needs at least one trial")
        rounds = sorted(r.rounds for r in records)
        lower = bounds.theorem_lower_bound(config.n, config.protocol.ell, config.epsilon)
        threshold = math.floor(lower)
        return cls(
            config=config,
            records=list(records),
            mean=sum(rounds) / len(rounds),
            median=nearest_rank(rounds, 0.5),
            min=rounds[0],
            max=rounds[-1],
            q05=nearest_rank(rounds, 0.05),
            q95=nearest_rank(rounds, 0.95),
            theoretical_lower=lower,
            theoretical_upper=bounds.adhp_upper_bound(config.n),
            fraction_at_or_above_lower=sum(r >= threshold for r in rounds) / len(rounds),
            results=results,
        )

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "rounds": self.rounds,
            "records": [asdict(r) for r in self.records],
            "mean": self.mean,
            "median": self.median,
            "min": self.min,
            "max": self.max,
            "q05": self.q05,
            "q95": self.q95,
            "theoretical_lower": self.theoretical_lower,
            "theoretical_upper": self.theoretical_upper,
            "fraction_at_or_above_lower": self.fraction_at_or_above_lower,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            config=TrialConfig.from_dict(d["config"]),
            records=[TrialRecord(**r) for r in d["records"]],
            **{k: d[k] for k in (
                "mean", "median", "min", "max", "q05", "q95",
                "theoretical_lower", "theoretical_upper", "fraction_at_or_above_lower",
            )},
        )


def _lists_for(config, seed, cache):
    if config.list_source == "random":
        return build_random_lists(config.n, seed)
    if "lists" not in cache:
        if config.list_source == "adversarial":
            cache["lists"] = build_adversarial_lists(config.n)
        else:
            lists = load_lists(config.list_source[len("file:"):])
            if lists.n != config.n:
                raise ConfigurationError(f"list file has n={lists.n}, config has n={config.n}")
            cache["lists"] = lists
    return cache["lists"]


def _source_for(config, seed):
    if config.source_node == RANDOM_SOURCE:
        return int(np.random.default_rng([seed, 1]).integers(1, config.n + 1))
    return int(config.source_node)


def run_trial(config, index, cache=None):
    """Trial ``index`` (1-based) of ``config``; returns ``(record, result)``."""
    cache = {} if cache is None else cache
    seed = trial_seed(config.master_seed, index)
    lists = _lists_for(config, seed, cache)
    source = _source_for(config, seed)
    try:
        result = run_broadcast(lists, config.protocol, source, seed, config.allow_nondivisible)
    except GatecastError as exc:
        raise type(exc)(f"trial {index}: {exc}") from exc
    record = TrialRecord(
        index, seed, config.n, config.protocol.ell, config.protocol.variant, source, result.rounds
    )
    return record, result


def _run_chunk(config, indices):
    cache = {}
    return [run_trial(config, t, cache) for t in indices]


def run_trials(config, n_jobs=1, keep_results=False):
    """Run every trial of ``config`` and summarise.

    With ``n_jobs > 1`` trials are spread over worker processes; results
    are gathered in trial order, so the summary does not depend on the
    schedule.
    """
    indices = list(range(1, config.trials + 1))
    if n_jobs > 1:
        chunks = [indices[j::n_jobs] for j in range(n_jobs)]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(chunks), chunks))
        pairs = sorted((p for part in parts for p in part), key=lambda p: p[0].trial_index)
    else:
        pairs = _run_chunk(config, indices)
    records = [rec for rec, _ in pairs]
    results = [res for _, res in pairs] if keep_results else None
    return TrialSummary.from_records(config, records, results)


@dataclass(frozen=True)
class BoundComparison:
    n: int
    ell: int
    epsilon: float
    theorem_lower_bound: float
    adhp_upper_bound: float
    empirical_median: int
    fraction_at_or_above_lower: float


def compare_bounds(summary, params):
    """Empirical median against the lower and upper closed forms."""
    if not summary.records:
        raise ConfigurationError("cannot compare an empty summary")
    if (summary.config.n, summary.config.protocol.ell) != (params.n, params.ell):
        raise ConfigurationError(
            f"summary is for (n={summary.config.n}, ell={summary.config.protocol.ell}), "
            f"params for (n={params.n}, ell={params.ell})"
        )
    lower = bounds.theorem_lower_bound(params.n, params.ell, params.epsilon)
    threshold = math.floor(lower)
    rounds = summary.rounds
    return BoundComparison(
        params.n,
        params.ell,
        params.epsilon,
        lower,
        bounds.adhp_upper_bound(params.n),
        summary.median,
        sum(r >= threshold for r in rounds) / len(rounds),
    )


# -- export -------------------------------------------------------------------


def _rounded(obj):
    if isinstance(obj, float):
        return round(obj, DECIMALS)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return round(float(obj), DECIMALS)
    return obj


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return f"{value:.{DECIMALS}f}"
    return str(value)


def _plain_dict(item):
    if hasattr(item, "to_dict"):
        return item.to_dict()
    if is_dataclass(item):
        return {f.name: getattr(item, f.name) for f in fields(item)
                if not isinstance(getattr(item, f.name), np.ndarray)}
    if isinstance(item, dict):
        return item
    raise TypeError(f"cannot export {type(item).__name__}")


def _table(obj):
    """``(columns, rows)`` for CSV export."""
    if isinstance(obj, TrialSummary):
        return TRIAL_COLUMNS, [[getattr(r, c) for c in TRIAL_COLUMNS] for r in obj.records]
    items = [_plain_dict(x) for x in obj]
    if not items:
        raise ConfigurationError("nothing to export")
    columns = list(items[0])
    return columns, [[it[c] for c in columns] for it in items]


def render(obj, fmt):
    """Serialise a summary, a record sequence or a dict to CSV or JSON text."""
    if fmt == "json":
        payload = _plain_dict(obj) if not isinstance(obj, (list, tuple)) else [_plain_dict(x) for x in obj]
        return json.dumps(_rounded(payload), indent=2) + "\n"
    if fmt == "csv":
        columns, rows = _table(obj)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([_cell(v) for v in row] for row in rows)
        return buf.getvalue()
    raise ConfigurationError(f"unknown export format {fmt!r}")


def export_results(obj, fmt, path):
    """Write ``obj`` to ``path``; output is byte-stable for fixed input."""
    text = render(obj, fmt)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return Path(path)
