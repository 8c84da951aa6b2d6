import csv
import io
import json
import math

import pytest

from gatecast import ConfigurationError
from gatecast.bounds import BoundParams
from gatecast.harness import (
    TRIAL_COLUMNS,
    TrialConfig,
    TrialSummary,
    compare_bounds,
    export_results,
    nearest_rank,
    render,
    run_trials,
)
from gatecast.lists import build_random_lists, save_lists
from gatecast.marking import two_phase_simulation
from gatecast.protocol import fully_random, gate_model, quasi_random


def test_single_trial_statistics():
    s = run_trials(TrialConfig(64, quasi_random(), "random", trials=1, master_seed=3))
    r = s.records[0].rounds
    assert s.mean == s.median == s.min == s.max == s.q05 == s.q95 == r


@pytest.mark.parametrize("protocol", [fully_random(), quasi_random(), gate_model(2)])
def test_n2_always_one_round(protocol):
    s = run_trials(TrialConfig(2, protocol, "random", trials=50, master_seed=1))
    assert s.rounds == [1] * 50
    assert (s.mean, s.median, s.min, s.max, s.q05, s.q95) == (1, 1, 1, 1, 1, 1)


def test_degenerate_batch():
    n = 32
    s = run_trials(TrialConfig(n, gate_model(n), "adversarial", source_node=1, trials=20, master_seed=9))
    assert set(s.rounds) == {n - 1}
    assert s.min == s.max == s.median == n - 1


def test_nearest_rank():
    values = list(range(1, 21))
    assert nearest_rank(values, 0.05) == 1
    assert nearest_rank(values, 0.5) == 10
    assert nearest_rank(values, 0.95) == 19
    assert nearest_rank([4], 0.5) == 4


def test_summary_invariants():
    s = run_trials(TrialConfig(256, gate_model(4), "adversarial", trials=40, master_seed=2))
    assert s.min <= s.q05 <= s.median <= s.q95 <= s.max
    assert 0 <= s.fraction_at_or_above_lower <= 1
    assert s.theoretical_lower == pytest.approx(math.log2(256) + math.log(256) - 2 - math.log(4) + 3)


def test_trial_seeds_stable_under_extension():
    short = run_trials(TrialConfig(128, quasi_random(), "random", trials=5, master_seed=11))
    long = run_trials(TrialConfig(128, quasi_random(), "random", trials=12, master_seed=11))
    assert long.records[:5] == short.records


def test_random_source_varies():
    s = run_trials(TrialConfig(1000, quasi_random(), "adversarial", trials=30, master_seed=0))
    assert len({r.source for r in s.records}) > 20


def test_parallel_matches_serial():
    config = TrialConfig(300, quasi_random(), "random", trials=9, master_seed=5)
    assert run_trials(config, n_jobs=3) == run_trials(config, n_jobs=1)


def test_file_lists(tmp_path):
    lists = build_random_lists(40, 1)
    save_lists(lists, tmp_path / "l.txt")
    config = TrialConfig(40, quasi_random(), f"file:{tmp_path / 'l.txt'}", trials=3, master_seed=4)
    s = run_trials(config)
    assert len(s.records) == 3
    with pytest.raises(ConfigurationError):
        run_trials(TrialConfig(41, quasi_random(), f"file:{tmp_path / 'l.txt'}", trials=1))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        TrialConfig(16, quasi_random(), trials=0)
    with pytest.raises(ConfigurationError):
        TrialConfig(16, gate_model(3))
    with pytest.raises(ConfigurationError):
        TrialConfig(16, quasi_random(), "grid")
    with pytest.raises(ConfigurationError):
        TrialConfig(16, quasi_random(), source_node=17)
    TrialConfig(16, gate_model(3), allow_nondivisible=True)


def test_compare_bounds():
    s = run_trials(TrialConfig(1024, quasi_random(), "random", trials=10, master_seed=0))
    report = compare_bounds(s, BoundParams(1024, 1, 0.0))
    assert report.theorem_lower_bound == pytest.approx(report.adhp_upper_bound)
    assert report.empirical_median == s.median
    assert report.fraction_at_or_above_lower == pytest.approx(
        sum(r >= math.floor(report.theorem_lower_bound) for r in s.rounds) / 10
    )
    with pytest.raises(ConfigurationError):
        compare_bounds(s, BoundParams(1024, 2, 0.0))


def test_compare_bounds_reports_closed_form_value():
    s = run_trials(TrialConfig(2**16, gate_model(64), "adversarial", trials=2, master_seed=0))
    assert compare_bounds(s, BoundParams(2**16, 64, 0.2)).theorem_lower_bound == pytest.approx(76.5452, abs=1e-4)


def test_empty_summary_rejected():
    config = TrialConfig(8, quasi_random())
    with pytest.raises(ConfigurationError):
        TrialSummary.from_records(config, [])


@pytest.fixture(scope="module")
def summary():
    return run_trials(TrialConfig(512, gate_model(8), "random", trials=15, master_seed=21, epsilon=0.1))


def test_export_byte_identical(summary, tmp_path):
    for fmt in ("csv", "json"):
        a = export_results(summary, fmt, tmp_path / f"a.{fmt}").read_bytes()
        b = export_results(summary, fmt, tmp_path / f"b.{fmt}").read_bytes()
        assert a == b


def test_csv_header_and_rows(summary):
    rows = list(csv.reader(io.StringIO(render(summary, "csv"))))
    assert tuple(rows[0]) == TRIAL_COLUMNS == (
        "trial_index", "seed", "n", "ell", "protocol", "source", "rounds"
    )
    assert [int(r[-1]) for r in rows[1:]] == summary.rounds


def test_json_round_trip(summary):
    back = TrialSummary.from_dict(json.loads(render(summary, "json")))
    assert back.config == summary.config
    assert back.records == summary.records
    for name in ("median", "min", "max", "q05", "q95"):
        assert getattr(back, name) == getattr(summary, name)
    for name in ("mean", "theoretical_lower", "theoretical_upper", "fraction_at_or_above_lower"):
        assert getattr(back, name) == round(getattr(summary, name), 6)


def test_statistics_recomputable_from_export(summary):
    rows = list(csv.DictReader(io.StringIO(render(summary, "csv"))))
    rounds = sorted(int(r["rounds"]) for r in rows)
    rebuilt = TrialSummary.from_records(summary.config, summary.records)
    assert rebuilt.mean == sum(rounds) / len(rounds)
    assert (rebuilt.median, rebuilt.q05, rebuilt.q95) == (
        nearest_rank(rounds, 0.5), nearest_rank(rounds, 0.05), nearest_rank(rounds, 0.95)
    )
    assert rebuilt == summary


def test_export_phase_traces(tmp_path):
    traces = [two_phase_simulation(1024, 8, 0.2, s) for s in range(3)]
    text = render(traces, "csv")
    assert text.splitlines()[0].split(",")[:3] == ["n", "ell", "epsilon"]
    assert "0.200000" in text
    assert json.loads(render(traces, "json"))[0]["ell"] == 8


def test_export_io_error(summary, tmp_path):
    with pytest.raises(OSError):
        export_results(summary, "csv", tmp_path / "missing" / "x.csv")


def test_export_unknown_format(summary):
    with pytest.raises(ConfigurationError):
        render(summary, "xml")
