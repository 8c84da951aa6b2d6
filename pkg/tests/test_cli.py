import json
import math

import pytest

from gatecast.cli import main
from gatecast.lists import build_adversarial_lists, load_lists


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_degenerate(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "16", "--ell", "16", "--source", "1")
    assert code == 0
    data = json.loads(out)
    assert data["rounds"] == 15 and data["informed_counts"] == list(range(1, 17))


def test_trials_csv_and_json(capsys, tmp_path):
    args = ["trials", "--n", "256", "--protocol", "quasi", "--lists", "random", "--trials", "6", "--seed", "3"]
    assert main(args + ["--format", "csv", "--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--format", "csv", "--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    code, out, _ = run(capsys, *args)
    data = json.loads(out)
    assert code == 0 and len(data["rounds"]) == 6 and "comparison" in data


def test_trials_parallel_flag(tmp_path):
    base = ["trials", "--n", "128", "--protocol", "gate", "--ell", "4", "--trials", "5", "--format", "json"]
    main(base + ["--out", str(tmp_path / "s.json")])
    main(base + ["--jobs", "2", "--out", str(tmp_path / "p.json")])
    assert (tmp_path / "s.json").read_bytes() == (tmp_path / "p.json").read_bytes()


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "65536", "--ell", "64", "--epsilon", "0.2")
    assert code == 0 and json.loads(out)["theorem_lower_bound"] == pytest.approx(76.545177, abs=1e-6)


def test_lemma(capsys):
    code, out, _ = run(capsys, "lemma", "--n", "2000", "--i", "2000", "--epsilon", "0.3", "--trials", "4")
    data = json.loads(out)
    assert code == 0 and data["threshold_floor"] == math.floor(0.7 * math.log(2000)) == 5 and len(data["trials"]) == 4


def test_two_phase(capsys):
    code, out, _ = run(capsys, "two-phase", "--n", "1024", "--ell", "8", "--epsilon", "0.2", "--trials", "3")
    assert code == 0 and len(json.loads(out)) == 3


def test_correlation_check(capsys):
    code, out, _ = run(capsys, "correlation-check", "--n", "4", "--k", "2", "--i", "2")
    data = json.loads(out)
    assert code == 0 and data["holds"] and data["marginals"] == ["3/4", "3/4"]


def test_gen_lists(tmp_path):
    path = tmp_path / "adv.txt"
    assert main(["gen-lists", "--n", "5", "--lists", "adversarial", "--out", str(path)]) == 0
    assert load_lists(path) == build_adversarial_lists(5)
    assert path.read_text().startswith("5\n2,3,4,5\n")


@pytest.mark.parametrize(
    "argv, code",
    [
        (["simulate", "--n", "16", "--ell", "3"], 2),
        (["simulate", "--n", "16", "--source", "x"], 2),
        (["correlation-check", "--n", "10", "--k", "2", "--i", "9"], 4),
        (["simulate", "--n", "16", "--lists", "file:/nonexistent/lists.txt"], 3),
        (["trials", "--n", "16", "--trials", "2", "--out", "/nonexistent/dir/x.json"], 3),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert main(argv) == code
    assert "error" in capsys.readouterr().err


def test_nondivisible_override(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "16", "--ell", "15", "--source", "1", "--allow-nondivisible")
    assert code == 0 and json.loads(out)["rounds"] == 15


def test_bad_list_file_is_config_error(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("3\n2,3\n2,3\n1,2\n")
    assert main(["simulate", "--n", "3", "--lists", f"file:{path}"]) == 2
    assert "self-inclusion, line 3" in capsys.readouterr().err
