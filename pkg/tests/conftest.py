import sys

import pytest

from gatecast import build_adversarial_lists


@pytest.fixture
def adversarial8():
    return build_adversarial_lists(8)


@pytest.fixture
def list_file(tmp_path):
    def write(text):
        path = tmp_path / "lists.txt"
        path.write_text(text, encoding="utf-8")
        return path

    return write


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
