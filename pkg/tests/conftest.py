import pytest

from beepmis.graph import (gen_complete, gen_cycle, gen_empty, gen_erdos_renyi, gen_path,
                           gen_star)

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance_log():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(name: str, passed: bool, detail: str = ""):
        _ACCEPTANCE.append((name, passed, detail))
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


def small_graph_family(max_n: int = 6):
    """Path, cycle, star, complete and edgeless graphs on up to ``max_n`` nodes."""
    out = []
    for n in range(1, max_n + 1):
        out.append((f"path{n}", gen_path(n)))
        out.append((f"empty{n}", gen_empty(n)))
        out.append((f"complete{n}", gen_complete(n)))
        if n >= 3:
            out.append((f"cycle{n}", gen_cycle(n)))
        if n >= 2:
            out.append((f"star{n - 1}", gen_star(n - 1)))
    return out


@pytest.fixture
def er_small():
    return gen_erdos_renyi(20, 0.2, 7)
