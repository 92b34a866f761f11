import pytest

from maximin_mab.experiments import gen_affine_instance

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def paper_instance():
    """m=6 channels, p=5 nodes, mean[i][j] = 0.5 - 0.05*(i-j)."""
    return gen_affine_instance(0.05, 6, 5)


@pytest.fixture
def acceptance_log():
    def record(name: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}  {detail}")
