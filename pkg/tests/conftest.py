import numpy as np
import pytest

from otalc.core import ClassMap


def random_run_stream(rng: np.random.Generator, n: int, num_classes: int) -> list[int]:
    """Label list built from runs of mixed geometric lengths (short blips and long segments)."""
    labels: list[int] = []
    while len(labels) < n:
        p = rng.choice([0.6, 0.3, 0.1])
        labels += [int(rng.integers(num_classes))] * int(rng.geometric(p))
    return labels[:n]


@pytest.fixture
def ab():
    return ClassMap(("A", "B"))


@pytest.fixture
def abc():
    return ClassMap(("A", "B", "C"))


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
