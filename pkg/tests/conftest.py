import numpy as np
import pytest

from ovalue.dbt import build_pool
from ovalue.scoring import ScoringOpsConfig

POOL_SEED = 20240501


@pytest.fixture(scope="session")
def pool():
    return build_pool(depth=6, G=10_000, seed=POOL_SEED)


@pytest.fixture(scope="session")
def scfg(pool):
    return ScoringOpsConfig(pool)


@pytest.fixture(scope="session")
def small_pool():
    return build_pool(depth=3, G=500, seed=11)


def binormal(n, pi, separation, rng):
    """Scores N(separation, 1) for positives and N(0, 1) for negatives."""
    n_pos = round(pi * n)
    labels = np.r_[np.ones(n_pos, dtype=int), np.zeros(n - n_pos, dtype=int)]
    scores = np.r_[rng.normal(separation, 1.0, n_pos), rng.normal(0.0, 1.0, n - n_pos)]
    return labels, scores


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, ok, detail):
    """Log one acceptance verdict; the lines are repeated in the terminal summary."""
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
