import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from blocktest.functions import Junta, SparsePoly, TruthTable
from blocktest.oracle import FunctionOracle

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

MAJ3_INNER = np.array([0, 0, 0, 1, 0, 1, 1, 1], dtype=np.uint8)


def parity(n, coords):
    return SparsePoly.from_sets(n, [[c] for c in coords])


def monomial_and(n, coords):
    return SparsePoly.from_sets(n, [coords])


def dictator(n, i, negated=False):
    return SparsePoly.from_sets(n, [[i], []] if negated else [[i]])


def majority(n, coords):
    coords = tuple(sorted(coords))
    r = len(coords)
    inner = np.array([int(bin(i).count("1") * 2 > r) for i in range(1 << r)], dtype=np.uint8)
    return Junta(n, coords, inner)


def constant(n, v=0):
    return SparsePoly.from_sets(n, [[]] if v else [])


def random_table(n, rng):
    return TruthTable(n, rng.integers(0, 2, size=1 << n).astype(np.uint8))


def oracle(f, **kw):
    return FunctionOracle(f, **kw)


def rate(fn, seeds):
    """Fraction of seeds for which ``fn(seed)`` is truthy."""
    seeds = list(seeds)
    return sum(bool(fn(s)) for s in seeds) / len(seeds)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, title, ok, detail=""):
    """Log one acceptance line; printed again in the terminal summary."""
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
