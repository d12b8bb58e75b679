from pathlib import Path

import numpy as np
import pytest

from k2triples import TripleStore, build_from_file

DATA = Path(__file__).parent / "data"
FIGURE2 = DATA / "figure2.nt"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def figure2_path():
    return FIGURE2


@pytest.fixture(scope="session")
def figure2():
    """(store, dictionary) for the six-triple example, built with k=4 as in the illustration."""
    store, dictionary, errors = build_from_file(FIGURE2, k=4)
    assert not errors
    return store, dictionary


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_store(rng, m, sizes, k=2):
    from synth import uniform_triples

    arr = uniform_triples(rng, m, sizes)
    return TripleStore.build(arr, sizes, k), arr


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
