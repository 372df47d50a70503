import functools
import json
from pathlib import Path

import numpy as np
import pytest

from pqelab.cli import load_system

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@functools.lru_cache(maxsize=None)
def system(name, max_rank=2):
    """Cached Hamiltonian and pool for ``fixtures/<name>.fcidump``."""
    return load_system(FIXTURES / f"{name}.fcidump", max_rank)


def sidecar(name):
    return json.loads((FIXTURES / f"{name}.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """``acceptance(n, ok, detail)`` records one criterion line and asserts it."""

    def record(number, ok, detail):
        ACCEPTANCE[number] = (ok, detail)
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
