import numpy as np
import pytest

from fermi_asymptotics import build_model


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def model_factory():
    cache = {}

    def make(n, **kw):
        key = (n, tuple(sorted(kw.items())))
        if key not in cache:
            cache[key] = build_model(n, **kw)
        return cache[key]

    return make


def random_vector(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


# -- acceptance summary -------------------------------------------------------

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """``criterion(key, passed, detail)`` records one summary line for the acceptance report."""

    def record(key, passed, detail=""):
        _ACCEPTANCE[key] = (bool(passed), detail)
        print(f"{key}: {'PASS' if passed else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (k.split()[0].zfill(3), k)):
        passed, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {key:<28s} {detail}")
