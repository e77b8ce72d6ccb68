import numpy as np
import pytest

from homogenize.mesh import build_unit_square_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def mesh16():
    return build_unit_square_mesh(16)


def pytest_collection_modifyitems(items):
    # the a priori criterion aggregates the solves made by the other criteria
    last = [i for i in items if i.name == "test_06_apriori_bound"]
    for item in last:
        items.remove(item)
        items.append(item)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        title, ok, detail = mod.RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}")
