import numpy as np
import pytest

from minent.hyperbolic import boundary_quadrature
from minent.products import min_entropy_profile


@pytest.fixture(scope="session")
def profile33():
    return min_entropy_profile((3, 3), (2.0, 2.0))


@pytest.fixture(scope="session")
def quads33():
    # deterministic S^2 nodes shared by the whole suite; building them
    # once keeps the barycenter tests inside their runtime budget
    q = boundary_quadrature(3, 1000)
    return [q, q]


@pytest.fixture(scope="session")
def quads33_fine():
    q = boundary_quadrature(3, 2000)
    return [q, q]


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One verdict line per acceptance item, printed after the run."""
    rows = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            tail = nodeid.split("::test_criterion_", 1)[1]
            num_str, _, slug = tail.partition("_")
            num = int(num_str)
            ok = status == "passed"
            timing = ""
            for key, val in getattr(rep, "user_properties", []):
                if key == "elapsed":
                    elapsed, budget = val
                    timing = (
                        f" [{elapsed:.1f}s / {budget:.0f}s budget]"
                        if budget is not None
                        else f" [{elapsed:.1f}s]"
                    )
            # the call-phase report wins over setup/teardown phases
            if num not in rows or getattr(rep, "when", "") == "call":
                rows[num] = (ok, slug.replace("_", " "), timing)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(rows):
        ok, label, timing = rows[num]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"[{verdict}] criterion {num}: {label}{timing}"
        )
