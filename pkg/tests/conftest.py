import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from intreach.model import BlockSpec, SystemSpec

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def double_integrator():
    """x0 = 0, input in [-1, 1]."""
    return BlockSpec(2, (0, 0), -1, 1)


@pytest.fixture
def triple_integrator():
    return BlockSpec(3, (0, 0, 0), -1, 1)


def random_block(rng, r=None, max_r=5):
    r = int(rng.integers(1, max_r + 1)) if r is None else r
    lo, hi = sorted(rng.normal(scale=2.0, size=2))
    return BlockSpec(r, tuple(float(v) for v in rng.normal(size=r)), float(lo), float(hi))


def random_system(rng, max_r=5, max_blocks=3):
    m = int(rng.integers(1, max_blocks + 1))
    return SystemSpec([random_block(rng, max_r=max_r) for _ in range(m)], float(rng.uniform(0.2, 3.0)))


# acceptance report: one line per criterion at the end of the run

_CRITERIA: dict = {}


@pytest.fixture
def detail(request):
    """Set ``detail["text"]`` to attach a measured value to the criterion's report line."""
    d = {"text": ""}
    request.node._criterion_detail = d
    return d


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    d = getattr(item, "_criterion_detail", {"text": ""})
    _CRITERIA[mark.args[0]] = (mark.args[1], "PASS" if rep.passed else "FAIL", d["text"])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        name, verdict, text = _CRITERIA[n]
        line = f"criterion {n}: {verdict}  {name}"
        terminalreporter.write_line(f"{line}  [{text}]" if text else line)
