import functools
from pathlib import Path

import pytest

from baumlv.grounder import THM6, ground
from baumlv.model import parse_model
from baumlv.twocm import desk_suite, encode

CORPUS = Path(__file__).resolve().parent.parent / "src" / "baumlv" / "corpus"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

# encoder name -> (table, instance bound b) for the desk-scale fidelity runs
DESK_ENCODERS = {"unidirectional": (2, 1), "bidirectional": (3, 1), "shared": (4, 2)}
DESK_BUDGET = 4


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")
    config._criteria = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    n, title = mark.args
    entry = item.config._criteria.setdefault(n, {"title": title, "failed": 0, "passed": 0})
    if call.excinfo is not None:
        entry["failed"] += 1
    elif call.when == "call":
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(criteria):
        e = criteria[n]
        status = "PASS" if e["failed"] == 0 and e["passed"] > 0 else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {e['title']} "
                                    f"({e['passed']} passed, {e['failed']} failed)")


def load(name):
    return parse_model((CORPUS / name).read_text(), name)


@functools.lru_cache(maxsize=None)
def desk_case(encoder, machine_name):
    """(machine, model, grounded system) for one desk-suite machine under one encoder."""
    suite = desk_suite()
    machine = {**suite.halting, **suite.non_halting}[machine_name]
    table, b = DESK_ENCODERS[encoder]
    model = encode(machine, table)
    return machine, model, ground(model, mode=THM6, instances=b, budget=DESK_BUDGET)


def desk_names():
    suite = desk_suite()
    return list(suite.halting) + list(suite.non_halting)


@pytest.fixture(scope="session")
def shop():
    return load("shop.bauml")


@pytest.fixture(scope="session")
def shop_min():
    return load("shop_min.bauml")
