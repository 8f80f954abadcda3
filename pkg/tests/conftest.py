import json
from importlib import resources
from pathlib import Path

import pytest

from tncondense.serialize import graph_from_doc, load_json

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS_NAMES = sorted(p.name[:-5] for p in resources.files("tncondense").joinpath("corpus").iterdir()
                      if p.name.endswith(".json"))

CRITERIA = {
    1: "expansion of d_u and d_s under the linear map",
    2: "matched periodic pairs stay within the shadowing constant",
    3: "two-sided orbit distance bound over m in [-20, 20]",
    4: "semiconjugacy defect and lift deviation",
    5: "flip-annulus boundary rotations negate",
    6: "pinch map has two fixed points of index sum 2",
    7: "relation closure matches the naive fixpoint oracle",
    8: "condensed corpus graphs have no relations and persistent classes",
    9: "branched lift indices never vanish and match winding numbers",
    10: "bouquet example inventory matches the frozen fixture",
}

_outcomes = {}


def corpus_doc(name):
    text = resources.files("tncondense").joinpath("corpus", f"{name}.json").read_text()
    return load_json(text, name)


def corpus_graph(name):
    return graph_from_doc(corpus_doc(name))


def fixture_doc(name):
    return json.loads((FIXTURES / name).read_text())


def branch_piece_alone():
    """The bouquet example's central piece with its circles left free."""
    return graph_from_doc({
        "pieces": [{"id": 0, "genus": 0, "kind": "finite-order", "period": 2,
                    "boundary": [{"id": 0, "rotation": "1/2"}, {"id": 1, "rotation": "0/1"},
                                 {"id": 2, "rotation": "0/1"}],
                    "branch_points": [{"local_order": 2, "rotated": True}]}],
        "annuli": [],
        "permutations": {"circles": {"1": 2, "2": 1}},
    })


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    n = dict(report.user_properties).get("criterion")
    if n is None:
        return
    failed = report.failed
    if report.when == "call" or failed:
        _outcomes.setdefault(n, []).append(not failed)


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        status = "NOT RUN" if results is None else ("PASS" if all(results) else "FAIL")
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {CRITERIA[n]}")
