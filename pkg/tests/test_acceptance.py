"""End-to-end acceptance checks, one test group per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints a
PASS/FAIL line per criterion.
"""

import random
import time

import numpy as np
import pytest

from conftest import CORPUS_NAMES, corpus_graph, fixture_doc
from tncondense import lab
from tncondense.canonicalize import IndexSpec, branched_lift_index, condense, finite_order_case
from tncondense.nielsen import (Node, RelationSet, base_relations, close_relations, naive_closure,
                                persistence_report)
from tncondense.serialize import condensed_to_doc

CAT = lab.LinearModel.from_entries([2, 1, 1, 1])
MAX_PERIOD = 8


@pytest.fixture(scope="module")
def shadowing():
    start = time.perf_counter()
    fmap, sets, report = lab.shadowing_experiment(CAT, 0.05, MAX_PERIOD, seed=0, tol=1e-11)
    return fmap, sets, report, time.perf_counter() - start


@pytest.fixture(scope="module")
def flip_report():
    return lab.flip_annulus_experiment(seed=0, maps=10, iterations=100_000)


# 1 -------------------------------------------------------------------------


@pytest.mark.criterion(1)
def test_expansion_on_random_pairs():
    rng = np.random.default_rng(1)
    pts = rng.uniform(-10, 10, size=(10_000, 2, 2))
    start = time.perf_counter()
    rep = lab.verify_expansion(CAT, [(p[0], p[1]) for p in pts], tol=1e-12)
    elapsed = time.perf_counter() - start
    print(f"expansion: worst relative error {rep.worst_relative_error:.3e} in {elapsed:.3f}s")
    assert rep.samples == 10_000
    assert rep.ok
    assert elapsed < 1.0


# 2 -------------------------------------------------------------------------


@pytest.mark.criterion(2)
def test_matched_pairs_within_constant(shadowing):
    fmap, sets, rep, elapsed = shadowing
    lam = (3 + np.sqrt(5)) / 2
    assert rep.lam == pytest.approx(lam, rel=1e-15)
    assert rep.C == pytest.approx(2 * (rep.R + 1) / (lam - 1), rel=1e-15)
    for s in sets:
        assert len(s) == lab.periodic_point_count(CAT, s.n)
    print(f"R={rep.R:.6f} C={rep.C:.6f} pairs={rep.pairs} max d_phi={rep.max_d_phi:.6f} "
          f"margin={rep.margin:.6f} ({elapsed:.1f}s)")
    assert rep.unmatched == 0
    assert rep.violations == 0
    assert rep.max_d_phi < rep.C
    assert elapsed < 60


@pytest.mark.criterion(2)
def test_period_eight_count_is_the_determinant():
    A8 = np.array(lab.matrix_power(CAT, 8), dtype=object)
    det = (A8[0, 0] - 1) * (A8[1, 1] - 1) - A8[0, 1] * A8[1, 0]
    assert abs(det) == lab.periodic_point_count(CAT, 8) == 2205
    assert lab.linear_periodic_points(CAT, 8).count == 2205


# 3 -------------------------------------------------------------------------


@pytest.mark.criterion(3)
def test_two_sided_bound(shadowing):
    fmap, sets, rep, _ = shadowing
    start = time.perf_counter()
    ts = lab.two_sided_bound_check(fmap, sets, rep.C, (-20, 20))
    elapsed = time.perf_counter() - start
    print(f"two-sided: max difference {ts.max_difference:.6f} <= {ts.bound:.6f} "
          f"over {ts.comparisons} comparisons ({elapsed:.1f}s)")
    assert ts.ok
    assert elapsed < 60


# 4 -------------------------------------------------------------------------


@pytest.mark.criterion(4)
def test_semiconjugacy(shadowing):
    fmap, sets, rep, _ = shadowing
    sc = lab.semiconjugacy_check(fmap, sets, rep.C)
    print(f"semiconjugacy: defect {sc.max_defect:.3e}, lift deviation {sc.max_lift_deviation:.6f}")
    assert sc.max_defect < 1e-6
    assert sc.max_lift_deviation <= rep.C
    assert sc.points == rep.pairs


# 5, 6 ----------------------------------------------------------------------


@pytest.mark.criterion(5)
def test_flip_boundary_rotations_negate(flip_report):
    assert len(flip_report.rotations) == 10
    for top, bottom, err in flip_report.rotations:
        assert abs(top + bottom) < 1e-6
    print(f"flip: max |rho(-1) + rho(1)| = {flip_report.max_rotation_sum:.3e}")


@pytest.mark.criterion(6)
def test_pinch_map_fixed_points(flip_report):
    fp = flip_report.fixed_points
    print(f"pinch map: {fp.count} fixed points, indices {[p.index for p in fp.points]}")
    assert fp.status == "certified"
    assert fp.count == 2
    assert all(p.index not in (None, 0) for p in fp.points)
    assert fp.index_sum == 2


# 7 -------------------------------------------------------------------------


def random_generators(rng: random.Random) -> RelationSet:
    size = rng.randint(1, 12)
    nodes = [Node(f"n{i}", rng.choice([1, 2, 3, 4, 6, 12])) for i in range(size)]
    pn, col = [], []
    for _ in range(rng.randint(0, 2 * size)):
        x, y = rng.sample(nodes, 2) if size > 1 else (nodes[0], nodes[0])
        if x.period == y.period:
            pn.append((x.id, y.id))
        elif x.period % y.period == 0:
            col.append((x.id, y.id))
        elif y.period % x.period == 0:
            col.append((y.id, x.id))
    return RelationSet.build(nodes, pn, col)


@pytest.mark.criterion(7)
def test_closure_matches_oracle():
    rng = random.Random(7)
    for _ in range(200):
        rels = random_generators(rng)
        fast, slow = close_relations(rels), naive_closure(rels)
        assert fast.pn_edges == slow.pn_edges
        assert dict(fast.collapse_edges) == dict(slow.collapse_edges)


# 8 -------------------------------------------------------------------------


@pytest.mark.criterion(8)
@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_condensed_corpus_properties(name):
    cg = condense(corpus_graph(name))
    rels = base_relations(cg, 12)
    assert rels.is_empty()
    assert cg.orbit_inventory
    for rec in cg.orbit_inventory:
        assert rec.index != 0 and rec.index is not None
    report = persistence_report(cg, 12)
    assert len(report) == len([r for r in cg.orbit_inventory if r.period <= 12])
    for c in report:
        assert not c.collapsible
        assert c.essential is True
        assert c.persistent is True
        assert len(c.members) == 1
    again = condense(cg)
    assert condensed_to_doc(again) == condensed_to_doc(cg)
    assert condensed_to_doc(condense(again.graph))["orbit_inventory"] == \
        condensed_to_doc(cg)["orbit_inventory"]


# 9 -------------------------------------------------------------------------


def sweep():
    for k in range(2, 13):
        for h in range(21):
            for p in range(21):
                if (h - p) % 2 == 0:
                    for rotated in (False, True):
                        yield IndexSpec(h, p, k, rotated)


@pytest.mark.criterion(9)
def test_branched_lift_index_never_zero():
    specs = list(sweep())
    assert len(specs) == 11 * 221 * 2
    assert all(branched_lift_index(s) != 0 for s in specs)


@pytest.mark.criterion(9)
def test_winding_agrees_with_closed_form():
    rng = random.Random(9)
    for s in rng.sample(list(sweep()), 20):
        downstairs = 1 + (s.p - s.h) // 2
        G = lab.branched_lift_model(downstairs, s.k, s.rotated)
        assert lab.winding_index(G, 0j, 1.0, samples=8192) == branched_lift_index(s)


# 10 ------------------------------------------------------------------------


@pytest.mark.criterion(10)
def test_bouquet_example_regression():
    expected = fixture_doc("figure6_inventory.json")
    graph = corpus_graph("figure6")
    assert finite_order_case(graph, 0) == expected["finite_order_case"]["case"]
    cg = condense(graph)
    doc = condensed_to_doc(cg)
    assert cg.graph.annuli == ()
    assert doc["seams"] == expected["seams"]
    assert doc["orbit_inventory"] == expected["orbit_inventory"]
