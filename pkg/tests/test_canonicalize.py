import copy
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import CORPUS_NAMES, branch_piece_alone, corpus_doc, corpus_graph, fixture_doc
from tncondense.annulus import CollapseChoice, IndeterminateTwist
from tncondense.canonicalize import (SYMBOLIC, IndexSpec, SectorParityError, adjust,
                                     branched_lift_index, condense, finite_order_case,
                                     periodic_inventory, sector_index)
from tncondense.graph import StructuralError, ValidationError, quotient_euler, validate
from tncondense.serialize import condensed_to_doc, graph_from_doc


def from_doc(doc):
    return graph_from_doc(doc)


# -- indices ---------------------------------------------------------------


@pytest.mark.parametrize("h,p,index", [(0, 0, 1), (4, 0, -1), (2, 2, 1), (2, 0, 0), (0, 2, 2)])
def test_sector_index(h, p, index):
    assert sector_index(IndexSpec(h, p)) == index


def test_sector_parity():
    with pytest.raises(SectorParityError):
        sector_index(IndexSpec(1, 0))


@pytest.mark.parametrize("k,h,p,rotated,index", [
    (2, 4, 0, False, -3),
    (3, 2, 0, False, -2),
    (5, 8, 2, True, 1),
    (7, 0, 0, True, 1),
    (4, 0, 2, False, 5),
])
def test_branched_lift_index(k, h, p, rotated, index):
    assert branched_lift_index(IndexSpec(h, p, k, rotated)) == index


def test_branched_lift_needs_branching():
    with pytest.raises(ValueError):
        branched_lift_index(IndexSpec(0, 0, 1))


@given(st.integers(-30, 30))
def test_index_spec_realizes_index(index):
    assert sector_index(IndexSpec.for_index(index)) == index


@given(st.integers(-30, 30), st.integers(2, 12))
def test_branched_index_from_downstairs(index, k):
    spec = IndexSpec.for_index(index, k=k)
    assert branched_lift_index(spec) == 1 + k * (index - 1)


# -- adjust ----------------------------------------------------------------


def test_finite_order_pieces_merge_across_untwisted_annulus():
    adj = adjust(corpus_graph("fo_merge"))
    fo = [p for p in adj.graph.pieces if p.is_finite_order]
    assert len(fo) == 1
    merged = fo[0]
    assert merged.id == 0 and merged.data.period == 2
    assert merged.euler_char == -4 and len(merged.boundary) == 6
    assert 0 not in {a.id for a in adj.graph.annuli}
    assert any(e["event"] == "merge" for e in adj.log)
    assert validate(adj.graph).ok


def test_flipped_annulus_interior_has_two_orbits():
    adj = adjust(from_doc(fixture_doc("flip_return3.json")))
    for aid in (0, 1, 2):
        content = adj.annulus_interiors[aid]
        assert content.kind == "two-orbits"
        assert content.period == 3
        assert content.indices == (1, 1)
    assert adj.annulus_interiors[3].kind == "empty"


def test_no_annuli_is_unchanged():
    g = corpus_graph("hyperelliptic")
    adj = adjust(g)
    assert adj.graph == g
    assert adj.collapse_records == ()
    assert adj.log == ()


def test_collapse_records_for_pa_circles():
    adj = adjust(corpus_graph("figure6"))
    recs = {r.circle: r for r in adj.collapse_records}
    assert sorted(recs) == [3, 4, 5]
    assert (recs[3].period, recs[3].collapsed_group_size, recs[3].choice) == (2, 1, None)
    assert (recs[4].period, recs[4].collapsed_group_size) == (1, 5)
    assert recs[4].choice is CollapseChoice.LEFT


@pytest.mark.parametrize("choice", ["left", "right", CollapseChoice.RIGHT])
def test_collapse_choice_is_threaded(choice):
    adj = adjust(corpus_graph("figure6"), choice)
    expected = CollapseChoice(choice) if isinstance(choice, str) else choice
    recs = {r.circle: r for r in adj.collapse_records}
    assert recs[4].choice is expected and recs[5].choice is expected
    assert adj.graph.circle_by_id[4].collapse == expected.value


def test_collapse_choice_per_circle():
    adj = adjust(corpus_graph("figure6"), {4: "right"})
    recs = {r.circle: r for r in adj.collapse_records}
    assert recs[4].choice is CollapseChoice.RIGHT
    assert recs[5].choice is CollapseChoice.LEFT


def test_indeterminate_twist_is_refused():
    doc = copy.deepcopy(corpus_doc("pa_glue"))
    doc["annuli"][1]["rotations"] = ["0/1", None]
    with pytest.raises(IndeterminateTwist):
        adjust(from_doc(doc))


def test_invalid_graph_is_refused():
    doc = copy.deepcopy(corpus_doc("figure6"))
    doc["pieces"][1]["expansion"] = 0.5
    with pytest.raises(ValidationError):
        adjust(from_doc(doc))


def test_flipped_untwisted_annulus_between_finite_order_pieces_is_refused():
    doc = {
        "pieces": [
            {"id": 0, "genus": 1, "kind": "finite-order", "period": 1, "branch_points": [],
             "boundary": [0]},
            {"id": 1, "genus": 1, "kind": "finite-order", "period": 1, "branch_points": [],
             "boundary": [1]},
        ],
        "annuli": [{"id": 0, "sides": [0, 1], "return_time": 1, "flipped": True,
                    "rotations": ["0/1", "0/1"]}],
        "permutations": {"pieces": {"0": 1, "1": 0}, "circles": {"0": 1, "1": 0}},
    }
    g = from_doc(doc)
    assert validate(g).ok
    with pytest.raises(StructuralError):
        adjust(g)


# -- condense --------------------------------------------------------------


def test_case_one_single_regular_orbit():
    cg = condense(corpus_graph("case1"))
    assert finite_order_case(corpus_graph("case1"), 0) == 1
    (rec,) = cg.orbit_inventory
    assert rec.type_tag == "FiniteOrderRegular"
    assert rec.period == 3
    assert rec.index == -2
    assert rec.index == quotient_euler(corpus_graph("case1").pieces[0])


def test_case_three_branch_orbit():
    g = branch_piece_alone()
    assert finite_order_case(g, 0) == 3
    cg = condense(g)
    types = [r.type_tag for r in cg.orbit_inventory]
    assert types == ["FiniteOrderBranch"]
    (rec,) = cg.orbit_inventory
    assert rec.period == 1
    assert rec.index == 1


def test_case_three_unrotated_branch_index():
    doc = copy.deepcopy(corpus_doc("mixed"))
    cg = condense(from_doc(doc))
    branches = {r.site: r for r in cg.orbit_inventory if r.type_tag == "FiniteOrderBranch"}
    # quotient euler characteristic 1 with two branch orbits: the first
    # carries index 0 downstairs, which lifts to 1 + 3 * (0 - 1) = -2
    assert branches["piece:0/branch:0"].index == -2
    assert branches["piece:0/branch:1"].index == 1


def test_case_two_regular_orbit_absorbs_peripheral_orbits():
    cg = condense(corpus_graph("case2"))
    assert finite_order_case(corpus_graph("case2"), 0) == 2
    regular = [r for r in cg.orbit_inventory if r.type_tag == "FiniteOrderRegular"]
    assert len(regular) == 1
    assert regular[0].period == 2 and regular[0].index == -1
    assert regular[0].absorbed == ("circle:4", "circle:5")


def test_bouquet_example_matches_fixture():
    expected = fixture_doc("figure6_inventory.json")
    cg = condense(corpus_graph("figure6"))
    assert [r.to_dict() for r in cg.orbit_inventory] == expected["orbit_inventory"]
    assert all(s.kind == "bouquet" for s in cg.graph.seams)


def test_pinch_seam_and_flip_orbits():
    cg = condense(corpus_graph("flip_pinch"))
    assert [s.kind for s in cg.graph.seams] == ["pinch"]
    recs = cg.orbit_inventory
    assert [r.type_tag for r in recs] == ["FlipAnnulusInterior"] * 2
    assert recs[0].absorbed == ("circle:0",)
    assert all(r.period == 1 and r.index == 1 for r in recs)


def test_glue_seam_between_pa_pieces():
    cg = condense(corpus_graph("pa_glue"))
    assert [s.kind for s in cg.graph.seams] == ["glue"]
    glued = [r for r in cg.orbit_inventory if r.absorbed]
    assert len(glued) == 1 and glued[0].period == 3


def test_twisted_annuli_survive():
    cg = condense(corpus_graph("mixed"))
    assert sorted(a.id for a in cg.graph.annuli) == [0, 1]
    assert cg.graph.seams == ()


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_condense_is_idempotent(name):
    cg = condense(corpus_graph(name))
    assert condensed_to_doc(condense(cg)) == condensed_to_doc(cg)


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_condensed_graph_validates(name):
    assert validate(condense(corpus_graph(name)).graph).ok


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_inventory_order_is_canonical(name):
    recs = condense(corpus_graph(name)).orbit_inventory
    assert [r.id for r in recs] == list(range(len(recs)))
    assert [r.period for r in recs] == sorted(r.period for r in recs)


# -- inventory -------------------------------------------------------------


def test_inventory_of_branched_piece():
    inv = periodic_inventory(branch_piece_alone(), 4)
    assert inv.counts == {1: 1}
    assert inv.complete


def test_boundary_orbit_of_four_pronged_circle():
    inv = periodic_inventory(corpus_graph("pa_glue"), 2, census={0: {1: 2, 2: 1}})
    boundary = [r for r in inv.records if r.type_tag == "BoundaryPA"]
    assert len(boundary) == 1
    assert boundary[0].period == 2 and boundary[0].site == "circle:1"
    assert boundary[0].index == SYMBOLIC


def test_empty_inventory_at_zero():
    inv = periodic_inventory(corpus_graph("figure6"), 0)
    assert inv.records == () and inv.counts == {}


def test_census_absent_is_reported():
    inv = periodic_inventory(corpus_graph("figure6"), 3)
    assert inv.census_absent == (1, 2)
    assert not inv.complete


def test_census_argument_overrides_document():
    inv = periodic_inventory(corpus_graph("pa_glue"), 3, census={0: {1: 1}, 1: {3: 0}, 2: {3: 0}})
    interior = [r for r in inv.records if r.type_tag == "InteriorPA"]
    assert [r.period for r in interior] == [1]


def test_quotient_euler_of_corpus_pieces():
    assert quotient_euler(corpus_graph("hyperelliptic").pieces[0]) == 2
    assert quotient_euler(corpus_graph("figure6").pieces[0]) == 0
    assert quotient_euler(corpus_graph("mixed").pieces[0]) == Fraction(1)
