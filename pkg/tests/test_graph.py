import copy

import pytest
from hypothesis import given, strategies as st

from conftest import CORPUS_NAMES, corpus_doc, corpus_graph
from tncondense.graph import (BoundaryCircle, ComponentGraph, FiniteOrder, PseudoAnosov,
                              StructuralError, SurfacePiece, ambient_surface, euler_characteristic,
                              orbit_decomposition, permutation_cycles, permutation_order, validate)
from tncondense.serialize import graph_from_doc


def pa_piece(pid, genus, circles=()):
    return SurfacePiece(pid, genus, tuple(circles), PseudoAnosov(2.0))


def closed_pieces(n, genus=2, perm=None):
    pieces = tuple(pa_piece(i, genus) for i in range(n))
    return ComponentGraph(pieces, (), (), perm or {i: i for i in range(n)}, {}, {})


def codes(graph):
    return {v.code for v in validate(graph).violations}


@pytest.mark.parametrize("genus,boundary,chi", [(0, 3, -1), (1, 0, 0), (5, 0, -8), (2, 0, -2)])
def test_euler_characteristic(genus, boundary, chi):
    piece = pa_piece(0, genus, range(boundary))
    assert euler_characteristic(piece) == chi


def test_closed_genus_two_piece_is_valid():
    g = closed_pieces(1)
    assert validate(g).ok
    assert g.euler_char == -2
    assert ambient_surface(g) == (2, 0, -2)


def test_annulus_shaped_piece_is_rejected():
    circles = (BoundaryCircle(0, 0), BoundaryCircle(1, 0))
    g = ComponentGraph((pa_piece(0, 0, (0, 1)),), circles, (), {0: 0}, {}, {0: 0, 1: 1})
    report = validate(g)
    assert not report.ok
    assert "euler-char" in codes(g)
    assert any("euler_char < 0" in line for line in report.lines())


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_graphs_are_valid(name):
    g = corpus_graph(name)
    assert validate(g).ok, validate(g).lines()


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_euler_additivity_on_corpus(name):
    g = corpus_graph(name)
    genus, boundary, chi = ambient_surface(g)
    assert chi == sum(p.euler_char for p in g.pieces)
    assert chi == 2 - 2 * genus - boundary


def test_bouquet_example_surface():
    assert ambient_surface(corpus_graph("figure6")) == (5, 0, -8)


def test_identity_orbits():
    orbits = orbit_decomposition(closed_pieces(3))
    assert [o.members for o in orbits] == [(0,), (1,), (2,)]
    assert all(o.length == 1 for o in orbits)


def test_two_cycle_orbit():
    orbits = orbit_decomposition(closed_pieces(2, perm={0: 1, 1: 0}))
    assert len(orbits) == 1 and orbits[0].length == 2


def test_bouquet_example_orbits():
    orbits = orbit_decomposition(corpus_graph("figure6"))
    pieces = [o.members for o in orbits if o.kind == "piece"]
    annuli = [o.members for o in orbits if o.kind == "annulus"]
    assert pieces == [(0,), (1,), (2, 3)]
    assert annuli == [(0,), (1, 2)]


def test_orbit_decomposition_rejects_bad_domain():
    g = closed_pieces(2, perm={0: 0})
    with pytest.raises(StructuralError):
        orbit_decomposition(g)


@given(st.permutations(list(range(7))))
def test_cycles_partition_the_domain(images):
    perm = dict(enumerate(images))
    cycles = permutation_cycles(perm)
    assert sorted(x for c in cycles for x in c) == list(range(7))
    for c in cycles:
        assert c[0] == min(c)
        for a, b in zip(c, c[1:] + c[:1]):
            assert perm[a] == b
    order = permutation_order(perm)
    assert all(order % len(c) == 0 for c in cycles)


def mutate(name, fn):
    doc = copy.deepcopy(corpus_doc(name))
    fn(doc)
    return graph_from_doc(doc)


def test_non_equivariant_permutation_is_rejected():
    # swap the pA pieces without swapping their circles
    g = mutate("figure6", lambda d: d["permutations"].update(circles={"1": 2, "2": 1}))
    assert not validate(g).ok


def test_twisted_flip_rotation_must_negate():
    def bad(d):
        d["annuli"][1]["rotations"] = ["1/2", "1/2"]
    assert "flip-rotation" in codes(mutate("mixed", bad))


def test_rotation_denominator_must_divide_period_data():
    def bad(d):
        d["annuli"][0]["rotations"] = ["1/5", "1/5"]
    assert not validate(mutate("figure6", bad)).ok


def test_prong_rotation_compatibility():
    def bad(d):
        d["pieces"][0]["boundary"][1]["rotation"] = "1/3"
    assert not validate(mutate("pa_glue", bad)).ok


def test_non_positive_expansion_is_rejected():
    def bad(d):
        d["pieces"][1]["expansion"] = 1.0
    assert "expansion" in codes(mutate("figure6", bad))


def test_riemann_hurwitz_is_enforced():
    def bad(d):
        d["pieces"][0]["branch_points"] = []
    assert not validate(mutate("hyperelliptic", bad)).ok


def test_disconnected_graph_is_rejected():
    assert "disconnected" in codes(closed_pieces(2))


def test_finite_order_period_must_be_positive():
    g = ComponentGraph((SurfacePiece(0, 2, (), FiniteOrder(0)),), (), (), {0: 0}, {}, {})
    assert not validate(g).ok
