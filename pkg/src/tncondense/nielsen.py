"""Relations between periodic orbits, Nielsen classes and persistence.

Two relations are tracked between periodic orbits:

* ``pn`` (periodic Nielsen equivalence), an equivalence between orbits of
  equal period;
* ``x |- y`` (collapse), x Nielsen equivalent under f**period(x) to an
  orbit of strictly smaller period; the edge stores the period ratio.

Orbit-level classes are what we report.  Strong and periodic Nielsen
equivalence agree on everything computed here, so one pair of flags
(persistent, unremovable) serves both notions.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from .annulus import classify_annulus
from .canonicalize import (SYMBOLIC, AdjustedGraph, CondensedGraph, _census_map, _inventory,
                           _site_key, adjust, census_coverage, condense)
from .graph import ComponentGraph, StructuralError, permutation_cycles


@dataclass(frozen=True)
class Node:
    id: str
    period: int
    type_tag: str = ""
    index: Union[int, str, None] = None


@dataclass(frozen=True)
class RelationSet:
    nodes: Mapping[str, Node]
    pn_edges: FrozenSet[Tuple[str, str]] = frozenset()
    collapse_edges: Mapping[Tuple[str, str], int] = field(default_factory=dict)

    @classmethod
    def build(cls, nodes: Iterable[Node], pn: Iterable[Tuple[str, str]] = (),
              collapse: Iterable[Tuple[str, str]] = ()) -> "RelationSet":
        """Assemble a relation set, checking periods; collapse multipliers are derived."""
        nodes = {n.id: n for n in nodes}
        pn_edges = set()
        for x, y in pn:
            if nodes[x].period != nodes[y].period:
                raise StructuralError(f"pn edge {x} ~ {y} joins periods "
                                      f"{nodes[x].period} and {nodes[y].period}")
            if x != y:
                pn_edges.add(tuple(sorted((x, y))))
        col = {}
        for x, y in collapse:
            px, py = nodes[x].period, nodes[y].period
            if px <= py or px % py:
                raise StructuralError(f"collapse edge {x} |- {y} needs period {px} to be a "
                                      f"proper multiple of {py}")
            col[(x, y)] = px // py
        return cls(nodes, frozenset(pn_edges), col)

    def collapses_from(self, x: str) -> List[str]:
        return sorted(y for (a, y) in self.collapse_edges if a == x)

    def is_empty(self) -> bool:
        return not self.pn_edges and not self.collapse_edges


# ---------------------------------------------------------------------------
# closure


def _pn_classes(rels: RelationSet) -> Dict[str, str]:
    parent = {x: x for x in rels.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in sorted(rels.pn_edges):
        if rels.nodes[x].period != rels.nodes[y].period:
            raise StructuralError(f"pn edge {x} ~ {y} joins different periods")
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
    return {x: find(x) for x in rels.nodes}


def close_relations(rels: RelationSet) -> RelationSet:
    """Least relation set containing ``rels`` that is closed under the rules.

    pn is made an equivalence; collapses are pushed through pn on both ends;
    and collapse is made transitive on pn-classes.
    """
    cls_of = _pn_classes(rels)
    members: Dict[str, List[str]] = defaultdict(list)
    for x in sorted(rels.nodes):
        members[cls_of[x]].append(x)
    for (x, y) in rels.collapse_edges:
        px, py = rels.nodes[x].period, rels.nodes[y].period
        if px <= py or px % py:
            raise StructuralError(f"collapse edge {x} |- {y} is not period-decreasing")

    succ: Dict[str, set] = defaultdict(set)
    for (x, y) in rels.collapse_edges:
        succ[cls_of[x]].add(cls_of[y])
    # transitive closure; collapse strictly lowers period so the class graph is acyclic
    order = sorted(members, key=lambda c: rels.nodes[c].period)
    reach: Dict[str, set] = {}
    for c in order:
        r = set()
        for d in succ.get(c, ()):
            r.add(d)
            r |= reach[d]
        reach[c] = r

    pn = set()
    for ms in members.values():
        for i, x in enumerate(ms):
            for y in ms[i + 1:]:
                pn.add((x, y))
    col = {}
    for c, targets in reach.items():
        for d in targets:
            for x in members[c]:
                for y in members[d]:
                    col[(x, y)] = rels.nodes[x].period // rels.nodes[y].period
    return RelationSet(rels.nodes, frozenset(pn), col)


def naive_closure(rels: RelationSet) -> RelationSet:
    """Iterate the closure rules edge by edge until nothing changes (test oracle)."""
    nodes = rels.nodes
    pn = {(x, y) for x, y in rels.pn_edges} | {(y, x) for x, y in rels.pn_edges}
    pn |= {(x, x) for x in nodes}
    col = set(rels.collapse_edges)
    changed = True
    while changed:
        changed = False
        new_pn = {(x, z) for (x, y) in pn for (y2, z) in pn if y == y2}
        new_col = {(x, z) for (x, y) in pn for (y2, z) in col if y == y2}
        new_col |= {(x, z) for (x, y) in col for (y2, z) in pn if y == y2}
        new_col |= {(x, z) for (x, y) in col for (y2, z) in col if y == y2}
        if not new_pn <= pn or not new_col <= col:
            pn |= new_pn
            col |= new_col
            changed = True
    pn_pairs = frozenset(tuple(sorted(e)) for e in pn if e[0] != e[1])
    return RelationSet(nodes, pn_pairs,
                       {(x, y): nodes[x].period // nodes[y].period for x, y in col})


# ---------------------------------------------------------------------------
# generators


def _view(graph, census=None):
    """Normalize input to ('adjusted', AdjustedGraph) or ('condensed', records)."""
    if isinstance(graph, CondensedGraph):
        return "condensed", graph
    if isinstance(graph, ComponentGraph):
        graph = adjust(graph)
    if graph.graph.seams:
        return "condensed", condense(graph)
    return "adjusted", graph


def _adjusted_nodes_edges(adj: AdjustedGraph, census=None):
    g = adj.graph
    nodes: List[Node] = []
    pn: List[Tuple[str, str]] = []
    col: List[Tuple[str, str]] = []
    circle_node: Dict[int, str] = {}
    circle_orbits = permutation_cycles(g.circle_permutation)
    rep_of_circle = {c: orb[0] for orb in circle_orbits for c in orb}

    for orbit in permutation_cycles(g.piece_permutation):
        rep = g.piece_by_id[orbit[0]]
        ell = len(orbit)
        if rep.is_finite_order:
            m = rep.data.period
            reg = f"piece:{rep.id}/regular"
            nodes.append(Node(reg, ell * m, "FiniteOrderRegular", rep.euler_char))
            for i, bp in enumerate(rep.data.branch_points):
                b = f"piece:{rep.id}/branch:{i}"
                nodes.append(Node(b, ell * m // bp.local_order, "FiniteOrderBranch", 1))
                col.append((reg, b))
            cos = sorted({rep_of_circle[c] for p in orbit for c in g.piece_by_id[p].boundary})
            for c in cos:
                cid = f"circle:{c}"
                nodes.append(Node(cid, ell * m, "FiniteOrderRegular", None))
                circle_node[c] = cid
                pn.append((reg, cid))
    for orb in circle_orbits:
        c0 = orb[0]
        if g.owner(c0).is_pa:
            q = (g.circle_rotation(c0) % 1).denominator
            tag = "BoundaryPA" if g.attachment(c0).kind == "free" else "PeripheralPA"
            nodes.append(Node(f"circle:{c0}", len(orb) * q, tag, SYMBOLIC))
            circle_node[c0] = f"circle:{c0}"
    for orbit in permutation_cycles(g.annulus_permutation):
        a = g.annulus_by_id[orbit[0]]
        t = classify_annulus(a)
        if a.flipped:
            slots = [f"annulus:{a.id}/interior:{i}" for i in range(2)]
            for s in slots:
                nodes.append(Node(s, a.return_time, "FlipAnnulusInterior", 1))
            if t.untwisted:
                col.append((circle_node[rep_of_circle[a.sides[0]]], slots[0]))
        elif t.untwisted:
            pn.append((circle_node[rep_of_circle[a.sides[0]]],
                       circle_node[rep_of_circle[a.sides[1]]]))
    for rep, table in sorted(_census_map(g, census).items()):
        for period, count in sorted((table or {}).items()):
            for j in range(count):
                nodes.append(Node(f"piece:{rep}/interior:{period}.{j}", period,
                                  "InteriorPA", SYMBOLIC))
    return nodes, pn, col


def _condensed_nodes_edges(cg: CondensedGraph, census=None):
    records, _ = _inventory(cg.graph, census)
    nodes = [Node(r.site, r.period, r.type_tag, r.index) for r in records]
    pn: List[Tuple[str, str]] = []
    col: List[Tuple[str, str]] = []
    # the generating rules, applied to whatever survived condensation
    by_piece: Dict[str, Dict[str, List[str]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        if r.type_tag in ("FiniteOrderRegular", "FiniteOrderBranch"):
            by_piece[r.site.split("/")[0]][r.type_tag].append(r.site)
    for kinds in by_piece.values():
        for x in kinds["FiniteOrderRegular"]:
            for y in kinds["FiniteOrderBranch"]:
                col.append((x, y))
    site_of_circle = {r.site: r.site for r in records if r.site.startswith("circle:")}
    g = cg.graph
    rep_of_circle = {c: orb[0] for orb in permutation_cycles(g.circle_permutation) for c in orb}
    for a in g.annuli:
        t = classify_annulus(a)
        ends = [site_of_circle.get(f"circle:{rep_of_circle[c]}") for c in a.sides]
        if t.untwisted and not a.flipped and all(ends):
            pn.append((ends[0], ends[1]))
        if t.untwisted and a.flipped and ends[0]:
            col.append((ends[0], f"annulus:{a.id}/interior:0"))
    return nodes, pn, col


def base_relations(graph, max_period: int, census=None) -> RelationSet:
    """Generator edges among orbits of period at most ``max_period``."""
    kind, view = _view(graph, census)
    if kind == "adjusted":
        nodes, pn, col = _adjusted_nodes_edges(view, census)
    else:
        nodes, pn, col = _condensed_nodes_edges(view, census)
    kept = {n.id: n for n in nodes if n.period <= max_period}
    return RelationSet.build(kept.values(),
                             [(x, y) for x, y in pn if x in kept and y in kept],
                             [(x, y) for x, y in col if x in kept and y in kept])


# ---------------------------------------------------------------------------
# classes and predicates


@dataclass(frozen=True)
class NielsenClassRecord:
    id: int
    period: int
    members: Tuple[str, ...]
    types: Tuple[str, ...]
    collapsible: bool
    index: Union[int, str, None]
    essential: Optional[bool]
    persistent: Optional[bool]
    unremovable: Optional[bool]

    def to_dict(self) -> dict:
        return {"id": self.id, "period": self.period, "members": list(self.members),
                "types": list(self.types), "collapsible": self.collapsible,
                "index": self.index, "essential": self.essential,
                "persistent": self.persistent, "unremovable": self.unremovable}


def collapsible(members: Union[NielsenClassRecord, Iterable[str]], rels: RelationSet) -> bool:
    """True when some member collapses to an orbit of smaller period."""
    ids = members.members if isinstance(members, NielsenClassRecord) else members
    ids = set(ids)
    return any(x in ids for (x, _) in rels.collapse_edges)


def class_index(indices: Iterable[Union[int, str, None]]) -> Union[int, str, None]:
    indices = list(indices)
    if not indices or any(i is None for i in indices):
        return None
    if all(isinstance(i, int) for i in indices):
        return sum(indices)
    if len(indices) == 1:
        return indices[0]
    return None


def essential(cls_or_index) -> Optional[bool]:
    """Nonzero class index; None when the index is not known."""
    index = cls_or_index.index if isinstance(cls_or_index, NielsenClassRecord) else cls_or_index
    if index is None:
        return None
    if index == SYMBOLIC:
        return True
    return index != 0


def classes_of(rels: RelationSet) -> List[NielsenClassRecord]:
    closed = close_relations(rels)
    cls_of = _pn_classes(closed)
    groups: Dict[str, List[str]] = defaultdict(list)
    for x in sorted(closed.nodes, key=_node_key):
        groups[cls_of[x]].append(x)
    ordered = sorted(groups.values(), key=lambda ms: (closed.nodes[ms[0]].period, _node_key(ms[0])))
    out = []
    for i, ms in enumerate(ordered):
        col = collapsible(ms, closed)
        idx = class_index(closed.nodes[x].index for x in ms)
        ess = essential(idx)
        pers = False if col else ess
        out.append(NielsenClassRecord(i, closed.nodes[ms[0]].period, tuple(ms),
                                      tuple(closed.nodes[x].type_tag for x in ms),
                                      col, idx, ess, pers, pers))
    return out


def _node_key(x: str):
    return _site_key(x)


def persistence_report(graph, max_period: int, census=None) -> List[NielsenClassRecord]:
    """Per-class flags for every orbit class of period at most ``max_period``."""
    return classes_of(base_relations(graph, max_period, census))


@dataclass(frozen=True)
class PonResult:
    count: int
    exact: bool


def pon_count(graph, n: int, census=None) -> PonResult:
    """Uncollapsible essential period-``n`` orbit classes of the condensed map.

    The count is exact only when every pA component has a census reaching
    period ``n``; otherwise it is a lower bound.
    """
    condensed = graph if isinstance(graph, CondensedGraph) else condense(graph)
    report = persistence_report(condensed, n, census)
    count = sum(1 for c in report if c.period == n and not c.collapsible and c.essential is True)
    return PonResult(count, not census_coverage(condensed.graph, n, census))
