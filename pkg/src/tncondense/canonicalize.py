"""Adjustment and condensation rewrites, fixed-point indices, orbit inventory.

``adjust`` normalizes a reducible map: every pA boundary circle gets its
collapse record, annulus interiors are classified, and finite-order pieces
joined by untwisted annuli are merged.  ``condense`` then replaces every
surviving untwisted annulus by a seam and computes the periodic orbits of the
resulting dynamically minimal representative.

Condensation is a pure function of the graph: seams remember what kind of
gluing they stand for, so condensing a condensed graph returns it unchanged.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .annulus import (CollapseChoice, IndeterminateTwist, boundary_orbit_structure,
                      classify_annulus, format_rational)
from .graph import (AnnulusRecord, BoundaryCircle, BranchPoint, ComponentGraph, FiniteOrder,
                    PseudoAnosov, Seam, StructuralError, SurfacePiece, ValidationError,
                    permutation_cycles, quotient_euler, validate)

SYMBOLIC = "nonzero-symbolic"

ORBIT_TYPES = ("InteriorPA", "BoundaryPA", "PeripheralPA",
               "FiniteOrderRegular", "FiniteOrderBranch", "FlipAnnulusInterior")


# ---------------------------------------------------------------------------
# indices


class SectorParityError(ValueError):
    pass


@dataclass(frozen=True)
class IndexSpec:
    """Local sector data of a fixed point: hyperbolic and parabolic sector counts."""

    h: int
    p: int
    k: int = 1
    rotated: bool = False

    def check(self) -> None:
        if self.h < 0 or self.p < 0:
            raise ValueError("sector counts must be non-negative")
        if (self.h - self.p) % 2:
            raise SectorParityError(f"h - p must be even, got h={self.h}, p={self.p}")

    @classmethod
    def for_index(cls, index: int, k: int = 1, rotated: bool = False) -> "IndexSpec":
        """A sector configuration realizing a given downstairs index."""
        if index <= 1:
            return cls(h=2 * (1 - index), p=0, k=k, rotated=rotated)
        return cls(h=0, p=2 * (index - 1), k=k, rotated=rotated)


def sector_index(spec: IndexSpec) -> int:
    spec.check()
    if spec.k != 1:
        raise ValueError("sector_index is for unbranched points; use branched_lift_index")
    return 1 + (spec.p - spec.h) // 2


def branched_lift_index(spec: IndexSpec) -> int:
    """Index upstairs of a fixed point lifted through ``z -> z**k``.

    A point whose return map rotates its neighborhood has index 1 whatever
    the downstairs sectors are.
    """
    spec.check()
    if spec.k < 2:
        raise ValueError("branched_lift_index needs local order k >= 2")
    if spec.rotated:
        return 1
    return 1 + spec.k * (spec.p - spec.h) // 2


# ---------------------------------------------------------------------------
# adjustment


@dataclass(frozen=True)
class CollapseRecord:
    circle: int
    prongs: int
    rotation: Fraction
    period: int  # period of the boundary orbit under the circle's return map
    collapsed_group_size: int
    choice: Optional[CollapseChoice]


@dataclass(frozen=True)
class InteriorContent:
    """Periodic content of an annulus interior: nothing, or the two flip orbits."""

    kind: str  # "empty" or "two-orbits"
    period: int = 0
    indices: Tuple[int, ...] = ()


EMPTY = InteriorContent("empty")


@dataclass(frozen=True)
class AdjustedGraph:
    graph: ComponentGraph
    annulus_interiors: Mapping[int, InteriorContent]
    collapse_records: Tuple[CollapseRecord, ...]
    log: Tuple[dict, ...] = ()


def _as_choice(value) -> CollapseChoice:
    return value if isinstance(value, CollapseChoice) else CollapseChoice(value)


def _require_valid(graph: ComponentGraph) -> None:
    report = validate(graph)
    if not report.ok:
        raise ValidationError(report)


def adjust(graph: ComponentGraph,
           collapse_choices: Union[None, str, CollapseChoice, Mapping[int, object]] = None
           ) -> AdjustedGraph:
    """Normalize a valid graph into adjusted form.

    ``collapse_choices`` is either one choice for every fixed pA boundary
    orbit or a mapping from circle id to choice.  Circles that already carry
    a choice keep it unless the mapping overrides it; the default is left.
    """
    _require_valid(graph)
    for a in graph.annuli:
        if classify_annulus(a).indeterminate:
            raise IndeterminateTwist(
                f"annulus {a.id}: side rotations unspecified, twist class indeterminate")
    for c in graph.circles:
        if graph.piece_by_id[c.owner].is_pa and graph.circle_rotation(c.id) is None:
            raise IndeterminateTwist(f"circle {c.id}: pA boundary rotation unspecified")
    for a in graph.annuli:
        t = classify_annulus(a)
        owners = [graph.owner(c) for c in a.sides]
        if t.flipped and t.untwisted and all(o.is_finite_order for o in owners):
            raise StructuralError(
                f"annulus {a.id}: flipped untwisted annulus between finite-order pieces "
                "is not supported")

    log: List[dict] = []
    graph = _merge_finite_order(graph, log)
    graph = _assign_collapse_choices(graph, collapse_choices)
    _require_valid(graph)

    interiors = {}
    for a in graph.annuli:
        if a.flipped:
            interiors[a.id] = InteriorContent("two-orbits", a.return_time, (1, 1))
        else:
            interiors[a.id] = EMPTY
    records = []
    for c in graph.circles:
        if not graph.piece_by_id[c.owner].is_pa:
            continue
        rho = graph.circle_rotation(c.id)
        bo = boundary_orbit_structure(c.prongs, rho)
        choice = _as_choice(c.collapse) if bo.collapse_choices else None
        records.append(CollapseRecord(c.id, c.prongs, rho, bo.period,
                                      bo.collapsed_group_size, choice))
    return AdjustedGraph(graph, interiors, tuple(records), tuple(log))


def _assign_collapse_choices(graph: ComponentGraph, choices) -> ComponentGraph:
    if isinstance(choices, Mapping):
        per_circle = {int(k): _as_choice(v) for k, v in choices.items()}
        default = None
    else:
        per_circle = {}
        default = None if choices is None else _as_choice(choices)
    circles = []
    for c in graph.circles:
        collapse = None
        if graph.piece_by_id[c.owner].is_pa:
            q = (graph.circle_rotation(c.id) % 1).denominator
            if q == 1:
                choice = per_circle.get(c.id, default)
                if choice is not None:
                    collapse = choice.value
                else:
                    collapse = c.collapse or CollapseChoice.LEFT.value
        circles.append(replace(c, collapse=collapse))
    return replace(graph, circles=tuple(circles))


def _merge_finite_order(graph: ComponentGraph, log: List[dict]) -> ComponentGraph:
    """Merge finite-order pieces joined by untwisted unflipped annuli."""
    parent = {p.id: p.id for p in graph.pieces}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merging = []
    for a in graph.annuli:
        t = classify_annulus(a)
        o0, o1 = (graph.owner(c) for c in a.sides)
        if not t.flipped and t.untwisted and o0.is_finite_order and o1.is_finite_order:
            merging.append(a)
            x, y = find(o0.id), find(o1.id)
            if x != y:
                parent[max(x, y)] = min(x, y)
    if not merging:
        return graph

    groups: Dict[int, List[int]] = defaultdict(list)
    for p in graph.pieces:
        groups[find(p.id)].append(p.id)
    rep_of = {pid: min(members) for members in groups.values() for pid in members}
    gone_annuli = {a.id for a in merging}
    gone_circles = {c for a in merging for c in a.sides}

    new_perm = {}
    for rep in {rep_of[p] for p in rep_of}:
        new_perm[rep] = rep_of[graph.piece_permutation[rep]]
    # the group map must be well defined on every member
    for pid, rep in rep_of.items():
        if rep_of[graph.piece_permutation[pid]] != new_perm[rep]:
            raise StructuralError(f"merge of piece {pid} is not equivariant")

    def orbit_len(perm, x):
        n, y = 1, perm[x]
        while y != x:
            n, y = n + 1, perm[y]
        return n

    pieces = []
    for rep, members in sorted(groups.items(), key=lambda kv: min(kv[1])):
        rep = min(members)
        if len(members) == 1:
            pieces.append(graph.piece_by_id[rep])
            continue
        member_pieces = [graph.piece_by_id[m] for m in sorted(members)]
        full_periods = {graph.piece_orbit_length(m.id) * m.data.period for m in member_pieces}
        if len(full_periods) != 1:
            raise StructuralError(f"pieces {sorted(members)} disagree on their full period")
        full = full_periods.pop()
        ell = orbit_len(new_perm, rep)
        if full % ell:
            raise StructuralError(f"merged piece {rep}: orbit length {ell} does not divide {full}")
        # one representative per old piece orbit meeting the group
        branch: List[BranchPoint] = []
        seen_orbits = set()
        for m in member_pieces:
            orbit = frozenset(graph.piece_orbit(m.id))
            if orbit not in seen_orbits:
                seen_orbits.add(orbit)
                branch.extend(m.data.branch_points)
        chi = sum(m.euler_char for m in member_pieces)
        boundary = tuple(c for m in member_pieces for c in m.boundary if c not in gone_circles)
        twice_genus = 2 - chi - len(boundary)
        if twice_genus < 0 or twice_genus % 2:
            raise StructuralError(f"merged piece {rep} is not an orientable surface")
        pieces.append(SurfacePiece(rep, twice_genus // 2, boundary,
                                   FiniteOrder(full // ell, tuple(branch))))
        log.append({"event": "merge", "pieces": sorted(members), "into": rep,
                    "annuli": sorted(a.id for a in merging
                                     if rep_of[graph.owner(a.sides[0]).id] == rep)})

    circles = tuple(replace(c, owner=rep_of[c.owner]) for c in graph.circles
                    if c.id not in gone_circles)
    annuli = tuple(a for a in graph.annuli if a.id not in gone_annuli)
    return ComponentGraph(
        pieces=tuple(pieces),
        circles=circles,
        annuli=annuli,
        piece_permutation=new_perm,
        annulus_permutation={k: v for k, v in graph.annulus_permutation.items()
                             if k not in gone_annuli},
        circle_permutation={k: v for k, v in graph.circle_permutation.items()
                            if k not in gone_circles},
        seams=graph.seams,
    )


# ---------------------------------------------------------------------------
# condensation


@dataclass(frozen=True)
class OrbitRecord:
    id: int
    type_tag: str
    period: int
    index: Union[int, str, None]
    points_per_orbit: int
    site: str
    absorbed: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"id": self.id, "type": self.type_tag, "period": self.period,
                "index": self.index, "points_per_orbit": self.points_per_orbit,
                "site": self.site, "absorbed": list(self.absorbed)}


@dataclass(frozen=True)
class CondensedGraph:
    graph: ComponentGraph
    identification_log: Tuple[dict, ...]
    orbit_inventory: Tuple[OrbitRecord, ...]
    collapse_records: Tuple[CollapseRecord, ...] = ()


def _untwisted_link(graph: ComponentGraph, circle_id: int):
    """Kind of untwisted connection at a circle: None, or (flipped, other circle)."""
    att = graph.attachment(circle_id)
    if att.kind == "seam":
        s = graph.seam_by_id[att.ref]
        return (s.kind == "pinch", s.sides[1 - att.side])
    if att.kind == "annulus":
        a = graph.annulus_by_id[att.ref]
        t = classify_annulus(a)
        if t.untwisted:
            return (a.flipped, a.sides[1 - att.side])
    return None


def finite_order_case(graph: ComponentGraph, piece_id: int) -> int:
    """Which of the four finite-order constructions applies to a piece (1-4)."""
    piece = graph.piece_by_id[piece_id]
    if not piece.is_finite_order:
        raise ValueError(f"piece {piece_id} is not finite-order")
    has_branch = bool(piece.data.branch_points)
    has_untwisted = any(_untwisted_link(graph, c) is not None for c in piece.boundary)
    return {(False, False): 1, (False, True): 2, (True, False): 3, (True, True): 4}[
        (has_branch, has_untwisted)]


def condense(adjusted: Union[AdjustedGraph, CondensedGraph, ComponentGraph]) -> CondensedGraph:
    """Replace untwisted annuli by seams and build the minimal orbit inventory.

    Accepts an adjusted graph, a condensed graph (inventory rebuilt, graph
    and log kept) or a raw graph (adjusted first with default collapse
    choices).
    """
    if isinstance(adjusted, CondensedGraph):
        _require_valid(adjusted.graph)
        if any(classify_annulus(a).untwisted for a in adjusted.graph.annuli):
            raise StructuralError("condensed graph still has untwisted annuli")
        records, _ = _inventory(adjusted.graph, census=None)
        return replace(adjusted, orbit_inventory=tuple(records))
    if isinstance(adjusted, ComponentGraph):
        adjusted = adjust(adjusted)
    graph = adjusted.graph
    log: List[dict] = list(adjusted.log)

    annuli, seams, circles = [], list(graph.seams), {c.id: c for c in graph.circles}
    for a in graph.annuli:
        t = classify_annulus(a)
        if not t.untwisted:
            annuli.append(a)
            continue
        o0, o1 = (graph.owner(c) for c in a.sides)
        if a.flipped:
            kind = "pinch"
        elif o0.is_pa and o1.is_pa:
            kind = "glue"
        else:
            kind = "bouquet"
        seams.append(Seam(a.id, a.sides, kind, a.return_time, a.id))
        for side, cid in enumerate(a.sides):
            circles[cid] = replace(circles[cid], rotation=a.rotations[side])
        log.append({"event": kind, "annulus": a.id, "circles": list(a.sides)})
    annulus_perm = {k: v for k, v in graph.annulus_permutation.items()
                    if k in {a.id for a in annuli}}
    new_graph = replace(graph, annuli=tuple(annuli), annulus_permutation=annulus_perm,
                        circles=tuple(circles[c.id] for c in graph.circles),
                        seams=tuple(sorted(seams, key=lambda s: s.id)))
    _require_valid(new_graph)

    records, events = _inventory(new_graph, census=None)
    log.extend(events)
    return CondensedGraph(new_graph, tuple(log), tuple(records), adjusted.collapse_records)


def _piece_orbits(graph: ComponentGraph) -> List[Tuple[int, ...]]:
    return permutation_cycles(graph.piece_permutation)


def _circle_orbits(graph: ComponentGraph) -> List[Tuple[int, ...]]:
    return permutation_cycles(graph.circle_permutation)


def _inventory(graph: ComponentGraph, census: Optional[Mapping[int, Mapping[int, int]]]):
    """Orbit records of the condensed representative of ``graph``.

    Returns (records, log events).  Records are sorted by period, then type,
    then site, and numbered in that order.
    """
    events: List[dict] = []
    raw: List[dict] = []  # mutable drafts before numbering
    circle_orbit_rep = {}
    for orbit in _circle_orbits(graph):
        for c in orbit:
            circle_orbit_rep[c] = orbit[0]
    piece_orbit_rep = {}
    for orbit in _piece_orbits(graph):
        for p in orbit:
            piece_orbit_rep[p] = orbit[0]

    # where each circle orbit's peripheral pA orbit ends up
    absorber: Dict[int, dict] = {}

    for orbit in _piece_orbits(graph):
        rep = graph.piece_by_id[orbit[0]]
        if not rep.is_finite_order:
            continue
        ell, m = len(orbit), rep.data.period
        case = finite_order_case(graph, rep.id)
        chi_star = quotient_euler(rep)
        if chi_star.denominator != 1:
            raise StructuralError(f"piece {rep.id}: non-integral quotient Euler characteristic")
        chi_star = int(chi_star)
        loops = sorted({circle_orbit_rep[c] for p in orbit
                        for c in graph.piece_by_id[p].boundary
                        if _untwisted_link(graph, c) is not None})
        events.append({"event": "case", "piece": rep.id, "case": case,
                       "orbit": list(orbit), "quotient_euler": chi_star,
                       "bouquet_loops": loops})
        if case in (1, 2):
            center = {"type": "FiniteOrderRegular", "period": ell * m, "index": chi_star,
                      "site": f"piece:{rep.id}", "absorbed": []}
            raw.append(center)
        else:
            n = len(rep.data.branch_points)
            center = None
            for i, bp in enumerate(rep.data.branch_points):
                base = chi_star - (n - 1) if i == 0 else 1
                spec = IndexSpec.for_index(base, k=bp.local_order, rotated=bp.rotated)
                rec = {"type": "FiniteOrderBranch", "period": ell * m // bp.local_order,
                       "index": branched_lift_index(spec),
                       "site": f"piece:{rep.id}/branch:{i}", "absorbed": []}
                raw.append(rec)
                if i == 0:
                    center = rec
        # pA orbits glued onto the bouquet loops coalesce into its center
        for p in orbit:
            for c in graph.piece_by_id[p].boundary:
                link = _untwisted_link(graph, c)
                if link is not None and graph.owner(link[1]).is_pa:
                    absorber[circle_orbit_rep[link[1]]] = center

    # flip annulus interiors, surviving or pinched
    for orbit in _circle_orbits(graph):
        c0 = orbit[0]
        att = graph.attachment(c0)
        if att.kind == "annulus":
            a = graph.annulus_by_id[att.ref]
            if not a.flipped:
                continue
            site, n = f"annulus:{_least_in_orbit(graph.annulus_permutation, a.id)}", a.return_time
        elif att.kind == "seam" and graph.seam_by_id[att.ref].kind == "pinch":
            s = graph.seam_by_id[att.ref]
            site, n = f"seam:{_least_seam(graph, orbit)}", s.return_time
        else:
            continue
        slots = []
        for slot in range(2):
            rec = {"type": "FlipAnnulusInterior", "period": n, "index": 1,
                   "site": f"{site}/interior:{slot}", "absorbed": []}
            raw.append(rec)
            slots.append(rec)
        if att.kind == "seam":
            absorber[c0] = slots[0]

    # pA boundary orbits
    pa_records: Dict[int, dict] = {}
    for orbit in _circle_orbits(graph):
        c0 = orbit[0]
        if not graph.owner(c0).is_pa:
            continue
        q = (graph.circle_rotation(c0) % 1).denominator
        tag = "BoundaryPA" if graph.attachment(c0).kind == "free" else "PeripheralPA"
        pa_records[c0] = {"type": tag, "period": len(orbit) * q, "index": SYMBOLIC,
                          "site": f"circle:{c0}", "absorbed": []}
    for c0, rec in sorted(pa_records.items()):
        link = _untwisted_link(graph, c0)
        target = absorber.get(c0)
        if target is None and link is not None and not link[0]:
            other = circle_orbit_rep[link[1]]
            if other in pa_records and other < c0:
                target = pa_records[other]
        if target is None:
            raw.append(rec)
            continue
        if target["period"] % rec["period"] and rec["period"] % target["period"]:
            raise StructuralError(f"circle orbit {c0}: period {rec['period']} cannot coalesce "
                                  f"into {target['site']} of period {target['period']}")
        target["absorbed"].append(rec["site"])
        target["absorbed"].extend(rec["absorbed"])
        events.append({"event": "coalesce", "from": rec["site"], "into": target["site"]})

    census_map = _census_map(graph, census)
    for orbit in _piece_orbits(graph):
        rep = graph.piece_by_id[orbit[0]]
        if not rep.is_pa:
            continue
        table = census_map.get(rep.id)
        for period, count in sorted((table or {}).items()):
            for j in range(count):
                raw.append({"type": "InteriorPA", "period": period, "index": SYMBOLIC,
                            "site": f"piece:{rep.id}/interior:{period}.{j}", "absorbed": []})

    type_rank = {t: i for i, t in enumerate(ORBIT_TYPES)}
    raw.sort(key=lambda r: (r["period"], type_rank[r["type"]], _site_key(r["site"])))
    records = [OrbitRecord(i, r["type"], r["period"], r["index"], r["period"], r["site"],
                           tuple(sorted(r["absorbed"], key=_site_key)))
               for i, r in enumerate(raw)]
    return records, events


def _site_key(site: str):
    out = []
    for part in site.replace("/", ":").replace(".", ":").split(":"):
        out.append((0, int(part), "") if part.isdigit() else (1, 0, part))
    return tuple(out)


def _least_in_orbit(perm: Mapping[int, int], x: int) -> int:
    best, y = x, perm[x]
    while y != x:
        best, y = min(best, y), perm[y]
    return best


def _least_seam(graph: ComponentGraph, circle_orbit: Sequence[int]) -> int:
    return min(graph.attachment(c).ref for c in circle_orbit
               if graph.attachment(c).kind == "seam")


def _census_map(graph: ComponentGraph, census) -> Dict[int, Optional[Dict[int, int]]]:
    """Census tables keyed by the least piece id of each pA orbit."""
    out: Dict[int, Optional[Dict[int, int]]] = {}
    for orbit in _piece_orbits(graph):
        rep = graph.piece_by_id[orbit[0]]
        if not rep.is_pa:
            continue
        table = None
        if census is not None:
            for p in orbit:
                if p in census:
                    table = {int(k): int(v) for k, v in census[p].items()}
        if table is None:
            for p in orbit:
                d = graph.piece_by_id[p].data.census_dict()
                if d is not None:
                    table = d
                    break
        out[rep.id] = table
    return out


@dataclass(frozen=True)
class Inventory:
    records: Tuple[OrbitRecord, ...]
    counts: Mapping[int, int]
    census_absent: Tuple[int, ...]  # pA orbit representatives lacking a census to N

    @property
    def complete(self) -> bool:
        return not self.census_absent


def census_coverage(graph: ComponentGraph, n: int, census=None) -> Tuple[int, ...]:
    """pA orbit representatives whose census does not cover period ``n``.

    A census is taken to be complete for every period up to its largest key.
    """
    missing = []
    for rep, table in sorted(_census_map(graph, census).items()):
        if table is None or not table or max(table) < n:
            missing.append(rep)
    return tuple(missing)


def periodic_inventory(condensed: Union[CondensedGraph, ComponentGraph], max_period: int,
                       census: Optional[Mapping[int, Mapping[int, int]]] = None) -> Inventory:
    """All orbits of period at most ``max_period`` of the condensed representative."""
    if not isinstance(condensed, CondensedGraph):
        condensed = condense(condensed)
    graph = condensed.graph
    if max_period < 1:
        return Inventory((), {}, census_coverage(graph, 0, census))
    records, _ = _inventory(graph, census)
    kept = tuple(r for r in records if r.period <= max_period)
    counts: Dict[int, int] = {}
    for r in kept:
        counts[r.period] = counts.get(r.period, 0) + 1
    return Inventory(kept, dict(sorted(counts.items())),
                     census_coverage(graph, max_period, census))


def inventory_summary(records: Iterable[OrbitRecord]) -> List[Tuple[str, int, object]]:
    return [(r.type_tag, r.period, r.index) for r in records]


__all__ = [
    "SYMBOLIC", "ORBIT_TYPES", "IndexSpec", "SectorParityError", "sector_index",
    "branched_lift_index", "CollapseRecord", "InteriorContent", "AdjustedGraph", "adjust",
    "OrbitRecord", "CondensedGraph", "condense", "finite_order_case", "Inventory",
    "periodic_inventory", "census_coverage", "quotient_euler", "format_rational",
]
