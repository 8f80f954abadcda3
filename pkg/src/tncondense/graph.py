"""Component graphs of Thurston-Nielsen reducible maps.

A component graph records a surface decomposition combinatorially: the
pieces (finite-order or pseudo-Anosov), the boundary circles they own, the
reducing annuli joining circles, and the permutation action of the map on
pieces, annuli and circles.  Nothing here knows about embeddings; everything
is up to isotopy.

Condensed graphs additionally carry *seams*: places where a reducing annulus
has been eliminated and two circles glued directly (``glue``), a pA circle
glued onto a bouquet loop of a finite-order piece (``bouquet``), or the
pinched remnant of a flipped annulus (``pinch``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union


class StructuralError(ValueError):
    """Raised when a graph is too inconsistent to be processed at all."""


@dataclass(frozen=True)
class BranchPoint:
    """One orbit of branch points of the return map of a finite-order piece."""

    local_order: int
    rotated: bool = False


@dataclass(frozen=True)
class FiniteOrder:
    period: int
    branch_points: Tuple[BranchPoint, ...] = ()

    kind = "finite-order"


@dataclass(frozen=True)
class PseudoAnosov:
    expansion: float
    # period -> number of interior periodic orbits of the phi-component
    census: Optional[Tuple[Tuple[int, int], ...]] = None

    kind = "pseudo-anosov"

    def census_dict(self) -> Optional[Dict[int, int]]:
        return None if self.census is None else dict(self.census)


ComponentData = Union[FiniteOrder, PseudoAnosov]


@dataclass(frozen=True)
class BoundaryCircle:
    id: int
    owner: int
    # rotation number of the return map's lift; None means unspecified.
    # For circles attached to an annulus the annulus record is authoritative.
    rotation: Optional[Fraction] = None
    prongs: int = 1
    # "left" or "right" for pA circles whose boundary orbit is fixed
    collapse: Optional[str] = None


@dataclass(frozen=True)
class SurfacePiece:
    id: int
    genus: int
    boundary: Tuple[int, ...]
    data: ComponentData

    @property
    def euler_char(self) -> int:
        return euler_characteristic(self)

    @property
    def is_pa(self) -> bool:
        return isinstance(self.data, PseudoAnosov)

    @property
    def is_finite_order(self) -> bool:
        return isinstance(self.data, FiniteOrder)


@dataclass(frozen=True)
class AnnulusRecord:
    id: int
    sides: Tuple[int, int]
    return_time: int
    flipped: bool
    rotations: Tuple[Optional[Fraction], Optional[Fraction]] = (None, None)


SEAM_KINDS = ("glue", "bouquet", "pinch")


@dataclass(frozen=True)
class Seam:
    id: int
    sides: Tuple[int, int]
    kind: str
    return_time: int = 1
    source_annulus: Optional[int] = None


@dataclass(frozen=True)
class Attachment:
    kind: str  # "free", "annulus" or "seam"
    ref: Optional[int] = None
    side: Optional[int] = None


@dataclass(frozen=True)
class ComponentGraph:
    pieces: Tuple[SurfacePiece, ...]
    circles: Tuple[BoundaryCircle, ...]
    annuli: Tuple[AnnulusRecord, ...] = ()
    piece_permutation: Mapping[int, int] = field(default_factory=dict)
    annulus_permutation: Mapping[int, int] = field(default_factory=dict)
    circle_permutation: Mapping[int, int] = field(default_factory=dict)
    seams: Tuple[Seam, ...] = ()

    # -- lookups -------------------------------------------------------
    @cached_property
    def piece_by_id(self) -> Dict[int, SurfacePiece]:
        return {p.id: p for p in self.pieces}

    @cached_property
    def circle_by_id(self) -> Dict[int, BoundaryCircle]:
        return {c.id: c for c in self.circles}

    @cached_property
    def annulus_by_id(self) -> Dict[int, AnnulusRecord]:
        return {a.id: a for a in self.annuli}

    @cached_property
    def seam_by_id(self) -> Dict[int, Seam]:
        return {s.id: s for s in self.seams}

    @cached_property
    def attachments(self) -> Dict[int, Attachment]:
        att = {c.id: Attachment("free") for c in self.circles}
        for a in self.annuli:
            for side, cid in enumerate(a.sides):
                att[cid] = Attachment("annulus", a.id, side)
        for s in self.seams:
            for side, cid in enumerate(s.sides):
                att[cid] = Attachment("seam", s.id, side)
        return att

    def attachment(self, circle_id: int) -> Attachment:
        return self.attachments[circle_id]

    def owner(self, circle_id: int) -> SurfacePiece:
        return self.piece_by_id[self.circle_by_id[circle_id].owner]

    def opposite(self, circle_id: int) -> Optional[int]:
        """The circle across the annulus or seam attached to ``circle_id``."""
        att = self.attachment(circle_id)
        if att.kind == "annulus":
            return self.annulus_by_id[att.ref].sides[1 - att.side]
        if att.kind == "seam":
            return self.seam_by_id[att.ref].sides[1 - att.side]
        return None

    def circle_rotation(self, circle_id: int) -> Optional[Fraction]:
        att = self.attachment(circle_id)
        if att.kind == "annulus":
            return self.annulus_by_id[att.ref].rotations[att.side]
        return self.circle_by_id[circle_id].rotation

    @property
    def euler_char(self) -> int:
        # annuli and seams contribute zero
        return sum(p.euler_char for p in self.pieces)

    def piece_orbit_length(self, piece_id: int) -> int:
        return _cycle_length(self.piece_permutation, piece_id)

    def circle_orbit_length(self, circle_id: int) -> int:
        return _cycle_length(self.circle_permutation, circle_id)

    def piece_orbit(self, piece_id: int) -> Tuple[int, ...]:
        return _cycle(self.piece_permutation, piece_id)

    def circle_orbit(self, circle_id: int) -> Tuple[int, ...]:
        return _cycle(self.circle_permutation, circle_id)


def euler_characteristic(piece: SurfacePiece) -> int:
    return 2 - 2 * piece.genus - len(piece.boundary)


def identity_permutation(ids: Iterable[int]) -> Dict[int, int]:
    return {i: i for i in ids}


def _cycle(perm: Mapping[int, int], start: int) -> Tuple[int, ...]:
    out = [start]
    x = perm[start]
    while x != start:
        out.append(x)
        if len(out) > len(perm):
            raise StructuralError(f"permutation is not a bijection near id {start}")
        x = perm[x]
    return tuple(out)


def _cycle_length(perm: Mapping[int, int], start: int) -> int:
    return len(_cycle(perm, start))


def permutation_cycles(perm: Mapping[int, int]) -> List[Tuple[int, ...]]:
    """Cycles of a permutation, each starting at its least element, sorted."""
    if sorted(perm.values()) != sorted(perm.keys()):
        raise StructuralError("permutation is not a bijection of its domain")
    seen = set()
    cycles = []
    for start in sorted(perm):
        if start in seen:
            continue
        cyc = _cycle(perm, start)
        seen.update(cyc)
        cycles.append(cyc)
    return cycles


def permutation_order(perm: Mapping[int, int]) -> int:
    order = 1
    for cyc in permutation_cycles(perm):
        order = order * len(cyc) // gcd(order, len(cyc))
    return order


# ---------------------------------------------------------------------------
# orbit decomposition


@dataclass(frozen=True)
class Orbit:
    kind: str  # "piece" or "annulus"
    members: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.members)


def orbit_decomposition(graph: ComponentGraph) -> List[Orbit]:
    """Split pieces and annuli into cycles of the map's action.

    Piece orbits come first, then annulus orbits; within each kind orbits are
    ordered by least member id and each cycle is listed starting from it.
    """
    for name, perm, ids in (
        ("piece", graph.piece_permutation, [p.id for p in graph.pieces]),
        ("annulus", graph.annulus_permutation, [a.id for a in graph.annuli]),
    ):
        if set(perm) != set(ids):
            raise StructuralError(f"{name} permutation domain does not match {name} ids")
    orbits = [Orbit("piece", c) for c in permutation_cycles(graph.piece_permutation)]
    orbits += [Orbit("annulus", c) for c in permutation_cycles(graph.annulus_permutation)]
    return orbits


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.subject}: {self.message} [{self.code}]"


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def lines(self) -> List[str]:
        return [str(v) for v in self.violations]


class ValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__("invalid component graph:\n" + "\n".join(report.lines()))
        self.report = report


def _is_bijection(perm: Mapping[int, int], ids: Iterable[int]) -> bool:
    ids = set(ids)
    return set(perm) == ids and set(perm.values()) == ids


def quotient_euler(piece: SurfacePiece) -> Fraction:
    """Euler characteristic of the quotient orbifold's underlying surface.

    Riemann-Hurwitz for the return map of period m with branch orbits of
    local orders k_i: chi(N) = m * (chi(N*) - sum(1 - 1/k_i)).
    """
    data = piece.data
    if not isinstance(data, FiniteOrder):
        raise TypeError("quotient_euler needs a finite-order piece")
    m = data.period
    return Fraction(piece.euler_char, m) + sum(
        (1 - Fraction(1, bp.local_order) for bp in data.branch_points), Fraction(0)
    )


def validate(graph: ComponentGraph) -> ValidationReport:
    """Check every structural invariant; never raises on bad data."""
    out: List[Violation] = []

    def bad(code: str, subject: str, message: str) -> None:
        out.append(Violation(code, subject, message))

    piece_ids = [p.id for p in graph.pieces]
    circle_ids = [c.id for c in graph.circles]
    annulus_ids = [a.id for a in graph.annuli]
    seam_ids = [s.id for s in graph.seams]
    for name, ids in (("piece", piece_ids), ("circle", circle_ids),
                      ("annulus", annulus_ids), ("seam", seam_ids)):
        if len(set(ids)) != len(ids):
            bad("duplicate-id", name, f"duplicate {name} ids")

    circles = graph.circle_by_id
    pieces = graph.piece_by_id

    # pieces and their circles
    owned: Dict[int, int] = {}
    for p in graph.pieces:
        subj = f"piece {p.id}"
        if p.genus < 0:
            bad("genus", subj, "genus must be non-negative")
        if p.euler_char >= 0:
            bad("euler-char", subj, f"euler_char < 0 required, got {p.euler_char}")
        for cid in p.boundary:
            if cid not in circles:
                bad("unknown-circle", subj, f"boundary circle {cid} is not declared")
                continue
            if cid in owned:
                bad("shared-circle", subj, f"circle {cid} already owned by piece {owned[cid]}")
            owned[cid] = p.id
            if circles[cid].owner != p.id:
                bad("owner", f"circle {cid}", f"owner {circles[cid].owner} disagrees with piece {p.id}")
        d = p.data
        if isinstance(d, FiniteOrder):
            if d.period < 1:
                bad("period", subj, "finite-order period must be positive")
            for bp in d.branch_points:
                if bp.local_order < 2 or d.period % bp.local_order:
                    bad("branch-order", subj,
                        f"branch local order {bp.local_order} must be >= 2 and divide {d.period}")
            if d.period >= 1 and all(bp.local_order >= 2 and d.period % bp.local_order == 0
                                     for bp in d.branch_points):
                chi_star = quotient_euler(p)
                if chi_star.denominator != 1:
                    bad("riemann-hurwitz", subj,
                        f"quotient Euler characteristic {chi_star} is not an integer")
                elif _is_bijection(graph.circle_permutation, circles):
                    # quotient boundary circles are the circle orbits meeting the piece
                    b_star = len({min(_cycle(graph.circle_permutation, c))
                                  for c in p.boundary if c in circles})
                    twice_genus = 2 - chi_star - b_star
                    if twice_genus < 0 or twice_genus % 2:
                        bad("riemann-hurwitz", subj,
                            f"quotient with euler characteristic {chi_star} and {b_star} "
                            f"boundary circles has no orientable genus")
        else:
            if not d.expansion > 1:
                bad("expansion", subj, f"expansion constant must exceed 1, got {d.expansion}")
            for cid in p.boundary:
                if cid in circles and circles[cid].prongs < 1:
                    bad("prongs", f"circle {cid}", "prong count must be positive")
    for c in graph.circles:
        if c.collapse not in (None, "left", "right"):
            bad("collapse", f"circle {c.id}", f"collapse choice must be left or right, got {c.collapse!r}")
    for c in graph.circles:
        if c.id not in owned:
            bad("orphan-circle", f"circle {c.id}", "not listed in any piece boundary")

    # annuli and seams
    used: Dict[int, str] = {}
    for a in graph.annuli:
        subj = f"annulus {a.id}"
        if a.return_time < 1:
            bad("return-time", subj, "return time must be positive")
        if a.sides[0] == a.sides[1]:
            bad("sides", subj, "an annulus needs two distinct side circles")
        for cid in a.sides:
            if cid not in circles:
                bad("unknown-circle", subj, f"side circle {cid} is not declared")
            elif cid in used:
                bad("double-attachment", f"circle {cid}", f"attached to both {used[cid]} and {subj}")
            else:
                used[cid] = subj
        r0, r1 = a.rotations
        if a.flipped and r0 is not None and r1 is not None and r1 != -r0:
            bad("flip-rotation", subj,
                f"flipped annulus needs rotations (r, -r), got ({r0}, {r1})")
    for s in graph.seams:
        subj = f"seam {s.id}"
        if s.kind not in SEAM_KINDS:
            bad("seam-kind", subj, f"unknown seam kind {s.kind!r}")
        for cid in s.sides:
            if cid not in circles:
                bad("unknown-circle", subj, f"side circle {cid} is not declared")
            elif cid in used:
                bad("double-attachment", f"circle {cid}", f"attached to both {used[cid]} and {subj}")
            else:
                used[cid] = subj

    # permutations
    perms_ok = True
    for name, perm, ids in (("piece", graph.piece_permutation, piece_ids),
                            ("annulus", graph.annulus_permutation, annulus_ids),
                            ("circle", graph.circle_permutation, circle_ids)):
        if not _is_bijection(perm, ids):
            bad("permutation", f"{name} permutation", "not a bijection of the declared ids")
            perms_ok = False
    if perms_ok and not out:
        _validate_action(graph, bad)

    if not out:
        _validate_topology(graph, bad)
    return ValidationReport(tuple(out))


def _validate_action(graph: ComponentGraph, bad) -> None:
    circles = graph.circle_by_id
    pieces = graph.piece_by_id
    pp, ap, cp = graph.piece_permutation, graph.annulus_permutation, graph.circle_permutation

    for c in graph.circles:
        if circles[cp[c.id]].owner != pp[c.owner]:
            bad("equivariance", f"circle {c.id}",
                f"image circle {cp[c.id]} is not owned by the image of piece {c.owner}")
    for p in graph.pieces:
        q = pieces[pp[p.id]]
        if type(p.data) is not type(q.data) or p.genus != q.genus or len(p.boundary) != len(q.boundary):
            bad("orbit-type", f"piece {p.id}", f"piece {q.id} in its orbit has a different type")
        elif p.data != q.data:
            bad("orbit-data", f"piece {p.id}", f"piece {q.id} in its orbit carries different data")
    for a in graph.annuli:
        b = graph.annulus_by_id[ap[a.id]]
        if {cp[a.sides[0]], cp[a.sides[1]]} != set(b.sides):
            bad("equivariance", f"annulus {a.id}",
                f"sides do not map onto the sides of annulus {b.id}")
            continue
        n = _cycle_length(ap, a.id)
        if a.return_time != n:
            bad("return-time", f"annulus {a.id}",
                f"return time {a.return_time} differs from annulus orbit length {n}")
            continue
        x = a.sides[0]
        for _ in range(n):
            x = cp[x]
        swapped = x == a.sides[1]
        if swapped != a.flipped:
            bad("flip-flag", f"annulus {a.id}",
                f"flipped={a.flipped} but the return map {'swaps' if swapped else 'keeps'} the sides")
        # rotation data must be constant along the annulus orbit
        if a.rotations != b.rotations:
            img = (cp[a.sides[0]], cp[a.sides[1]])
            mapped = a.rotations if img == b.sides else a.rotations[::-1]
            if mapped != b.rotations and None not in a.rotations and None not in b.rotations:
                bad("orbit-rotation", f"annulus {a.id}",
                    f"rotations differ from annulus {b.id} in its orbit")
    for s in graph.seams:
        if {cp[s.sides[0]], cp[s.sides[1]]} not in [set(t.sides) for t in graph.seams]:
            bad("equivariance", f"seam {s.id}", "sides do not map onto the sides of a seam")

    # rotation data on circles
    for c in graph.circles:
        owner = pieces[c.owner]
        rho = graph.circle_rotation(c.id)
        att = graph.attachment(c.id)
        if att.kind == "annulus" and c.rotation is not None and c.rotation != rho:
            bad("rotation-mismatch", f"circle {c.id}",
                f"circle rotation {c.rotation} disagrees with annulus side rotation {rho}")
        if rho is None:
            continue
        if owner.is_pa:
            q = (rho % 1).denominator
            if (2 * c.prongs) % q:
                bad("incompatible-rotation", f"circle {c.id}",
                    f"rotation {rho} has denominator {q} not dividing 2*prongs={2 * c.prongs}")
        else:
            m = owner.data.period
            ell = graph.piece_orbit_length(owner.id)
            ell_c = graph.circle_orbit_length(c.id)
            den = (rho % 1).denominator
            if m % den:
                bad("rotation-denominator", f"circle {c.id}",
                    f"rotation {rho} has denominator not dividing the period {m}")
            elif ell_c * den != ell * m:
                bad("irregular-peripheral", f"circle {c.id}",
                    f"peripheral points have period {ell_c * den}, expected regular period {ell * m}")

    for p in graph.pieces:
        if isinstance(p.data, PseudoAnosov) and p.data.census is not None:
            ell = graph.piece_orbit_length(p.id)
            for period, count in p.data.census:
                if period < 1 or count < 0:
                    bad("census", f"piece {p.id}", f"bad census entry {period}: {count}")
                elif period % ell:
                    bad("census", f"piece {p.id}",
                        f"census period {period} is not a multiple of the orbit length {ell}")

    for a in graph.annuli:
        t0, t1 = (pieces[circles[c].owner] for c in a.sides)
        if a.flipped and t0.is_pa != t1.is_pa:
            bad("flip-types", f"annulus {a.id}", "a flipped annulus joins pieces of one type")


def _validate_topology(graph: ComponentGraph, bad) -> None:
    # connectivity of the glued surface
    parent = {p.id: p.id for p in graph.pieces}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for joint in list(graph.annuli) + list(graph.seams):
        a, b = (graph.circle_by_id[c].owner for c in joint.sides)
        parent[find(a)] = find(b)
    roots = {find(p.id) for p in graph.pieces}
    if len(roots) > 1:
        bad("disconnected", "graph", f"surface has {len(roots)} connected components")
        return
    free = sum(1 for c in graph.circles if graph.attachment(c.id).kind == "free")
    twice_genus = 2 - graph.euler_char - free
    if twice_genus < 0 or twice_genus % 2:
        bad("ambient", "graph", f"gluing does not give an orientable surface (2g = {twice_genus})")


def ambient_surface(graph: ComponentGraph) -> Tuple[int, int, int]:
    """(genus, boundary count, Euler characteristic) of the glued surface M."""
    free = sum(1 for c in graph.circles if graph.attachment(c.id).kind == "free")
    chi = graph.euler_char
    return (2 - chi - free) // 2, free, chi
