"""Graph documents (JSON), report tables and DOT output.

Document layout::

    {
      "pieces": [{"id": 0, "genus": 1, "boundary": [0, {"id": 1, "rotation": "1/2", "prongs": 2}],
                  "kind": "pseudo-anosov", "expansion": 2.0}, ...],
      "annuli": [{"id": 0, "sides": [0, 3], "return_time": 1, "flipped": false,
                  "rotations": ["1/2", "1/2"]}, ...],
      "permutations": {"pieces": {"2": 3, "3": 2}, "annuli": {}, "circles": {}},
      "census": {"1": {"1": 2}},
      "seams": [...]
    }

Boundary entries are circle ids, or objects when the circle carries a
rotation, a prong count or a collapse choice.  Permutation entries that are
omitted are fixed points.  Emission is canonical: fixed key order, sorted
ids, lowest-terms rationals, identity entries dropped.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .annulus import format_rational, parse_rational
from .canonicalize import AdjustedGraph, CondensedGraph, OrbitRecord
from .graph import (AnnulusRecord, BoundaryCircle, BranchPoint, ComponentGraph, FiniteOrder,
                    PseudoAnosov, Seam, SurfacePiece)


class DocumentError(ValueError):
    pass


def load_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{source}: malformed JSON at line {exc.lineno} column {exc.colno}: "
                            f"{exc.msg}") from exc


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise DocumentError(f"{what} must be an integer, got {value!r}")
    try:
        return int(value)
    except ValueError as exc:
        raise DocumentError(f"{what} must be an integer, got {value!r}") from exc


def _rational(value, what: str) -> Optional[Fraction]:
    if value is None:
        return None
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise DocumentError(f"{what}: {exc}") from exc


def graph_from_doc(doc: dict) -> ComponentGraph:
    """Build a ComponentGraph from a parsed document (no validation)."""
    if not isinstance(doc, dict):
        raise DocumentError("graph document must be a JSON object")
    for key in ("pieces", "annuli", "permutations"):
        if key not in doc:
            raise DocumentError(f"missing top-level key {key!r}")
    census = {}
    for pid, table in (doc.get("census") or {}).items():
        if not isinstance(table, dict):
            raise DocumentError(f"census for piece {pid} must be an object")
        census[_int(pid, "census piece id")] = tuple(sorted(
            (_int(k, "census period"), _int(v, "census count")) for k, v in table.items()))

    pieces, circles = [], []
    try:
        for p in doc["pieces"]:
            pid = _int(p["id"], "piece id")
            ids = []
            for entry in p.get("boundary", []):
                if isinstance(entry, dict):
                    cid = _int(entry["id"], "circle id")
                    circles.append(BoundaryCircle(
                        cid, pid, _rational(entry.get("rotation"), f"circle {cid} rotation"),
                        _int(entry.get("prongs", 1), "prongs"), entry.get("collapse")))
                else:
                    cid = _int(entry, "circle id")
                    circles.append(BoundaryCircle(cid, pid))
                ids.append(cid)
            kind = p.get("kind")
            if kind == "finite-order":
                data = FiniteOrder(_int(p["period"], "period"), tuple(
                    BranchPoint(_int(b["local_order"], "local_order"), bool(b.get("rotated", False)))
                    for b in p.get("branch_points", [])))
            elif kind == "pseudo-anosov":
                data = PseudoAnosov(float(p["expansion"]), census.get(pid))
            else:
                raise DocumentError(f"piece {pid}: unknown kind {kind!r}")
            pieces.append(SurfacePiece(pid, _int(p["genus"], "genus"), tuple(ids), data))

        annuli = []
        for a in doc["annuli"]:
            rots = a.get("rotations", [None, None])
            if len(rots) != 2 or len(a["sides"]) != 2:
                raise DocumentError(f"annulus {a.get('id')}: sides and rotations must be pairs")
            annuli.append(AnnulusRecord(
                _int(a["id"], "annulus id"), tuple(_int(s, "side") for s in a["sides"]),
                _int(a.get("return_time", 1), "return_time"), bool(a.get("flipped", False)),
                tuple(_rational(r, f"annulus {a['id']} rotation") for r in rots)))
        seams = []
        for s in doc.get("seams", []):
            seams.append(Seam(_int(s["id"], "seam id"), tuple(_int(c, "side") for c in s["sides"]),
                              str(s["kind"]), _int(s.get("return_time", 1), "return_time"),
                              None if s.get("source_annulus") is None
                              else _int(s["source_annulus"], "source_annulus")))
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed graph document: {exc!r}") from exc

    perms = doc["permutations"] or {}

    def perm(name, ids):
        table = {i: i for i in ids}
        for k, v in (perms.get(name) or {}).items():
            table[_int(k, f"{name} permutation key")] = _int(v, f"{name} permutation value")
        return table

    return ComponentGraph(
        pieces=tuple(pieces),
        circles=tuple(sorted(circles, key=lambda c: c.id)),
        annuli=tuple(annuli),
        piece_permutation=perm("pieces", [p.id for p in pieces]),
        annulus_permutation=perm("annuli", [a.id for a in annuli]),
        circle_permutation=perm("circles", [c.id for c in circles]),
        seams=tuple(seams),
    )


def _rat(value: Optional[Fraction]):
    return None if value is None else format_rational(value)


def graph_to_doc(graph: ComponentGraph) -> dict:
    circles = graph.circle_by_id
    pieces = []
    for p in sorted(graph.pieces, key=lambda p: p.id):
        boundary = []
        for cid in p.boundary:
            c = circles[cid]
            att = graph.attachment(cid)
            # annulus sides carry the authoritative rotation
            rot = None if att.kind == "annulus" else c.rotation
            if rot is None and c.prongs == 1 and c.collapse is None:
                boundary.append(cid)
            else:
                entry = {"id": cid}
                if rot is not None:
                    entry["rotation"] = _rat(rot)
                if c.prongs != 1 or p.is_pa:
                    entry["prongs"] = c.prongs
                if c.collapse is not None:
                    entry["collapse"] = c.collapse
                boundary.append(entry)
        d = {"id": p.id, "genus": p.genus, "boundary": boundary, "kind": p.data.kind}
        if isinstance(p.data, FiniteOrder):
            d["period"] = p.data.period
            d["branch_points"] = [{"local_order": b.local_order, "rotated": b.rotated}
                                  for b in p.data.branch_points]
        else:
            d["expansion"] = p.data.expansion
        pieces.append(d)
    annuli = [{"id": a.id, "sides": list(a.sides), "return_time": a.return_time,
               "flipped": a.flipped, "rotations": [_rat(r) for r in a.rotations]}
              for a in sorted(graph.annuli, key=lambda a: a.id)]

    def perm(table):
        return {str(k): v for k, v in sorted(table.items()) if k != v}

    doc = {
        "pieces": pieces,
        "annuli": annuli,
        "permutations": {"pieces": perm(graph.piece_permutation),
                         "annuli": perm(graph.annulus_permutation),
                         "circles": perm(graph.circle_permutation)},
    }
    census = {str(p.id): {str(k): v for k, v in p.data.census}
              for p in sorted(graph.pieces, key=lambda p: p.id)
              if isinstance(p.data, PseudoAnosov) and p.data.census is not None}
    if census:
        doc["census"] = census
    if graph.seams:
        doc["seams"] = [{"id": s.id, "sides": list(s.sides), "kind": s.kind,
                         "return_time": s.return_time, "source_annulus": s.source_annulus}
                        for s in sorted(graph.seams, key=lambda s: s.id)]
    return doc


def adjusted_to_doc(adj: AdjustedGraph) -> dict:
    doc = graph_to_doc(adj.graph)
    doc["annulus_interiors"] = {
        str(k): ({"kind": v.kind} if v.kind == "empty" else
                 {"kind": v.kind, "period": v.period, "indices": list(v.indices)})
        for k, v in sorted(adj.annulus_interiors.items())}
    doc["collapse_records"] = [
        {"circle": r.circle, "prongs": r.prongs, "rotation": _rat(r.rotation),
         "period": r.period, "collapsed_group_size": r.collapsed_group_size,
         "choice": None if r.choice is None else r.choice.value}
        for r in adj.collapse_records]
    doc["identification_log"] = list(adj.log)
    return doc


def condensed_to_doc(cg: CondensedGraph) -> dict:
    doc = graph_to_doc(cg.graph)
    doc["identification_log"] = list(cg.identification_log)
    doc["orbit_inventory"] = [r.to_dict() for r in cg.orbit_inventory]
    return doc


def condensed_from_doc(doc: dict) -> CondensedGraph:
    """Read back a condensed document; the inventory is recomputed, the log kept."""
    from .canonicalize import condense
    graph = graph_from_doc(doc)
    log = doc.get("identification_log") or []
    if not isinstance(log, list):
        raise DocumentError("identification_log must be an array")
    return condense(CondensedGraph(graph, tuple(log), ()))


def graph_or_condensed(doc: dict):
    """A CondensedGraph when ``doc`` carries an orbit inventory, else a ComponentGraph."""
    if isinstance(doc, dict) and "orbit_inventory" in doc:
        return condensed_from_doc(doc)
    return graph_from_doc(doc)


def _default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return format_rational(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, default=_default) + "\n"


# ---------------------------------------------------------------------------
# text and DOT rendering


def text_table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    cells = [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if value is None:
        return "?"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _dot_id(x: str) -> str:
    return '"' + x.replace('"', '\\"') + '"'


def relations_dot(rels, name: str = "relations") -> str:
    """pn edges solid and undirected, collapse edges dashed and directed."""
    lines = [f"digraph {name} {{"]
    for nid in sorted(rels.nodes):
        n = rels.nodes[nid]
        index = "?" if n.index is None else n.index
        lines.append(f"  {_dot_id(nid)} [label={_dot_id(f'{n.type_tag}:{n.period}:{index}')}];")
    for x, y in sorted(rels.pn_edges):
        lines.append(f"  {_dot_id(x)} -> {_dot_id(y)} [dir=none, style=solid];")
    for (x, y), mult in sorted(rels.collapse_edges.items()):
        lines.append(f"  {_dot_id(x)} -> {_dot_id(y)} [style=dashed, label=\"x{mult}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def pairs_csv(rows: Iterable[dict]) -> str:
    import csv
    import io
    rows = list(rows)
    buf = io.StringIO()
    cols = ["period", "x0", "x1", "y0", "y1", "d_u", "d_s", "d_phi", "residual", "matched"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for k, v in r.items()})
    return buf.getvalue()
