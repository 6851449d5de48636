"""Reading and writing the on-disk formats.

* ``.bridge.json``  - a PairState
* ``.moves.json``   - an ordered move script
* ``.qword.json``   - an annulus word for a separating torus
* ``.crush.json``   - a crushing specification

All numbers are exact: integers stay integers and half-integers are the
strings ``"p/2"``.  Writing is deterministic (sorted keys, canonical
ordering) so files are diff-stable.
"""

from __future__ import annotations

import json

from .model import PairState, Puncture, SurfaceRec, TangleData, VpcRec, ROLES


class MalformedInput(Exception):
    """The file does not parse against its schema."""


def _need(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedInput(f"{where}: missing field {key!r}")
    return obj[key]


def _pairs(raw, where):
    out = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise MalformedInput(f"{where}: arc {item!r} is not a pair")
        out.append((str(item[0]), str(item[1])))
    return tuple(out)


def tangle_from_json(raw, where="tangle") -> TangleData:
    if not isinstance(raw, dict):
        raise MalformedInput(f"{where}: not an object")
    loops = raw.get("coreLoops", 0)
    if not isinstance(loops, int) or isinstance(loops, bool):
        raise MalformedInput(f"{where}: coreLoops must be an integer")
    return TangleData(
        bridge=_pairs(raw.get("bridge", ()), where),
        vertical=_pairs(raw.get("vertical", ()), where),
        ghost=_pairs(raw.get("ghost", ()), where),
        core_loops=loops,
    )


def tangle_to_json(t: TangleData) -> dict:
    return {
        "bridge": [list(a) for a in sorted(t.bridge)],
        "vertical": [list(a) for a in sorted(t.vertical)],
        "ghost": [list(a) for a in sorted(t.ghost)],
        "coreLoops": t.core_loops,
    }


def state_from_json(doc) -> PairState:
    try:
        surfaces = []
        for raw in _need(doc, "surfaces", "state"):
            punctures = []
            for p in raw.get("punctures", ()):
                weight = _need(p, "weight", "puncture")
                if not isinstance(weight, int) or isinstance(weight, bool):
                    raise MalformedInput("puncture weight must be an integer")
                punctures.append(Puncture(str(_need(p, "id", "puncture")), weight))
            role = str(_need(raw, "role", "surface"))
            if role not in ROLES:
                raise MalformedInput(f"surface role {role!r} unknown")
            genus = _need(raw, "genus", "surface")
            if not isinstance(genus, int) or isinstance(genus, bool):
                raise MalformedInput("surface genus must be an integer")
            direction = raw.get("direction")
            surfaces.append(SurfaceRec(
                id=str(_need(raw, "id", "surface")),
                role=role,
                genus=genus,
                punctures=tuple(punctures),
                direction=None if direction is None else str(direction),
            ))
        vpcs = []
        for raw in _need(doc, "vpcs", "state"):
            vpcs.append(VpcRec(
                id=str(_need(raw, "id", "vpc")),
                positive=str(_need(raw, "positive", "vpc")),
                negatives=tuple(str(n) for n in raw.get("negatives", ())),
                tangle=tangle_from_json(raw.get("tangle", {}), "vpc tangle"),
            ))
        flags = doc.get("flags", {})
        return PairState(
            surfaces=tuple(surfaces),
            vpcs=tuple(vpcs),
            every_sphere_separates=bool(flags.get("everySphereSeparates", True)),
            irreducible=bool(flags.get("irreducible", True)),
        ).sorted()
    except MalformedInput:
        raise
    except (TypeError, KeyError, ValueError, AttributeError) as exc:
        raise MalformedInput(f"bad state document: {exc}") from exc


def state_to_json(state: PairState) -> dict:
    state = state.sorted()
    return {
        "surfaces": [
            {
                "id": s.id,
                "role": s.role,
                "genus": s.genus,
                "punctures": [{"id": p.id, "weight": p.weight}
                              for p in s.punctures],
                "direction": s.direction,
            }
            for s in state.surfaces
        ],
        "vpcs": [
            {
                "id": v.id,
                "positive": v.positive,
                "negatives": sorted(v.negatives),
                "tangle": tangle_to_json(v.tangle),
            }
            for v in state.vpcs
        ],
        "flags": {
            "everySphereSeparates": state.every_sphere_separates,
            "irreducible": state.irreducible,
        },
    }


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_state(path) -> PairState:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"{path}: {exc}") from exc
    return state_from_json(doc)


def save_state(state: PairState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(state_to_json(state)))


def dot_digraph(state: PairState) -> str:
    """The dual digraph in DOT form; thin edges dashed, genus as labels."""
    from .model import dual_digraph

    lines = ["digraph dual {"]
    for v in sorted(state.vpcs, key=lambda v: v.id):
        lines.append(f'  "{v.id}" [shape=point, xlabel="{v.id}"];')
    smap = state.surface_map()
    for sid, tail, head in sorted(dual_digraph(state)):
        s = smap[sid]
        style = "dashed" if s.role == "thin" else "solid"
        lines.append(f'  "{tail}" -> "{head}" '
                     f'[label="{sid} g{s.genus} w{s.weight}", style={style}];')
    for s in sorted(state.surfaces, key=lambda s: s.id):
        if s.role in ("manifold-boundary", "vertex-sphere"):
            owner = state.vpcs_of_negative(s.id)
            if owner:
                shape = "triangle" if s.role == "vertex-sphere" else "box"
                lines.append(f'  "{s.id}" [shape={shape}];')
                lines.append(f'  "{owner[0].id}" -> "{s.id}" [arrowhead=none, '
                             f'style=dotted];')
    lines.append("}")
    return "\n".join(lines) + "\n"
