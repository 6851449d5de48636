"""Building and splitting states along summing spheres.

Four kinds of sum are supported.  A distant sum drops an unpunctured thin
sphere between the two factors; a connected sum cuts one edge of matching
weight u in each factor and joins the halves across a 2-punctured sphere;
a trivalent vertex sum consumes one 3-valent vertex sphere of each factor
and replaces both by a shared 3-punctured thin sphere; a cut-edge sum is a
distant sum together with a fresh weight-1 edge crossing the (then
once-punctured) summing sphere, creating a new trivalent vertex in each
factor.

``decompose`` inverts the construction at any designated separating thin
sphere with 0, 2 or 3 punctures, capping the two copies by the surgery
convention: nothing, an unknotted arc, or a vertex.  The round trip
preserves the invariant bundle exactly: netg adds and netw adds minus the
sphere weight.

Bridge-number bookkeeping: the identity element of the connected sum is
the unknot with b_0 = 1, and the core loop of a genus-1 splitting counts
as b_1 = 0; calculators here hard-code the latter convention.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .halfint import HalfInt
from .invariants import invariant_bundle, net_genus
from .model import (
    ROLE_THIN,
    ROLE_VERTEX,
    MoveError,
    PairState,
    Puncture,
    SurfaceRec,
    TangleData,
    VpcRec,
    validate_state,
)
from .moves import _tangle_from_segments, _walk_strands

KINDS = ("distant", "connected", "cut-edge", "trivalent")


@dataclass(frozen=True)
class Attachment:
    """Where a sum meets one factor.

    ``vpc`` holds the summing region.  For connected and cut-edge sums
    either ``arc`` names a tangle arc to cut (by its endpoint pair) or
    ``loop`` selects a core loop; trivalent sums name a vertex sphere.
    """

    vpc: str
    arc: tuple[str, str] | None = None
    loop: bool = False
    vertex: str | None = None


@dataclass(frozen=True)
class SumSpec:
    kind: str
    u: int = 1
    attach_a: Attachment | None = None
    attach_b: Attachment | None = None
    flip_a: bool = False
    flip_b: bool = False


def _prefix_state(state: PairState, tag: str) -> PairState:
    def pid(p):
        return f"{tag}{p}"

    surfaces = []
    for s in state.surfaces:
        surfaces.append(replace(
            s, id=pid(s.id),
            punctures=tuple(Puncture(pid(p.id), p.weight) for p in s.punctures),
            direction=None if s.direction is None else pid(s.direction)))
    vpcs = []
    for v in state.vpcs:
        t = v.tangle
        vpcs.append(VpcRec(
            pid(v.id), pid(v.positive),
            tuple(pid(n) for n in v.negatives),
            TangleData(
                tuple((pid(a), pid(b)) for a, b in t.bridge),
                tuple((pid(a), pid(b)) for a, b in t.vertical),
                tuple((pid(a), pid(b)) for a, b in t.ghost),
                t.core_loops)))
    return replace(state, surfaces=tuple(surfaces), vpcs=tuple(vpcs))


def _flip_all(state: PairState) -> PairState:
    """Reverse the transverse orientation of a whole factor."""
    sides = {}
    for s in state.surfaces:
        if s.role == "thick":
            sides[s.id] = [v.id for v in state.vpcs_of_positive(s.id)]
        elif s.role == ROLE_THIN:
            sides[s.id] = [v.id for v in state.vpcs_of_negative(s.id)]
    surfaces = []
    for s in state.surfaces:
        if s.id in sides and s.direction is not None:
            vv = sides[s.id]
            other = vv[0] if s.direction == vv[1] else vv[1]
            surfaces.append(replace(s, direction=other))
        else:
            surfaces.append(s)
    return replace(state, surfaces=tuple(surfaces))


def _top_points_in(state: PairState, vpc: VpcRec) -> bool:
    return state.surface(vpc.positive).direction == vpc.id


def _cut_arc(vpc: VpcRec, attachment: Attachment, owner, pmap, u,
             new_ends) -> VpcRec:
    """Replace one arc (or loop) by pieces ending at new punctures."""
    t = vpc.tangle
    if attachment.loop:
        if t.core_loops < 1:
            raise MoveError(f"{vpc.id} has no core loop to cut")
        ghost = t.ghost + (tuple(sorted(new_ends)),)
        return replace(vpc, tangle=replace(t, ghost=tuple(sorted(ghost)),
                                           core_loops=t.core_loops - 1))
    arc = attachment.arc
    if arc is None:
        raise MoveError("a connected or cut-edge sum must name the arc "
                        "or loop it cuts")
    x, y = arc
    if pmap[x].weight != u or pmap[y].weight != u:
        raise MoveError(
            f"edges joined by the sum must have weight {u}, but the arc "
            f"({x},{y}) has weight {pmap[x].weight}")

    def rewire(end_old, end_new):
        on_top = owner[end_old] == vpc.positive
        return ("vertical", (end_old, end_new)) if on_top \
            else ("ghost", tuple(sorted((end_old, end_new))))

    found = None
    for kind, (a, b) in vpc.tangle.all_arcs():
        if {a, b} == {x, y}:
            found = (kind, (a, b))
            break
    if found is None:
        raise MoveError(f"{vpc.id} has no arc with endpoints {arc}")
    kind, (a, b) = found
    bridge = [p for p in t.bridge if set(p) != {x, y}]
    vertical = [p for p in t.vertical if set(p) != {x, y}]
    ghost = [p for p in t.ghost if set(p) != {x, y}]
    for end_old, end_new in ((a, new_ends[0]), (b, new_ends[1])):
        k, pair = rewire(end_old, end_new)
        (vertical if k == "vertical" else ghost).append(pair)
    return replace(vpc, tangle=TangleData(tuple(sorted(bridge)),
                                          tuple(sorted(vertical)),
                                          tuple(sorted(ghost)),
                                          t.core_loops))


def compose(state_a: PairState, state_b: PairState, spec: SumSpec) -> PairState:
    """Sum two states along a fresh thin sphere.

    The factors keep their structure (ids gain ``a:``/``b:`` prefixes);
    the summing sphere becomes a thin surface adjacent to the two named
    VPCs.  Orientations must already be arranged (use the flip flags)
    so the sphere has a consistent direction; otherwise the composite
    digraph is unorientable and the sum is rejected.
    """
    if spec.kind not in KINDS:
        raise MoveError(f"unknown sum kind {spec.kind!r}")
    if spec.attach_a is None or spec.attach_b is None:
        raise MoveError("both attachments are required")
    if spec.u < 1:
        raise MoveError("the joined weight u must be at least 1")
    if spec.kind == "cut-edge" and spec.u != 1:
        raise MoveError("a cut edge has weight 1")

    a = _prefix_state(state_a, "a:")
    b = _prefix_state(state_b, "b:")
    if spec.flip_a:
        a = _flip_all(a)
    if spec.flip_b:
        b = _flip_all(b)
    attach_a = replace(spec.attach_a, vpc=f"a:{spec.attach_a.vpc}",
                       arc=None if spec.attach_a.arc is None else
                       (f"a:{spec.attach_a.arc[0]}", f"a:{spec.attach_a.arc[1]}"),
                       vertex=None if spec.attach_a.vertex is None else
                       f"a:{spec.attach_a.vertex}")
    attach_b = replace(spec.attach_b, vpc=f"b:{spec.attach_b.vpc}",
                       arc=None if spec.attach_b.arc is None else
                       (f"b:{spec.attach_b.arc[0]}", f"b:{spec.attach_b.arc[1]}"),
                       vertex=None if spec.attach_b.vertex is None else
                       f"b:{spec.attach_b.vertex}")
    try:
        vpc_a, vpc_b = a.vpc(attach_a.vpc), b.vpc(attach_b.vpc)
    except KeyError as exc:
        raise MoveError(f"unknown attachment VPC {exc}") from exc

    # The sphere needs one side flowing in and one flowing out.
    in_a, in_b = _top_points_in(a, vpc_a), _top_points_in(b, vpc_b)
    if in_a == in_b:
        raise MoveError("unorientable composite digraph: flip one factor")
    # thins of a VPC point out exactly when its top points in
    direction = attach_b.vpc if in_a else attach_a.vpc

    surfaces = list(a.surfaces) + list(b.surfaces)
    vpcs = {v.id: v for v in list(a.vpcs) + list(b.vpcs)}
    pmap = {}
    owner = {}
    for st in (a, b):
        pmap.update(st.puncture_map())
        owner.update(st.puncture_surface())

    def add_negative(vpc, sid):
        return replace(vpc, negatives=tuple(sorted((*vpc.negatives, sid))))

    if spec.kind == "distant":
        sphere = SurfaceRec("sum", ROLE_THIN, 0, (), direction)
        vpcs[vpc_a.id] = add_negative(vpc_a, sphere.id)
        vpcs[vpc_b.id] = add_negative(vpc_b, sphere.id)
    elif spec.kind == "connected":
        s0, s1 = Puncture("sum.0", spec.u), Puncture("sum.1", spec.u)
        sphere = SurfaceRec("sum", ROLE_THIN, 0, (s0, s1), direction)
        new_a = _cut_arc(vpc_a, attach_a, owner, pmap, spec.u, (s0.id, s1.id))
        new_b = _cut_arc(vpc_b, attach_b, owner, pmap, spec.u, (s0.id, s1.id))
        vpcs[vpc_a.id] = add_negative(new_a, sphere.id)
        vpcs[vpc_b.id] = add_negative(new_b, sphere.id)
    elif spec.kind == "cut-edge":
        # The new edge turns each attachment point into a trivalent
        # vertex; a cut core loop is assumed to have weight 1.
        for tag, vpc, attach in (("a", vpc_a, attach_a), ("b", vpc_b, attach_b)):
            if attach.loop:
                w = 1
            else:
                if attach.arc is None:
                    raise MoveError("cut-edge sums name an arc or loop in "
                                    "each factor")
                w = pmap[attach.arc[0]].weight
            vertex = SurfaceRec(
                f"sum.v{tag}", ROLE_VERTEX, 0,
                (Puncture(f"sum.v{tag}0", w), Puncture(f"sum.v{tag}1", w),
                 Puncture(f"sum.v{tag}2", 1)))
            surfaces.append(vertex)
            new_vpc = _cut_arc(vpcs[vpc.id], attach, owner, pmap, w,
                               (f"sum.v{tag}0", f"sum.v{tag}1"))
            stub = tuple(sorted((f"sum.v{tag}2", "sum.0")))
            vpcs[vpc.id] = replace(
                new_vpc,
                negatives=tuple(sorted((*new_vpc.negatives, vertex.id))),
                tangle=replace(new_vpc.tangle,
                               ghost=tuple(sorted((*new_vpc.tangle.ghost,
                                                   stub)))))
            for p in vertex.punctures:
                pmap[p.id] = p
                owner[p.id] = vertex.id
        sphere = SurfaceRec("sum", ROLE_THIN, 0,
                            (Puncture("sum.0", 1),), direction)
        vpcs[vpc_a.id] = add_negative(vpcs[vpc_a.id], sphere.id)
        vpcs[vpc_b.id] = add_negative(vpcs[vpc_b.id], sphere.id)
    else:  # trivalent
        va = attach_a.vertex
        vb = attach_b.vertex
        if va is None or vb is None:
            raise MoveError("trivalent sums name a vertex sphere in each "
                            "factor")
        sa = a.surface(va)
        sb = b.surface(vb)
        if sa.role != ROLE_VERTEX or sb.role != ROLE_VERTEX:
            raise MoveError("trivalent sums consume vertex spheres")
        if len(sa.punctures) != 3 or len(sb.punctures) != 3:
            raise MoveError("trivalent sums need degree-3 vertices")
        wa = sorted(p.weight for p in sa.punctures)
        wb = sorted(p.weight for p in sb.punctures)
        if wa != wb:
            raise MoveError(f"vertex weights {wa} and {wb} do not match")
        order_a = sorted(sa.punctures, key=lambda p: (p.weight, p.id))
        order_b = sorted(sb.punctures, key=lambda p: (p.weight, p.id))
        news = tuple(Puncture(f"sum.{i}", p.weight)
                     for i, p in enumerate(order_a))
        sphere = SurfaceRec("sum", ROLE_THIN, 0, news, direction)
        rename = {}
        for old, new in zip(order_a, news):
            rename[old.id] = new.id
        for old, new in zip(order_b, news):
            rename[old.id] = new.id

        def rewire(vpc, vertex_id):
            t = vpc.tangle

            def fix(pairs):
                return tuple(sorted(tuple(rename.get(p, p) for p in pair)
                                    for pair in pairs))

            return replace(
                vpc,
                negatives=tuple(sorted(n for n in vpc.negatives
                                       if n != vertex_id)),
                tangle=TangleData(fix(t.bridge), fix(t.vertical),
                                  fix(t.ghost), t.core_loops))

        if va not in vpc_a.negatives or vb not in vpc_b.negatives:
            raise MoveError("the named vertex sphere does not bound the "
                            "attachment VPC")
        surfaces = [s for s in surfaces if s.id not in (va, vb)]
        vpcs[vpc_a.id] = add_negative(rewire(vpc_a, va), sphere.id)
        vpcs[vpc_b.id] = add_negative(rewire(vpc_b, vb), sphere.id)

    surfaces.append(sphere)
    result = PairState(
        surfaces=tuple(surfaces),
        vpcs=tuple(vpcs.values()),
        every_sphere_separates=(state_a.every_sphere_separates and
                                state_b.every_sphere_separates),
        irreducible=(state_a.irreducible and state_b.irreducible and
                     spec.kind != "cut-edge"),
    ).sorted()
    report = validate_state(result)
    if not report.ok:
        raise MoveError(f"composition produced an invalid state:\n{report}")

    ga = net_genus(state_a)
    gb = net_genus(state_b)
    bundle = invariant_bundle(result, (1,), check=False)
    if bundle.netg != ga + gb:
        raise MoveError("composite net genus is not additive")
    wa = invariant_bundle(state_a, (1,), check=False).netw
    wb = invariant_bundle(state_b, (1,), check=False).netw
    if bundle.netw != wa + wb - sphere.weight:
        raise MoveError("composite net weight is not additive minus the "
                        "sphere weight")
    return result


def decompose(state: PairState, sphere_id: str):
    """Split a state at a separating summing sphere.

    The designated thin sphere must have 0, 2, or 3 punctures (a single
    puncture would leave a dangling half edge).  Each side is capped by
    the surgery convention; the pair of states is returned with the
    component containing the alphabetically first VPC first.
    """
    if not state.every_sphere_separates:
        raise MoveError("decomposition needs the every-sphere-separates "
                        "assertion")
    smap = state.surface_map()
    if sphere_id not in smap:
        raise MoveError(f"no surface {sphere_id}")
    sphere = smap[sphere_id]
    if sphere.role != ROLE_THIN or sphere.genus != 0:
        raise MoveError(f"{sphere_id} is not a thin sphere")
    if len(sphere.punctures) not in (0, 2, 3):
        raise MoveError(f"a summing sphere has 0, 2 or 3 punctures, not "
                        f"{len(sphere.punctures)}")
    sides = state.vpcs_of_negative(sphere_id)
    if len(sides) != 2:
        raise MoveError(f"{sphere_id} does not bound two VPCs")

    # Split the dual graph with the sphere edge removed.
    adjacency = {v.id: set() for v in state.vpcs}
    for s in state.surfaces:
        if s.role == "thick":
            vv = [v.id for v in state.vpcs_of_positive(s.id)]
        elif s.role == ROLE_THIN and s.id != sphere_id:
            vv = [v.id for v in state.vpcs_of_negative(s.id)]
        else:
            continue
        if len(vv) == 2:
            adjacency[vv[0]].add(vv[1])
            adjacency[vv[1]].add(vv[0])
    comp = {}
    for start in sorted(adjacency):
        if start in comp:
            continue
        tag = start
        stack = [start]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp[v] = tag
            stack.extend(adjacency[v])
    if comp[sides[0].id] == comp[sides[1].id]:
        raise MoveError(f"{sphere_id} does not separate the state")

    def build_side(side_vpc: VpcRec) -> PairState:
        tag = comp[side_vpc.id]
        side_vpcs = [v for v in state.vpcs if comp[v.id] == tag]
        used_surfaces = set()
        for v in side_vpcs:
            used_surfaces.add(v.positive)
            used_surfaces.update(v.negatives)
        used_surfaces.discard(sphere_id)
        surfaces = [s for s in state.surfaces if s.id in used_surfaces]
        vpcs = []
        n = len(sphere.punctures)
        for v in side_vpcs:
            if sphere_id not in v.negatives:
                vpcs.append(v)
                continue
            negatives = tuple(n for n in v.negatives if n != sphere_id)
            if n == 0:
                vpcs.append(replace(v, negatives=negatives))
            elif n == 2:
                # cap with an unknotted arc joining the two punctures
                cap = tuple(p.id for p in sphere.punctures)
                pieces = [(arc, "x") for _, arc in v.tangle.all_arcs()]
                pieces.append((cap, "x"))
                segments, loops = _walk_strands(pieces, set(cap), lambda p: p)
                pos = set(smap[v.positive].puncture_ids())
                vpcs.append(replace(
                    v, negatives=negatives,
                    tangle=_tangle_from_segments(
                        segments, pos,
                        v.tangle.core_loops + loops.get("x", 0))))
            else:
                # the sphere becomes a vertex of the graph
                vert = replace(sphere, role=ROLE_VERTEX, direction=None)
                surfaces.append(vert)
                vpcs.append(replace(v, negatives=tuple(sorted(
                    (*negatives, vert.id)))))
        result = replace(state, surfaces=tuple(surfaces),
                         vpcs=tuple(vpcs)).sorted()
        report = validate_state(result)
        if not report.ok:
            raise MoveError(f"decomposition produced an invalid side:\n"
                            f"{report}")
        return result

    first = min(sides, key=lambda v: min(w for w in comp if comp[w] == comp[v.id]))
    second = sides[0] if first is sides[1] else sides[1]
    return build_side(first), build_side(second)


def additivity_bound(b_g0, b_g1, u, case="g=0") -> HalfInt:
    """The composite bridge number b(g0 factor) + b(g1 factor) - u."""
    if case not in ("g=0", "g=1"):
        raise ValueError(f"unknown case {case!r}")
    b0, b1 = HalfInt.of(b_g0), HalfInt.of(b_g1)
    if b0 < 0 or b1 < 0:
        raise ValueError("bridge numbers are nonnegative")
    if not isinstance(u, int) or u < 1:
        raise ValueError("the joined weight u is a positive integer")
    return b0 + b1 - u


def additivity_achieved(state: PairState, b_g0, b_g1, u, case="g=0") -> bool:
    """Whether a composite state realizes the additivity value exactly."""
    bundle = invariant_bundle(state, (1,), check=False)
    return HalfInt(bundle.netw) == additivity_bound(b_g0, b_g1, u, case)


def _absorb_vertex(state: PairState, vertex_id: str) -> PairState:
    """Remove a degree-2 vertex sphere, merging its two strands."""
    sphere = state.surface(vertex_id)
    sides = state.vpcs_of_negative(vertex_id)
    if len(sides) != 1:
        raise MoveError(f"{vertex_id} is not a vertex sphere")
    v = sides[0]
    cap = tuple(p.id for p in sphere.punctures)
    pieces = [(arc, "x") for _, arc in v.tangle.all_arcs()]
    pieces.append((cap, "x"))
    segments, loops = _walk_strands(pieces, set(cap), lambda p: p)
    pos = set(state.surface(v.positive).puncture_ids())
    new_vpc = replace(
        v, negatives=tuple(n for n in v.negatives if n != vertex_id),
        tangle=_tangle_from_segments(segments, pos,
                                     v.tangle.core_loops + loops.get("x", 0)))
    return replace(state,
                   surfaces=tuple(s for s in state.surfaces
                                  if s.id != vertex_id),
                   vpcs=tuple(new_vpc if w.id == v.id else w
                              for w in state.vpcs))


def cut_edge_reduce(state: PairState):
    """Remove every edge crossing a once-punctured thin sphere.

    Returns (reduced state, number of edges removed).  The crossing
    spheres stay behind unpunctured; vertices whose degree drops to two
    are absorbed into their edges.  Bridge-number bookkeeping is
    unchanged by this reduction.
    """
    current = state
    removed = 0
    while True:
        target = None
        for s in current.thin():
            if s.genus == 0 and len(s.punctures) == 1:
                target = s
                break
        if target is None:
            break
        # Trace the whole edge through the arc graph.
        owner = current.puncture_surface()
        incident: dict[str, list[tuple[str, tuple[str, str]]]] = {}
        for v in current.vpcs:
            for _, arc in v.tangle.all_arcs():
                for p in arc:
                    incident.setdefault(p, []).append((v.id, arc))
        start = target.punctures[0].id
        punctures = {start}
        arcs = set()
        frontier = [start]
        while frontier:
            p = frontier.pop()
            for vid, arc in incident.get(p, ()):
                key = (vid, arc)
                if key in arcs:
                    continue
                arcs.add(key)
                for q in arc:
                    if q not in punctures:
                        punctures.add(q)
                        frontier.append(q)
        smap = current.surface_map()
        endpoints = [p for p in punctures
                     if smap[owner[p]].role in (ROLE_VERTEX,
                                                "manifold-boundary")]
        if not endpoints:
            raise MoveError(f"the strand through {target.id} has no "
                            f"endpoint; it is not a cut edge")
        surfaces = []
        touched_vertices = []
        for s in current.surfaces:
            kept = tuple(p for p in s.punctures if p.id not in punctures)
            if len(kept) != len(s.punctures):
                s = replace(s, punctures=kept)
                if s.role == ROLE_VERTEX:
                    touched_vertices.append(s.id)
            surfaces.append(s)
        vpcs = []
        for v in current.vpcs:
            t = v.tangle

            def keep(pairs):
                return tuple(p for p in pairs
                             if p[0] not in punctures and p[1] not in punctures)

            vpcs.append(replace(v, tangle=TangleData(
                keep(t.bridge), keep(t.vertical), keep(t.ghost),
                t.core_loops)))
        current = replace(current, surfaces=tuple(surfaces),
                          vpcs=tuple(vpcs))
        for vid in touched_vertices:
            sphere = current.surface(vid)
            if len(sphere.punctures) >= 3:
                continue
            if len(sphere.punctures) == 2:
                current = _absorb_vertex(current, vid)
            else:
                raise MoveError(f"removing the cut edge leaves vertex {vid} "
                                f"with degree {len(sphere.punctures)}")
        removed += 1
    if removed:
        # The once-punctured spheres are gone; the reduced model state is
        # taken to be irreducible again.
        current = replace(current, irreducible=True)
    report = validate_state(current)
    if not report.ok:
        raise MoveError(f"cut edge reduction produced an invalid state:\n"
                        f"{report}")
    return current.sorted(), removed
