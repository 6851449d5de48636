"""State representation for a (3-manifold, spatial graph) pair cut along a
multiple bridge surface.

A ``PairState`` is a decorated acyclic digraph.  Its surfaces are the closed
2-sided surfaces of the decomposition (thick, thin, manifold boundary, and
the spheres that stand in for graph vertices); its VPC records are the
compressionbody pieces between them, each carrying a tangle of bridge arcs,
vertical arcs, ghost arcs, and core loops.

Everything is immutable after construction.  ``validate_state`` produces a
full report of structural violations rather than stopping at the first.

Conventions baked into the model:

* Graph vertices are always kept in punctured form, as vertex-sphere
  boundary components with at least three punctures; there is no separate
  vertex entity.  Degree-1 vertices live in the manifold boundary.
* Every sphere is assumed separating and irreducibility is an asserted
  flag; neither is ever computed.
* Puncture identity is tracked globally so that arc concatenation during
  moves is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

ROLE_THICK = "thick"
ROLE_THIN = "thin"
ROLE_BOUNDARY = "manifold-boundary"
ROLE_VERTEX = "vertex-sphere"
ROLES = (ROLE_THICK, ROLE_THIN, ROLE_BOUNDARY, ROLE_VERTEX)


class InvalidState(Exception):
    """Raised by operations whose precondition is a valid state."""

    def __init__(self, report):
        self.report = report
        super().__init__("invalid state:\n" + str(report))


class MoveError(Exception):
    """A move was rejected; the input state is untouched."""


@dataclass(frozen=True)
class Puncture:
    """A transverse intersection point of the graph with a surface.

    ``weight`` is the weight of the graph edge passing through the point;
    it is always a positive integer.
    """

    id: str
    weight: int = 1


@dataclass(frozen=True)
class SurfaceRec:
    """One connected closed surface of the decomposition.

    ``direction`` names the VPC the transverse orientation points into; it
    is required for thick and thin surfaces (they are the edges of the dual
    digraph) and must be None for manifold-boundary and vertex-sphere
    records, which are adjacent to a single VPC.
    """

    id: str
    role: str
    genus: int
    punctures: tuple[Puncture, ...] = ()
    direction: str | None = None

    @property
    def euler(self) -> int:
        # Punctures are marked points, not boundary: chi = 2 - 2g.
        return 2 - 2 * self.genus

    @property
    def weight(self) -> int:
        return sum(p.weight for p in self.punctures)

    def puncture_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.punctures)


@dataclass(frozen=True)
class TangleData:
    """The graph pieces inside one VPC.

    Arc endpoints are puncture ids.  Bridge arcs have both ends on the
    positive boundary, vertical arcs run from the positive boundary to a
    negative boundary component, ghost arcs have both ends on negative
    boundary components, and core loops are closed components disjoint
    from the boundary (only their count matters).
    """

    bridge: tuple[tuple[str, str], ...] = ()
    vertical: tuple[tuple[str, str], ...] = ()
    ghost: tuple[tuple[str, str], ...] = ()
    core_loops: int = 0

    def all_arcs(self):
        for kind, arcs in (("bridge", self.bridge),
                           ("vertical", self.vertical),
                           ("ghost", self.ghost)):
            for arc in arcs:
                yield kind, arc

    def arc_count(self) -> int:
        return len(self.bridge) + len(self.vertical) + len(self.ghost)


@dataclass(frozen=True)
class VpcRec:
    """A vertex-punctured compressionbody of the decomposition."""

    id: str
    positive: str
    negatives: tuple[str, ...] = ()
    tangle: TangleData = field(default_factory=TangleData)


@dataclass(frozen=True)
class PairState:
    surfaces: tuple[SurfaceRec, ...]
    vpcs: tuple[VpcRec, ...]
    every_sphere_separates: bool = True
    irreducible: bool = True

    def surface(self, sid: str) -> SurfaceRec:
        for s in self.surfaces:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def vpc(self, vid: str) -> VpcRec:
        for v in self.vpcs:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def surface_map(self) -> dict[str, SurfaceRec]:
        return {s.id: s for s in self.surfaces}

    def vpc_map(self) -> dict[str, VpcRec]:
        return {v.id: v for v in self.vpcs}

    def by_role(self, role: str) -> tuple[SurfaceRec, ...]:
        return tuple(s for s in self.surfaces if s.role == role)

    def thick(self) -> tuple[SurfaceRec, ...]:
        return self.by_role(ROLE_THICK)

    def thin(self) -> tuple[SurfaceRec, ...]:
        return self.by_role(ROLE_THIN)

    def boundary(self) -> tuple[SurfaceRec, ...]:
        return self.by_role(ROLE_BOUNDARY)

    def vertex_spheres(self) -> tuple[SurfaceRec, ...]:
        return self.by_role(ROLE_VERTEX)

    def puncture_map(self) -> dict[str, Puncture]:
        out = {}
        for s in self.surfaces:
            for p in s.punctures:
                out[p.id] = p
        return out

    def puncture_surface(self) -> dict[str, str]:
        """Puncture id -> id of the surface carrying it."""
        out = {}
        for s in self.surfaces:
            for p in s.punctures:
                out[p.id] = s.id
        return out

    def vpcs_of_positive(self, sid: str) -> tuple[VpcRec, ...]:
        return tuple(v for v in self.vpcs if v.positive == sid)

    def vpcs_of_negative(self, sid: str) -> tuple[VpcRec, ...]:
        return tuple(v for v in self.vpcs if sid in v.negatives)

    def max_weight(self) -> int:
        """Largest edge weight visible on any puncture (0 when unpunctured)."""
        return max((p.weight for s in self.surfaces for p in s.punctures),
                   default=0)

    def sorted(self) -> "PairState":
        """A copy with surfaces, VPCs and arc lists in canonical id order."""
        surfs = tuple(sorted(self.surfaces, key=lambda s: s.id))
        vpcs = []
        for v in sorted(self.vpcs, key=lambda v: v.id):
            t = v.tangle
            vpcs.append(replace(v,
                                negatives=tuple(sorted(v.negatives)),
                                tangle=TangleData(tuple(sorted(t.bridge)),
                                                  tuple(sorted(t.vertical)),
                                                  tuple(sorted(t.ghost)),
                                                  t.core_loops)))
        return replace(self, surfaces=surfs, vpcs=tuple(vpcs))


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.subject}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def _arc_ends_by_vpc(vpc: VpcRec):
    """All (puncture id, arc kind, arc) occurrences inside one tangle."""
    for kind, (a, b) in vpc.tangle.all_arcs():
        yield a, kind, (a, b)
        yield b, kind, (a, b)


def dual_digraph(state: PairState):
    """Edges of the dual digraph as (surface id, tail vpc, head vpc).

    The head is the VPC named by the surface's direction.  Only thick and
    thin surfaces are edges; the rest of the boundary hangs off a single
    VPC and carries no orientation.
    """
    edges = []
    for s in state.surfaces:
        if s.role == ROLE_THICK:
            sides = [v.id for v in state.vpcs_of_positive(s.id)]
        elif s.role == ROLE_THIN:
            sides = [v.id for v in state.vpcs_of_negative(s.id)]
        else:
            continue
        if len(sides) != 2 or s.direction not in sides:
            continue  # structural breakage reported elsewhere
        head = s.direction
        tail = sides[0] if sides[1] == head else sides[1]
        edges.append((s.id, tail, head))
    return edges


def _digraph_is_acyclic(vpc_ids, edges) -> bool:
    succ = {v: [] for v in vpc_ids}
    indeg = {v: 0 for v in vpc_ids}
    for _, tail, head in edges:
        succ[tail].append(head)
        indeg[head] += 1
    queue = [v for v in vpc_ids if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen == len(vpc_ids)


def _undirected_components(vpc_ids, edges):
    parent = {v: v for v in vpc_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups = {}
    for v in vpc_ids:
        groups.setdefault(find(v), set()).add(v)
    return list(groups.values())


def ghost_graph_acyclic(vpc: VpcRec, surface_of_puncture) -> bool:
    """Whether the ghost arc graph of the VPC is a forest.

    Vertices are the negative boundary components (vertex spheres
    included); edges are the ghost arcs.  A ghost arc joining a component
    to itself is a cycle.
    """
    parent = {sid: sid for sid in vpc.negatives}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in vpc.tangle.ghost:
        sa = surface_of_puncture.get(a)
        sb = surface_of_puncture.get(b)
        if sa not in parent or sb not in parent:
            return True  # dangling reference; reported separately
        ra, rb = find(sa), find(sb)
        if ra == rb:
            return False
        parent[ra] = rb
    return True


def validate_state(state: PairState) -> ValidationReport:
    """Check every structural invariant and return the full report.

    Always returns a report; never raises.  The checks cover id
    uniqueness, role bookkeeping, adjacency counts, tangle/puncture
    matching, arc weight equality, orientation consistency, acyclicity of
    the dual digraph, the ghost-arc-graph lint for spherical or
    genus-matching tops, and the negative-defect dichotomy on closed
    states of lens shape.
    """
    bad: list[Violation] = []

    def flag(code, subject, message):
        bad.append(Violation(code, subject, message))

    # --- ids ---------------------------------------------------------
    surf_ids = [s.id for s in state.surfaces]
    vpc_ids = [v.id for v in state.vpcs]
    for name, ids in (("surface", surf_ids), ("vpc", vpc_ids)):
        seen = set()
        for i in ids:
            if i in seen:
                flag("duplicate-id", i, f"{name} id appears more than once")
            seen.add(i)
    punct_owner: dict[str, str] = {}
    for s in state.surfaces:
        for p in s.punctures:
            if p.id in punct_owner:
                flag("duplicate-id", p.id,
                     "puncture id appears on more than one surface")
            else:
                punct_owner[p.id] = s.id
            if p.weight < 1:
                flag("bad-weight", p.id, f"weight {p.weight} is not positive")

    if not state.vpcs:
        flag("empty-state", "-", "a state needs at least one VPC")

    smap = state.surface_map()
    punct_map = state.puncture_map()

    # --- per-surface shape -------------------------------------------
    for s in state.surfaces:
        if s.role not in ROLES:
            flag("bad-role", s.id, f"unknown role {s.role!r}")
            continue
        if s.genus < 0:
            flag("bad-genus", s.id, f"genus {s.genus} is negative")
        if s.role == ROLE_VERTEX:
            if s.genus != 0:
                flag("vertex-not-sphere", s.id,
                     "vertex spheres must have genus 0")
            if len(s.punctures) < 3:
                flag("vertex-degree", s.id,
                     "vertex spheres carry at least three punctures "
                     "(degree-2 vertices are absorbed, degree-1 vertices "
                     "live in the manifold boundary)")
        if s.role == ROLE_BOUNDARY and s.genus == 0:
            flag("spherical-boundary", s.id,
                 "manifold boundary components are never spheres; cap them "
                 "off as vertex spheres instead")
        if s.role in (ROLE_THICK, ROLE_THIN):
            if s.direction is None:
                flag("missing-direction", s.id,
                     "thick and thin surfaces need a direction")
        elif s.direction is not None:
            flag("spurious-direction", s.id,
                 "only thick and thin surfaces carry a direction")

    # --- adjacency counts --------------------------------------------
    pos_of = {}
    neg_of = {}
    for v in state.vpcs:
        pos_of.setdefault(v.positive, []).append(v.id)
        seen_negs = set()
        for n in v.negatives:
            if n in seen_negs:
                flag("duplicate-negative", v.id,
                     f"surface {n} listed twice as a negative boundary")
            seen_negs.add(n)
            neg_of.setdefault(n, []).append(v.id)
        if v.positive not in smap:
            flag("dangling-ref", v.id, f"unknown positive surface {v.positive}")
        elif smap[v.positive].role != ROLE_THICK:
            flag("bad-positive", v.id,
                 f"positive boundary {v.positive} is not a thick surface")
        for n in v.negatives:
            if n not in smap:
                flag("dangling-ref", v.id, f"unknown negative surface {n}")
            elif smap[n].role == ROLE_THICK:
                flag("bad-negative", v.id,
                     f"thick surface {n} cannot be a negative boundary")
        if v.tangle.core_loops < 0:
            flag("bad-loops", v.id, "negative core loop count")

    for s in state.surfaces:
        np = len(pos_of.get(s.id, ()))
        nn = len(neg_of.get(s.id, ()))
        if s.role == ROLE_THICK and (np != 2 or nn != 0):
            flag("adjacency", s.id,
                 f"thick surface must bound exactly two VPCs positively "
                 f"(found {np} positive, {nn} negative)")
        if s.role == ROLE_THIN and (nn != 2 or np != 0):
            flag("adjacency", s.id,
                 f"thin surface must be a negative boundary of exactly two "
                 f"VPCs (found {nn})")
        if s.role in (ROLE_BOUNDARY, ROLE_VERTEX) and (nn != 1 or np != 0):
            flag("adjacency", s.id,
                 f"{s.role} surface must be a negative boundary of exactly "
                 f"one VPC (found {nn})")

    if bad:
        # Later checks assume the incidence structure is sane.
        return ValidationReport(tuple(bad))

    # --- tangles: references, matching, weights ----------------------
    for v in state.vpcs:
        boundary_ids = {v.positive, *v.negatives}
        ends_seen: dict[str, int] = {}
        for kind, (a, b) in v.tangle.all_arcs():
            if a == b:
                flag("arc-endpoints", v.id,
                     f"{kind} arc has both ends at the same puncture {a}")
            for p in (a, b):
                if p not in punct_map:
                    flag("dangling-ref", v.id, f"arc references unknown puncture {p}")
                    continue
                if punct_owner[p] not in boundary_ids:
                    flag("arc-placement", v.id,
                         f"arc end {p} lies on surface {punct_owner[p]} which "
                         f"does not bound this VPC")
                ends_seen[p] = ends_seen.get(p, 0) + 1
            if a in punct_map and b in punct_map:
                if punct_map[a].weight != punct_map[b].weight:
                    flag("arc-weight", v.id,
                         f"{kind} arc ({a},{b}) joins punctures of weights "
                         f"{punct_map[a].weight} and {punct_map[b].weight}; "
                         f"an arc is a piece of a single weighted edge")
                sa, sb = punct_owner.get(a), punct_owner.get(b)
                on_pos_a = sa == v.positive
                on_pos_b = sb == v.positive
                if kind == "bridge" and not (on_pos_a and on_pos_b):
                    flag("arc-placement", v.id,
                         f"bridge arc ({a},{b}) must have both ends on the "
                         f"positive boundary")
                if kind == "vertical" and not (on_pos_a and not on_pos_b):
                    flag("arc-placement", v.id,
                         f"vertical arc ({a},{b}) must run from the positive "
                         f"boundary (first end) to a negative component")
                if kind == "ghost" and (on_pos_a or on_pos_b):
                    flag("arc-placement", v.id,
                         f"ghost arc ({a},{b}) must have both ends on "
                         f"negative components")
        for sid in sorted(boundary_ids):
            for p in smap[sid].punctures:
                n = ends_seen.get(p.id, 0)
                if n != 1:
                    flag("puncture-matching", v.id,
                         f"puncture {p.id} on {sid} is the end of {n} arcs "
                         f"of this VPC; every puncture is used exactly once")
        # Core loops need room: a compressionbody whose top is a sphere
        # over spheres has no spine circle to carry them.
        if v.tangle.core_loops > 0 and smap[v.positive].genus == 0:
            flag("loop-placement", v.id,
                 "core loops require a positive boundary of genus at least 1")

    # --- orientation + acyclicity ------------------------------------
    for v in state.vpcs:
        top = smap[v.positive]
        if top.direction is None:
            continue
        top_in = top.direction == v.id
        for n in v.negatives:
            s = smap[n]
            if s.role != ROLE_THIN or s.direction is None:
                continue
            thin_out = s.direction != v.id
            if top_in != thin_out:
                flag("orientation", v.id,
                     f"transverse orientations disagree: positive boundary "
                     f"points {'in' if top_in else 'out'} but thin surface "
                     f"{n} points {'out' if thin_out else 'in'}")
    for s in state.surfaces:
        if s.role == ROLE_THICK and s.direction is not None:
            if s.direction not in {v.id for v in state.vpcs_of_positive(s.id)}:
                flag("orientation", s.id,
                     "direction must name one of the two adjacent VPCs")
        if s.role == ROLE_THIN and s.direction is not None:
            if s.direction not in {v.id for v in state.vpcs_of_negative(s.id)}:
                flag("orientation", s.id,
                     "direction must name one of the two adjacent VPCs")

    edges = dual_digraph(state)
    if not _digraph_is_acyclic(vpc_ids, edges):
        flag("not-acyclic", "-", "the dual digraph has a directed cycle")
    comps = _undirected_components(vpc_ids, edges)
    if len(comps) > 1:
        flag("disconnected", "-",
             f"the dual graph has {len(comps)} components; the manifold "
             f"is connected")

    # --- ghost arc graph lints ----------------------------------------
    punct_surface = state.puncture_surface()
    for v in state.vpcs:
        top = smap[v.positive]
        if top.genus == 0:
            non_spheres = [n for n in v.negatives if smap[n].genus != 0]
            for n in non_spheres:
                flag("sphere-top", v.id,
                     f"the positive boundary is a sphere but negative "
                     f"component {n} has genus {smap[n].genus}")
            if not ghost_graph_acyclic(v, punct_surface):
                flag("ghost-cycle", v.id,
                     "the ghost arc graph must be acyclic when the positive "
                     "boundary is a sphere")
        elif top.genus == sum(smap[n].genus for n in v.negatives):
            if not ghost_graph_acyclic(v, punct_surface):
                flag("ghost-cycle", v.id,
                     "the ghost arc graph must be acyclic when the positive "
                     "and negative boundaries have equal genus")

    if bad:
        return ValidationReport(tuple(bad))

    # --- negative-defect dichotomy on closed lens-shaped states -------
    # Scope: no manifold boundary, net genus 0 or 1, and the sphere/torus
    # tree shape.  At m = (max weight) a VPC may have a negative defect
    # only if its top is a sphere and the unweighted-vertex set absorbs
    # every one of its vertex spheres.
    from . import invariants as _inv  # local import to avoid a cycle

    if not state.boundary():
        netg = _inv.net_genus(state)
        if netg in (0, 1) and _inv.lens_shape_conditions(state):
            mu = max(state.max_weight(), 1)
            for v in state.vpcs:
                viol = _inv.delta_dichotomy_violation(state, v, mu)
                if viol:
                    flag("negative-defect", v.id, viol)

    return ValidationReport(tuple(bad))


def require_valid(state: PairState) -> None:
    report = validate_state(state)
    if not report.ok:
        raise InvalidState(report)
