"""Exact invariants of a decorated state.

For a closed connected surface S with genus g and weighted punctures, with
chi = 2 - 2g and w(S) the total puncture weight,

    x_m(S) = (-m*chi(S) + w(S)) / 2          for a positive integer m,
    x(S)   = x_1(S).

Net quantities subtract the thin total from the thick total:

    netchi = -chi(thick) + chi(thin)
    netg   = g(thick) - g(thin) + #thin - #thick + 1
    netw   = w(thick) - w(thin)
    netx_m = x_m(thick) - x_m(thin)

and the identity  netx_m = m*netchi/2 + netw/2  is asserted on every
computed bundle.  For closed surfaces netg = netchi/2 + 1.

The per-VPC defect delta_m re-derives all weights by reading each puncture
through the arc that ends on it (the weight of an arc's far endpoint).  On
a consistent state this agrees with the recorded weights, so the global
counting identity

    2*netx_m - x_m(bdryM) - x_m(vertices not in U) - x(U) = sum delta_m

has residual zero; a weight corrupted on one side of a surface makes the
two routes disagree, which is exactly what the residual detects.
"""

from __future__ import annotations

from dataclasses import dataclass

from .halfint import HalfInt
from .model import (
    ROLE_BOUNDARY,
    ROLE_THICK,
    ROLE_THIN,
    ROLE_VERTEX,
    InvalidState,
    PairState,
    SurfaceRec,
    VpcRec,
    dual_digraph,
    validate_state,
)


def surface_x_m(surface: SurfaceRec, m: int) -> HalfInt:
    """x_m of one surface, exactly."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    return HalfInt(-m * surface.euler + surface.weight)


def surface_x(surface: SurfaceRec) -> HalfInt:
    """x(S) = x_1(S); the unsubscripted form is the m = 1 case."""
    return surface_x_m(surface, 1)


@dataclass(frozen=True)
class InvariantBundle:
    netchi: int
    netg: int
    netw: int
    netx: HalfInt
    netx_m: tuple[tuple[int, HalfInt], ...]

    def x(self, m: int) -> HalfInt:
        for mm, value in self.netx_m:
            if mm == m:
                return value
        raise KeyError(m)

    @property
    def ms(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.netx_m)

    def to_json(self):
        return {
            "netchi": self.netchi,
            "netg": self.netg,
            "netw": self.netw,
            "netx": self.netx.to_json(),
            "netx_m": {str(m): v.to_json() for m, v in self.netx_m},
        }


def net_genus(state: PairState) -> int:
    thick = state.thick()
    thin = state.thin()
    return (sum(s.genus for s in thick) - sum(s.genus for s in thin)
            + len(thin) - len(thick) + 1)


def invariant_bundle(state: PairState, ms=(1, 2, 3), *, check=True) -> InvariantBundle:
    """The full bundle; with check=True the state is validated first."""
    if check:
        report = validate_state(state)
        if not report.ok:
            raise InvalidState(report)
    thick = state.thick()
    thin = state.thin()
    netchi = -sum(s.euler for s in thick) + sum(s.euler for s in thin)
    netw = sum(s.weight for s in thick) - sum(s.weight for s in thin)
    netg = net_genus(state)
    pairs = []
    for m in sorted(set(ms)):
        xm = HalfInt(0)
        for s in thick:
            xm = xm + surface_x_m(s, m)
        for s in thin:
            xm = xm - surface_x_m(s, m)
        # Independent route: the defining identity must reproduce the
        # per-surface sum exactly.
        if 2 * xm.twice != 2 * (m * netchi + netw):
            raise ArithmeticError(
                f"net x_{m} fails the identity 2*netx_m = m*netchi + netw")
        pairs.append((m, xm))
    return InvariantBundle(netchi=netchi, netg=netg, netw=netw,
                           netx=_netx1(thick, thin),
                           netx_m=tuple(pairs))


def _netx1(thick, thin) -> HalfInt:
    x = HalfInt(0)
    for s in thick:
        x = x + surface_x_m(s, 1)
    for s in thin:
        x = x - surface_x_m(s, 1)
    return x


def net_invariants(state: PairState, ms=(1, 2, 3)) -> InvariantBundle:
    """Validated bundle computation; rejects invalid states with the report."""
    return invariant_bundle(state, ms, check=True)


def netx_unweighted(state: PairState) -> HalfInt:
    """netx with every puncture counted at weight 1."""
    x = HalfInt(0)
    for s in state.thick():
        x = x + HalfInt(-s.euler + len(s.punctures))
    for s in state.thin():
        x = x - HalfInt(-s.euler + len(s.punctures))
    return x


# ---------------------------------------------------------------------------
# per-VPC defect
# ---------------------------------------------------------------------------

def _through_weights(state: PairState, vpc: VpcRec) -> dict[str, int]:
    """Boundary weights of one VPC, read through its own arcs.

    Each puncture contributes the recorded weight of the far endpoint of
    the arc ending on it, so the totals are an independent recomputation
    of the surface weights.
    """
    punct_map = state.puncture_map()
    owner = state.puncture_surface()
    totals = {sid: 0 for sid in (vpc.positive, *vpc.negatives)}
    for _, (a, b) in vpc.tangle.all_arcs():
        for here, there in ((a, b), (b, a)):
            sid = owner.get(here)
            if sid in totals and there in punct_map:
                totals[sid] += punct_map[there].weight
    return totals


def _x_m_local(surface: SurfaceRec, m: int, local_weight: int) -> HalfInt:
    return HalfInt(-m * surface.euler + local_weight)


def _check_unweighted_vertex(state: PairState, sid: str) -> SurfaceRec:
    s = state.surface(sid)
    if s.role != ROLE_VERTEX:
        raise ValueError(f"{sid} is not a vertex sphere")
    for p in s.punctures:
        if p.weight != 1:
            raise ValueError(
                f"vertex sphere {sid} meets an edge of weight {p.weight}; "
                f"only weight-1 vertices may be treated as unweighted")
    return s


def delta_m(state: PairState, vpc_id: str, m: int, unweighted=()) -> HalfInt:
    """The defect x_m(top) - x_m(negatives \\ U) - x(U) of one VPC.

    ``unweighted`` (U) is a set of vertex-sphere ids of this VPC whose
    incident edges all have weight 1.  All weights are read through the
    VPC's arcs; see the module docstring.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    vpc = state.vpc(vpc_id)
    u_set = set(unweighted)
    for sid in sorted(u_set):
        if sid not in vpc.negatives:
            raise ValueError(f"{sid} is not a negative boundary of {vpc_id}")
        _check_unweighted_vertex(state, sid)
    local = _through_weights(state, vpc)
    smap = state.surface_map()
    total = _x_m_local(smap[vpc.positive], m, local[vpc.positive])
    for sid in vpc.negatives:
        s = smap[sid]
        if sid in u_set:
            total = total - _x_m_local(s, 1, local[sid])
        else:
            total = total - _x_m_local(s, m, local[sid])
    return total


def admissible_vertex_sets(state: PairState):
    """All subsets of vertex spheres usable as the unweighted set U."""
    from itertools import combinations

    candidates = sorted(
        s.id for s in state.vertex_spheres()
        if all(p.weight == 1 for p in s.punctures))
    for r in range(len(candidates) + 1):
        for combo in combinations(candidates, r):
            yield frozenset(combo)


def counting_identity_residual(state: PairState, m: int, unweighted=()) -> HalfInt:
    """Residual of the double-counting identity; zero on every valid state.

    The left side is computed from the surface records, the right side
    sums the per-VPC defects with arc-derived weights, so a puncture
    weight corrupted on one side of a surface shows up as a nonzero
    residual.
    """
    u_set = frozenset(unweighted)
    for sid in sorted(u_set):
        _check_unweighted_vertex(state, sid)
    bundle = invariant_bundle(state, (m,), check=False)
    lhs = 2 * bundle.x(m)
    for s in state.boundary():
        lhs = lhs - surface_x_m(s, m)
    for s in state.vertex_spheres():
        if s.id in u_set:
            lhs = lhs - surface_x(s)
        else:
            lhs = lhs - surface_x_m(s, m)
    rhs = HalfInt(0)
    for vpc in state.vpcs:
        local_u = u_set.intersection(vpc.negatives)
        rhs = rhs + delta_m(state, vpc.id, m, local_u)
    return lhs - rhs


def delta_dichotomy_violation(state: PairState, vpc: VpcRec, m: int):
    """Check one VPC against the negative-defect dichotomy at level m.

    Adding a vertex sphere to U shifts the defect by exactly (1 - m), so
    only the extreme admissible sets need to be examined.  A defect may
    only go negative when the top is a sphere and the set U contains
    every vertex sphere of the VPC; here we return a message describing
    the cheapest failing choice of U, or None.
    """
    smap = state.surface_map()
    all_vs = [sid for sid in vpc.negatives if smap[sid].role == ROLE_VERTEX]
    admissible = [sid for sid in all_vs
                  if all(p.weight == 1 for p in smap[sid].punctures)]
    k = len(admissible)
    base = delta_m(state, vpc.id, m, ())
    top_is_sphere = smap[vpc.positive].genus == 0

    if top_is_sphere and len(all_vs) == k:
        worst = k - 1 if k else 0
        if k == 0:
            return None  # conclusion holds for every U
    else:
        worst = k
    value = base + (1 - m) * worst
    if value < 0:
        return (f"defect at m={m} drops to {value} with {worst} unweighted "
                f"vertices, but the top surface "
                f"{'is' if top_is_sphere else 'is not'} a sphere and the "
                f"unweighted set misses a vertex sphere of the VPC")
    return None


# ---------------------------------------------------------------------------
# bounds and structure checks
# ---------------------------------------------------------------------------

def lower_bound_check(state: PairState):
    """Net-weight floor: netw >= -mu(2g-2) - mu*chi(bdryM)/2 - w(bdryM)/2.

    mu is the largest edge weight visible on any puncture and g the net
    genus.  Returns (bound, satisfied); valid states always satisfy it.
    """
    report = validate_state(state)
    if not report.ok:
        raise InvalidState(report)
    bundle = invariant_bundle(state, (1,), check=False)
    mu = state.max_weight()
    chi_bdry = sum(s.euler for s in state.boundary())
    w_bdry = sum(s.weight for s in state.boundary())
    bound = HalfInt(-2 * mu * (2 * bundle.netg - 2) - mu * chi_bdry - w_bdry)
    return bound, HalfInt.whole(bundle.netw) >= bound


def lens_shape_conditions(state: PairState) -> bool:
    """Structural shadow of the sphere/torus chain shape.

    True when every thick and thin surface is a sphere or torus, the dual
    graph is a tree, and removing a sphere edge never leaves torus edges
    on both sides.
    """
    edges = dual_digraph(state)
    for s in state.thick() + state.thin():
        if s.genus > 1:
            return False
    if len(edges) != len(state.vpcs) - 1:
        return False  # connected states: tree iff |E| = |V| - 1
    smap = state.surface_map()
    adj: dict[str, list[tuple[str, str]]] = {v.id: [] for v in state.vpcs}
    for sid, tail, head in edges:
        adj[tail].append((sid, head))
        adj[head].append((sid, tail))

    def side_has_torus(start: str, cut: str) -> bool:
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for sid, w in adj[v]:
                if sid == cut or w in seen:
                    continue
                if smap[sid].genus == 1:
                    return True
                seen.add(w)
                stack.append(w)
        return False

    for sid, tail, head in edges:
        if smap[sid].genus == 0:
            if side_has_torus(tail, sid) and side_has_torus(head, sid):
                return False
    return True


def lens_shape_check(state: PairState) -> bool:
    """Validated entry point; requires a closed state of net genus 0 or 1."""
    report = validate_state(state)
    if not report.ok:
        raise InvalidState(report)
    if state.boundary():
        raise ValueError("the state must be closed (no manifold boundary)")
    g = net_genus(state)
    if g not in (0, 1):
        raise ValueError(f"net genus {g} is not 0 or 1")
    return lens_shape_conditions(state)


# ---------------------------------------------------------------------------
# VPC classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VpcClass:
    kind: str  # trivial-ball | product | punctured-trivial-ball |
               # punctured-product | general
    partner: str | None = None


class _ChainFailure(Exception):
    pass


def _trace_chains(state: PairState, vpc: VpcRec, transparent: set[str]):
    """Maximal strands through interior 0/2-punctured spheres.

    Returns a list of (start puncture, end puncture, weight list), where
    the ends lie on non-transparent boundary.  Raises _ChainFailure when a
    transparent sphere is not threaded exactly once, has the wrong shape,
    or a strand closes up without touching solid boundary.
    """
    smap = state.surface_map()
    owner = state.puncture_surface()
    punct_map = state.puncture_map()
    for sid in transparent:
        s = smap[sid]
        if s.genus != 0 or len(s.punctures) not in (0, 2):
            raise _ChainFailure(f"{sid} is not a 0- or 2-punctured sphere")

    arc_at: dict[str, tuple[str, str]] = {}
    for _, (a, b) in vpc.tangle.all_arcs():
        arc_at[a] = (a, b)
        arc_at[b] = (a, b)

    partner_on_sphere = {}
    for sid in transparent:
        ps = smap[sid].puncture_ids()
        if len(ps) == 2:
            partner_on_sphere[ps[0]] = ps[1]
            partner_on_sphere[ps[1]] = ps[0]

    used_arcs = set()
    chains = []
    solid_starts = [p for s in (vpc.positive, *vpc.negatives)
                    if s not in transparent
                    for p in smap[s].puncture_ids()]
    visited_transparent = set()
    for start in solid_starts:
        if any(start in arc for arc in used_arcs):
            continue
        here = start
        weights = []
        while True:
            arc = arc_at.get(here)
            if arc is None or arc in used_arcs:
                raise _ChainFailure(f"strand from {start} breaks at {here}")
            used_arcs.add(arc)
            weights.append(punct_map[arc[0]].weight)
            weights.append(punct_map[arc[1]].weight)
            there = arc[1] if arc[0] == here else arc[0]
            if owner[there] in transparent:
                visited_transparent.add(owner[there])
                here = partner_on_sphere.get(there)
                if here is None:
                    raise _ChainFailure(f"strand dead-ends on {owner[there]}")
                continue
            chains.append((start, there, weights))
            break
    if len(used_arcs) != vpc.tangle.arc_count():
        raise _ChainFailure("arcs form a closed circuit through interior "
                            "spheres")
    missing = {sid for sid in transparent
               if len(smap[sid].punctures) == 2} - visited_transparent
    if missing:
        raise _ChainFailure(f"interior spheres {sorted(missing)} are not "
                            f"threaded by any strand")
    return chains


def _chains_product_like(state, vpc, partner, transparent) -> bool:
    """All strands run top-to-partner with a constant weight."""
    owner = state.puncture_surface()
    try:
        chains = _trace_chains(state, vpc, transparent)
    except _ChainFailure:
        return False
    top = vpc.positive
    for start, end, weights in chains:
        sides = {owner[start], owner[end]}
        if sides != {top, partner}:
            return False
        if len(set(weights)) > 1:
            return False
    return True


def classify_vpc(state: PairState, vpc_id: str) -> VpcClass:
    """Deterministic combinatorial classification of one VPC.

    The combinatorial conditions here are the engine's definition of
    product and trivial ball; geometric realizability is never consulted.
    A product runs weight-constant strands from the top to one partner of
    equal genus, possibly threading interior 0/2-punctured spheres; a
    trivial ball has a spherical top whose tangle is a cone (at most one
    vertex sphere, or a single unknotted strand, or nothing).  When
    several partners qualify the smallest id wins.
    """
    vpc = state.vpc(vpc_id)
    smap = state.surface_map()
    top = smap[vpc.positive]
    negs = [smap[n] for n in vpc.negatives]
    if vpc.tangle.core_loops > 0:
        return VpcClass("general")

    vertex_negs = [s for s in negs if s.role == ROLE_VERTEX]
    partner_negs = sorted((s for s in negs if s.role in (ROLE_THIN, ROLE_BOUNDARY)),
                          key=lambda s: s.id)

    def ball_shape(transparent: set[str]) -> bool:
        if top.genus != 0 or len(vertex_negs) > 1:
            return False
        others = [s for s in negs
                  if s.role != ROLE_VERTEX and s.id not in transparent]
        if others:
            return False
        try:
            chains = _trace_chains(state, vpc, transparent)
        except _ChainFailure:
            return False
        owner = state.puncture_surface()
        if vertex_negs:
            apex = vertex_negs[0].id
            return all({owner[a], owner[b]} == {top.id, apex}
                       and len(set(w)) == 1
                       for a, b, w in chains)
        if not top.punctures:
            return not chains
        if len(top.punctures) != 2 or len(chains) != 1:
            return False
        (a, b, w), = chains
        return owner[a] == top.id and owner[b] == top.id and len(set(w)) == 1

    # Strict trivial ball: no interior spheres at all.
    if ball_shape(set()):
        return VpcClass("trivial-ball")

    # Strict product: a single negative component of matching genus.
    if len(negs) == 1 and partner_negs:
        f = partner_negs[0]
        if f.genus == top.genus and _chains_product_like(state, vpc, f.id, set()):
            return VpcClass("product", partner=f.id)

    # Punctured product: some partner plus interior spheres.
    for f in partner_negs:
        if f.genus != top.genus:
            continue
        transparent = {s.id for s in negs if s.id != f.id}
        # Interior spheres arise from puncturing; vertex spheres and
        # manifold boundary cannot play that role.
        if any(smap[t].role != ROLE_THIN for t in transparent):
            continue
        if _chains_product_like(state, vpc, f.id, transparent):
            return VpcClass("punctured-product", partner=f.id)

    # Punctured trivial ball: cone plus interior spheres.
    transparent = {s.id for s in negs if s.role == ROLE_THIN}
    if transparent and ball_shape(transparent):
        return VpcClass("punctured-trivial-ball")

    return VpcClass("general")
