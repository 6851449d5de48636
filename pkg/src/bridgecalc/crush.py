"""Crushing a satellite region to a weighted edge, and the closed-form
bridge-number calculators that come with it.

Crushing replaces the part of the graph running through a handle by a
tree with two trivalent-or-more vertices joined by one edge of weight
omega (the wrapping number).  In state terms: the arcs at the chosen top
punctures become vertical arcs to two fresh vertex spheres, a ghost arc
of weight omega joins the spheres, and everything declared interior to
the handle's ball is surgered away.  The accounting

    netx_omega(after) <= (omega - 1) * netchi(after) / 2 + netx(after)
                      <= (omega - 1) * netchi(before) / 2 + netx(before)

is asserted; the first comparison is an equality precisely because all
surviving punctures have weight 1, the second may be strict when interior
components are discarded (netchi and the unweighted netx never increase).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .halfint import HalfInt
from .invariants import invariant_bundle, netx_unweighted
from .model import (
    ROLE_THIN,
    ROLE_VERTEX,
    MoveError,
    PairState,
    Puncture,
    SurfaceRec,
    TangleData,
    validate_state,
)


@dataclass(frozen=True)
class CrushSpec:
    """Where and how to crush.

    ``d1``/``d2`` are the contents of the two disjoint discs on the
    positive boundary of ``vpc``; ``pi`` the punctures of those discs
    lying in the crushed region; ``inside`` the thin spheres of the VPC
    whose subtrees sit inside the handle's ball and are discarded;
    ``omega`` the wrapping number, with at least omega punctures of
    ``pi`` in each disc.
    """

    vpc: str
    d1: tuple[str, ...]
    d2: tuple[str, ...]
    pi: tuple[str, ...]
    omega: int
    inside: tuple[str, ...] = ()


def crush(state: PairState, spec: CrushSpec) -> PairState:
    """Apply one crushing move and assert its arithmetic."""
    if spec.omega < 1:
        raise MoveError("the wrapping number is a positive integer")
    try:
        vpc = state.vpc(spec.vpc)
    except KeyError:
        raise MoveError(f"no VPC {spec.vpc}") from None
    smap = state.surface_map()
    top = smap[vpc.positive]
    top_ids = set(top.puncture_ids())
    d1, d2 = set(spec.d1), set(spec.d2)
    pi = set(spec.pi)
    if d1 & d2:
        raise MoveError("the two discs must be disjoint")
    if not (d1 | d2) <= top_ids:
        raise MoveError("disc contents must be punctures of the positive "
                        "boundary")
    if not pi <= (d1 | d2):
        raise MoveError("the crushed region meets only the two discs")
    if len(pi & d1) < spec.omega or len(pi & d2) < spec.omega:
        raise MoveError(
            f"each disc needs at least omega = {spec.omega} crushed "
            f"punctures; the handle would not wrap")
    if min(len(pi & d1), len(pi & d2)) < 2:
        raise MoveError(
            "each new vertex needs degree at least three: two crushed "
            "strands per disc besides the weighted edge")
    pmap = state.puncture_map()
    for p in sorted(pi):
        if pmap[p].weight != 1:
            raise MoveError(f"crushed puncture {p} has weight "
                            f"{pmap[p].weight}; the satellite region is "
                            f"unweighted")

    # Interior components: thin spheres of this VPC and their subtrees.
    discard_vpcs: set[str] = set()
    discard_surfaces: set[str] = set()
    for sid in spec.inside:
        if sid not in vpc.negatives:
            raise MoveError(f"{sid} is not a negative boundary of "
                            f"{spec.vpc}")
        s = smap[sid]
        if s.role != ROLE_THIN or s.genus != 0:
            raise MoveError(f"interior component {sid} must be a thin "
                            f"sphere")
        sides = [v for v in state.vpcs_of_negative(sid) if v.id != vpc.id]
        if len(sides) != 1:
            raise MoveError(f"{sid} does not bound a far side")
        # walk the dual graph away from the crushed VPC
        component = {sides[0].id}
        stack = [sides[0].id]
        while stack:
            vid = stack.pop()
            v = state.vpc(vid)
            for nbr in state.vpcs_of_positive(v.positive):
                if nbr.id not in component:
                    component.add(nbr.id)
                    stack.append(nbr.id)
            for neg in v.negatives:
                if neg == sid:
                    continue
                for nbr in state.vpcs_of_negative(neg):
                    if nbr.id not in component:
                        component.add(nbr.id)
                        stack.append(nbr.id)
        if vpc.id in component:
            raise MoveError(f"{sid} does not cut off a subtree")
        discard_vpcs |= component
        discard_surfaces.add(sid)
        for vid in component:
            v = state.vpc(vid)
            discard_surfaces.add(v.positive)
            discard_surfaces.update(v.negatives)

    discarded_punctures = {p for sid in discard_surfaces
                           for p in smap[sid].puncture_ids()}
    inside_punctures = {p for sid in spec.inside
                        for p in smap[sid].puncture_ids()}

    # Closure: arcs touching the crushed region stay inside it.
    crushed_zone = pi | inside_punctures
    kept_arcs = {"bridge": [], "vertical": [], "ghost": []}
    for kind, (a, b) in vpc.tangle.all_arcs():
        touched = (a in crushed_zone) or (b in crushed_zone)
        if not touched:
            if a in discarded_punctures or b in discarded_punctures:
                raise MoveError(f"arc ({a},{b}) leaves the crushed region "
                                f"but meets a discarded component")
            kept_arcs[kind].append((a, b))
            continue
        for p in (a, b):
            if p not in crushed_zone:
                raise MoveError(
                    f"arc ({a},{b}) joins the crushed region to {p} "
                    f"outside it; the handle is not crushable as declared")

    pre = invariant_bundle(state, (1, spec.omega), check=False)
    pre_unweighted = netx_unweighted(state)

    # The two new vertex spheres and the weighted edge between them.
    verts = []
    for tag, disc in (("1", sorted(pi & d1)), ("2", sorted(pi & d2))):
        leaves = tuple(Puncture(f"{spec.vpc}.cv{tag}.{k}", 1)
                       for k in range(len(disc)))
        eend = Puncture(f"{spec.vpc}.cv{tag}.e", spec.omega)
        verts.append((SurfaceRec(f"{spec.vpc}.cv{tag}", ROLE_VERTEX, 0,
                                 leaves + (eend,)), disc, leaves, eend))
    new_vertical = []
    for vert, disc, leaves, _e in verts:
        for p, leaf in zip(disc, leaves):
            new_vertical.append((p, leaf.id))
    ghost = tuple(sorted((verts[0][3].id, verts[1][3].id)))

    tangle = TangleData(
        bridge=tuple(sorted(kept_arcs["bridge"])),
        vertical=tuple(sorted(kept_arcs["vertical"] + new_vertical)),
        ghost=tuple(sorted(kept_arcs["ghost"] + [ghost])),
        core_loops=vpc.tangle.core_loops,
    )
    new_vpc = replace(
        vpc,
        negatives=tuple(sorted(
            [n for n in vpc.negatives if n not in discard_surfaces]
            + [verts[0][0].id, verts[1][0].id])),
        tangle=tangle)

    surfaces = [s for s in state.surfaces if s.id not in discard_surfaces]
    surfaces += [verts[0][0], verts[1][0]]
    vpcs = [new_vpc if v.id == vpc.id else v
            for v in state.vpcs if v.id not in discard_vpcs]
    result = replace(state, surfaces=tuple(surfaces),
                     vpcs=tuple(vpcs)).sorted()
    report = validate_state(result)
    if not report.ok:
        raise MoveError(f"crushing produced an invalid state:\n{report}")

    post = invariant_bundle(result, (1, spec.omega), check=False)
    if post.netchi > pre.netchi:
        raise MoveError("crushing increased net Euler characteristic")
    if netx_unweighted(result) > pre_unweighted:
        raise MoveError("crushing increased the unweighted net extent")
    lhs = post.x(spec.omega)
    rhs = HalfInt((spec.omega - 1) * pre.netchi) + pre.netx
    if lhs > rhs:
        raise MoveError("crushing broke the weighted extent accounting")
    return result


def crush_identity_gap(pre: PairState, post: PairState, omega: int) -> HalfInt:
    """rhs - lhs of the crushing accounting; 0 when equality holds."""
    b_pre = invariant_bundle(pre, (1, omega), check=False)
    b_post = invariant_bundle(post, (1, omega), check=False)
    rhs = HalfInt((omega - 1) * b_pre.netchi) + b_pre.netx
    return rhs - b_post.x(omega)


# ---------------------------------------------------------------------------
# closed-form bound calculators
# ---------------------------------------------------------------------------

def handle_crush_bound(netw_h_half, netw_g0_companion_half, omega: int,
                       g1: int) -> bool:
    """The crushed-handle inequality
    netw(H)/2 >= netw_g0(companion)/2 - omega * g1."""
    if omega < 1 or g1 < 0:
        raise ValueError("omega is positive and g1 nonnegative")
    lhs = HalfInt.of(netw_h_half)
    rhs = HalfInt.of(netw_g0_companion_half) - omega * g1
    return lhs >= rhs


def satellite_bounds(b1_companion, variant="plain", *, omega=None, n=None,
                     q=None, lensed=False,
                     companion_is_torus_knot=False) -> HalfInt:
    """Genus-1 bridge number bounds for satellites.

    plain:      omega * b (lensed: omega * (b - 1))
    whitehead:  2**n * b   for the n-th iterated Whitehead double
    cable:      q * b      for a (p, q) cable

    The caller asserts that the companion is not an unknot, torus knot,
    or core loop; torus-knot companions are refused outright because the
    inequality has counterexamples there.
    """
    if companion_is_torus_knot:
        raise ValueError(
            "torus-knot companions are excluded: satellites of torus "
            "knots can have smaller genus-1 bridge number than the bound")
    b = HalfInt.of(b1_companion)
    if b < 0:
        raise ValueError("bridge numbers are nonnegative")
    if variant == "plain":
        if omega is None or omega < 1:
            raise ValueError("plain bounds need a wrapping number")
        return (b - 1) * omega if lensed else b * omega
    if lensed:
        raise ValueError(f"the lensed correction applies to the plain "
                         f"bound, not {variant!r}")
    if variant == "whitehead":
        if n is None or n < 0:
            raise ValueError("whitehead bounds need an iteration count")
        return b * (2 ** n)
    if variant == "cable":
        if q is None or q < 1:
            raise ValueError("cable bounds need the winding q")
        return b * q
    raise ValueError(f"unknown variant {variant!r}")


def omega_one_bound(b_companion, lensed: bool) -> HalfInt:
    """Wrapping number one: b_g(satellite) >= b_g(companion) - delta,
    with delta = 1 exactly for a lensed solid torus, floored at zero."""
    b = HalfInt.of(b_companion)
    if b < 0:
        raise ValueError("bridge numbers are nonnegative")
    value = b - (1 if lensed else 0)
    return value if value > 0 else HalfInt(0)
