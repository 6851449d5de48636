"""The thinning and amalgamation calculus.

Moves are pure functions from states to states.  Every move validates its
own preconditions, assembles the candidate result, re-validates it fully,
and asserts the arithmetic it is supposed to preserve:

* consolidation and untelescoping leave netchi, netg, netw, netx_m
  untouched and strictly decrease the complexity (untelescoping only with
  honest discs; specs that split off a 0- or 1-punctured disc region are
  the semi-disc moves, which are legal but may raise complexity);
* untelescoping additionally satisfies, for every m,
  x_m(upper) + x_m(lower) - x_m(new thin) = x_m(old thick);
* amalgamation leaves the whole bundle untouched.

The disc data of an untelescoping is caller-supplied: the caller names the
discs' weights, how a separating disc splits the surface, on which side of
that split the opposite disc sits, and the tangles of the four (up to
eight) outer pieces.  The collar pieces between the new thick and thin
surfaces are fully determined and are synthesized here.

Complexity of a state is the non-increasing sequence of
``-2*chi(H) + |H cap T| + 2`` over thick surfaces, compared
lexicographically; a strict prefix counts as smaller.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .halfint import HalfInt
from .invariants import classify_vpc, invariant_bundle, surface_x_m
from .model import (
    ROLE_THICK,
    ROLE_THIN,
    MoveError,
    PairState,
    Puncture,
    SurfaceRec,
    TangleData,
    VpcRec,
    dual_digraph,
    validate_state,
)


# ---------------------------------------------------------------------------
# complexity
# ---------------------------------------------------------------------------

def complexity(state: PairState) -> tuple[int, ...]:
    """Thick-surface entries -2*chi + punctures + 2, largest first."""
    entries = [-2 * s.euler + len(s.punctures) + 2 for s in state.thick()]
    return tuple(sorted(entries, reverse=True))


def compare_complexity(a, b) -> int:
    """-1, 0, or 1; tuples sorted non-increasing, prefixes are smaller."""
    ta, tb = tuple(a), tuple(b)
    if ta == tb:
        return 0
    return -1 if ta < tb else 1


# ---------------------------------------------------------------------------
# move specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SideSplit:
    """How a separating disc divides its surface.

    ``genus`` and ``punctures`` give the two sides in a fixed order;
    ``other_side`` is the index of the side containing the boundary of the
    companion disc.
    """

    genus: tuple[int, int]
    punctures: tuple[tuple[str, ...], tuple[str, ...]]
    other_side: int = 1


@dataclass(frozen=True)
class Outcome:
    """Caller-declared content of one outer piece after untelescoping."""

    negatives: tuple[str, ...] = ()
    tangle: TangleData = field(default_factory=TangleData)


@dataclass(frozen=True)
class DiscSpec:
    """One compressing (p=0) or cut (p=1) disc for a thick surface.

    ``vpc`` names the side of the surface the disc lives in.  When p=1
    the two scar punctures carry ``scar_weight``, the weight of the edge
    the disc intersects.  ``outcomes`` describe the outer VPC pieces on
    this disc's side: one entry for a nonseparating disc, two (indexed
    like the side split) for a separating one.
    """

    vpc: str
    p: int = 0
    scar_weight: int | None = None
    separating: bool = False
    side_split: SideSplit | None = None
    outcomes: tuple[Outcome, ...] = (Outcome(),)

    def scar(self) -> int:
        return self.scar_weight if self.p == 1 else 0


@dataclass(frozen=True)
class Move:
    op: str  # consolidate | untelescope | elementary | amalgamate
    thick: str | None = None
    thin: str | None = None
    vpcs: tuple[str, str] | None = None
    plus: DiscSpec | None = None
    minus: DiscSpec | None = None


def apply_move(state: PairState, move: Move) -> PairState:
    if move.op == "consolidate":
        return consolidate(state, move.thick, move.thin)
    if move.op == "untelescope":
        return untelescope(state, move.thick, move.plus, move.minus)
    if move.op == "elementary":
        return elementary_thinning(state, move.thick, move.plus, move.minus)
    if move.op == "amalgamate":
        return amalgamate(state, *move.vpcs)
    raise MoveError(f"unknown move op {move.op!r}")


# ---------------------------------------------------------------------------
# strand walking
# ---------------------------------------------------------------------------

def _walk_strands(pieces, junction_points, crossing_name):
    """Concatenate arc pieces across junction punctures.

    ``pieces`` is a list of ((a, b), side) arc fragments.  A junction
    puncture has exactly one fragment end from each of its two sides; the
    strand crosses the new surface there exactly when the two fragments
    carry different side labels, and the crossing point is named by
    ``crossing_name``.  Returns (segments, loops) where each segment is
    (side, start, end) with crossing points already renamed, and loops
    maps a side label to the number of closed crossing-free strands.
    """
    at: dict[str, list[int]] = {}
    for idx, ((a, b), _side) in enumerate(pieces):
        for p in (a, b):
            if p in junction_points:
                at.setdefault(p, []).append(idx)
    for p, ends in at.items():
        if len(ends) != 2:
            raise MoveError(f"junction {p} has {len(ends)} strand ends")

    used = [False] * len(pieces)
    segments = []
    loops: dict[str, int] = {}

    def other_end(idx, p):
        (a, b), _ = pieces[idx]
        return b if a == p else a

    def continue_from(p, idx):
        """Follow the strand leaving junction p along piece idx."""
        here, piece = p, idx
        while True:
            used[piece] = True
            (a, b), side = pieces[piece]
            nxt = other_end(piece, here)
            if nxt not in junction_points:
                return side, nxt, None, None
            pair = at[nxt]
            succ = pair[0] if pair[1] == piece else pair[1]
            if succ == piece:
                # both ends of the junction belong to this piece
                succ = pair[0] if used[pair[1]] else pair[1]
            if pieces[succ][1] != side:
                return side, crossing_name(nxt), nxt, succ
            here, piece = nxt, succ

    # Open strands start at non-junction endpoints.
    startpoints = []
    for idx, ((a, b), _side) in enumerate(pieces):
        for p in (a, b):
            if p not in junction_points:
                startpoints.append((p, idx))
    for p, idx in sorted(startpoints):
        if used[idx]:
            continue
        start = p
        piece = idx
        here = p
        while True:
            side, end, junction, succ = continue_from(here, piece)
            segments.append((side, start, end))
            if junction is None:
                break
            start = crossing_name(junction)
            here, piece = junction, succ

    # Remaining pieces lie on closed strands.
    for idx in range(len(pieces)):
        if used[idx]:
            continue
        (a, b), side0 = pieces[idx]
        # walk the cycle once, recording crossings
        crossings = []
        here, piece = a, idx
        first = idx
        while True:
            used[piece] = True
            (pa, pb), side = pieces[piece]
            nxt = other_end(piece, here)
            pair = at[nxt]
            succ = pair[0] if pair[1] == piece else pair[1]
            if pieces[succ][1] != side:
                crossings.append((nxt, side, pieces[succ][1], succ))
            here, piece = nxt, succ
            if piece == first and here == a:
                break
        if not crossings:
            loops[side0] = loops.get(side0, 0) + 1
            continue
        # split the cycle at its crossings
        for i, (pt, _before, side_after, succ) in enumerate(crossings):
            nxt_pt = crossings[(i + 1) % len(crossings)][0]
            segments.append((side_after, crossing_name(pt),
                             crossing_name(nxt_pt)))
    return segments, loops


def _tangle_from_segments(segments, positive_punctures, loops=0) -> TangleData:
    bridge, vertical, ghost = [], [], []
    for _side, a, b in segments:
        a_pos = a in positive_punctures
        b_pos = b in positive_punctures
        if a_pos and b_pos:
            bridge.append(tuple(sorted((a, b))))
        elif a_pos:
            vertical.append((a, b))
        elif b_pos:
            vertical.append((b, a))
        else:
            ghost.append(tuple(sorted((a, b))))
    return TangleData(tuple(sorted(bridge)), tuple(sorted(vertical)),
                      tuple(sorted(ghost)), loops)


# ---------------------------------------------------------------------------
# consolidation
# ---------------------------------------------------------------------------

def _flip_component_beyond(surfaces, vpcs, sphere_id, keep_vpc):
    """Reverse every orientation in the dual-graph component behind a
    thin sphere (the side away from keep_vpc), the sphere included."""
    adjacency: dict[str, list[tuple[str, str]]] = {v.id: [] for v in vpcs}
    sides: dict[str, list[str]] = {}
    for v in vpcs:
        for s in surfaces:
            if s.role == ROLE_THICK and v.positive == s.id:
                sides.setdefault(s.id, []).append(v.id)
            if s.role == ROLE_THIN and s.id in v.negatives:
                sides.setdefault(s.id, []).append(v.id)
    for sid, vv in sides.items():
        if len(vv) == 2:
            adjacency[vv[0]].append((sid, vv[1]))
            adjacency[vv[1]].append((sid, vv[0]))
    far = [v for v in sides.get(sphere_id, ()) if v != keep_vpc]
    if len(far) != 1:
        raise MoveError(f"{sphere_id} does not have a far side to flip")
    component = {far[0]}
    stack = [far[0]]
    while stack:
        v = stack.pop()
        for sid, w in adjacency[v]:
            if sid == sphere_id or w in component:
                continue
            component.add(w)
            stack.append(w)
    if keep_vpc in component:
        raise MoveError(f"{sphere_id} does not separate the dual graph")
    flipped = []
    for s in surfaces:
        if s.id == sphere_id:
            flipped.append(replace(s, direction=far[0] if s.direction == keep_vpc
                                   else (keep_vpc if s.direction == far[0]
                                         else s.direction)))
            continue
        if s.role in (ROLE_THICK, ROLE_THIN) and s.id in sides:
            vv = sides[s.id]
            if len(vv) == 2 and vv[0] in component and vv[1] in component:
                other = vv[0] if s.direction == vv[1] else vv[1]
                flipped.append(replace(s, direction=other))
                continue
        flipped.append(s)
    return flipped


def consolidate(state: PairState, thick_id: str, thin_id: str) -> PairState:
    """Remove a thick/thin pair bounding a (punctured) product.

    The three VPCs meeting the pair merge into one; strands concatenate
    across the removed surfaces by puncture id.  Leftover interior
    spheres of a punctured product stay behind as thin surfaces, with the
    orientation of their pendant subtrees reversed to keep the digraph
    consistent.  Net invariants are unchanged and complexity drops.
    """
    smap = state.surface_map()
    if thick_id not in smap or smap[thick_id].role != ROLE_THICK:
        raise MoveError(f"{thick_id} is not a thick surface")
    if thin_id not in smap or smap[thin_id].role != ROLE_THIN:
        raise MoveError(f"{thin_id} is not a thin surface")
    middle = None
    for cand in state.vpcs_of_positive(thick_id):
        if thin_id not in cand.negatives:
            continue
        cls = classify_vpc(state, cand.id)
        if cls.kind in ("product", "punctured-product") and \
                cls.partner == thin_id:
            middle = cand
            break
    if middle is None:
        raise MoveError(
            f"no product or punctured product between {thick_id} and "
            f"{thin_id}; consolidation rejected")
    upper = [v for v in state.vpcs_of_positive(thick_id) if v.id != middle.id]
    lower = [v for v in state.vpcs_of_negative(thin_id) if v.id != middle.id]
    if len(upper) != 1 or len(lower) != 1 or upper[0].id == lower[0].id:
        raise MoveError("the surfaces being consolidated do not have "
                        "distinct outer VPCs")
    d_vpc, e_vpc = upper[0], lower[0]

    pre = invariant_bundle(state, (1, 2, 3), check=False)
    pre_cx = complexity(state)

    junctions = set(smap[thick_id].puncture_ids()) | set(
        smap[thin_id].puncture_ids())
    pieces = []
    for v in (d_vpc, middle, e_vpc):
        for _, arc in v.tangle.all_arcs():
            pieces.append((arc, "merged"))
    segments, loops = _walk_strands(pieces, junctions, lambda p: p)
    extra_loops = loops.get("merged", 0)
    leftovers = tuple(n for n in middle.negatives if n != thin_id)
    negatives = tuple(sorted({*d_vpc.negatives, *leftovers,
                              *(n for n in e_vpc.negatives if n != thin_id)}))
    pos_punct = set(smap[e_vpc.positive].puncture_ids())
    tangle = _tangle_from_segments(segments, pos_punct,
                                   d_vpc.tangle.core_loops +
                                   middle.tangle.core_loops +
                                   e_vpc.tangle.core_loops + extra_loops)
    merged = VpcRec(id=e_vpc.id, positive=e_vpc.positive,
                    negatives=negatives, tangle=tangle)

    remap = {middle.id: merged.id, d_vpc.id: merged.id}
    surfaces = []
    for s in state.surfaces:
        if s.id in (thick_id, thin_id):
            continue
        if s.direction in remap:
            s = replace(s, direction=remap[s.direction])
        surfaces.append(s)
    vpcs = [v for v in state.vpcs
            if v.id not in (middle.id, d_vpc.id, e_vpc.id)] + [merged]

    for sphere in sorted(leftovers):
        surfaces = _flip_component_beyond(surfaces, vpcs, sphere, merged.id)

    result = replace(state, surfaces=tuple(surfaces), vpcs=tuple(vpcs)).sorted()
    report = validate_state(result)
    if not report.ok:
        raise MoveError(f"consolidation produced an invalid state:\n{report}")
    post = invariant_bundle(result, (1, 2, 3), check=False)
    if post != pre:
        raise MoveError("consolidation changed the net invariants")
    if compare_complexity(complexity(result), pre_cx) >= 0:
        raise MoveError("consolidation failed to decrease complexity")
    return result


# ---------------------------------------------------------------------------
# untelescoping
# ---------------------------------------------------------------------------

def _check_disc(spec: DiscSpec, surface: SurfaceRec) -> None:
    if spec.p not in (0, 1):
        raise MoveError("a disc meets the graph 0 or 1 times")
    if spec.p == 1 and (spec.scar_weight is None or spec.scar_weight < 1):
        raise MoveError("a cut disc needs the weight of the edge it meets")
    if spec.separating:
        ss = spec.side_split
        if ss is None:
            raise MoveError("a separating disc needs a side split")
        if ss.other_side not in (0, 1):
            raise MoveError("other_side must be 0 or 1")
        if ss.genus[0] < 0 or ss.genus[1] < 0 or \
                ss.genus[0] + ss.genus[1] != surface.genus:
            raise MoveError(f"side split genus {ss.genus} does not sum to "
                            f"{surface.genus}")
        have = set(surface.puncture_ids())
        s0, s1 = set(ss.punctures[0]), set(ss.punctures[1])
        if s0 & s1 or s0 | s1 != have:
            raise MoveError("side split punctures are not an exact partition")
        if len(spec.outcomes) != 2:
            raise MoveError("a separating disc describes two outer pieces")
    else:
        if surface.genus < 1:
            raise MoveError("a nonseparating disc needs genus")
        if len(spec.outcomes) != 1:
            raise MoveError("a nonseparating disc describes one outer piece")


def _is_semi(spec: DiscSpec) -> bool:
    """Whether the disc's boundary is inessential (a semi-disc)."""
    if not spec.separating:
        return False
    ss = spec.side_split
    return any(ss.genus[i] == 0 and len(ss.punctures[i]) <= 1
               for i in (0, 1))


def _copies(punctures, suffix, pmap):
    return tuple(Puncture(f"{p}.{suffix}", pmap[p].weight) for p in punctures)


def untelescope(state: PairState, thick_id: str, plus: DiscSpec,
                minus: DiscSpec) -> PairState:
    """Replace one thick surface by upper and lower compressions with the
    doubly-compressed surface as a new thin level between them.

    ``plus`` lives in the VPC the surface points into, ``minus`` in the
    other.  New ids follow a fixed scheme: puncture copies gain ``.a``
    (upper thick), ``.b`` (lower thick) and ``.f`` (thin) suffixes; scars
    are ``<H>.sa0/.sa1`` and ``<H>.sb0/.sb1`` with thin copies
    ``<H>.sfa*``/``<H>.sfb*``; the thin pieces are ``<H>.fp``, ``<H>.fm``,
    ``<H>.fq``.
    """
    smap = state.surface_map()
    if thick_id not in smap or smap[thick_id].role != ROLE_THICK:
        raise MoveError(f"{thick_id} is not a thick surface")
    surface = smap[thick_id]
    sides = state.vpcs_of_positive(thick_id)
    above = next((v for v in sides if v.id == surface.direction), None)
    below = next((v for v in sides if v.id != surface.direction), None)
    if above is None or below is None:
        raise MoveError(f"{thick_id} does not have two sides")
    if plus.vpc == minus.vpc:
        raise MoveError("the two discs must lie in different VPCs")
    if plus.vpc != above.id or minus.vpc != below.id:
        raise MoveError(
            f"disc sides do not match the surface orientation: the plus "
            f"disc belongs in {above.id} and the minus disc in {below.id}")
    _check_disc(plus, surface)
    _check_disc(minus, surface)

    pre = invariant_bundle(state, (1, 2, 3), check=False)
    pre_cx = complexity(state)
    pmap = state.puncture_map()
    H = thick_id
    all_ids = surface.puncture_ids()

    def scar_pair(tag, weight):
        return (Puncture(f"{H}.s{tag}0", weight), Puncture(f"{H}.s{tag}1", weight))

    sa = scar_pair("a", plus.scar()) if plus.p else ()
    sb = scar_pair("b", minus.scar()) if minus.p else ()
    sfa = scar_pair("fa", plus.scar()) if plus.p else ()
    sfb = scar_pair("fb", minus.scar()) if minus.p else ()

    # --- thick compressions -------------------------------------------
    def compress(spec, suffix, scars):
        """[(comp key, genus, puncture tuple, old ids)] per component."""
        if spec.separating:
            ss = spec.side_split
            comps = []
            for i in (0, 1):
                pts = _copies(ss.punctures[i], suffix, pmap)
                if scars:
                    pts = pts + (scars[i],)
                comps.append((str(i), ss.genus[i], pts, ss.punctures[i]))
            return comps
        pts = _copies(all_ids, suffix, pmap) + tuple(scars)
        return [("", surface.genus - 1, pts, all_ids)]

    upper_comps = compress(plus, "a", sa)
    lower_comps = compress(minus, "b", sb)

    # --- the thin level ------------------------------------------------
    # fp: the plus side not containing the minus disc; fq: likewise for
    # the minus disc; fm: everything else, compressed as needed.
    def away(spec):
        ss = spec.side_split
        i = 1 - ss.other_side
        return ss.genus[i], set(ss.punctures[i]), i

    f_comps = []   # (key, genus, punctures, parent upper key, parent lower key)
    up_key_of_old = {}
    for key, _g, _pts, old in upper_comps:
        for p in old:
            up_key_of_old[p] = key
    low_key_of_old = {}
    for key, _g, _pts, old in lower_comps:
        for p in old:
            low_key_of_old[p] = key

    plus_scar_f = {0: None, 1: None}
    minus_scar_f = {0: None, 1: None}

    if plus.separating and minus.separating:
        gp, pp, ip = away(plus)
        gq, qq, iq = away(minus)
        if pp & qq:
            raise MoveError("the two side splits overlap away from each "
                            "other; inconsistent disc data")
        gm = surface.genus - gp - gq
        if gm < 0:
            raise MoveError("side split genus leaves no room for the "
                            "middle piece")
        mid = [p for p in all_ids if p not in pp and p not in qq]
        s = plus.side_split.other_side
        t = minus.side_split.other_side
        f_comps.append(("fp", gp, _copies(sorted(pp), "f", pmap)
                        + ((sfa[ip],) if plus.p else ()), str(ip), str(t)))
        f_comps.append(("fm", gm, _copies(mid, "f", pmap)
                        + ((sfa[s],) if plus.p else ())
                        + ((sfb[t],) if minus.p else ()), str(s), str(t)))
        f_comps.append(("fq", gq, _copies(sorted(qq), "f", pmap)
                        + ((sfb[iq],) if minus.p else ()), str(s), str(iq)))
        if plus.p:
            plus_scar_f[ip], plus_scar_f[s] = "fp", "fm"
        if minus.p:
            minus_scar_f[iq], minus_scar_f[t] = "fq", "fm"
    elif plus.separating:
        gp, pp, ip = away(plus)
        s = plus.side_split.other_side
        gm = surface.genus - gp - 1
        if gm < 0:
            raise MoveError("the minus disc needs genus on its side of "
                            "the plus split")
        mid = [p for p in all_ids if p not in pp]
        f_comps.append(("fp", gp, _copies(sorted(pp), "f", pmap)
                        + ((sfa[ip],) if plus.p else ()), str(ip), ""))
        f_comps.append(("fm", gm, _copies(mid, "f", pmap)
                        + ((sfa[s],) if plus.p else ()) + sfb, str(s), ""))
        if plus.p:
            plus_scar_f[ip], plus_scar_f[s] = "fp", "fm"
        if minus.p:
            minus_scar_f[0] = minus_scar_f[1] = "fm"
    elif minus.separating:
        gq, qq, iq = away(minus)
        t = minus.side_split.other_side
        gm = surface.genus - gq - 1
        if gm < 0:
            raise MoveError("the plus disc needs genus on its side of "
                            "the minus split")
        mid = [p for p in all_ids if p not in qq]
        f_comps.append(("fm", gm, _copies(mid, "f", pmap) + sfa
                        + ((sfb[t],) if minus.p else ()), "", str(t)))
        f_comps.append(("fq", gq, _copies(sorted(qq), "f", pmap)
                        + ((sfb[iq],) if minus.p else ()), "", str(iq)))
        if plus.p:
            plus_scar_f[0] = plus_scar_f[1] = "fm"
        if minus.p:
            minus_scar_f[iq], minus_scar_f[t] = "fq", "fm"
    else:
        if surface.genus < 2:
            raise MoveError("two nonseparating discs need genus at least 2")
        f_comps.append(("fm", surface.genus - 2,
                        _copies(all_ids, "f", pmap) + sfa + sfb, "", ""))
        if plus.p:
            plus_scar_f[0] = plus_scar_f[1] = "fm"
        if minus.p:
            minus_scar_f[0] = minus_scar_f[1] = "fm"

    # --- surface records ------------------------------------------------
    def upper_slot(key):
        return above.id if not plus.separating else f"{above.id}.{key}"

    def lower_slot(key):
        return below.id if not minus.separating else f"{below.id}.{key}"

    def uc_id(key):
        return f"{H}.uc{key}"

    def lc_id(key):
        return f"{H}.lc{key}"

    new_surfaces = []
    upper_ids, lower_ids, thin_ids = [], [], []
    for key, g, pts, _old in upper_comps:
        sid = f"{H}.a{key}"
        upper_ids.append((key, sid))
        new_surfaces.append(SurfaceRec(sid, ROLE_THICK, g, pts,
                                       direction=upper_slot(key)))
    for key, g, pts, _old in lower_comps:
        sid = f"{H}.b{key}"
        lower_ids.append((key, sid))
        new_surfaces.append(SurfaceRec(sid, ROLE_THICK, g, pts,
                                       direction=lc_id(key)))
    for key, g, pts, upkey, _lowkey in f_comps:
        sid = f"{H}.{key}"
        thin_ids.append((key, sid))
        new_surfaces.append(SurfaceRec(sid, ROLE_THIN, g, pts,
                                       direction=uc_id(upkey)))

    # --- collar VPCs -----------------------------------------------------
    def collar(tangle_suffix, comp, children, ghost_scars, ghost_keys,
               vid, top_id):
        _key, _g, pts, old = comp
        verticals = []
        for p in old:
            verticals.append((f"{p}.{tangle_suffix}", f"{p}.f"))
        for scar_thick, scar_thin in ghost_keys:
            verticals.append((scar_thick, scar_thin))
        ghosts = tuple([ghost_scars]) if ghost_scars else ()
        negs = tuple(sorted({f"{H}.{c}" for c in children}))
        return VpcRec(vid, top_id, negs,
                      TangleData(vertical=tuple(sorted(verticals)),
                                 ghost=ghosts))

    new_vpcs = []
    # upper collars: between each upper comp and its thin children.
    for (key, sid), comp in zip(upper_ids, upper_comps):
        children = [k for k, _g, _p, upkey, _l in f_comps if upkey == key]
        pair_scars = []
        if plus.p:
            for i in (0, 1):
                if (plus.separating and str(i) == key) or not plus.separating:
                    pair_scars.append((sa[i].id, sfa[i].id))
        ghost = None
        host = plus.side_split.other_side if plus.separating else 0
        if minus.p and ((plus.separating and str(host) == key)
                        or not plus.separating):
            ghost = (sfb[0].id, sfb[1].id)
        new_vpcs.append(collar("a", comp, children, ghost, pair_scars,
                               uc_id(key), sid))
    # lower collars.
    for (key, sid), comp in zip(lower_ids, lower_comps):
        children = [k for k, _g, _p, _u, lowkey in f_comps if lowkey == key]
        pair_scars = []
        if minus.p:
            for i in (0, 1):
                if (minus.separating and str(i) == key) or not minus.separating:
                    pair_scars.append((sb[i].id, sfb[i].id))
        ghost = None
        host = minus.side_split.other_side if minus.separating else 0
        if plus.p and ((minus.separating and str(host) == key)
                       or not minus.separating):
            ghost = (sfa[0].id, sfa[1].id)
        new_vpcs.append(collar("b", comp, children, ghost, pair_scars,
                               lc_id(key), sid))

    # --- outer pieces ----------------------------------------------------
    def outer(old_vpc, spec, comps, slot_of, thick_ids):
        declared = set()
        for outcome in spec.outcomes:
            declared.update(outcome.negatives)
        if declared != set(old_vpc.negatives) or \
                sum(len(o.negatives) for o in spec.outcomes) != \
                len(old_vpc.negatives):
            raise MoveError(
                f"outcomes of the disc in {old_vpc.id} must partition its "
                f"negative boundary exactly")
        out = []
        for (key, sid), outcome in zip(thick_ids, spec.outcomes):
            out.append(VpcRec(slot_of(key), sid,
                              tuple(sorted(outcome.negatives)),
                              outcome.tangle))
        return out

    new_vpcs += outer(above, plus, upper_comps, upper_slot, upper_ids)
    new_vpcs += outer(below, minus, lower_comps, lower_slot, lower_ids)

    # --- assemble --------------------------------------------------------
    slot_remap = {}
    if plus.separating:
        for n in plus.outcomes[0].negatives:
            slot_remap[(n, above.id)] = upper_slot("0")
        for n in plus.outcomes[1].negatives:
            slot_remap[(n, above.id)] = upper_slot("1")
    if minus.separating:
        for n in minus.outcomes[0].negatives:
            slot_remap[(n, below.id)] = lower_slot("0")
        for n in minus.outcomes[1].negatives:
            slot_remap[(n, below.id)] = lower_slot("1")

    surfaces = []
    for s in state.surfaces:
        if s.id == thick_id:
            continue
        if s.direction in (above.id, below.id):
            old = above.id if s.direction == above.id else below.id
            target = slot_remap.get((s.id, old))
            if target is None:
                target = upper_slot("") if old == above.id else \
                    (lower_slot("") if not minus.separating else None)
            if target is None:
                raise MoveError(f"cannot reassign direction of {s.id}")
            s = replace(s, direction=target)
        surfaces.append(s)
    surfaces += new_surfaces
    vpcs = [v for v in state.vpcs if v.id not in (above.id, below.id)]
    vpcs += new_vpcs

    result = replace(state, surfaces=tuple(surfaces),
                     vpcs=tuple(vpcs)).sorted()
    report = validate_state(result)
    if not report.ok:
        raise MoveError(f"untelescoping produced an invalid state:\n{report}")

    rmap = result.surface_map()
    for m in (1, 2, 3):
        total = HalfInt(0)
        for _k, sid in upper_ids:
            total = total + surface_x_m(rmap[sid], m)
        for _k, sid in lower_ids:
            total = total + surface_x_m(rmap[sid], m)
        for _k, sid in thin_ids:
            total = total - surface_x_m(rmap[sid], m)
        if total != surface_x_m(surface, m):
            raise MoveError(
                f"x_{m} of the compressed surfaces does not reproduce the "
                f"original; the disc data is inconsistent")
    post = invariant_bundle(result, (1, 2, 3), check=False)
    if post != pre:
        raise MoveError("untelescoping changed the net invariants")
    if not (_is_semi(plus) or _is_semi(minus)):
        if compare_complexity(complexity(result), pre_cx) >= 0:
            raise MoveError("untelescoping failed to decrease complexity")
    return result


def elementary_thinning(state: PairState, thick_id: str, plus: DiscSpec,
                        minus: DiscSpec) -> PairState:
    """Untelescope, then consolidate every product the move created.

    A side yields a consolidation exactly when its disc separates; the
    engine finds the products with classify_vpc and checks that this
    agreement holds before collapsing them.
    """
    result = untelescope(state, thick_id, plus, minus)
    H = thick_id
    new_thick = {s.id for s in result.surfaces
                 if s.id.startswith(f"{H}.a") or s.id.startswith(f"{H}.b")}
    new_thin = {s.id for s in result.surfaces
                if s.id in (f"{H}.fp", f"{H}.fm", f"{H}.fq")}

    def immediate(prefix):
        for v in result.vpcs:
            if not v.id.startswith(prefix):
                continue
            cls = classify_vpc(result, v.id)
            if cls.kind in ("product", "punctured-product") and \
                    cls.partner in new_thin:
                return True
        return False

    if immediate(f"{H}.uc") != plus.separating:
        raise MoveError("upper consolidations disagree with the plus "
                        "disc's separating flag")
    if immediate(f"{H}.lc") != minus.separating:
        raise MoveError("lower consolidations disagree with the minus "
                        "disc's separating flag")

    while True:
        candidates = []
        rmap = result.surface_map()
        for t in sorted(new_thick):
            if t not in rmap:
                continue
            for v in result.vpcs_of_positive(t):
                cls = classify_vpc(result, v.id)
                if cls.kind in ("product", "punctured-product") and \
                        cls.partner in new_thin and cls.partner in rmap:
                    candidates.append((t, cls.partner))
        if not candidates:
            return result
        t, f = sorted(candidates)[0]
        result = consolidate(result, t, f)


# ---------------------------------------------------------------------------
# amalgamation
# ---------------------------------------------------------------------------

def amalgamate(state: PairState, c1_id: str, c2_id: str) -> PairState:
    """Merge two VPCs across their shared thin boundary.

    The shared thin surfaces disappear along with both positive
    boundaries; a single thick surface of genus g1 + g2 - g(F) + |F| - 1
    replaces them.  Strands concatenate across the removed surfaces:
    vertical meets vertical in a crossing of the new surface, a ghost arc
    continues a vertical one, and two ghost arcs meeting at a shared
    puncture make the amalgamation impossible.
    """
    if c1_id == c2_id:
        raise MoveError("amalgamation needs two distinct VPCs")
    c1, c2 = state.vpc(c1_id), state.vpc(c2_id)
    shared = sorted(set(c1.negatives) & set(c2.negatives))
    if not shared:
        raise MoveError(f"{c1_id} and {c2_id} share no thin surface")
    smap = state.surface_map()
    owner = state.puncture_surface()
    shared_punctures = {p for sid in shared
                        for p in smap[sid].puncture_ids()}

    ghost_ends = {}
    for v, tag in ((c1, 1), (c2, 2)):
        for a, b in v.tangle.ghost:
            for p in (a, b):
                if p in shared_punctures:
                    if ghost_ends.get(p, tag) != tag:
                        raise MoveError(
                            f"ghost arcs from both sides meet at {p}; "
                            f"amalgamation rejected")
                    ghost_ends[p] = tag

    h1, h2 = smap[c1.positive], smap[c2.positive]
    if h1.id == h2.id:
        raise MoveError("the two VPCs share their positive boundary")
    d1 = next((v for v in state.vpcs_of_positive(h1.id) if v.id != c1.id), None)
    d2 = next((v for v in state.vpcs_of_positive(h2.id) if v.id != c2.id), None)
    if d1 is None or d2 is None or d1.id == c2.id or d2.id == c1.id:
        raise MoveError("amalgamation needs outer VPCs on both sides")

    # Normalize the flow to low -> c_low -> c_high -> high.
    f_dirs = {smap[sid].direction for sid in shared}
    if f_dirs == {c2.id}:
        c_low, c_high, d_low, d_high = c1, c2, d1, d2
    elif f_dirs == {c1.id}:
        c_low, c_high, d_low, d_high = c2, c1, d2, d1
    else:
        raise MoveError("shared thin surfaces disagree about orientation")
    h_low, h_high = smap[c_low.positive], smap[c_high.positive]

    pre = invariant_bundle(state, (1, 2, 3), check=False)

    genus = h_low.genus + h_high.genus \
        - sum(smap[sid].genus for sid in shared) + len(shared) - 1
    if genus < 0:
        raise MoveError("amalgamated surface would have negative genus")

    low_to_f = {a for a in c_low.tangle.vertical if owner[a[1]] in shared}
    high_to_f = {a for a in c_high.tangle.vertical if owner[a[1]] in shared}

    pieces = []
    for a in d_low.tangle.bridge + d_low.tangle.vertical + d_low.tangle.ghost:
        pieces.append((a, "down"))
    for a in d_high.tangle.bridge + d_high.tangle.vertical + d_high.tangle.ghost:
        pieces.append((a, "up"))
    for kind, a in c_low.tangle.all_arcs():
        side = "down" if (kind == "vertical" and a in low_to_f) else "up"
        pieces.append((a, side))
    for kind, a in c_high.tangle.all_arcs():
        side = "up" if (kind == "vertical" and a in high_to_f) else "down"
        pieces.append((a, side))

    junctions = (set(h_low.puncture_ids()) | set(h_high.puncture_ids())
                 | shared_punctures)

    def crossing_name(p):
        return f"{p}+" if p in shared_punctures else p

    segments, loop_counts = _walk_strands(pieces, junctions, crossing_name)

    pmap = state.puncture_map()
    consumed_low = {a[0] for a in low_to_f}
    consumed_high = {a[0] for a in high_to_f}
    new_punctures = []
    for p in h_low.punctures:
        if p.id not in consumed_low:
            new_punctures.append(p)
    for p in h_high.punctures:
        if p.id not in consumed_high:
            new_punctures.append(p)
    for sid in shared:
        for p in smap[sid].punctures:
            low_arc_is_vertical = any(a[1] == p.id for a in low_to_f)
            high_arc_is_vertical = any(a[1] == p.id for a in high_to_f)
            if low_arc_is_vertical and high_arc_is_vertical:
                new_punctures.append(Puncture(f"{p.id}+", p.weight))
    new_id = f"{h_low.id}+{h_high.id}"

    v_down_id, v_up_id = d_low.id, d_high.id
    new_thick = SurfaceRec(new_id, ROLE_THICK, genus,
                           tuple(sorted(new_punctures, key=lambda p: p.id)),
                           direction=v_up_id)

    pos_set = {p.id for p in new_punctures}
    down_segments = [s for s in segments if s[0] == "down"]
    up_segments = [s for s in segments if s[0] == "up"]
    v_down = VpcRec(
        v_down_id, new_id,
        tuple(sorted({*d_low.negatives,
                      *(n for n in c_high.negatives if n not in shared)})),
        _tangle_from_segments(down_segments, pos_set,
                              d_low.tangle.core_loops +
                              c_high.tangle.core_loops +
                              loop_counts.get("down", 0)))
    v_up = VpcRec(
        v_up_id, new_id,
        tuple(sorted({*d_high.negatives,
                      *(n for n in c_low.negatives if n not in shared)})),
        _tangle_from_segments(up_segments, pos_set,
                              d_high.tangle.core_loops +
                              c_low.tangle.core_loops +
                              loop_counts.get("up", 0)))

    remap = {c_high.id: v_down_id, c_low.id: v_up_id}
    surfaces = []
    removed = {h_low.id, h_high.id, *shared}
    for s in state.surfaces:
        if s.id in removed:
            continue
        if s.direction in remap:
            s = replace(s, direction=remap[s.direction])
        surfaces.append(s)
    surfaces.append(new_thick)
    vpcs = [v for v in state.vpcs
            if v.id not in (c1.id, c2.id, d1.id, d2.id)] + [v_down, v_up]

    result = replace(state, surfaces=tuple(surfaces),
                     vpcs=tuple(vpcs)).sorted()
    report = validate_state(result)
    if not report.ok:
        raise MoveError(f"amalgamation produced an invalid state:\n{report}")
    post = invariant_bundle(result, (1, 2, 3), check=False)
    if post != pre:
        raise MoveError("amalgamation changed the net invariants")
    if new_thick.weight != h_low.weight + h_high.weight - \
            sum(smap[sid].weight for sid in shared):
        raise MoveError("amalgamated weight disagrees with "
                        "w(H1) + w(H2) - w(F)")
    return result


# ---------------------------------------------------------------------------
# the thinning driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceStep:
    step: int
    op: str
    complexity: tuple[int, ...]
    bundle: object

    def to_json(self):
        return {"step": self.step, "op": self.op,
                "complexity": list(self.complexity),
                "bundle": self.bundle.to_json()}


@dataclass(frozen=True)
class DriverResult:
    state: PairState
    trace: tuple[TraceStep, ...]
    completed: bool
    locally_thin_relative_to_script: bool
    error: str | None = None


def detect_consolidations(state: PairState):
    """All (thick, thin) pairs currently bounding a (punctured) product."""
    out = []
    for v in state.vpcs:
        cls = classify_vpc(state, v.id)
        if cls.kind in ("product", "punctured-product") and cls.partner:
            partner = state.surface(cls.partner)
            if partner.role == ROLE_THIN:
                out.append((v.positive, cls.partner))
    return sorted(set(out))


def thin_driver(state: PairState, script=(), greedy=False) -> DriverResult:
    """Run thinning moves in order, recording a strictly decreasing trace.

    In greedy mode every detectable consolidation is applied (smallest
    surface ids first) before each scripted move and after the last one.
    Amalgamations are not thinning moves and are rejected here; apply
    them with apply_move.  The first invalid move aborts with the partial
    trace.
    """
    trace = [TraceStep(0, "start", complexity(state),
                       invariant_bundle(state, (1, 2, 3), check=False))]
    current = state
    step = 0

    def run(move_desc, fn):
        nonlocal current, step
        before = complexity(current)
        new_state = fn(current)
        after = complexity(new_state)
        if compare_complexity(after, before) >= 0:
            raise MoveError(f"{move_desc} did not decrease complexity")
        current = new_state
        step += 1
        trace.append(TraceStep(step, move_desc, after,
                               invariant_bundle(current, (1, 2, 3),
                                                check=False)))

    def greedy_pass():
        while True:
            found = detect_consolidations(current)
            if not found:
                return
            t, f = found[0]
            run(f"consolidate {t} {f}",
                lambda st: consolidate(st, t, f))

    try:
        if greedy:
            greedy_pass()
        for move in script:
            if move.op == "amalgamate":
                raise MoveError("amalgamation is not a thinning move; "
                                "run it through apply_move instead")
            run(f"{move.op} {move.thick}", lambda st: apply_move(st, move))
            if greedy:
                greedy_pass()
    except MoveError as exc:
        return DriverResult(current, tuple(trace), completed=False,
                            locally_thin_relative_to_script=False,
                            error=str(exc))
    locally_thin = not greedy or not detect_consolidations(current)
    return DriverResult(current, tuple(trace), completed=True,
                        locally_thin_relative_to_script=locally_thin)
