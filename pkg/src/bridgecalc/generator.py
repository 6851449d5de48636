"""Deterministic state construction: catalog shapes, pendants, and the
seeded random stream feeding the property suites.

The catalog enumerates the standard shapes in a fixed order before any
sampling happens: bridge spheres for knots and links (with weights),
theta graphs, genus-handlebody pairs, and the sphere-and-torus chains of
net genus at most one, including the variants with pendant spheres.  The
random stream composes catalog atoms with connected, distant, and
cut-edge sums and occasionally hangs extra pendants.

Everything yielded by ``generate_states`` passes validation; the stream
for a given (seed, max_size) is reproducible byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import replace

from .model import (
    PairState,
    Puncture,
    SurfaceRec,
    TangleData,
    VpcRec,
    validate_state,
)
from .sums import Attachment, SumSpec, compose


def state_size(state: PairState) -> int:
    return len(state.surfaces) + len(state.vpcs)


# ---------------------------------------------------------------------------
# catalog shapes
# ---------------------------------------------------------------------------

def bridge_knot(b: int, weight: int = 1, name: str = "H") -> PairState:
    """A knot in b-bridge position with respect to one sphere."""
    if b < 1:
        raise ValueError("at least one bridge")
    punct = tuple(Puncture(f"{name}{k}", weight) for k in range(2 * b))
    upper = tuple((f"{name}{2 * k}", f"{name}{2 * k + 1}") for k in range(b))
    lower = tuple(tuple(sorted((f"{name}{(2 * k + 1) % (2 * b)}",
                                f"{name}{(2 * k + 2) % (2 * b)}")))
                  for k in range(b))
    return PairState(
        surfaces=(SurfaceRec(name, "thick", 0, punct, direction="U"),),
        vpcs=(VpcRec("U", name, (), TangleData(bridge=upper)),
              VpcRec("L", name, (), TangleData(bridge=tuple(sorted(lower))))),
    ).sorted()


def bridge_link(weights, name: str = "H") -> PairState:
    """A split-looking link in 1-bridge-per-component position."""
    punct = []
    upper, lower = [], []
    for k, w in enumerate(weights):
        punct += [Puncture(f"{name}{2 * k}", w), Puncture(f"{name}{2 * k + 1}", w)]
        upper.append((f"{name}{2 * k}", f"{name}{2 * k + 1}"))
        lower.append((f"{name}{2 * k}", f"{name}{2 * k + 1}"))
    return PairState(
        surfaces=(SurfaceRec(name, "thick", 0, tuple(punct), direction="U"),),
        vpcs=(VpcRec("U", name, (), TangleData(bridge=tuple(upper))),
              VpcRec("L", name, (), TangleData(bridge=tuple(lower)))),
    ).sorted()


def theta_graph(name: str = "H") -> PairState:
    """A trivalent theta graph, one vertex on each side of a sphere."""
    punct = tuple(Puncture(f"{name}{k}", 1) for k in range(3))
    vtop = tuple(Puncture(f"vt{k}", 1) for k in range(3))
    vbot = tuple(Puncture(f"vb{k}", 1) for k in range(3))
    return PairState(
        surfaces=(
            SurfaceRec(name, "thick", 0, punct, direction="U"),
            SurfaceRec("vt", "vertex-sphere", 0, vtop),
            SurfaceRec("vb", "vertex-sphere", 0, vbot),
        ),
        vpcs=(
            VpcRec("U", name, ("vt",), TangleData(
                vertical=tuple((f"{name}{k}", f"vt{k}") for k in range(3)))),
            VpcRec("L", name, ("vb",), TangleData(
                vertical=tuple((f"{name}{k}", f"vb{k}") for k in range(3)))),
        ),
    ).sorted()


def handlebody_knot(genus: int, name: str = "H") -> PairState:
    """A knot pushed into one side of an unpunctured Heegaard surface."""
    if genus < 1:
        raise ValueError("core loops need genus")
    return PairState(
        surfaces=(SurfaceRec(name, "thick", genus, (), direction="U"),),
        vpcs=(VpcRec("U", name, (), TangleData()),
              VpcRec("L", name, (), TangleData(core_loops=1))),
    ).sorted()


def lens_chain(k: int, b: int, loop: bool = False, weight: int = 1) -> PairState:
    """k parallel Heegaard tori with b bridges on top and bottom.

    The thick tori alternate with thin tori; all strands run vertically
    through the middle collars.  With b = 0 and loop=True this is the
    core-loop state of a single Heegaard torus.
    """
    if k < 1 or b < 0:
        raise ValueError("bad chain parameters")
    surfaces = []
    vpcs = []

    def punct(tag):
        return tuple(Puncture(f"{tag}.{j}", weight) for j in range(2 * b))

    def pids(tag):
        return [f"{tag}.{j}" for j in range(2 * b)]

    for i in range(1, k + 1):
        above = f"M{i}" if i < k else "Y"
        surfaces.append(SurfaceRec(f"T{i}", "thick", 1, punct(f"T{i}"),
                                   direction=above))
        if i < k:
            surfaces.append(SurfaceRec(f"F{i}", "thin", 1, punct(f"F{i}"),
                                       direction=f"N{i}"))
    bottom_arcs = tuple(tuple(sorted((f"T1.{2 * j}", f"T1.{2 * j + 1}")))
                        for j in range(b))
    vpcs.append(VpcRec("X", "T1", (), TangleData(
        bridge=tuple(sorted(bottom_arcs)),
        core_loops=1 if loop else 0)))
    for i in range(1, k):
        vpcs.append(VpcRec(f"M{i}", f"T{i}", (f"F{i}",), TangleData(
            vertical=tuple((f"T{i}.{j}", f"F{i}.{j}") for j in range(2 * b)))))
        vpcs.append(VpcRec(f"N{i}", f"T{i + 1}", (f"F{i}",), TangleData(
            vertical=tuple((f"T{i + 1}.{j}", f"F{i}.{j}")
                           for j in range(2 * b)))))
    top = f"T{k}"
    top_arcs = tuple(tuple(sorted((f"{top}.{(2 * j + 1) % (2 * b)}",
                                   f"{top}.{(2 * j + 2) % (2 * b)}")))
                     for j in range(b))
    vpcs.append(VpcRec("Y", top, (), TangleData(bridge=tuple(sorted(top_arcs)))))
    return PairState(surfaces=tuple(surfaces), vpcs=tuple(vpcs)).sorted()


def attach_pendant(state: PairState, vpc_id: str, punctured: bool,
                   tag: str = "p") -> PairState:
    """Hang a sphere pendant (thin + thick sphere, two trivial balls)
    off a VPC, rerouting one vertical strand through it if punctured."""
    vpc = state.vpc(vpc_id)
    smap = state.surface_map()
    top = smap[vpc.positive]
    top_in = top.direction == vpc.id
    s_id, hs_id = f"{tag}S", f"{tag}H"
    z1_id, z2_id = f"{tag}Z1", f"{tag}Z2"
    s_dir = z1_id if top_in else vpc_id
    hs_dir = z2_id if top_in else z1_id

    if punctured:
        arc = next(iter(vpc.tangle.vertical), None)
        if arc is None:
            raise ValueError(f"{vpc_id} has no vertical strand to reroute")
        w = state.puncture_map()[arc[0]].weight
        s_punct = (Puncture(f"{tag}S0", w), Puncture(f"{tag}S1", w))
        hs_punct = (Puncture(f"{tag}H0", w), Puncture(f"{tag}H1", w))
        vertical = tuple(v for v in vpc.tangle.vertical if v != arc)
        vertical += ((arc[0], f"{tag}S0"),)
        ghost = vpc.tangle.ghost + (tuple(sorted((f"{tag}S1", arc[1]))),)
        new_tangle = replace(vpc.tangle, vertical=tuple(sorted(vertical)),
                             ghost=tuple(sorted(ghost)))
        z1_tangle = TangleData(vertical=((f"{tag}H0", f"{tag}S0"),
                                         (f"{tag}H1", f"{tag}S1")))
        z2_tangle = TangleData(bridge=((f"{tag}H0", f"{tag}H1"),))
    else:
        s_punct = hs_punct = ()
        new_tangle = vpc.tangle
        z1_tangle = z2_tangle = TangleData()

    surfaces = state.surfaces + (
        SurfaceRec(s_id, "thin", 0, s_punct, direction=s_dir),
        SurfaceRec(hs_id, "thick", 0, hs_punct, direction=hs_dir),
    )
    new_vpc = replace(vpc, negatives=tuple(sorted((*vpc.negatives, s_id))),
                      tangle=new_tangle)
    vpcs = tuple(new_vpc if v.id == vpc_id else v for v in state.vpcs) + (
        VpcRec(z1_id, hs_id, (s_id,), z1_tangle),
        VpcRec(z2_id, hs_id, (), z2_tangle),
    )
    return replace(state, surfaces=surfaces, vpcs=vpcs).sorted()


def enumerate_catalog(max_size: int):
    """The deterministic catalog, smallest first.

    Contains every sphere-and-torus chain shape of net genus at most one
    that fits the size bound (thick/thin torus chains with bridges,
    core loops, and pendant spheres), plus the bridge-sphere and
    handlebody atoms used as composition factors.
    """
    items = []

    def add(name, state):
        if state_size(state) <= max_size:
            items.append((state_size(state), name, state))

    for b in (1, 2, 3, 4):
        add(f"bridge-knot-{b}", bridge_knot(b))
    for w in (2, 3):
        add(f"bridge-knot-1-w{w}", bridge_knot(1, weight=w))
        add(f"bridge-knot-2-w{w}", bridge_knot(2, weight=w))
    add("bridge-link-11", bridge_link((1, 1)))
    add("bridge-link-12", bridge_link((1, 2)))
    add("theta", theta_graph())
    for g in (1, 2, 3):
        add(f"handlebody-{g}", handlebody_knot(g))
    for k in (1, 2, 3):
        for b in (0, 1, 2):
            for loop in (False, True):
                if b == 0 and not loop and k == 1:
                    # a bare Heegaard torus with empty graph
                    add(f"lens-{k}-0-empty", lens_chain(k, 0))
                    continue
                name = f"lens-{k}-{b}{'-loop' if loop else ''}"
                add(name, lens_chain(k, b, loop))
    for b in (1, 2):
        base = bridge_knot(b)
        add(f"bridge-knot-{b}-pendant",
            attach_pendant(base, "L", punctured=False))
    chain = lens_chain(2, 1)
    add("lens-2-1-pendant", attach_pendant(chain, "M1", punctured=True))
    add("lens-2-1-pendant0", attach_pendant(chain, "M1", punctured=False))

    items.sort(key=lambda t: (t[0], t[1]))
    for _size, name, state in items:
        report = validate_state(state)
        if not report.ok:
            raise AssertionError(f"catalog state {name} invalid:\n{report}")
        yield name, state


def _random_composite(rng: random.Random, atoms, max_size: int):
    """One random sum of two catalog atoms, or None if it cannot fit."""
    name_a, a = rng.choice(atoms)
    name_b, b = rng.choice(atoms)
    if state_size(a) + state_size(b) + 1 > max_size + 4:
        return None
    kind = rng.choice(("connected", "distant", "connected", "cut-edge"))

    def attachment(state, want_arc):
        vpcs = sorted(state.vpcs, key=lambda v: v.id)
        if want_arc:
            options = []
            for v in vpcs:
                for kind_, arc in v.tangle.all_arcs():
                    options.append((v.id, arc))
                if v.tangle.core_loops:
                    options.append((v.id, None))
            if not options:
                return None
            vid, arc = rng.choice(options)
            if arc is None:
                return Attachment(vid, loop=True)
            return Attachment(vid, arc=arc)
        return Attachment(rng.choice(vpcs).id)

    att_a = attachment(a, kind != "distant")
    att_b = attachment(b, kind != "distant")
    if att_a is None or att_b is None:
        return None
    u = 1
    if kind == "connected":
        pm_a, pm_b = a.puncture_map(), b.puncture_map()
        wa = 1 if att_a.loop else pm_a[att_a.arc[0]].weight
        wb = 1 if att_b.loop else pm_b[att_b.arc[0]].weight
        if wa != wb:
            return None
        u = wa
    spec = SumSpec(kind, u=u, attach_a=att_a, attach_b=att_b)
    from .model import MoveError

    for flip in (False, True):
        try:
            return compose(a, b, replace(spec, flip_b=flip))
        except MoveError:
            continue
    return None


def generate_states(seed: int, max_size: int, count: int | None = None):
    """Deterministic stream: the full catalog first, then seeded sums.

    Every yielded state is valid; the stream is reproducible for a given
    (seed, max_size) and stops after ``count`` states when given.
    """
    emitted = 0

    def out(state):
        nonlocal emitted
        emitted += 1
        return state

    atoms = []
    for name, state in enumerate_catalog(max_size):
        atoms.append((name, state))
        yield out(state)
        if count is not None and emitted >= count:
            return
    if not atoms:
        return
    rng = random.Random(seed)
    budget = count if count is not None else 120
    attempts = 0
    while emitted < budget and attempts < budget * 20:
        attempts += 1
        state = _random_composite(rng, atoms, max_size)
        if state is None:
            continue
        report = validate_state(state)
        if not report.ok:
            raise AssertionError(f"generator produced an invalid state:\n"
                                 f"{report}")
        yield out(state)


# ---------------------------------------------------------------------------
# move proposals
# ---------------------------------------------------------------------------

def bridge_disc_pair(state: PairState, thick_id: str, cut: bool = False):
    """A weak-reducing disc pair for a thick surface, if one is visible.

    Encloses one bridge arc on each side in a separating disc; the two
    arcs must have disjoint endpoint sets.  With ``cut`` the upper disc
    additionally cuts a third bridge arc once.  Returns (plus, minus)
    DiscSpecs, or None when the shape does not support it.
    """
    from .moves import DiscSpec, Outcome, SideSplit
    from .model import TangleData

    smap = state.surface_map()
    surface = smap.get(thick_id)
    if surface is None or surface.role != "thick":
        return None
    sides = state.vpcs_of_positive(thick_id)
    above = next((v for v in sides if v.id == surface.direction), None)
    below = next((v for v in sides if v.id != surface.direction), None)
    if above is None or below is None:
        return None
    top_ids = set(surface.puncture_ids())

    def bridge_arcs(vpc):
        return [a for a in vpc.tangle.bridge
                if a[0] in top_ids and a[1] in top_ids]

    ups, downs = bridge_arcs(above), bridge_arcs(below)
    pick = None
    for ua in ups:
        for da in downs:
            if not set(ua) & set(da):
                pick = (ua, da)
                break
        if pick:
            break
    if pick is None:
        return None
    ua, da = pick
    cut_arc = None
    if cut:
        for arc in ups:
            if arc != ua and not set(arc) & set(da):
                cut_arc = arc
                break
        if cut_arc is None:
            return None

    pmap = state.puncture_map()
    owner = state.puncture_surface()

    def spec_for(vpc, enclosed, other_enclosed, suffix, cut_piece=None):
        side0 = set(enclosed)
        extra_tangle0 = []
        extra_tangle1 = []
        scar_weight = None
        if cut_piece is not None:
            # one endpoint of the cut arc moves inside the disc
            side0.add(cut_piece[0])
            scar_weight = pmap[cut_piece[0]].weight
            extra_tangle0.append(tuple(sorted(
                (f"{cut_piece[0]}.{suffix}", f"{thick_id}.s{suffix}0"))))
            extra_tangle1.append(tuple(sorted(
                (f"{cut_piece[1]}.{suffix}", f"{thick_id}.s{suffix}1"))))
        side1 = [p for p in surface.puncture_ids() if p not in side0]
        if surface.genus == 0 and len(side1) <= 1:
            return None  # semi-disc; not emitted
        def rename(p):
            return f"{p}.{suffix}" if owner[p] == thick_id else p
        tangle0_bridge = [tuple(sorted((rename(enclosed[0]),
                                        rename(enclosed[1]))))] + extra_tangle0
        rest_bridge = list(extra_tangle1)
        rest_vertical = []
        rest_ghost = []
        for kind, (a, b) in vpc.tangle.all_arcs():
            arc = (a, b)
            if set(arc) == set(enclosed) or \
                    (cut_piece is not None and set(arc) == set(cut_piece)):
                continue
            pair = (rename(a), rename(b))
            if kind == "bridge":
                rest_bridge.append(tuple(sorted(pair)))
            elif kind == "vertical":
                rest_vertical.append(pair)
            else:
                rest_ghost.append(tuple(sorted(pair)))
        outcomes = (
            Outcome((), TangleData(bridge=tuple(sorted(tangle0_bridge)))),
            Outcome(tuple(sorted(vpc.negatives)),
                    TangleData(bridge=tuple(sorted(rest_bridge)),
                               vertical=tuple(sorted(rest_vertical)),
                               ghost=tuple(sorted(rest_ghost)),
                               core_loops=vpc.tangle.core_loops)),
        )
        return DiscSpec(
            vpc=vpc.id, p=1 if cut_piece is not None else 0,
            scar_weight=scar_weight, separating=True,
            side_split=SideSplit(
                genus=(0, surface.genus),
                punctures=(tuple(sorted(side0)), tuple(sorted(side1))),
                other_side=1),
            outcomes=outcomes)

    plus = spec_for(above, ua, da, "a", cut_arc)
    minus = spec_for(below, da, ua, "b")
    if plus is None or minus is None:
        return None
    return plus, minus


def propose_moves(state: PairState, rng=None):
    """Individually valid moves visible on a state, deterministic order."""
    from .moves import Move, detect_consolidations

    out = []
    for thick, thin in detect_consolidations(state):
        out.append(Move("consolidate", thick=thick, thin=thin))
    owner = state.puncture_surface()
    for s in sorted(state.thin(), key=lambda s: s.id):
        sides = state.vpcs_of_negative(s.id)
        if len(sides) != 2:
            continue
        shared = set(sides[0].negatives) & set(sides[1].negatives)
        punct = {p for sid in shared for p in state.surface(sid).puncture_ids()}
        ghosts = [set(), set()]
        for k, v in enumerate(sides):
            for a, b in v.tangle.ghost:
                ghosts[k].update(p for p in (a, b) if p in punct)
        if ghosts[0] & ghosts[1]:
            continue
        out.append(Move("amalgamate",
                        vpcs=tuple(sorted((sides[0].id, sides[1].id)))))
    for s in sorted(state.thick(), key=lambda s: s.id):
        for cut in (False, True):
            pair = bridge_disc_pair(state, s.id, cut=cut)
            if pair is not None:
                out.append(Move("untelescope", thick=s.id,
                                plus=pair[0], minus=pair[1]))
                out.append(Move("elementary", thick=s.id,
                                plus=pair[0], minus=pair[1]))
    return out
