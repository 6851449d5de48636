"""The thinning calculus: examples pinned, arithmetic cross-checked."""

import pytest

from bridgecalc.generator import (
    attach_pendant,
    bridge_knot,
    lens_chain,
    propose_moves,
)
from bridgecalc.invariants import invariant_bundle, surface_x_m
from bridgecalc.model import MoveError, TangleData
from bridgecalc.moves import (
    DiscSpec,
    Move,
    Outcome,
    SideSplit,
    amalgamate,
    compare_complexity,
    complexity,
    consolidate,
    elementary_thinning,
    thin_driver,
    untelescope,
)
from bridgecalc.sums import Attachment, SumSpec, compose
from helpers import genus2_four_punctures, remark_38_state


def bundle(state):
    return invariant_bundle(state, (1, 2, 3), check=False)


def test_complexity_entries_and_order():
    # genus-2 thick with 4 punctures: -2(-2) + 4 + 2 = 10
    state = genus2_four_punctures()
    assert complexity(state) == (10,)
    assert compare_complexity((8, 6), (10,)) == -1
    assert compare_complexity((8, 6), (8, 6, 2)) == -1  # prefix rule
    assert compare_complexity((8, 6), (8, 6)) == 0


def test_consolidate_product_torus():
    state = lens_chain(2, 1)
    before = bundle(state)
    after_state = consolidate(state, "T1", "F1")
    assert bundle(after_state) == before
    # the chain shortens by one thick and one thin torus
    assert len(after_state.thick()) == 1
    assert len(after_state.thin()) == 0


def test_consolidate_punctured_product_keeps_sphere():
    state = attach_pendant(lens_chain(2, 1), "M1", punctured=False)
    before = bundle(state)
    after = consolidate(state, "T1", "F1")
    assert bundle(after) == before
    assert "pS" in {s.id for s in after.thin()}  # the sphere persists


def test_consolidate_punctured_product_with_strand():
    state = attach_pendant(lens_chain(2, 1), "M1", punctured=True)
    before = bundle(state)
    after = consolidate(state, "T1", "F1")
    assert bundle(after) == before
    assert "pS" in {s.id for s in after.thin()}


def test_consolidate_rejects_non_product():
    state = remark_38_state()
    with pytest.raises(MoveError):
        consolidate(state, "H1", "S")


def nonsep_disc(vpc_id, tangle, p=0, scar_weight=None):
    return DiscSpec(vpc=vpc_id, p=p, scar_weight=scar_weight,
                    separating=False, outcomes=(Outcome((), tangle),))


def genus2_discs():
    """Nonseparating compressing disc above, nonseparating cut disc
    below, on the genus-2 four-puncture surface."""
    plus = nonsep_disc("U", TangleData(
        bridge=(("H0.a", "H1.a"), ("H2.a", "H3.a"))))
    minus = nonsep_disc("L", TangleData(
        bridge=(("H0.b", "H.sb0"), ("H.sb1", "H1.b"), ("H2.b", "H3.b"))),
        p=1, scar_weight=1)
    return plus, minus


def test_untelescope_genus2_example():
    state = genus2_four_punctures()
    plus, minus = genus2_discs()
    result = untelescope(state, "H", plus, minus)
    smap = result.surface_map()
    upper, lower, thin = smap["H.a"], smap["H.b"], smap["H.fm"]
    assert (upper.genus, len(upper.punctures)) == (1, 4)
    assert (lower.genus, len(lower.punctures)) == (1, 6)
    assert (thin.genus, len(thin.punctures)) == (0, 6)
    # x_1 arithmetic: 2 + 3 - 2 = 3 = x_1(H), each term evaluated fresh
    assert surface_x_m(upper, 1) == 2
    assert surface_x_m(lower, 1) == 3
    assert surface_x_m(thin, 1) == 2
    assert surface_x_m(state.surface("H"), 1) == 3
    assert bundle(result) == bundle(state)
    # complexity entry 10 becomes {8, 6}
    assert complexity(result) == (8, 6)
    assert compare_complexity(complexity(result), complexity(state)) == -1


def test_untelescope_rejects_same_side_discs():
    state = genus2_four_punctures()
    plus, _ = genus2_discs()
    with pytest.raises(MoveError):
        untelescope(state, "H", plus, plus)


def test_untelescope_rejects_wrong_side():
    state = genus2_four_punctures()
    plus, minus = genus2_discs()
    with pytest.raises(MoveError):
        untelescope(state, "H", minus, plus)


def test_elementary_nonsep_separating_one_consolidation():
    # nonseparating disc above, separating disc below: exactly the lower
    # side consolidates
    state = genus2_four_punctures()
    plus = nonsep_disc("U", TangleData(
        bridge=(("H0.a", "H1.a"), ("H2.a", "H3.a"))))
    minus = DiscSpec(
        vpc="L", p=0, separating=True,
        side_split=SideSplit(genus=(0, 2),
                             punctures=(("H0", "H1"), ("H2", "H3")),
                             other_side=1),
        outcomes=(Outcome((), TangleData(bridge=(("H0.b", "H1.b"),))),
                  Outcome((), TangleData(bridge=(("H2.b", "H3.b"),)))))
    mid = untelescope(state, "H", plus, minus)
    done = elementary_thinning(state, "H", plus, minus)
    assert bundle(done) == bundle(state)
    # one consolidation: one fewer thick and thin surface than the raw
    # untelescoping
    assert len(done.thick()) == len(mid.thick()) - 1
    assert len(done.thin()) == len(mid.thin()) - 1


def test_elementary_both_nonsep_no_consolidation():
    state = genus2_four_punctures()
    plus, minus = genus2_discs()
    raw = untelescope(state, "H", plus, minus)
    done = elementary_thinning(state, "H", plus, minus)
    assert {s.id for s in done.surfaces} == {s.id for s in raw.surfaces}


def test_elementary_both_separating_two_consolidations():
    state = bridge_knot(3)
    move = next(m for m in propose_moves(state) if m.op == "elementary")
    raw = untelescope(state, "H", move.plus, move.minus)
    done = elementary_thinning(state, "H", move.plus, move.minus)
    assert len(done.thick()) == len(raw.thick()) - 2
    assert bundle(done) == bundle(state)


def test_amalgamate_tori():
    state = lens_chain(2, 1)
    before = bundle(state)
    out = amalgamate(state, "M1", "N1")
    assert bundle(out) == before
    new_thick = [s for s in out.thick() if s.id == "T1+T2"]
    assert len(new_thick) == 1
    # genus 1 + 1 - 1 + 1 - 1 = 1 and weight 2 + 2 - 2 = 2
    assert (new_thick[0].genus, new_thick[0].weight) == (1, 2)


def test_amalgamate_bridge_spheres_additivity_shape():
    a, b = bridge_knot(2), bridge_knot(2)
    arc_a = a.vpc("L").tangle.bridge[0]
    arc_b = b.vpc("U").tangle.bridge[0]
    comp = compose(a, b, SumSpec("connected", u=1,
                                 attach_a=Attachment("L", arc=arc_a),
                                 attach_b=Attachment("U", arc=arc_b)))
    before = bundle(comp)
    out = amalgamate(comp, "a:L", "b:U")
    assert bundle(out) == before
    assert len(out.thick()) == 1
    assert len(out.thin()) == 0
    # a single bridge sphere computing b0 = 2 + 2 - 1
    sphere = out.thick()[0]
    assert (sphere.genus, sphere.weight) == (0, 6)


def test_amalgamate_rejects_ghost_collision():
    state = remark_38_state()
    with pytest.raises(MoveError):
        amalgamate(state, "V1", "V2")


def test_amalgamate_needs_shared_thin():
    state = lens_chain(3, 1)
    with pytest.raises(MoveError):
        amalgamate(state, "M1", "N2")


def test_amalgamate_untelescope_round_trip():
    """Amalgamating and then untelescoping with the inverse (semi) discs
    restores the bundle and the complexity."""
    a, b = bridge_knot(2), bridge_knot(2)
    arc_a = a.vpc("L").tangle.bridge[0]
    arc_b = b.vpc("U").tangle.bridge[0]
    comp = compose(a, b, SumSpec("connected", u=1,
                                 attach_a=Attachment("L", arc=arc_a),
                                 attach_b=Attachment("U", arc=arc_b)))
    start_bundle = bundle(comp)
    start_cx = complexity(comp)

    merged = amalgamate(comp, "a:L", "b:U")
    H = "b:H+a:H"
    up = merged.surface(H).direction             # = the old a:U side
    down = next(v.id for v in merged.vpcs_of_positive(H) if v.id != up)
    up_tangle = merged.vpc(up).tangle
    down_tangle = merged.vpc(down).tangle

    # Each side keeps one crossing strand inside its disc and cuts the
    # strand through the other crossing; the far factor's bridge arc
    # stays outside.
    def inverse_disc(vpc_id, tangle, suffix, keep_tok, cut_tok):
        keep = next(arc for arc in tangle.bridge if keep_tok in arc)
        cut = next(arc for arc in tangle.bridge if cut_tok in arc)
        rest = next(arc for arc in tangle.bridge
                    if arc not in (keep, cut))
        cut_inner = cut[0] if cut[0] != cut_tok else cut[1]
        side0 = tuple(sorted(set(keep) | {cut_inner}))
        side1 = tuple(sorted(set(rest) | {cut_tok}))
        out0 = TangleData(bridge=tuple(sorted(
            (tuple(sorted((f"{p}.{suffix}" for p in keep))),
             tuple(sorted((f"{cut_inner}.{suffix}", f"{H}.s{suffix}0")))))))
        out1 = TangleData(bridge=tuple(sorted(
            (tuple(sorted((f"{p}.{suffix}" for p in rest))),
             tuple(sorted((f"{cut_tok}.{suffix}", f"{H}.s{suffix}1")))))))
        return DiscSpec(
            vpc=vpc_id, p=1, scar_weight=1, separating=True,
            side_split=SideSplit(genus=(0, 0), punctures=(side0, side1),
                                 other_side=1),
            outcomes=(Outcome((), out0), Outcome((), out1)))

    plus = inverse_disc(up, up_tangle, "a", "sum.0+", "sum.1+")
    minus = inverse_disc(down, down_tangle, "b", "sum.1+", "sum.0+")
    result = elementary_thinning(merged, H, plus, minus)
    assert bundle(result) == start_bundle
    assert complexity(result) == start_cx


def test_thin_driver_three_elementaries():
    from bridgecalc.sums import Attachment, SumSpec, compose

    state = compose(compose(bridge_knot(3), bridge_knot(3),
                            SumSpec("distant", attach_a=Attachment("L"),
                                    attach_b=Attachment("U"))),
                    bridge_knot(3),
                    SumSpec("distant", attach_a=Attachment("a:L"),
                            attach_b=Attachment("U")))
    script = [m for m in propose_moves(state) if m.op == "elementary"]
    assert len(script) >= 3
    result = thin_driver(state, script[:3])
    assert result.completed
    assert len(result.trace) == 4
    for first, second in zip(result.trace, result.trace[1:]):
        assert compare_complexity(second.complexity, first.complexity) == -1
        assert second.bundle == result.trace[0].bundle


def test_thin_driver_empty_script_identity():
    state = bridge_knot(2)
    result = thin_driver(state, ())
    assert result.completed
    assert result.state == state
    assert len(result.trace) == 1


def test_thin_driver_greedy_fixpoint():
    state = lens_chain(2, 1)
    result = thin_driver(state, (), greedy=True)
    assert result.completed
    assert result.locally_thin_relative_to_script
    ops = [t.op for t in result.trace[1:]]
    assert all(op.startswith("consolidate") for op in ops)
    assert len(ops) >= 1


def test_thin_driver_rejects_amalgamation():
    state = lens_chain(2, 1)
    result = thin_driver(state, (Move("amalgamate", vpcs=("M1", "N1")),))
    assert not result.completed
    assert "thinning move" in result.error


def test_thin_driver_aborts_on_invalid_move():
    state = bridge_knot(2)
    result = thin_driver(state, (Move("consolidate", thick="H", thin="H"),))
    assert not result.completed
    assert len(result.trace) == 1


def test_move_invariance_over_proposals():
    states = [bridge_knot(3), bridge_knot(4), lens_chain(2, 1),
              attach_pendant(lens_chain(2, 1), "M1", punctured=True)]
    from bridgecalc.moves import apply_move

    for state in states:
        before = bundle(state)
        for move in propose_moves(state):
            assert bundle(apply_move(state, move)) == before
