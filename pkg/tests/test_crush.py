"""Crushing arithmetic and the closed-form calculators.

The calculator expectations come from independent oracles: repeated
doubling for the iterated Whitehead values and repeated addition for the
cable values.
"""

import pytest

from bridgecalc.crush import (
    CrushSpec,
    crush,
    crush_identity_gap,
    handle_crush_bound,
    omega_one_bound,
    satellite_bounds,
)
from bridgecalc.generator import attach_pendant, bridge_knot
from bridgecalc.halfint import HalfInt
from bridgecalc.invariants import invariant_bundle, net_invariants


def figure8_spec():
    """The worked crushing instance: omega = 2, two punctures per disc
    inside the crushed region, nothing inside the ball."""
    return CrushSpec(vpc="L", d1=("H1", "H3", "H5", "H7"),
                     d2=("H0", "H2", "H4", "H6"),
                     pi=("H1", "H2", "H3", "H4"), omega=2)


def test_crush_figure8_structure():
    state = bridge_knot(4)
    result = crush(state, figure8_spec())
    verts = sorted(result.vertex_spheres(), key=lambda s: s.id)
    assert len(verts) == 2
    for v in verts:
        # each endpoint of the new edge has degree omega + 1 = 3
        assert len(v.punctures) == 3
        weights = sorted(p.weight for p in v.punctures)
        assert weights == [1, 1, 2]
    ghosts = result.vpc("L").tangle.ghost
    heavy = [g for g in ghosts
             if result.puncture_map()[g[0]].weight == 2]
    assert len(heavy) == 1  # exactly one ghost arc of weight omega
    # each vertex sphere carries >= omega weight-1 ends plus the heavy end
    for v in verts:
        assert sum(1 for p in v.punctures if p.weight == 1) >= 2


def test_crush_requires_omega_punctures():
    state = bridge_knot(4)
    from bridgecalc.model import MoveError

    with pytest.raises(MoveError):
        crush(state, CrushSpec(vpc="L", d1=("H1",), d2=("H0", "H2"),
                               pi=("H1", "H0", "H2"), omega=2))


def test_crush_rejects_leaky_arcs():
    state = bridge_knot(4)
    from bridgecalc.model import MoveError

    # pi covers one end of the bridge arc (H5, H6) but not the other
    with pytest.raises(MoveError):
        crush(state, CrushSpec(vpc="L", d1=("H1", "H3", "H5"),
                               d2=("H0", "H2", "H4"),
                               pi=("H1", "H2", "H3", "H4", "H5"), omega=2))


def test_crush_discards_interior_subtree():
    base = attach_pendant(bridge_knot(4), "L", punctured=False)
    pre = net_invariants(base)
    spec = CrushSpec(vpc="L", d1=("H1", "H3", "H5", "H7"),
                     d2=("H0", "H2", "H4", "H6"),
                     pi=("H1", "H2", "H3", "H4"), omega=2,
                     inside=("pS",))
    result = crush(base, spec)
    post = net_invariants(result)
    assert post.netchi <= pre.netchi
    assert not any(s.id.startswith("p") for s in result.surfaces)
    assert crush_identity_gap(base, result, 2) >= 0


def test_crush_end_to_end_with_companion_bound():
    """The worked inequality: the crushed satellite's weight dominates
    the weighted companion's."""
    satellite = bridge_knot(4)           # netw/2 = 4
    crushed = crush(satellite, figure8_spec())
    companion = bridge_knot(1, weight=2)  # the core, weighted by omega
    netw_h = net_invariants(satellite).netw
    netw_l = net_invariants(companion).netw
    assert (netw_h, netw_l) == (8, 4)
    assert handle_crush_bound(HalfInt(netw_h), HalfInt(netw_l), 2, 0)
    # the crushed state still satisfies the counting identity
    from bridgecalc.invariants import counting_identity_residual

    for m in (1, 2, 3):
        assert counting_identity_residual(crushed, m) == 0


def test_handle_crush_bound_examples():
    assert handle_crush_bound(4, 4, 2, 0)
    assert handle_crush_bound(3, 5, 2, 1)
    assert not handle_crush_bound(1, 5, 2, 1)


def whitehead_oracle(b, n):
    """Repeated doubling."""
    value = b
    for _ in range(n):
        value = value + value
    return value


def cable_oracle(b, q):
    """Repeated addition."""
    total = 0
    for _ in range(q):
        total += b
    return total


def test_satellite_calculators_against_oracles():
    for n in range(1, 7):
        for b in range(0, 9):
            assert satellite_bounds(b, "whitehead", n=n) == \
                whitehead_oracle(b, n)
    for q in range(1, 7):
        for b in range(0, 9):
            assert satellite_bounds(b, "cable", q=q) == cable_oracle(b, q)


def test_satellite_plain_and_lensed():
    assert satellite_bounds(3, "plain", omega=2) == 6
    assert satellite_bounds(3, "plain", omega=2, lensed=True) == 4
    assert satellite_bounds(2, "whitehead", n=2) == 8
    assert satellite_bounds(3, "cable", q=3) == 9


def test_satellite_refuses_torus_knots():
    with pytest.raises(ValueError):
        satellite_bounds(3, "plain", omega=2, companion_is_torus_knot=True)


def test_omega_one_bound():
    assert omega_one_bound(5, False) == 5
    assert omega_one_bound(5, True) == 4
    assert omega_one_bound(0, True) == 0  # floored
    assert omega_one_bound(HalfInt(5), False) == HalfInt(5)
