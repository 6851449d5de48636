"""Hand-built fixture states and words shared across the test modules."""

from bridgecalc.model import PairState, Puncture, SurfaceRec, TangleData, VpcRec
from bridgecalc.words import AnnulusRec, AnnulusWord, Declarations


def punctures(tag, n, weight=1):
    return tuple(Puncture(f"{tag}{k}", weight) for k in range(n))


def genus2_four_punctures():
    """A genus-2 thick surface with 4 weight-1 punctures, 2 bridge arcs
    hanging on each side."""
    pts = punctures("H", 4)
    arcs = (("H0", "H1"), ("H2", "H3"))
    return PairState(
        surfaces=(SurfaceRec("H", "thick", 2, pts, direction="U"),),
        vpcs=(VpcRec("U", "H", (), TangleData(bridge=arcs)),
              VpcRec("L", "H", (), TangleData(bridge=arcs))),
    ).sorted()


def remark_38_state(t=1):
    """Two unpunctured thick surfaces of genus t+1 over a 2-punctured thin
    summing sphere; each middle VPC holds one ghost arc."""
    g = t + 1
    return PairState(
        surfaces=(
            SurfaceRec("H1", "thick", g, (), direction="V1"),
            SurfaceRec("H2", "thick", g, (), direction="O2"),
            SurfaceRec("S", "thin", 0, punctures("s", 2), direction="V2"),
        ),
        vpcs=(
            VpcRec("O1", "H1", ()),
            VpcRec("V1", "H1", ("S",), TangleData(ghost=(("s0", "s1"),))),
            VpcRec("V2", "H2", ("S",), TangleData(ghost=(("s0", "s1"),))),
            VpcRec("O2", "H2", ()),
        ),
    ).sorted()


def torus_core_loop():
    """A single unpunctured Heegaard torus whose lower side carries a
    core loop."""
    return PairState(
        surfaces=(SurfaceRec("T", "thick", 1, (), direction="U"),),
        vpcs=(VpcRec("U", "T", ()),
              VpcRec("L", "T", (), TangleData(core_loops=1))),
    ).sorted()


def product_torus_vpc():
    """thick torus over thin torus, two weight-1 vertical strands."""
    return PairState(
        surfaces=(
            SurfaceRec("T", "thick", 1, punctures("t", 2), direction="U"),
            SurfaceRec("F", "thin", 1, punctures("f", 2), direction="M"),
            SurfaceRec("B", "thick", 1, punctures("b", 2), direction="M"),
        ),
        vpcs=(
            VpcRec("U", "T", (), TangleData(bridge=(("t0", "t1"),))),
            VpcRec("M", "T", ("F",), TangleData(
                vertical=(("t0", "f0"), ("t1", "f1")))),
            VpcRec("N", "B", ("F",), TangleData(
                vertical=(("b0", "f0"), ("b1", "f1")))),
            VpcRec("W", "B", (), TangleData(bridge=(("b0", "b1"),))),
        ),
    ).sorted()


def trivial_ball_with_vertex():
    """3-punctured thick sphere with a weight-3 vertex below and a second
    vertex above (a theta-graph one-bridge presentation)."""
    return PairState(
        surfaces=(
            SurfaceRec("H", "thick", 0, punctures("h", 3), direction="U"),
            SurfaceRec("v", "vertex-sphere", 0, punctures("v", 3)),
            SurfaceRec("w", "vertex-sphere", 0, punctures("w", 3)),
        ),
        vpcs=(
            VpcRec("U", "H", ("w",), TangleData(
                vertical=(("h0", "w0"), ("h1", "w1"), ("h2", "w2")))),
            VpcRec("L", "H", ("v",), TangleData(
                vertical=(("h0", "v0"), ("h1", "v1"), ("h2", "v2")))),
        ),
    ).sorted()


def sphere_between_tori():
    """A thin 2-punctured sphere separating two thick tori: the chain
    shape that fails the lens-space structure test."""
    return PairState(
        surfaces=(
            SurfaceRec("T1", "thick", 1, punctures("a", 2), direction="M"),
            SurfaceRec("S", "thin", 0, punctures("s", 2), direction="N"),
            SurfaceRec("T2", "thick", 1, punctures("b", 2), direction="Y"),
        ),
        vpcs=(
            VpcRec("X", "T1", (), TangleData(bridge=(("a0", "a1"),))),
            VpcRec("M", "T1", ("S",), TangleData(
                vertical=(("a0", "s0"), ("a1", "s1")))),
            VpcRec("N", "T2", ("S",), TangleData(
                vertical=(("b0", "s0"), ("b1", "s1")))),
            VpcRec("Y", "T2", (), TangleData(bridge=(("b0", "b1"),))),
        ),
    ).sorted()


def corrupted_thin_weight():
    """A product chain whose thin surface claims weight 3 on one
    puncture while every arc carries weight 2: invalid, and the counting
    identity sees it."""
    state = PairState(
        surfaces=(
            SurfaceRec("T", "thick", 1, punctures("t", 2, weight=2),
                       direction="U"),
            SurfaceRec("F", "thin", 1,
                       (Puncture("f0", 3), Puncture("f1", 2)),
                       direction="M"),
            SurfaceRec("B", "thick", 1, punctures("b", 2, weight=2),
                       direction="M"),
        ),
        vpcs=(
            VpcRec("U", "T", (), TangleData(bridge=(("t0", "t1"),))),
            VpcRec("M", "T", ("F",), TangleData(
                vertical=(("t0", "f0"), ("t1", "f1")))),
            VpcRec("N", "B", ("F",), TangleData(
                vertical=(("b0", "f0"), ("b1", "f1")))),
            VpcRec("W", "B", (), TangleData(bridge=(("b0", "b1"),))),
        ),
    )
    return state.sorted()


def two_cycle_state():
    """Thick surface and thin surface joining the same two VPCs with a
    directed 2-cycle."""
    return PairState(
        surfaces=(
            SurfaceRec("H", "thick", 1, (), direction="A"),
            SurfaceRec("F", "thin", 1, (), direction="B"),
        ),
        vpcs=(VpcRec("A", "H", ("F",)), VpcRec("B", "H", ("F",))),
    ).sorted()


def ghost_cycle_state():
    """Spherical top whose two thin spheres are joined by two ghost arcs:
    the ghost arc graph has a cycle."""
    top = punctures("h", 2)
    return PairState(
        surfaces=(
            SurfaceRec("H", "thick", 0, top, direction="U"),
            SurfaceRec("F1", "thin", 0, punctures("x", 2), direction="C"),
            SurfaceRec("F2", "thin", 0, punctures("y", 2), direction="C"),
            SurfaceRec("K1", "thick", 0, punctures("k", 2), direction="C1"),
            SurfaceRec("K2", "thick", 0, punctures("l", 2), direction="C2"),
        ),
        vpcs=(
            VpcRec("U", "H", (), TangleData(bridge=(("h0", "h1"),))),
            VpcRec("C", "H", ("F1", "F2"), TangleData(
                bridge=(("h0", "h1"),),
                ghost=(("x0", "y0"), ("x1", "y1")))),
            VpcRec("C1", "K1", ("F1",), TangleData(
                vertical=(("k0", "x0"), ("k1", "x1")))),
            VpcRec("D1", "K1", (), TangleData(bridge=(("k0", "k1"),))),
            VpcRec("C2", "K2", ("F2",), TangleData(
                vertical=(("l0", "y0"), ("l1", "y1")))),
            VpcRec("D2", "K2", (), TangleData(bridge=(("l0", "l1"),))),
        ),
    ).sorted()


# ---------------------------------------------------------------------------
# annulus words
# ---------------------------------------------------------------------------

def vss(l1, l2, t1, t2, vpc=None):
    return AnnulusRec("VSS", None, (l1, l2), (t1, t2), vpc)


def vnn(l1, l2, vpc=None):
    return AnnulusRec("VNN", None, (l1, l2), (None, None), vpc)


def flat(tokens_by_level):
    return {level: {t: None for t in toks}
            for level, toks in tokens_by_level.items()}


def fig12_left_word():
    """Curved BSS climbing four VSS to a nested BSS, closing back down."""
    annuli = (
        AnnulusRec("BSS", "curved", ("H0", "H0"), ("t0", "t1"), "bA"),
        vss("H0", "F1", "t1", "t2", "v1"),
        vss("F1", "H2", "t2", "t3", "v2"),
        vss("H2", "F2", "t3", "t4", "v3"),
        vss("F2", "H3", "t4", "t5", "v4"),
        AnnulusRec("BSS", "nested", ("H3", "H3"), ("t5", "t6"), "bB"),
        vss("H3", "F2", "t6", "t7", "v4"),
        vss("F2", "H2", "t7", "t8", "v3"),
        vss("H2", "F1", "t8", "t9", "v2"),
        vss("F1", "H0", "t9", "t0", "v1"),
    )
    forests = flat({"H0": ("t0", "t1"), "F1": ("t2", "t9"),
                    "H2": ("t3", "t8"), "F2": ("t4", "t7"),
                    "H3": ("t5", "t6")})
    return AnnulusWord(annuli, forests)


def fig12_right_word(with_declarations=True):
    """Two adjacent BNN annuli (a zero-length pair) plus a vertical run."""
    decl = Declarations(helper=(2, 3), union_separates=True,
                        bridge_disc=True) if with_declarations else None
    return AnnulusWord(
        (AnnulusRec("BNN", "curved", ("H", "H"), (None, None), "bA"),
         AnnulusRec("BNN", "nested", ("H", "H"), (None, None), "bB"),
         vnn("H", "F", "v1"), vnn("F", "H", "v1")),
        {}, decl)


def fig13_left_word():
    """A BNS and a BSS joined by VSS annuli one way: cancellable."""
    annuli = (
        AnnulusRec("BNS", "curved", ("H0", "H0"), (None, "t1"), "bA"),
        vss("H0", "F1", "t1", "t2", "v1"),
        vss("F1", "H2", "t2", "t3", "v2"),
        AnnulusRec("BSS", "nested", ("H2", "H2"), ("t3", "t4"), "bB"),
        vss("H2", "F1", "t4", "t5", "v2"),
        AnnulusRec("VNS", None, ("F1", "H0"), ("t5", None), "v1"),
    )
    forests = flat({"H0": ("t1",), "F1": ("t2", "t5"), "H2": ("t3", "t4")})
    return AnnulusWord(annuli, forests)


def fig13_right_word():
    """A BNN matched with a BNS: not cancellable."""
    annuli = (
        AnnulusRec("BNN", "curved", ("H0", "H0"), (None, None), "bA"),
        vnn("H0", "F1", "v1"),
        vnn("F1", "H2", "v2"),
        AnnulusRec("BNS", "nested", ("H2", "H2"), (None, "t0"), "bB"),
        vss("H2", "F1", "t0", "t1", "v2"),
        AnnulusRec("VNS", None, ("F1", "H0"), ("t1", None), "v1"),
    )
    forests = flat({"H2": ("t0",), "F1": ("t1",)})
    return AnnulusWord(annuli, forests)


def fig20_two_towers_word():
    """The two-towers shape: [VNN, BNN, VNN, VNN, BNN, VNN] cyclically."""
    return AnnulusWord(
        (vnn("F2", "H1", "v0"),
         AnnulusRec("BNN", "curved", ("H1", "H1"), (None, None), "b1"),
         vnn("H1", "F", "v1"),
         vnn("F", "H2", "v2"),
         AnnulusRec("BNN", "nested", ("H2", "H2"), (None, None), "b2"),
         vnn("H2", "F2", "v3")),
        {})


def fig23_two_bss_word():
    """Two BSS annuli whose own end-discs nest, plus VSS annuli."""
    annuli = (
        AnnulusRec("BSS", "nested", ("H0", "H0"), ("t0", "t1"), "bA"),
        vss("H0", "F1", "t1", "t2", "v1"),
        vss("F1", "H2", "t2", "t3", "v2"),
        AnnulusRec("BSS", "nested", ("H2", "H2"), ("t3", "t4"), "bB"),
        vss("H2", "F1", "t4", "t5", "v2"),
        vss("F1", "H0", "t5", "t0", "v1"),
    )
    forests = {
        "H0": {"t0": None, "t1": "t0"},
        "F1": {"t2": None, "t5": None},
        "H2": {"t3": None, "t4": "t3"},
    }
    return AnnulusWord(annuli, forests)


def fig17_run_word(extended: bool):
    """A curved run on one thick level: a tube while all its filling
    discs stay disjoint; once one curve's disc swallows another's the
    run stops being a tube."""
    annuli = (
        AnnulusRec("BSS", "curved", ("H", "H"), ("t0", "t1"), "top"),
        vss("H", "F", "t1", "t2", "v1"),
        vss("F", "H2", "t2", "t3", "v2"),
        AnnulusRec("BSS", "curved", ("H2", "H2"), ("t3", "t4"), "mid"),
        vss("H2", "F", "t4", "t5", "v2"),
        vss("F", "H", "t5", "t6", "v1"),
        AnnulusRec("BSS", "curved", ("H", "H"), ("t6", "t0"), "top2"),
    )
    mid = {"t3": None, "t4": "t3"} if extended else {"t3": None, "t4": None}
    forests = {
        "H": {"t0": None, "t1": None, "t6": None},
        "F": {"t2": None, "t5": None},
        "H2": mid,
    }
    return AnnulusWord(annuli, forests)
