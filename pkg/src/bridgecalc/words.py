"""Cyclic words of annuli: the trace of a separating torus on a state.

A torus meeting the thick and thin surfaces in essential curves falls
apart into annuli.  Each annulus is typed by where its ends live and
whether they separate the surface containing them:

    BNN  bridge annulus, both ends nonseparating
    BSS  bridge annulus, both ends separating
    BNS  bridge annulus, one end each
    VNN  vertical annulus, both ends nonseparating
    VSS  vertical annulus, both ends separating
    VNS  vertical annulus, nonseparating on the thick end, separating
         on the thin end

Bridge annuli carry a side attribute: ``curved`` if a boundary
compression exists only outside, ``nested`` if one exists inside.  Both
attributes, like the nesting of the discs bounded by separating curves,
are geometric facts supplied with the word; the module checks only their
mutual consistency.

Separating curves carry tokens in a per-surface rooted containment
forest: ``inside`` of a token is the bounded disc region (its subtree),
descendants are curves inside it, incomparable tokens bound disjoint
discs.

Validation enforces: adjacent annuli share a curve with a consistent
level, separation status, and token; bridge ends sit on one thick level;
levels 2-color consistently into thick and thin; and each maximal
vertical run visits a level at most once.  The last rule forces vertical
runs between bridge annuli to have even length, which is the parity
property of matching sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

BRIDGE_TYPES = ("BNN", "BSS", "BNS")
VERTICAL_TYPES = ("VNN", "VSS", "VNS")
TYPES = BRIDGE_TYPES + VERTICAL_TYPES


class WordError(Exception):
    """The annulus word violates a structural rule."""


@dataclass(frozen=True)
class AnnulusRec:
    type: str
    side: str | None = None          # curved | nested, bridge types only
    levels: tuple[str, str] = ("", "")
    nest: tuple[str | None, str | None] = (None, None)
    vpc: str | None = None


@dataclass(frozen=True)
class Declarations:
    """Caller-declared geometric inputs for zero-data-free checks.

    ``helper`` indexes a vertical run forming the second long annulus
    required by the BNN/BNN cancellation criterion; the two flags assert
    that its union with the matching sequence separates the surfaces it
    meets and that the free annulus of the pair admits a bridge disc
    avoiding everything else.
    """

    helper: tuple[int, ...] = ()
    union_separates: bool = False
    bridge_disc: bool = False


@dataclass(frozen=True)
class AnnulusWord:
    annuli: tuple[AnnulusRec, ...]
    forests: dict = field(default_factory=dict)
    declarations: Declarations | None = None

    def __len__(self):
        return len(self.annuli)


@dataclass(frozen=True)
class WordInfo:
    roles: dict            # level -> "thick" | "thin"
    curve_levels: tuple    # curve i sits between annuli i-1 and i
    curve_separating: tuple
    curve_tokens: tuple


def _end_separating(rec: AnnulusRec, roles) -> tuple[bool, bool]:
    t = rec.type
    if t in ("BNN", "VNN"):
        return (False, False)
    if t in ("BSS", "VSS"):
        return (True, True)
    if t == "BNS":
        return (rec.nest[0] is not None, rec.nest[1] is not None)
    # VNS: nonseparating on the thick level, separating on the thin one
    first_thick = roles[rec.levels[0]] == "thick"
    return (False, True) if first_thick else (True, False)


def _solve_roles(word: AnnulusWord):
    roles: dict[str, str] = {}

    def put(level, role):
        if roles.get(level, role) != role:
            raise WordError(f"level {level} would need to be both thick "
                            f"and thin")
        roles[level] = role

    changed = True
    for rec in word.annuli:
        if rec.type in BRIDGE_TYPES:
            put(rec.levels[0], "thick")
            put(rec.levels[1], "thick")
    while changed:
        changed = False
        for rec in word.annuli:
            if rec.type in BRIDGE_TYPES:
                continue
            a, b = rec.levels
            if a in roles and b not in roles:
                put(b, "thin" if roles[a] == "thick" else "thick")
                changed = True
            elif b in roles and a not in roles:
                put(a, "thin" if roles[b] == "thick" else "thick")
                changed = True
            elif a in roles and b in roles and roles[a] == roles[b]:
                raise WordError(f"vertical annulus joins two {roles[a]} "
                                f"levels {a}, {b}")
    for rec in word.annuli:
        for level in rec.levels:
            if level not in roles:
                put(level, "thick")  # all-vertical words: pick a convention
                for other in rec.levels:
                    if other != level and other not in roles:
                        put(other, "thin")
    return roles


def analyze(word: AnnulusWord) -> WordInfo:
    """Validate the word and return its derived structure.

    Raises WordError with the first violated rule.  The result is cached
    on the word, which is immutable.
    """
    cached = word.__dict__.get("_info")
    if cached is not None:
        return cached
    n = len(word.annuli)
    if n == 0:
        raise WordError("empty word")
    for rec in word.annuli:
        if rec.type not in TYPES:
            raise WordError(f"unknown annulus type {rec.type!r}")
        is_bridge = rec.type in BRIDGE_TYPES
        if is_bridge and rec.side not in ("curved", "nested"):
            raise WordError(f"bridge annulus needs a side, got {rec.side!r}")
        if not is_bridge and rec.side is not None:
            raise WordError("only bridge annuli carry a side")
        if is_bridge and rec.levels[0] != rec.levels[1]:
            raise WordError("bridge annulus ends lie on one thick level")
        if not is_bridge and rec.levels[0] == rec.levels[1]:
            raise WordError("vertical annulus ends lie on distinct levels")
        if rec.type == "BNS" and (rec.nest[0] is None) == (rec.nest[1] is None):
            raise WordError("a BNS annulus has exactly one separating end")

    for i, rec in enumerate(word.annuli):
        nxt = word.annuli[(i + 1) % n]
        if rec.levels[1] != nxt.levels[0]:
            raise WordError(
                f"annuli {i} and {(i + 1) % n} do not share a level")

    roles = _solve_roles(word)

    seps = [_end_separating(rec, roles) for rec in word.annuli]
    for i in range(n):
        prev = word.annuli[i - 1]
        here = word.annuli[i]
        if seps[i - 1][1] != seps[i][0]:
            raise WordError(
                f"curve {i} is separating on one side and not the other")
        if (prev.nest[1] is None) != (here.nest[0] is None) or \
                (prev.nest[1] is not None and prev.nest[1] != here.nest[0]):
            raise WordError(f"curve {i} carries mismatched nesting tokens")
        if seps[i][0] != (here.nest[0] is not None):
            raise WordError(
                f"curve {i}: nesting token presence must match separation")

    curve_levels = tuple(word.annuli[i].levels[0] for i in range(n))
    curve_sep = tuple(seps[i][0] for i in range(n))
    curve_tok = tuple(word.annuli[i].nest[0] for i in range(n))

    # tokens live in their level's forest and are unique to their curve
    by_level: dict[str, dict[str, int]] = {}
    for i in range(n):
        if not curve_sep[i]:
            continue
        level, tok = curve_levels[i], curve_tok[i]
        forest = word.forests.get(level, {})
        if tok not in forest:
            raise WordError(f"token {tok} missing from the forest of "
                            f"{level}")
        owner = by_level.setdefault(level, {})
        if tok in owner and owner[tok] != i:
            raise WordError(f"token {tok} used by two curves on {level}")
        owner[tok] = i
    for level, forest in word.forests.items():
        for tok, parent in forest.items():
            seen = {tok}
            while parent is not None:
                if parent not in forest:
                    raise WordError(f"forest of {level} references unknown "
                                    f"token {parent}")
                if parent in seen:
                    raise WordError(f"forest of {level} has a cycle at "
                                    f"{parent}")
                seen.add(parent)
                parent = forest[parent]

    # The interior of a maximal vertical run crosses each level at most
    # once (its end curves sit on the bridge levels and are not crossed).
    is_vert = [rec.type in VERTICAL_TYPES for rec in word.annuli]
    if all(is_vert):
        if len(set(curve_levels)) != n:
            raise WordError("a vertical run revisits a level")
    else:
        anchor = next(k for k in range(n) if not is_vert[k])
        run: list[int] = []

        def check_run():
            # annuli run[0]..run[-1]; interior curves run[1]..run[-1]
            levels = [curve_levels[k] for k in run[1:]]
            if len(set(levels)) != len(levels):
                raise WordError("a vertical run revisits a level")

        for off in range(1, n + 1):
            k = (anchor + off) % n
            if is_vert[k]:
                run.append(k)
            elif run:
                check_run()
                run = []

    info = WordInfo(roles, curve_levels, curve_sep, curve_tok)
    object.__setattr__(word, "_info", info)
    return info


def validate_word(word: AnnulusWord) -> None:
    analyze(word)


# ---------------------------------------------------------------------------
# forests
# ---------------------------------------------------------------------------

def _is_ancestor(forest, a, b) -> bool:
    """Whether token a is a strict ancestor of token b."""
    parent = forest.get(b)
    while parent is not None:
        if parent == a:
            return True
        parent = forest.get(parent)
    return False


def _comparable(forest, a, b) -> bool:
    return _is_ancestor(forest, a, b) or _is_ancestor(forest, b, a)


# ---------------------------------------------------------------------------
# matched pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchedPair:
    curved: int
    nested: int
    length: int
    run: tuple[int, ...]  # the vertical annuli between the pair


def find_matched_pairs(word: AnnulusWord):
    """Every maximal vertical run joining a curved and a nested bridge.

    Runs reporting the same (curved, nested, length) triple are collapsed
    to one entry, keeping an all-VSS witness when one exists (that is the
    run the cancellation criteria inspect).
    """
    analyze(word)
    n = len(word.annuli)
    bridges = [i for i, rec in enumerate(word.annuli)
               if rec.type in BRIDGE_TYPES]
    pairs: dict = {}
    if len(bridges) < 2:
        return []
    for k, i in enumerate(bridges):
        j = bridges[(k + 1) % len(bridges)]
        if i == j:
            continue
        run = []
        pos = (i + 1) % n
        while pos != j:
            run.append(pos)
            pos = (pos + 1) % n
        sides = {word.annuli[i].side, word.annuli[j].side}
        if sides != {"curved", "nested"}:
            continue
        curved = i if word.annuli[i].side == "curved" else j
        nested = j if curved == i else i
        key = (curved, nested, len(run))
        candidate = MatchedPair(curved, nested, len(run), tuple(run))
        held = pairs.get(key)
        all_vss = all(word.annuli[p].type == "VSS" for p in run)
        if held is None or (all_vss and
                            not all(word.annuli[p].type == "VSS"
                                    for p in held.run)):
            pairs[key] = candidate
    return [pairs[k] for k in sorted(pairs)]


def matching_length_parity(word: AnnulusWord) -> bool:
    """All matched pairs have even length; holds on every valid word."""
    return all(p.length % 2 == 0 for p in find_matched_pairs(word))


def is_cancellable(word: AnnulusWord, pair: MatchedPair):
    """Decide cancellability; returns (flag, case label or None).

    The first two cases are read off the types alone; the BNN/BNN case
    additionally needs a declared second vertical long annulus with an
    end at the pair and the declared bridge-disc attribute.
    """
    analyze(word)
    ta = word.annuli[pair.curved].type
    tb = word.annuli[pair.nested].type
    run_types = {word.annuli[i].type for i in pair.run}
    if {ta, tb} == {"BSS"} and run_types <= {"VSS"}:
        return True, "BSS/BSS"
    if {ta, tb} == {"BNS", "BSS"} and run_types <= {"VSS"}:
        return True, "BNS/BSS"
    if {ta, tb} == {"BNN"}:
        decl = word.declarations
        if decl is None or not decl.helper:
            return False, None
        if not (decl.union_separates and decl.bridge_disc):
            return False, None
        n = len(word.annuli)
        helper = decl.helper
        banned = set(pair.run) | {pair.curved, pair.nested}
        if any(h in banned for h in helper):
            return False, None
        if any(word.annuli[h].type not in VERTICAL_TYPES for h in helper):
            return False, None
        for a, b in zip(helper, helper[1:]):
            if (a + 1) % n != b:
                return False, None
        touches = {(helper[0] - 1) % n, (helper[-1] + 1) % n}
        if touches & {pair.curved, pair.nested}:
            return True, "BNN/BNN"
    return False, None


# ---------------------------------------------------------------------------
# crushable handles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrushCandidate:
    annulus: int
    level: str
    vpc: str | None
    disc_tokens: tuple[str, str]


def detect_crushable(word: AnnulusWord, disc_data=None):
    """Bridge annuli whose ends bound disjoint discs, with every
    same-VPC neighbour trapped non-disjointly inside one disc.

    ``disc_data`` optionally maps annulus index to keyword arguments for
    a CrushSpec; matching candidates are then returned as CrushSpecs.
    """
    info = analyze(word)
    n = len(word.annuli)
    out = []
    for i, rec in enumerate(word.annuli):
        if rec.type != "BSS":
            continue  # only both-separating ends bound discs
        level = rec.levels[0]
        forest = word.forests.get(level, {})
        t0, t1 = rec.nest
        if _comparable(forest, t0, t1):
            continue  # the discs are nested, not disjoint
        ok = True
        for j, other in enumerate(word.annuli):
            if j == i or other.vpc != rec.vpc or other.vpc is None:
                continue
            inside = []
            for end in (0, 1):
                tok = other.nest[end]
                lvl = other.levels[end]
                if tok is None or lvl != level:
                    inside.append(None)
                    continue
                if _is_ancestor(forest, t0, tok):
                    inside.append(0)
                elif _is_ancestor(forest, t1, tok):
                    inside.append(1)
                else:
                    inside.append(None)
            if inside == [None, None]:
                continue
            if None in inside or inside[0] != inside[1]:
                ok = False  # one end caught in a disc, the other loose
                break
            if not _comparable(forest, other.nest[0], other.nest[1]):
                ok = False  # its ends bound disjoint discs inside D_i
                break
        if ok:
            cand = CrushCandidate(i, level, rec.vpc, (t0, t1))
            if disc_data and i in disc_data:
                from .crush import CrushSpec

                out.append(CrushSpec(**disc_data[i]))
            else:
                out.append(cand)
    return out


# ---------------------------------------------------------------------------
# the final classifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusClass:
    label: str   # TwoTowers | TwoBSSplusVSS | HasCrushableCandidate |
                 # HasCancellablePair | Other
    detail: str | None = None


def classify_torus_config(word: AnnulusWord) -> TorusClass:
    """Classify the whole word per the final case analysis.

    The positive outcomes are checked in order: exactly two towers worth
    of BNN/VNN; exactly two BSS (each with one end-disc containing the
    other) plus VSS; a crushable candidate; a cancellable pair.  Anything
    else is Other with the obstruction named.  The geometric hypotheses
    behind the dichotomy (net genus one, local thinness relative to the
    torus, no cancellable pairs upstream) cannot be seen in the word and
    are assumed.
    """
    analyze(word)
    types = [rec.type for rec in word.annuli]
    counts = {t: types.count(t) for t in TYPES}

    if counts["BNN"] == 2 and \
            counts["BNN"] + counts["VNN"] == len(types):
        return TorusClass("TwoTowers")

    if counts["BSS"] == 2 and counts["BSS"] + counts["VSS"] == len(types):
        nested_ok = True
        for rec in word.annuli:
            if rec.type != "BSS":
                continue
            forest = word.forests.get(rec.levels[0], {})
            if not _comparable(forest, rec.nest[0], rec.nest[1]):
                nested_ok = False
        if nested_ok:
            return TorusClass("TwoBSSplusVSS")

    if detect_crushable(word):
        return TorusClass("HasCrushableCandidate")

    for pair in find_matched_pairs(word):
        flag, case = is_cancellable(word, pair)
        if flag:
            return TorusClass("HasCancellablePair", case)

    kinds = sorted({t for t, c in counts.items() if c})
    return TorusClass("Other", f"no dichotomy shape: types {kinds}, "
                               f"bridges {sum(counts[t] for t in BRIDGE_TYPES)}")


# ---------------------------------------------------------------------------
# tubes and towers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunReport:
    level: str
    annuli: tuple[int, ...]
    label: str   # tube | tower | neither


def _fillings_disjoint(word, info, run, side):
    """Pairwise disjointness of the filling regions of a run's curves.

    Fillings are the bounded disc (curved runs) or its complement
    (nested runs).  Regions on distinct levels are disjoint; two discs
    are disjoint when incomparable; a disc avoids a complement when the
    complement's token is its ancestor; two complements always meet.
    """
    n = len(word.annuli)
    curves = [run[0] % n] + [(k + 1) % n for k in run]
    marks = []
    for c in curves:
        if not info.curve_separating[c]:
            return False
        marks.append((info.curve_levels[c], info.curve_tokens[c]))
    for x in range(len(marks)):
        for y in range(x + 1, len(marks)):
            (la, ta), (lb, tb) = marks[x], marks[y]
            if la != lb:
                continue
            forest = word.forests.get(la, {})
            if side == "curved":
                if _comparable(forest, ta, tb):
                    return False
            else:
                return False  # two complements always overlap
    return True


def tube_and_tower_report(word: AnnulusWord):
    """Label each component of the word cut along one thick level.

    A tower is a run of VNN annuli with exactly one BNN; two BNN annuli
    in a run disqualify it.  A tube is a run of VSS and BSS annuli with
    at least one BSS, no matched pair inside, and pairwise disjoint
    filling surfaces.
    """
    info = analyze(word)
    n = len(word.annuli)
    reports = []
    for level in sorted({info.curve_levels[i] for i in range(n)
                         if info.roles[info.curve_levels[i]] == "thick"}):
        cuts = [i for i in range(n) if info.curve_levels[i] == level]
        if not cuts:
            continue
        for k, start in enumerate(cuts):
            end = cuts[(k + 1) % len(cuts)]
            run = []
            pos = start
            while True:
                run.append(pos)
                pos = (pos + 1) % n
                if pos == end:
                    break
                if len(run) > n:
                    raise WordError("run construction looped")
            types = [word.annuli[i].type for i in run]
            sides = {word.annuli[i].side for i in run
                     if word.annuli[i].type in BRIDGE_TYPES}
            label = "neither"
            if set(types) <= {"VNN", "BNN"} and types.count("BNN") == 1:
                label = "tower"
            elif set(types) <= {"VSS", "BSS"} and "BSS" in types:
                if len(sides) == 1:
                    side = sides.pop()
                    if _fillings_disjoint(word, info, run, side):
                        label = "tube"
            reports.append(RunReport(level, tuple(run), label))
    return tuple(reports)


# ---------------------------------------------------------------------------
# exhaustive enumeration
# ---------------------------------------------------------------------------

# letters: (type, side, sep-first) with sep-first used only by BNS
_LETTERS = (
    ("BNN", "curved", None), ("BNN", "nested", None),
    ("BSS", "curved", None), ("BSS", "nested", None),
    ("BNS", "curved", True), ("BNS", "nested", True),
    ("BNS", "curved", False), ("BNS", "nested", False),
    ("VNN", None, None), ("VSS", None, None), ("VNS", None, None),
)


def _letter_moves():
    """(state -> [(letter index, next state)]) over (is_thick, separating)."""
    moves = {}
    for state in ((True, False), (True, True), (False, False), (False, True)):
        thick, sep = state
        out = []
        for idx, (typ, _side, sep_first) in enumerate(_LETTERS):
            if typ in BRIDGE_TYPES:
                if not thick:
                    continue
                if typ == "BNN" and not sep:
                    out.append((idx, (True, False)))
                elif typ == "BSS" and sep:
                    out.append((idx, (True, True)))
                elif typ == "BNS" and sep == sep_first:
                    out.append((idx, (True, not sep)))
            else:
                if typ == "VNN" and not sep:
                    out.append((idx, (not thick, False)))
                elif typ == "VSS" and sep:
                    out.append((idx, (not thick, True)))
                elif typ == "VNS":
                    # nonseparating on the thick level, separating thin
                    if thick and not sep:
                        out.append((idx, (False, True)))
                    elif not thick and sep:
                        out.append((idx, (True, False)))
        moves[state] = out
    return moves


_MOVES = _letter_moves()
_STATES = tuple(_MOVES)


def _closed_letter_words(length):
    """All closed walks of the given length, minimal-rotation only."""
    out = set()

    def extend(word, state, start_state):
        if len(word) == length:
            if state == start_state and \
                    min(word[k:] + word[:k] for k in range(length)) == word:
                out.add(word)
            return
        first = word[0] if word else None
        for idx, nxt in _MOVES[state]:
            # the minimal rotation starts with the minimal letter
            if first is not None and idx < first:
                continue
            extend(word + (idx,), nxt, start_state)

    for start in _STATES:
        # a word may be traceable from several start states; the set
        # collapses the duplicates
        extend((), start, start)
    return sorted(out)


def word_from_letters(letters) -> AnnulusWord:
    """Build a canonical word: fresh levels unified by bridges, flat
    forests, region-style VPC names."""
    n = len(letters)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, idx in enumerate(letters):
        typ = _LETTERS[idx][0]
        if typ in BRIDGE_TYPES:
            a, b = find(i), find((i + 1) % n)
            if a != b:
                parent[a] = b
    level_names = {}
    for i in range(n):
        root = find(i)
        if root not in level_names:
            level_names[root] = f"L{len(level_names)}"
    levels = [level_names[find(i)] for i in range(n)]

    # separation statuses around the circle
    sep = [None] * n
    for i, idx in enumerate(letters):
        typ, _side, sep_first = _LETTERS[idx]
        if typ in ("BSS", "VSS"):
            sep[i] = sep[(i + 1) % n] = True
        elif typ in ("BNN", "VNN"):
            sep[i] = sep[(i + 1) % n] = False
        elif typ == "BNS":
            sep[i] = sep_first
            sep[(i + 1) % n] = not sep_first
    # VNS statuses need the roles; roles: bridges force thick and
    # verticals alternate, matching the enumeration automaton
    roles = {}
    for i, idx in enumerate(letters):
        if _LETTERS[idx][0] in BRIDGE_TYPES:
            roles[levels[i]] = "thick"
            roles[levels[(i + 1) % n]] = "thick"
    changed = True
    while changed:
        changed = False
        for i, idx in enumerate(letters):
            if _LETTERS[idx][0] in BRIDGE_TYPES:
                continue
            a, b = levels[i], levels[(i + 1) % n]
            if a in roles and b not in roles:
                roles[b] = "thin" if roles[a] == "thick" else "thick"
                changed = True
            elif b in roles and a not in roles:
                roles[a] = "thin" if roles[b] == "thick" else "thick"
                changed = True
    for i in range(n):
        roles.setdefault(levels[i], "thick" if i % 2 == 0 else "thin")
    for i, idx in enumerate(letters):
        if _LETTERS[idx][0] == "VNS":
            here_thick = roles[levels[i]] == "thick"
            sep[i] = not here_thick
            sep[(i + 1) % n] = here_thick

    tokens = [f"t{i}" if sep[i] else None for i in range(n)]
    forests: dict[str, dict] = {}
    for i in range(n):
        if tokens[i] is not None:
            forests.setdefault(levels[i], {})[tokens[i]] = None

    annuli = []
    prev_region = "r0"
    for i, idx in enumerate(letters):
        typ, side, _sf = _LETTERS[idx]
        la, lb = levels[i], levels[(i + 1) % n]
        if typ in BRIDGE_TYPES:
            region = f"b:{la}:{prev_region}"
        else:
            region = f"v:{min(la, lb)}:{max(la, lb)}"
        annuli.append(AnnulusRec(
            typ, side, (la, lb), (tokens[i], tokens[(i + 1) % n]), region))
        prev_region = region
    return AnnulusWord(tuple(annuli), forests)


def enumerate_words(max_length):
    """Every attributed cyclic word up to rotation, canonical data."""
    for length in range(1, max_length + 1):
        for letters in _closed_letter_words(length):
            word = word_from_letters(letters)
            try:
                analyze(word)
            except WordError:
                continue
            yield word
