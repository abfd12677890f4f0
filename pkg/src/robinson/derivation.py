"""Local derivations between the Robinson, marker, corner and decorated alphabets.

``phi1`` forgets everything but crosses (keeping whether a cross obeys
the alternating rule), ``phi2`` regroups quarters of four cells around
each lattice vertex, and ``phi = phi2 o phi1``.  ``d1`` adds line
arrows to ``phi`` and ``d2`` rebuilds Robinson tiles from decorated
corner tiles; both are driven by wildcard pattern tables stored under
``data/``.  All 2x2-window derivations anchor their output at the
lower-left cell of the window.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .alphabet import (
    Alphabet,
    Arrow,
    BLANK,
    CornerTile,
    D4,
    DATA_DIR,
    DIR_VEC,
    Decoration,
    Line,
    Marker,
    QUARTERS,
    Tile,
    VEC_DIR,
    corner_alphabet,
    cross_tile,
    decorated_alphabet,
    marker_alphabet,
    quad_act,
    quad_vec,
    robinson_alphabet,
    vec_quad,
)
from .patchwork import (
    GREY_FILLINGS,
    LanguageSample,
    Patch,
    PatchError,
    build_supercross,
    fault_patch,
    fault_row_index,
    occurrences,
)


class DerivationError(ValueError):
    """Unmapped window, conflicting rules or a malformed rule table."""

    def __init__(self, msg: str, window=None, line: int | None = None):
        self.window = window
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


# ---------------------------------------------------------------------------
# alternating-rule marking


def arm_is_side(cross_dir: str, neighbour: Tile) -> bool | None:
    """Does the line leaving a cross toward ``neighbour`` end there as a side line?

    ``cross_dir`` is the direction from the cross to the neighbour.
    """
    if neighbour is None or neighbour.is_cross:
        return None
    axis = neighbour.principal_axis
    return axis != ("h" if cross_dir in "EW" else "v")


def level0_at(rows: Sequence[Sequence], i: int, j: int) -> bool | None:
    """Marking derivation: is the cross at (i, j) one obeying the alternating rule?

    Crosses obeying the rule are exactly those whose arms end as side
    lines in the neighbouring tiles; the arms of every other cross carry
    on as principal lines.  The first available neighbour (east, west,
    north, south) decides; ``None`` when the cell is not a cross or has
    no neighbour in the patch.
    """
    t = rows[j][i]
    if t is None or not t.is_cross:
        return None
    H, W = len(rows), len(rows[0])
    for d, (di, dj) in (("E", (1, 0)), ("W", (-1, 0)), ("N", (0, 1)), ("S", (0, -1))):
        x, y = i + di, j + dj
        if 0 <= x < W and 0 <= y < H:
            r = arm_is_side(d, rows[y][x])
            if r is not None:
                return r
    return None


def mark_alternating(p: Patch) -> dict[tuple[int, int], bool]:
    """Grey-background marking: cell -> True for crosses obeying the alternating rule."""
    out = {}
    for i, j, t in p.cells():
        if t is not None and t.is_cross:
            r = level0_at(p.rows, i, j)
            if r is not None:
                out[i, j] = r
    return out


def diagonal_exempt(rows: Sequence[Sequence], i: int, j: int) -> bool | None:
    """Alternative criterion: a cross is exempt iff all four diagonal neighbours are crosses."""
    H, W = len(rows), len(rows[0])
    if not rows[j][i].is_cross:
        return None
    diag = [(i + a, j + b) for a in (-1, 1) for b in (-1, 1)]
    if not all(0 <= x < W and 0 <= y < H for x, y in diag):
        return None
    return all(rows[y][x].is_cross for x, y in diag)


# ---------------------------------------------------------------------------
# phi1, phi2, phi


def phi1_cell(rows, i, j) -> Marker:
    t = rows[j][i]
    if not t.is_cross:
        return BLANK
    lvl0 = level0_at(rows, i, j)
    if lvl0 is None:
        raise DerivationError(f"cross at ({i},{j}) has no neighbour to decide its marker")
    return Marker("E" if lvl0 else "F", t.quadrant)


def phi1(p: Patch) -> Patch:
    """Crosses become E (alternating-rule) or F markers, other tiles blank.

    Every cell with a neighbour inside the patch is decided, so the
    output has the input's shape; a lone 1x1 cross cannot be decided.
    """
    if p.width == 1 and p.height == 1 and p[0, 0].is_cross:
        raise DerivationError("a lone cross has no neighbourhood to decide its marker")
    return Patch(marker_alphabet(), p.offset,
                 tuple(tuple(phi1_cell(p.rows, i, j) for i in range(p.width)) for j in range(p.height)))


def corner_of(sw: Marker, se: Marker, nw: Marker, ne: Marker) -> CornerTile:
    return CornerTile((sw, se, nw, ne))


def phi2(p: Patch, strict: bool = True) -> Patch:
    """Regroup the quarters meeting at each interior lattice vertex into a corner tile."""
    if p.width < 2 or p.height < 2:
        raise DerivationError("phi2 needs a patch of at least 2x2")
    B = corner_alphabet()
    rows = []
    for j in range(p.height - 1):
        row = []
        for i in range(p.width - 1):
            c = corner_of(p[i, j], p[i + 1, j], p[i, j + 1], p[i + 1, j + 1])
            if strict and c not in B:
                raise DerivationError(f"quarters {c.id} at ({i},{j}) do not form a corner tile")
            row.append(c)
        rows.append(tuple(row))
    return Patch(B, p.offset, tuple(rows))


def phi2_inverse(p: Patch) -> Patch:
    """Recover the marker patch from corner tiles, checking shared quarters agree."""
    w, h = p.width + 1, p.height + 1
    cells: dict = {}
    for i, j, c in p.cells():
        for q, (dx, dy) in zip(QUARTERS, ((0, 0), (1, 0), (0, 1), (1, 1))):
            m = c.quarter(q)
            key = (i + dx, j + dy)
            if cells.setdefault(key, m) != m:
                raise DerivationError(f"corner tiles disagree on the quarter at {key}")
    return Patch(marker_alphabet(), p.offset, tuple(tuple(cells[i, j] for i in range(w)) for j in range(h)))


def phi(p: Patch) -> Patch:
    """The forgetful derivation from Robinson tiles to corner tiles."""
    return phi2(phi1(p))


def phi_window(rows) -> CornerTile:
    """phi on a single 2x2 window, deciding markers inside the window only."""
    ms = [phi1_cell(rows, i, j) for j in (0, 1) for i in (0, 1)]
    return CornerTile(tuple(ms))


# ---------------------------------------------------------------------------
# pattern rules

_CLASSES = ("cross0", "crossN", "noncross")
_CLASS_ALIASES = {"cross": {"cross0", "crossN"}, "any": set(_CLASSES),
                  "cross0": {"cross0"}, "crossN": {"crossN"}, "noncross": {"noncross"}}


def _cell_of(pos: str, quarter: str) -> tuple[int, int]:
    a, b = quad_vec(pos), quad_vec(quarter)
    return ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)


@dataclass(frozen=True)
class CellClass:
    pos: str
    classes: frozenset

    def act(self, g):
        return CellClass(quad_act(g, self.pos), self.classes)

    def subject(self):
        return ("cell", self.pos)

    def compatible(self, other) -> bool:
        return bool(self.classes & other.classes)

    def __str__(self):
        for name, cl in _CLASS_ALIASES.items():
            if cl == set(self.classes):
                return f"{self.pos}={name}"
        return f"{self.pos}={'/'.join(sorted(self.classes))}"


@dataclass(frozen=True)
class EdgeLine:
    edge: frozenset
    line: Line

    def act(self, g):
        return EdgeLine(frozenset(quad_act(g, p) for p in self.edge), self.line.act(g))

    def subject(self):
        return ("edge", self.edge)

    def compatible(self, other) -> bool:
        return self.line == other.line

    def __str__(self):
        a, b = sorted(self.edge, key=QUARTERS.index)
        return f"line({a}|{b})={self.line}"


@dataclass(frozen=True)
class QuarterIs:
    pos: str
    quarter: str
    allowed: frozenset

    def act(self, g):
        return QuarterIs(quad_act(g, self.pos), quad_act(g, self.quarter),
                         frozenset(m.act(g) for m in self.allowed))

    def subject(self):
        return ("quarter", _cell_of(self.pos, self.quarter))

    def compatible(self, other) -> bool:
        return bool(self.allowed & other.allowed)

    def __str__(self):
        return f"{self.pos}.{self.quarter}={_marker_set_name(self.allowed)}"


@dataclass(frozen=True)
class ArrowIs:
    pos: str
    axis: str
    arrow: Arrow | None

    def act(self, g):
        if self.arrow is None:
            v = g.vec((1, 0) if self.axis == "h" else (0, 1))
            return ArrowIs(quad_act(g, self.pos), "h" if v[1] == 0 else "v", None)
        a = self.arrow.act(g)
        return ArrowIs(quad_act(g, self.pos), a.axis, a)

    def subject(self):
        return ("arrow", self.pos, self.axis)

    def compatible(self, other) -> bool:
        return self.arrow == other.arrow

    def __str__(self):
        return f"{self.pos}.{self.axis}arrow={self.arrow if self.arrow else 'none'}"


@dataclass(frozen=True)
class EIn:
    pos: str
    quarters: frozenset

    def act(self, g):
        return EIn(quad_act(g, self.pos), frozenset(quad_act(g, q) for q in self.quarters))

    def subject(self):
        return ("e", self.pos)

    def compatible(self, other) -> bool:
        return bool(self.quarters & other.quarters)

    def __str__(self):
        qs = set(self.quarters)
        for name, s in _EROWS.items():
            if qs == s:
                return f"{self.pos}.{name}"
        return f"{self.pos}.e=" + "/".join(sorted(qs))


_EROWS = {"erow=top": {"nw", "ne"}, "erow=bottom": {"sw", "se"},
          "ecol=left": {"sw", "nw"}, "ecol=right": {"se", "ne"}}

_ALL_MARKERS = frozenset([BLANK] + [Marker(l, q) for l in "EF" for q in QUARTERS])


def _marker_set(text: str) -> frozenset:
    if text in ("_", "blank"):
        return frozenset([BLANK])
    if text == "cross":
        return _ALL_MARKERS - {BLANK}
    if text == "any":
        return _ALL_MARKERS
    if text[0] == "?":
        return frozenset(Marker(l, text[1:]) for l in "EF")
    return frozenset([Marker.parse(text)])


def _marker_set_name(s: frozenset) -> str:
    if s == frozenset([BLANK]):
        return "_"
    if s == _ALL_MARKERS - {BLANK}:
        return "cross"
    if s == _ALL_MARKERS:
        return "any"
    if len(s) == 2 and len({m.quadrant for m in s}) == 1 and BLANK not in s:
        return "?" + next(iter(s)).quadrant
    return "/".join(sorted(str(m) for m in s))


@dataclass(frozen=True)
class Output:
    slot: str
    value: object

    def act(self, g):
        if self.slot in ("harrow", "varrow"):
            a = self.value.act(g)
            return Output("harrow" if a.axis == "h" else "varrow", a)
        if self.slot.startswith("line."):
            return Output("line." + g.dir(self.slot[5:]), self.value.act(g))
        if self.slot == "cross":
            return Output("cross", quad_act(g, self.value))
        raise ValueError(self.slot)

    def __str__(self):
        return f"{self.slot}={self.value}"


@dataclass(frozen=True)
class PatternRule:
    source: str
    preds: tuple
    output: Output
    line: int | None = None

    def act(self, g) -> "PatternRule":
        preds = tuple(sorted((p.act(g) for p in self.preds), key=str))
        return PatternRule(self.source, preds, self.output.act(g), self.line)

    def key(self):
        return (frozenset(str(p) for p in self.preds), str(self.output))

    def __str__(self):
        return (f"when {self.source} window 2x2 matches " + " ".join(str(p) for p in self.preds)
                + f" then add {self.output}")


_RULE_RE = re.compile(r"^when\s+(\S+)\s+window\s+2x2\s+matches\s+(.*?)\s+then\s+add\s+(\S+)$")


def _parse_pred(tok: str, source: str):
    m = re.match(r"^line\((\w\w)\|(\w\w)\)=(.+)$", tok)
    if m:
        a, b = m.group(1), m.group(2)
        va, vb = quad_vec(a), quad_vec(b)
        if abs(va[0] - vb[0]) + abs(va[1] - vb[1]) != 2:
            raise ValueError(f"{a} and {b} are not adjacent")
        return EdgeLine(frozenset((a, b)), Line.parse(m.group(3)))
    m = re.match(r"^(\w\w)\.(\w\w)=(\S+)$", tok)
    if m and m.group(2) in QUARTERS:
        return QuarterIs(m.group(1), m.group(2), _marker_set(m.group(3)))
    m = re.match(r"^(\w\w)\.(h|v)arrow=(\S+)$", tok)
    if m:
        return ArrowIs(m.group(1), m.group(2), None if m.group(3) == "none" else Arrow.parse(m.group(3)))
    m = re.match(r"^(\w\w)\.((?:erow|ecol)=\w+)$", tok)
    if m:
        return EIn(m.group(1), frozenset(_EROWS[m.group(2)]))
    m = re.match(r"^(\w\w)=(\w+)$", tok)
    if m and m.group(1) in QUARTERS and m.group(2) in _CLASS_ALIASES:
        return CellClass(m.group(1), frozenset(_CLASS_ALIASES[m.group(2)]))
    raise ValueError(f"cannot parse predicate {tok!r}")


def _parse_output(tok: str) -> Output:
    slot, _, val = tok.partition("=")
    if slot in ("harrow", "varrow"):
        a = Arrow.parse(val)
        if a.axis != slot[0]:
            raise ValueError(f"{slot} needs a {'horizontal' if slot[0] == 'h' else 'vertical'} arrow")
        return Output(slot, a)
    if slot.startswith("line.") and slot[5:] in DIR_VEC:
        return Output(slot, Line.parse(val))
    if slot == "cross" and val in QUARTERS:
        return Output(slot, val)
    raise ValueError(f"cannot parse output {tok!r}")


_GROUPS = {"none": ["r0"], "C4": ["r0", "r90", "r180", "r270"],
           "D4": ["r0", "r90", "r180", "r270", "s0", "s90", "s180", "s270"]}


@dataclass
class DerivationRule:
    """A 2x2-window derivation given by wildcard pattern rules.

    ``base`` computes the part of the output not described by patterns
    (``phi`` for ``d1``); ``assemble`` turns the collected output
    features of one window into the output tile.
    """

    name: str
    source: Alphabet
    target: Alphabet
    rules: list[PatternRule]
    symmetry: str = "none"
    window: tuple[int, int] = (2, 2)

    def __post_init__(self):
        self._by_first = None

    def features(self, rows) -> dict:
        ctx = _Context(rows, self.source)
        out: dict = {}
        for r in self.rules:
            if all(ctx.holds(p) for p in r.preds):
                prev = out.get(r.output.slot)
                if prev is not None and prev != r.output.value:
                    raise DerivationError(
                        f"{self.name}: rules disagree on {r.output.slot} ({prev} vs {r.output.value})",
                        window=rows)
                out[r.output.slot] = r.output.value
        return out

    def evaluate(self, rows):
        feats = self.features(rows)
        return _ASSEMBLE[self.name.split("-")[0]](self, rows, feats)

    def lint(self) -> list[tuple[PatternRule, PatternRule]]:
        """Rule pairs that could fire together yet write different values to one slot."""
        bad = []
        for r1, r2 in itertools.combinations(self.rules, 2):
            if r1.output.slot != r2.output.slot or r1.output.value == r2.output.value:
                continue
            if not _disjoint(r1, r2):
                bad.append((r1, r2))
        return bad


def _disjoint(r1: PatternRule, r2: PatternRule) -> bool:
    for p in r1.preds:
        for q in r2.preds:
            if type(p) is type(q) and p.subject() == q.subject() and not p.compatible(q):
                return True
    return False


class _Context:
    def __init__(self, rows, alphabet):
        self.rows = rows
        self.cache: dict = {}

    def tile(self, pos):
        x, y = (0 if pos[1] == "w" else 1), (0 if pos[0] == "s" else 1)
        return self.rows[y][x], x, y

    def holds(self, p) -> bool:
        key = p
        if key in self.cache:
            return self.cache[key]
        v = self._holds(p)
        self.cache[key] = v
        return v

    def _holds(self, p) -> bool:
        if isinstance(p, CellClass):
            t, x, y = self.tile(p.pos)
            if not t.is_cross:
                c = "noncross"
            else:
                lvl = level0_at(self.rows, x, y)
                if lvl is None:
                    return False
                c = "cross0" if lvl else "crossN"
            return c in p.classes
        if isinstance(p, EdgeLine):
            a, b = sorted(p.edge, key=lambda q: (quad_vec(q)[0], quad_vec(q)[1]))
            ta, _, _ = self.tile(a)
            va, vb = quad_vec(a), quad_vec(b)
            side = VEC_DIR[((vb[0] - va[0]) // 2, (vb[1] - va[1]) // 2)]
            return ta.line(side) == p.line
        if isinstance(p, QuarterIs):
            t, _, _ = self.tile(p.pos)
            base = t.base if isinstance(t, Decoration) else t
            return base.quarter(p.quarter) in p.allowed
        if isinstance(p, ArrowIs):
            t, _, _ = self.tile(p.pos)
            if not isinstance(t, Decoration):
                return p.arrow is None
            return (t.h_arrow if p.axis == "h" else t.v_arrow) == p.arrow
        if isinstance(p, EIn):
            t, _, _ = self.tile(p.pos)
            base = t.base if isinstance(t, Decoration) else t
            return base.e_quarter in p.quarters
        raise TypeError(p)


def parse_rules(text: str, name: str | None = None) -> DerivationRule:
    """Parse a pattern-rule table.

    Header lines: ``derivation <name> from <alphabet> to <alphabet>`` and
    ``symmetry <none|C4|D4>``; then one rule per line::

        when <alphabet> window 2x2 matches <pred> ... then add <slot>=<value>

    The table is closed under the declared symmetry group.
    """
    header = None
    symmetry = "none"
    rules: list[PatternRule] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^derivation\s+(\S+)\s+from\s+(\S+)\s+to\s+(\S+)$", line)
        if m:
            header = m.groups()
            continue
        m = re.match(r"^symmetry\s+(\S+)$", line)
        if m:
            if m.group(1) not in _GROUPS:
                raise DerivationError(f"unknown symmetry {m.group(1)!r}", line=lineno)
            symmetry = m.group(1)
            continue
        m = _RULE_RE.match(line)
        if not m:
            raise DerivationError(f"cannot parse {line!r}", line=lineno)
        if header is None:
            raise DerivationError("rule before the derivation header", line=lineno)
        if m.group(1) != header[1]:
            raise DerivationError(f"rule reads {m.group(1)} but the derivation is from {header[1]}", line=lineno)
        try:
            preds = tuple(sorted((_parse_pred(tok, m.group(1)) for tok in m.group(2).split()), key=str))
            out = _parse_output(m.group(3))
        except ValueError as exc:
            raise DerivationError(str(exc), line=lineno) from None
        rules.append(PatternRule(m.group(1), preds, out, lineno))
    if header is None:
        raise DerivationError("missing derivation header")
    closed: dict = {}
    for r in rules:
        for g in _GROUPS[symmetry]:
            s = r.act(D4.parse(g))
            closed.setdefault(s.key(), s)
    alph = {"A": robinson_alphabet, "B": corner_alphabet, "Btilde": decorated_alphabet}
    src, dst = alph[header[1]](), alph[header[2]]()
    d = DerivationRule(name or header[0], src, dst, sorted(closed.values(), key=str), symmetry)
    clashes = d.lint()
    if clashes:
        a, b = clashes[0]
        raise DerivationError(f"rules may conflict: [{a}] (line {a.line}) and [{b}] (line {b.line})")
    return d


def load_rules(path: str | Path, name: str | None = None) -> DerivationRule:
    return parse_rules(Path(path).read_text(), name)


# ---------------------------------------------------------------------------
# assembling outputs


def _assemble_d1(d: DerivationRule, rows, feats) -> Decoration:
    base = phi_window(rows)
    t = Decoration(base, feats.get("harrow"), feats.get("varrow"))
    if t not in d.target:
        raise DerivationError(f"d1 produced {t.id}, which is not a decorated tile", window=rows)
    return t


@lru_cache(maxsize=None)
def _tiles_by_lines() -> dict:
    out = {}
    for t in robinson_alphabet():
        if not t.is_cross:
            out[tuple(t.line(s) for s in "NESW")] = t
    return out


def _assemble_d2(d: DerivationRule, rows, feats) -> Tile:
    A = robinson_alphabet()
    if "cross" in feats:
        if any(k.startswith("line.") for k in feats):
            raise DerivationError("d2: a cross with line features", window=rows)
        return cross_tile(A, feats["cross"])
    lines = tuple(feats.get("line." + s) for s in "NESW")
    if None in lines:
        missing = [s for s, l in zip("NESW", lines) if l is None]
        raise DerivationError(f"d2: unmapped window, no line for edges {missing}", window=rows)
    t = _tiles_by_lines().get(lines)
    if t is None:
        raise DerivationError(f"d2: lines {[str(l) for l in lines]} match no Robinson tile", window=rows)
    return t


_ASSEMBLE = {"d1": _assemble_d1, "d2": _assemble_d2}


@lru_cache(maxsize=None)
def d1_rule() -> DerivationRule:
    return load_rules(DATA_DIR / "d1.rules", "d1")


@lru_cache(maxsize=None)
def d2_rule() -> DerivationRule:
    return load_rules(DATA_DIR / "d2.rules", "d2")


def d1(window: Patch | Sequence) -> Decoration:
    """Decorated corner tile of a 2x2 window of Robinson tiles."""
    rows = window.rows if isinstance(window, Patch) else window
    return d1_rule().evaluate(rows)


def d2(window: Patch | Sequence) -> Tile:
    """Robinson tile framed by a 2x2 window of decorated corner tiles."""
    rows = window.rows if isinstance(window, Patch) else window
    return d2_rule().evaluate(rows)


# ---------------------------------------------------------------------------
# applying derivations


@dataclass
class TableDerivation:
    """An explicit k x k window table."""

    name: str
    source: Alphabet
    target: Alphabet
    table: dict
    window: tuple[int, int] = (1, 1)

    def evaluate(self, rows):
        key = tuple(tuple(r) for r in rows)
        if key not in self.table:
            raise DerivationError(f"{self.name}: unmapped window", window=key)
        return self.table[key]


def identity_derivation(alphabet: Alphabet) -> TableDerivation:
    return TableDerivation("identity", alphabet, alphabet, {((t,),): t for t in alphabet})


def apply_derivation(d, p: Patch) -> Patch:
    """Slide the window over ``p``; output cell (i, j) comes from the window anchored at (i, j)."""
    k, l = d.window
    if p.width < k or p.height < l:
        raise DerivationError(f"patch {p.shape} is smaller than the {k}x{l} window")
    rows = []
    for j in range(p.height - l + 1):
        row = []
        for i in range(p.width - k + 1):
            win = tuple(r[i:i + k] for r in p.rows[j:j + l])
            row.append(d.evaluate(win))
        rows.append(tuple(row))
    return Patch(d.target, p.offset, tuple(rows))


def apply_d1(p: Patch) -> Patch:
    return apply_derivation(d1_rule(), p)


def apply_d2(p: Patch) -> Patch:
    return apply_derivation(d2_rule(), p)


# ---------------------------------------------------------------------------
# checks


@dataclass
class Report:
    name: str
    passed: bool
    checked: int = 0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        extra = ", ".join(f"{k}={v}" for k, v in self.details.items())
        s = f"{'PASS' if self.passed else 'FAIL'} {self.name}: checked={self.checked} failures={len(self.failures)}"
        return s + (f" ({extra})" if extra else "")


def _rows_of(x):
    return x.rows if isinstance(x, Patch) else x


def roundtrip_check(sample: Iterable) -> Report:
    """d2 o d1 on every 3x3 Robinson patch must give back its centre tile."""
    D1, D2 = d1_rule(), d2_rule()
    n, fails = 0, []
    for p in sample:
        rows = _rows_of(p)
        n += 1
        try:
            mid = tuple(tuple(D1.evaluate(tuple(r[i:i + 2] for r in rows[j:j + 2])) for i in (0, 1))
                        for j in (0, 1))
            back = D2.evaluate(mid)
        except DerivationError as exc:
            fails.append((rows, str(exc)))
            continue
        if back != rows[1][1]:
            fails.append((rows, f"got {back}"))
    return Report("roundtrip d2.d1", not fails and n > 0, n, fails)


def mirror_roundtrip_check(sample: Iterable) -> Report:
    """d1 o d2 on every 3x3 decorated patch must give back its centre tile."""
    D1, D2 = d1_rule(), d2_rule()
    n, fails = 0, []
    for p in sample:
        rows = _rows_of(p)
        n += 1
        try:
            mid = tuple(tuple(D2.evaluate(tuple(r[i:i + 2] for r in rows[j:j + 2])) for i in (0, 1))
                        for j in (0, 1))
            back = D1.evaluate(mid)
        except DerivationError as exc:
            fails.append((rows, str(exc)))
            continue
        if back != rows[1][1]:
            fails.append((rows, f"got {back}"))
    return Report("roundtrip d1.d2", not fails and n > 0, n, fails)


def factor_witness(level: int, rule=None) -> Report:
    """phi of the ``level``-supercross occurs in rule^N(t) for some tile t and N <= level + 2."""
    from .substitution import iterate_tile, omega_rule

    rule = rule or omega_rule()
    if level < 1:
        raise ValueError("factor_witness needs level >= 1")
    img = phi(build_supercross(level))
    for N in range(1, level + 3):
        if 2 ** N < img.width:
            continue
        for t in rule.alphabet:
            occ = occurrences(img, iterate_tile(rule, t, N))
            if occ:
                return Report(f"factor level {level}", True, 1,
                              details={"tile": t.id, "N": N, "offset": occ[0]})
    return Report(f"factor level {level}", False, 1, failures=["no occurrence"])


def supercross_image_in_all(n: int, rule=None) -> Report:
    """For every tile t, rule^n(t) contains phi of an (n - 1)-supercross.

    For n = 1 the (n - 1)-supercross is a lone cross, whose image is a
    cross marker; every corner tile carries one.
    """
    from .substitution import iterate_tile, omega_rule

    rule = rule or omega_rule()
    fails, found = [], {}
    if n == 1:
        for t in rule.alphabet:
            if not any(m.is_cross for m in iterate_tile(rule, t, 1).rows[0][0].cells):
                fails.append(t.id)
        return Report(f"omega^1 contains a cross image", not fails, len(rule.alphabet), fails)
    images = [phi(build_supercross(n - 1, g)) for g in ("r0", "r90", "r180", "r270")]
    for t in rule.alphabet:
        hay = iterate_tile(rule, t, n)
        hit = None
        for k, img in enumerate(images):
            occ = occurrences(img, hay)
            if occ:
                hit = (k, occ[0])
                break
        if hit is None:
            fails.append(t.id)
        else:
            found[t.id] = hit
    return Report(f"omega^{n} contains phi({n - 1}-supercross)", not fails, len(rule.alphabet), fails,
                  details={"tiles": len(found)})


def non_injectivity_witness(level: int = 3, shear: int = 0) -> Report:
    """Six distinct fault-row fillings with one common phi-image and a blank fault row."""
    patches = [fault_patch("filling", shear, k, level) for k in range(1, GREY_FILLINGS + 1)]
    distinct = len({p.rows for p in patches}) == len(patches)
    row = fault_row_index(level)
    differ_in_row = all(patches[a].rows[row] != patches[b].rows[row]
                        for a in range(len(patches)) for b in range(a + 1, len(patches)))
    marks = [phi1(p) for p in patches]
    images = [phi2(m) for m in marks]
    same = len({im.rows for im in images}) == 1
    blank = all(m == BLANK for m in marks[0].rows[row])
    ok = distinct and differ_in_row and same and blank
    return Report("six fillings, one image", ok, len(patches),
                  [] if ok else ["distinct" if not distinct else "image" if not same else "row"],
                  details={"fillings": len(patches), "images": len({im.rows for im in images}),
                           "blank_row": blank})


def marking_check(max_level: int = 5) -> Report:
    """Compare the local marking criteria with ground truth on supercrosses.

    In an n-supercross with origin at its lower-left cell, the crosses
    obeying the alternating rule are exactly those at even-even cells.
    Reports how many crosses the neighbour-arm test and the diagonal
    test classify correctly.  The diagonal test needs all four diagonal
    cells, so it cannot decide crosses on the patch border; the check
    passes iff the arm test is exact everywhere.
    """
    total = arm_ok = diag_ok = diag_undecided = 0
    fails = []
    for n in range(1, max_level + 1):
        for g in ("r0", "r90", "r180", "r270"):
            p = build_supercross(n, g)
            for i, j, t in p.cells():
                if not t.is_cross:
                    continue
                truth = i % 2 == 0 and j % 2 == 0
                total += 1
                if level0_at(p.rows, i, j) == truth:
                    arm_ok += 1
                else:
                    fails.append((n, g, i, j))
                ex = diagonal_exempt(p.rows, i, j)
                if ex is None:
                    diag_undecided += 1
                elif (not ex) == truth:
                    diag_ok += 1
    return Report("alternating-rule marking", not fails and total > 0, total, fails,
                  details={"arm_test": arm_ok, "diagonal_test": diag_ok,
                           "diagonal_undecided": diag_undecided})


def shear_check(shears: Iterable[int] = range(-8, 9, 2), level: int = 3, max_level: int = 5) -> Report:
    """Sheared fault windows: admissible for even shears, absent from supercrosses when sheared.

    For each shear the window is the whole fault patch (two level-``level``
    supercrosses around the fault row, first filling).  A window that
    occurs nowhere in the four ``max_level`` supercrosses occurs in no
    smaller one either.  Shear 0 is a genuine arm row of a large enough
    supercross, so only nonzero shears must be absent.
    """
    from .patchwork import is_admissible, raw_shear_patch

    scs = [build_supercross(max_level, g) for g in ("r0", "r90", "r180", "r270")]
    fails, rows = [], {}
    n = 0
    for s in shears:
        n += 1
        p, count = raw_shear_patch(s, level)
        adm = p is not None and is_admissible(p)
        occ = sum(len(occurrences(p, S)) for S in scs) if p is not None else 0
        rows[s] = (adm, count, occ)
        if s % 2 == 0 and not adm:
            fails.append((s, "not admissible"))
        if s % 2 and adm:
            fails.append((s, "odd shear admissible"))
        if s and occ:
            fails.append((s, f"occurs {occ} times in a supercross"))
    return Report("sheared fault windows", not fails and n > 0, n, fails, details={"shears": rows})
