"""Tile alphabets, the dihedral action on them, and edge matching.

Three alphabets are used throughout the package:

* ``A``: the 28 Robinson tiles, given by prototiles with four edge
  signatures each and closed under the eight symmetries of the square;
* ``B``: corner tiles, each made of four quarter-cells meeting at a
  lattice vertex, where a quarter is blank or a cross marker;
* ``B~`` (``Btilde``): ``B`` tiles optionally carrying one horizontal
  and one vertical line arrow.

All values are immutable and hashable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

DATA_DIR = Path(__file__).with_name("data")


class AlphabetError(ValueError):
    """Malformed alphabet file or violated alphabet invariant."""

    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


# ---------------------------------------------------------------------------
# dihedral group of the square

_R = ((0, -1), (1, 0))          # quarter turn counter-clockwise
_S = ((-1, 0), (0, 1))          # mirror x -> -x


def _mm(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def _mpow(m, k):
    out = ((1, 0), (0, 1))
    for _ in range(k):
        out = _mm(m, out)
    return out


_MATS = [_mm(_mpow(_R, k), _S if f else ((1, 0), (0, 1))) for f in (0, 1) for k in range(4)]
_NAMES = ["r0", "r90", "r180", "r270", "s0", "s90", "s180", "s270"]
_ALIASES = {"e": 0, "id": 0, "identity": 0}


@dataclass(frozen=True, order=True)
class D4:
    """An element of the symmetry group of the square.

    Index ``k`` (0..3) is ``r{90k}``, a counter-clockwise rotation; index
    ``4 + k`` is ``s{90k}``, the mirror ``x -> -x`` followed by that rotation.
    """

    index: int

    def __post_init__(self):
        if not 0 <= self.index < 8:
            raise ValueError(f"no dihedral element with index {self.index}")

    @classmethod
    def parse(cls, name: str | "D4") -> "D4":
        if isinstance(name, D4):
            return name
        key = name.strip().lower()
        if key in _ALIASES:
            return cls(_ALIASES[key])
        try:
            return cls(_NAMES.index(key))
        except ValueError:
            raise ValueError(f"unknown dihedral element {name!r}; expected one of {_NAMES}") from None

    @classmethod
    def all(cls) -> list["D4"]:
        return [cls(i) for i in range(8)]

    @classmethod
    def identity(cls) -> "D4":
        return cls(0)

    @classmethod
    def from_matrix(cls, m) -> "D4":
        return cls(_MATS.index(tuple(tuple(r) for r in m)))

    @property
    def matrix(self):
        return _MATS[self.index]

    @property
    def name(self) -> str:
        return _NAMES[self.index]

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    def __mul__(self, other: "D4") -> "D4":
        # (g * h) acts as g after h
        return D4.from_matrix(_mm(self.matrix, other.matrix))

    def inverse(self) -> "D4":
        (a, b), (c, d) = self.matrix
        return D4.from_matrix(((a, c), (b, d)))      # orthogonal: inverse = transpose

    def vec(self, v: tuple[int, int]) -> tuple[int, int]:
        (a, b), (c, d) = self.matrix
        return (a * v[0] + b * v[1], c * v[0] + d * v[1])

    def dir(self, d: str) -> str:
        return VEC_DIR[self.vec(DIR_VEC[d])]

    def __str__(self) -> str:
        return self.name


DIR_VEC = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}
VEC_DIR = {v: k for k, v in DIR_VEC.items()}
OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E"}
SIDES = ("N", "E", "S", "W")


def _left(v):
    return (-v[1], v[0])


# ---------------------------------------------------------------------------
# edge signatures

KINDS = ("single", "double")
ARROWS = ("head", "tail", "none")
POSITIONS = ("C", "L", "R")


@dataclass(frozen=True, order=True)
class Slot:
    """One line crossing an edge.

    ``position`` is seen from inside the tile looking out through the
    edge: ``L``/``R`` are off-centre to the left/right, ``C`` is central.
    ``arrow`` is ``head`` when the arrow leaves the tile through this edge.
    """

    kind: str
    arrow: str
    position: str

    def __post_init__(self):
        if self.kind not in KINDS or self.arrow not in ARROWS or self.position not in POSITIONS:
            raise ValueError(f"bad slot {self.kind},{self.arrow},{self.position}")

    def reflect(self) -> "Slot":
        pos = {"L": "R", "R": "L", "C": "C"}[self.position]
        return Slot(self.kind, self.arrow, pos)

    def __str__(self) -> str:
        return f"{self.kind},{self.arrow},{self.position}"


_ARROW_PARTNER = {"head": "tail", "tail": "head", "none": "none"}


@dataclass(frozen=True)
class EdgeSignature:
    """The sorted list of line slots crossing one edge of a tile."""

    slots: tuple[Slot, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(sorted(self.slots)))

    @classmethod
    def parse(cls, text: str) -> "EdgeSignature":
        text = text.strip()
        if not text or text == "-":
            return cls(())
        out = []
        for part in text.split(";"):
            fields = [f.strip() for f in part.split(",")]
            if len(fields) != 3:
                raise ValueError(f"slot {part!r} needs kind,arrow,position")
            out.append(Slot(*fields))
        return cls(tuple(out))

    def reflect(self) -> "EdgeSignature":
        """The signature as seen after mirroring the tile."""
        return EdgeSignature(tuple(s.reflect() for s in self.slots))

    def facing(self) -> "EdgeSignature":
        """What the neighbour across this edge must present on its side."""
        return EdgeSignature(tuple(Slot(s.kind, _ARROW_PARTNER[s.arrow], s.position).reflect()
                                   for s in self.slots))

    def fits(self, other: "EdgeSignature") -> bool:
        """Whether ``other`` (on the neighbour, across the edge) matches.

        Slots correspond by mirrored position; kinds agree, heads meet
        tails, and plain companion lines meet plain companion lines.
        """
        return self.facing() == other

    def __str__(self) -> str:
        return ";".join(str(s) for s in self.slots) or "-"


# ---------------------------------------------------------------------------
# prototiles and tiles


@dataclass(frozen=True)
class Prototile:
    id: str
    kind: str
    edges: tuple[EdgeSignature, EdgeSignature, EdgeSignature, EdgeSignature]   # N, E, S, W

    def edge(self, side: str) -> EdgeSignature:
        return self.edges[SIDES.index(side)]

    def edges_under(self, g: D4) -> dict[str, EdgeSignature]:
        out = {}
        for side, sig in zip(SIDES, self.edges):
            out[g.dir(side)] = sig.reflect() if g.det < 0 else sig
        return out

    @cached_property
    def stabilizer(self) -> tuple[D4, ...]:
        base = dict(zip(SIDES, self.edges))
        return tuple(g for g in D4.all() if self.edges_under(g) == base)

    def canonical(self, g: D4) -> D4:
        """Smallest element of the coset ``g * stabilizer``."""
        return min(g * h for h in self.stabilizer)

    @property
    def is_cross(self) -> bool:
        return self.kind == "cross"


@dataclass(frozen=True)
class Tile:
    """A prototile in one orientation (canonical coset representative)."""

    prototile: Prototile = field(compare=False, hash=False, repr=False)
    orientation: D4
    pid: str = field(default="")

    def __post_init__(self):
        canon = self.prototile.canonical(self.orientation)
        object.__setattr__(self, "orientation", canon)
        object.__setattr__(self, "pid", self.prototile.id)

    @property
    def id(self) -> str:
        return f"{self.pid}.{self.orientation.name}"

    @cached_property
    def _edges(self) -> dict[str, EdgeSignature]:
        return self.prototile.edges_under(self.orientation)

    def edge(self, side: str) -> EdgeSignature:
        return self._edges[side]

    @property
    def is_cross(self) -> bool:
        return self.prototile.is_cross

    def act(self, g: D4) -> "Tile":
        return Tile(self.prototile, g * self.orientation)

    def __lt__(self, other: "Tile") -> bool:
        return (self.pid, self.orientation) < (other.pid, other.orientation)

    def __str__(self) -> str:
        return self.id

    def __repr__(self) -> str:
        return f"Tile({self.id})"

    # -- geometry helpers used by the derivations ----------------------------
    def line(self, side: str) -> "Line | None":
        """The arrowed line crossing ``side`` with its companion, if any."""
        sig = self.edge(side)
        main = [s for s in sig.slots if s.position == "C"]
        if len(main) != 1:
            return None
        m = main[0]
        out = DIR_VEC[side]
        comp = None
        for s in sig.slots:
            if s.position in "LR" and s.arrow == "none":
                v = _left(out) if s.position == "L" else (-_left(out)[0], -_left(out)[1])
                comp = VEC_DIR[v]
        travel = out if m.arrow == "head" else (-out[0], -out[1])
        return Line(m.kind, VEC_DIR[travel], comp)

    @cached_property
    def principal_axis(self) -> str | None:
        """``h``/``v`` for arm tiles: the axis whose line has a head on one end."""
        if self.is_cross:
            return None
        for axis, (a, b) in (("h", ("E", "W")), ("v", ("N", "S"))):
            arrows = {s.arrow for side in (a, b) for s in self.edge(side).slots if s.position == "C"}
            if "head" in arrows:
                return axis
        return None

    @cached_property
    def quadrant(self) -> str | None:
        """For a cross: the quadrant its double arms enclose, e.g. ``ne``."""
        if not self.is_cross:
            return None
        ns = "n" if _has_double(self.edge("N")) else "s"
        ew = "e" if _has_double(self.edge("E")) else "w"
        return ns + ew


def _has_double(sig: EdgeSignature) -> bool:
    return any(s.kind == "double" for s in sig.slots)


@dataclass(frozen=True, order=True)
class Line:
    """A line crossing an edge: kind, travel direction and companion side.

    ``direction`` is one of ``N E S W`` (where the arrow points) and
    ``companion`` the side (again ``N E S W``) on which a double line's
    plain companion runs; ``None`` for single lines.
    """

    kind: str
    direction: str
    companion: str | None = None

    def act(self, g: D4) -> "Line":
        return Line(self.kind, g.dir(self.direction), g.dir(self.companion) if self.companion else None)

    @classmethod
    def parse(cls, text: str) -> "Line":
        parts = [p.strip() for p in text.split(",")]
        kind = parts[0]
        d = _DIRWORD.get(parts[1], parts[1])
        comp = _DIRWORD.get(parts[2], parts[2]).upper() if len(parts) > 2 else None
        if kind not in KINDS or d not in DIR_VEC or (kind == "double") != (comp is not None):
            raise ValueError(f"bad line {text!r}")
        return cls(kind, d, comp)

    def __str__(self) -> str:
        d = _WORDDIR[self.direction]
        return f"{self.kind},{d}" + (f",{self.companion.lower()}" if self.companion else "")


_DIRWORD = {"right": "E", "left": "W", "up": "N", "down": "S"}
_WORDDIR = {v: k for k, v in _DIRWORD.items()}


# ---------------------------------------------------------------------------
# corner tiles (B) and their decorations (B~)

QUARTERS = ("sw", "se", "nw", "ne")
_QVEC = {"sw": (-1, -1), "se": (1, -1), "nw": (-1, 1), "ne": (1, 1)}
_VECQ = {v: k for k, v in _QVEC.items()}


def quad_act(g: D4, q: str) -> str:
    return _VECQ[g.vec(_QVEC[q])]


def quad_vec(q: str) -> tuple[int, int]:
    return _QVEC[q]


def vec_quad(v: tuple[int, int]) -> str:
    return _VECQ[v]


@dataclass(frozen=True, order=True)
class Marker:
    """A quarter-cell symbol: blank (``_``) or a cross marker.

    Cross markers are ``E`` (empty triangles: crosses obeying the
    alternating rule) or ``F`` (solid triangles: all other crosses),
    with the quadrant the cross faces.
    """

    letter: str
    quadrant: str | None = None

    def __post_init__(self):
        if self.letter == "_":
            if self.quadrant is not None:
                raise ValueError("blank marker has no quadrant")
        elif self.letter not in "EF" or self.quadrant not in _QVEC:
            raise ValueError(f"bad marker {self.letter}{self.quadrant}")

    @classmethod
    def parse(cls, s: str) -> "Marker":
        if s == "_":
            return BLANK
        return cls(s[0], s[1:])

    @property
    def is_cross(self) -> bool:
        return self.letter != "_"

    def act(self, g: D4) -> "Marker":
        return self if self.letter == "_" else Marker(self.letter, quad_act(g, self.quadrant))

    @property
    def id(self) -> str:
        return str(self)

    def arm(self, direction: str) -> Line:
        """The line leaving this cross through its ``direction`` edge."""
        sx, sy = _QVEC[self.quadrant]
        v = DIR_VEC[direction]
        if v[1] == 0:
            double = sx == v[0]
            comp = VEC_DIR[(0, sy)]
        else:
            double = sy == v[1]
            comp = VEC_DIR[(sx, 0)]
        return Line("double", direction, comp) if double else Line("single", direction)

    def __str__(self) -> str:
        return "_" if self.letter == "_" else self.letter + self.quadrant


BLANK = Marker("_")


@dataclass(frozen=True, order=True)
class CornerTile:
    """A ``B`` tile: four quarter markers in the order sw, se, nw, ne."""

    cells: tuple[Marker, Marker, Marker, Marker]

    @classmethod
    def parse(cls, s: str) -> "CornerTile":
        parts = s.split(".")
        if len(parts) != 4:
            raise ValueError(f"corner tile {s!r} needs four quarters")
        return cls(tuple(Marker.parse(p) for p in parts))

    @property
    def id(self) -> str:
        return ".".join(str(c) for c in self.cells)

    def quarter(self, q: str) -> Marker:
        return self.cells[QUARTERS.index(q)]

    def act(self, g: D4) -> "CornerTile":
        out = {}
        for q, m in zip(QUARTERS, self.cells):
            out[quad_act(g, q)] = m.act(g)
        return CornerTile(tuple(out[q] for q in QUARTERS))

    @property
    def e_quarter(self) -> str | None:
        es = [q for q, m in zip(QUARTERS, self.cells) if m.letter == "E"]
        return es[0] if len(es) == 1 else None

    def __str__(self) -> str:
        return self.id


ARROW_KINDS = ("white", "black-plain", "black-dotted")
_AK = {"white": "w", "black-plain": "p", "black-dotted": "d"}
_KA = {v: k for k, v in _AK.items()}


@dataclass(frozen=True, order=True)
class Arrow:
    """A decoration arrow.

    ``white`` codes a single line; the black kinds code a double line
    whose companion runs to the left (``black-plain``) or to the right
    (``black-dotted``) of the travel direction.
    """

    kind: str
    direction: str              # N E S W

    def __post_init__(self):
        if self.kind not in ARROW_KINDS or self.direction not in DIR_VEC:
            raise ValueError(f"bad arrow {self.kind},{self.direction}")

    @classmethod
    def from_line(cls, line: Line) -> "Arrow":
        if line.kind == "single":
            return cls("white", line.direction)
        left = VEC_DIR[_left(DIR_VEC[line.direction])]
        return cls("black-plain" if line.companion == left else "black-dotted", line.direction)

    def to_line(self) -> Line:
        if self.kind == "white":
            return Line("single", self.direction)
        v = _left(DIR_VEC[self.direction])
        if self.kind == "black-dotted":
            v = (-v[0], -v[1])
        return Line("double", self.direction, VEC_DIR[v])

    def act(self, g: D4) -> "Arrow":
        return Arrow.from_line(self.to_line().act(g))

    @property
    def axis(self) -> str:
        return "h" if self.direction in "EW" else "v"

    @classmethod
    def parse(cls, text: str) -> "Arrow":
        kind, d = [p.strip() for p in text.split(",")]
        return cls(kind, _DIRWORD.get(d, d))

    @property
    def code(self) -> str:
        return _AK[self.kind] + self.direction

    def __str__(self) -> str:
        return f"{self.kind},{_WORDDIR[self.direction]}"


@dataclass(frozen=True, order=True)
class Decoration:
    """A ``B~`` tile: a corner tile plus optional horizontal/vertical arrows."""

    base: CornerTile
    h_arrow: Arrow | None = None
    v_arrow: Arrow | None = None

    def __post_init__(self):
        if self.h_arrow is not None and self.h_arrow.axis != "h":
            raise ValueError("h_arrow must point left or right")
        if self.v_arrow is not None and self.v_arrow.axis != "v":
            raise ValueError("v_arrow must point up or down")

    @property
    def id(self) -> str:
        s = self.base.id
        if self.h_arrow:
            s += "|h=" + self.h_arrow.code
        if self.v_arrow:
            s += "|v=" + self.v_arrow.code
        return s

    @classmethod
    def parse(cls, s: str) -> "Decoration":
        parts = s.split("|")
        base = CornerTile.parse(parts[0])
        h = v = None
        for p in parts[1:]:
            key, _, code = p.partition("=")
            arrow = Arrow(_KA[code[0]], code[1])
            if key == "h":
                h = arrow
            elif key == "v":
                v = arrow
            else:
                raise ValueError(f"bad decoration field {p!r}")
        return cls(base, h, v)

    @property
    def features(self) -> int:
        """Number of superposed features: the corner pattern plus arrows."""
        return 1 + (self.h_arrow is not None) + (self.v_arrow is not None)

    def act(self, g: D4) -> "Decoration":
        arrows = [a.act(g) for a in (self.h_arrow, self.v_arrow) if a is not None]
        h = next((a for a in arrows if a.axis == "h"), None)
        v = next((a for a in arrows if a.axis == "v"), None)
        return Decoration(self.base.act(g), h, v)

    def __str__(self) -> str:
        return self.id


def psi(t: Decoration) -> CornerTile:
    """Forget the decorations of a ``B~`` tile (plain corner tiles pass through)."""
    return t.base if isinstance(t, Decoration) else t


# ---------------------------------------------------------------------------
# alphabets

AnyTile = "Tile | CornerTile | Decoration"


def corners_overlap(a, b, direction: str) -> bool:
    """Adjacent corner tiles share two quarter cells."""
    a = a.base if isinstance(a, Decoration) else a
    b = b.base if isinstance(b, Decoration) else b
    if direction == "east":
        return a.quarter("se") == b.quarter("sw") and a.quarter("ne") == b.quarter("nw")
    return a.quarter("nw") == b.quarter("sw") and a.quarter("ne") == b.quarter("se")


@dataclass(frozen=True)
class Alphabet:
    """A finite tile set with its horizontal and vertical matching relations.

    For ``A`` the relations come from edge signatures.  For ``B`` they
    are overlap consistency of the shared quarter cells.  ``B~`` adds
    the adjacency pairs of its substitution language when known
    (``pairs``); otherwise only the base overlap is checked.
    """

    name: str
    tiles: tuple
    prototiles: tuple[Prototile, ...] = ()
    pairs: tuple[frozenset, frozenset] | None = None
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tiles", tuple(sorted(set(self.tiles), key=lambda t: t.id)))

    @cached_property
    def index(self) -> dict:
        return {t: i for i, t in enumerate(self.tiles)}

    @cached_property
    def by_id(self) -> dict:
        return {t.id: t for t in self.tiles}

    def __len__(self) -> int:
        return len(self.tiles)

    def __iter__(self) -> Iterator:
        return iter(self.tiles)

    def __contains__(self, t) -> bool:
        return t in self.index

    def tile(self, tid: str):
        try:
            return self.by_id[tid]
        except KeyError:
            raise KeyError(f"tile {tid!r} is not in alphabet {self.name}") from None

    def h_match(self, a, b) -> bool:
        return match_edges(a, b, "east", self)

    def v_match(self, a, b) -> bool:
        return match_edges(a, b, "north", self)

    def with_pairs(self, h: Iterable, v: Iterable) -> "Alphabet":
        return Alphabet(self.name, self.tiles, self.prototiles, (frozenset(h), frozenset(v)), self.source)

    @cached_property
    def crosses(self) -> tuple:
        return tuple(t for t in self.tiles if getattr(t, "is_cross", False))


def _family(t) -> type:
    return type(t)


def match_edges(a, b, direction: str, alphabet: Alphabet | None = None) -> bool:
    """Whether ``b`` may sit immediately east (or north) of ``a``."""
    if direction not in ("east", "north"):
        raise ValueError(f"direction must be 'east' or 'north', not {direction!r}")
    if _family(a) is not _family(b):
        raise ValueError("tiles from different alphabets cannot be matched")
    if isinstance(a, Tile):
        if direction == "east":
            return a.edge("E").fits(b.edge("W"))
        return a.edge("N").fits(b.edge("S"))
    if not corners_overlap(a, b, direction):
        return False
    if alphabet is not None and alphabet.pairs is not None:
        return (a, b) in alphabet.pairs[0 if direction == "east" else 1]
    return True


def d4_act(g: D4 | str, t):
    """Rotate/reflect any tile of any alphabet."""
    return t.act(D4.parse(g))


# ---------------------------------------------------------------------------
# file format

_PROTO_RE = re.compile(r"^prototile\s+(\S+)\s+kind=(\S+)$")
_EDGE_RE = re.compile(r"^edge\s+([NESW])\s*=\s*(.*)$")
_TILE_RE = re.compile(r"^tile\s+(\S+)((?:\s+\S+=\S+)*)$")


def parse_alphabet(text: str, name: str | None = None, source: str = "") -> Alphabet:
    """Parse the tile-set text format; see ``load_alphabet``."""
    protos: list[Prototile] = []
    cur: dict | None = None
    plain: list = []
    header = None
    expect = None

    def close(lineno):
        nonlocal cur
        if cur is None:
            return
        missing = [s for s in SIDES if s not in cur["edges"]]
        if missing:
            raise AlphabetError(f"prototile {cur['id']} lacks edges {missing}", lineno)
        protos.append(Prototile(cur["id"], cur["kind"], tuple(cur["edges"][s] for s in SIDES)))
        cur = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet "):
            parts = line.split()
            header = parts[1]
            for p in parts[2:]:
                if p.startswith("expect="):
                    expect = int(p[7:])
            continue
        m = _PROTO_RE.match(line)
        if m:
            close(lineno)
            if any(p.id == m.group(1) for p in protos):
                raise AlphabetError(f"duplicate prototile {m.group(1)}", lineno)
            cur = {"id": m.group(1), "kind": m.group(2), "edges": {}}
            continue
        m = _EDGE_RE.match(line)
        if m:
            if cur is None:
                raise AlphabetError("edge line outside a prototile record", lineno)
            if m.group(1) in cur["edges"]:
                raise AlphabetError(f"edge {m.group(1)} given twice", lineno)
            try:
                cur["edges"][m.group(1)] = EdgeSignature.parse(m.group(2))
            except ValueError as exc:
                raise AlphabetError(str(exc), lineno) from None
            continue
        m = _TILE_RE.match(line)
        if m:
            close(lineno)
            try:
                plain.append(_parse_tile_record(m.group(1), m.group(2), protos))
            except (ValueError, KeyError) as exc:
                raise AlphabetError(str(exc), lineno) from None
            continue
        raise AlphabetError(f"cannot parse {line!r}", lineno)
    close(None)
    name = name or header or "?"

    if protos and plain:
        # explicit tile list over prototiles: every record must name a prototile orientation
        tiles = [t for t in plain if isinstance(t, Tile)]
        if len(tiles) != len(plain):
            raise AlphabetError("mixing prototile orientations with corner tiles")
    elif protos:
        tiles = sorted({Tile(p, g) for p in protos for g in D4.all()})
    elif any(isinstance(t, Decoration) for t in plain):
        # a decorated alphabet: tiles without arrows are decorations too
        tiles = [t if isinstance(t, Decoration) else Decoration(t) for t in plain]
    else:
        tiles = plain
    alph = Alphabet(name, tuple(tiles), tuple(protos), source=source)
    validate_alphabet(alph, expect)
    return alph


def _parse_tile_record(tid: str, rest: str, protos: Sequence[Prototile]):
    attrs = dict(kv.split("=", 1) for kv in rest.split())
    if "." in tid and tid.split(".")[0] in {p.id for p in protos}:
        pid, g = tid.split(".", 1)
        proto = next(p for p in protos if p.id == pid)
        return Tile(proto, D4.parse(g))
    if protos == [] and re.match(r"^[a-zA-Z]\w*\.(r|s)\d+$", tid):
        raise KeyError(f"dangling prototile reference {tid!r}")
    base = CornerTile.parse(tid)
    if not attrs:
        return base
    h = Arrow.parse(attrs.pop("harrow")) if "harrow" in attrs else None
    v = Arrow.parse(attrs.pop("varrow")) if "varrow" in attrs else None
    if attrs:
        raise ValueError(f"unknown tile attributes {sorted(attrs)}")
    return Decoration(base, h, v)


class AlphabetInvalid(AlphabetError):
    """The file parses but the alphabet breaks a structural invariant."""


def validate_alphabet(alph: Alphabet, expect: int | None = None) -> None:
    """Check the structural invariants; raises ``AlphabetInvalid``."""
    missing = sorted({t.act(g) for t in alph.tiles for g in D4.all()} - set(alph.tiles), key=str)
    if missing:
        raise AlphabetInvalid(f"alphabet {alph.name} is not closed under symmetries: "
                              f"missing {', '.join(str(t) for t in missing)}")
    if expect is not None and len(alph) != expect:
        raise AlphabetInvalid(f"alphabet {alph.name} has {len(alph)} tiles, expected {expect}")
    for p in alph.prototiles:
        for side in SIDES:
            sig = p.edge(side)
            if sig.reflect().reflect() != sig:
                raise AlphabetInvalid(f"prototile {p.id}: edge {side} reflection is not an involution")
        orbit = {Tile(p, g) for g in D4.all()}
        if len(orbit) * len(p.stabilizer) != 8:
            raise AlphabetInvalid(f"prototile {p.id}: orbit-stabilizer count fails")
    if isinstance(alph.tiles[0] if alph.tiles else None, Tile):
        _check_equivariance(alph)


def _check_equivariance(alph: Alphabet) -> None:
    # match(a, b, east) == match(g a, g b, g east) with tiles swapped when g east points west/south
    for g in D4.all():
        for a in alph.tiles:
            for b in alph.tiles:
                for direction, vec in (("east", (1, 0)), ("north", (0, 1))):
                    lhs = match_edges(a, b, direction)
                    w = g.vec(vec)
                    ga, gb = a.act(g), b.act(g)
                    if w in ((-1, 0), (0, -1)):
                        ga, gb = gb, ga
                        w = (-w[0], -w[1])
                    rhs = match_edges(ga, gb, "east" if w == (1, 0) else "north")
                    if lhs != rhs:
                        raise AlphabetInvalid(f"matching is not symmetric under {g} for {a.id}, {b.id}")


def load_alphabet(path: str | Path, name: str | None = None) -> Alphabet:
    """Load and validate an alphabet from the tile-set text format.

    Prototile records look like::

        prototile a kind=cross
        edge N = double,head,C;double,none,R
        edge E = ...

    and expand to all their distinct orientations.  Corner-tile records
    are ``tile <sw>.<se>.<nw>.<ne> [harrow=<kind>,<dir>] [varrow=...]``.
    An ``alphabet <name> expect=<n>`` header pins the tile count.
    """
    path = Path(path)
    return parse_alphabet(path.read_text(), name, source=str(path))


def alphabet_to_text(alph: Alphabet, comment: str = "") -> str:
    lines = [f"# {ln}" if ln else "#" for ln in comment.splitlines()]
    lines.append(f"alphabet {alph.name} expect={len(alph)}")
    if alph.prototiles:
        for p in alph.prototiles:
            lines.append(f"prototile {p.id} kind={p.kind}")
            lines += [f"edge {s} = {p.edge(s)}" for s in SIDES]
        return "\n".join(lines) + "\n"
    for t in alph.tiles:
        if isinstance(t, Decoration):
            extra = ""
            if t.h_arrow:
                extra += f" harrow={t.h_arrow}"
            if t.v_arrow:
                extra += f" varrow={t.v_arrow}"
            lines.append(f"tile {t.base.id}{extra}")
        else:
            lines.append(f"tile {t.id}")
    return "\n".join(lines) + "\n"


def robinson_alphabet() -> Alphabet:
    """The packaged 28-tile alphabet ``A``."""
    return _cached("A")


def corner_alphabet() -> Alphabet:
    """The packaged corner alphabet ``B``."""
    return _cached("B")


def decorated_alphabet() -> Alphabet:
    """The packaged decorated alphabet ``B~`` (tile list only)."""
    return _cached("Btilde")


_CACHE: dict = {}
_FILES = {"A": "robinson_A.tiles", "B": "corner_B.tiles", "Btilde": "decorated_Btilde.tiles"}


def _cached(key: str) -> Alphabet:
    if key not in _CACHE:
        _CACHE[key] = load_alphabet(DATA_DIR / _FILES[key], key)
    return _CACHE[key]


def marker_alphabet() -> Alphabet:
    """The nine quarter markers used between the two halves of the forgetful map."""
    ms = [BLANK] + [Marker(l, q) for l in "EF" for q in QUARTERS]
    return Alphabet("M", tuple(ms))


def cross_tile(alph: Alphabet, quadrant: str) -> Tile:
    """The cross of ``alph`` whose double arms enclose ``quadrant``."""
    for t in alph.crosses:
        if t.quadrant == quadrant:
            return t
    raise KeyError(f"no cross facing {quadrant}")


def orientation_quadrant(g: D4) -> str:
    """Quadrant faced by the canonical cross turned by ``g``."""
    return quad_act(g, "ne")
