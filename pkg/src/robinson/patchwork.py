"""Finite patches: admissibility, supercrosses, faults and language samples."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

from .alphabet import (
    Alphabet,
    D4,
    Tile,
    cross_tile,
    match_edges,
    orientation_quadrant,
    quad_act,
    robinson_alphabet,
)


class PatchError(ValueError):
    """Malformed patch or failed construction."""


@dataclass(frozen=True)
class Patch:
    """A rectangle of tiles placed at an absolute lattice offset.

    ``rows[j][i]`` is the tile at relative column ``i`` and row ``j``,
    rows counted upwards from the bottom.  ``None`` marks a hole; holes
    are only meaningful as input to ``fill_constraints``.
    """

    alphabet: Alphabet = field(compare=False, repr=False)
    offset: tuple[int, int]
    rows: tuple[tuple, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows or not rows[0]:
            raise PatchError("a patch needs width >= 1 and height >= 1")
        if any(len(r) != len(rows[0]) for r in rows):
            raise PatchError("ragged patch rows")
        for r in rows:
            for t in r:
                if t is not None and t not in self.alphabet:
                    raise PatchError(f"tile {t} is not in alphabet {self.alphabet.name}")

    # construction --------------------------------------------------------
    @classmethod
    def from_function(cls, alphabet: Alphabet, w: int, h: int, f: Callable[[int, int], object],
                      offset: tuple[int, int] = (0, 0)) -> "Patch":
        return cls(alphabet, offset, tuple(tuple(f(i, j) for i in range(w)) for j in range(h)))

    @classmethod
    def single(cls, alphabet: Alphabet, t, offset: tuple[int, int] = (0, 0)) -> "Patch":
        return cls(alphabet, offset, ((t,),))

    # access ----------------------------------------------------------------
    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.width, self.height)

    def __getitem__(self, ij: tuple[int, int]):
        i, j = ij
        return self.rows[j][i]

    def cells(self) -> Iterator[tuple[int, int, object]]:
        for j, r in enumerate(self.rows):
            for i, t in enumerate(r):
                yield i, j, t

    @property
    def complete(self) -> bool:
        return all(t is not None for r in self.rows for t in r)

    def key(self) -> tuple:
        """Translation class: the rows without the offset."""
        return self.rows

    def same_up_to_translation(self, other: "Patch") -> bool:
        return self.rows == other.rows

    # derived patches -------------------------------------------------------
    def subpatch(self, i: int, j: int, w: int, h: int) -> "Patch":
        if i < 0 or j < 0 or i + w > self.width or j + h > self.height:
            raise PatchError("subpatch outside the patch")
        rows = tuple(r[i:i + w] for r in self.rows[j:j + h])
        return Patch(self.alphabet, (self.offset[0] + i, self.offset[1] + j), rows)

    def windows(self, w: int, h: int) -> Iterator["Patch"]:
        for j in range(self.height - h + 1):
            for i in range(self.width - w + 1):
                yield self.subpatch(i, j, w, h)

    def shifted(self, dx: int, dy: int) -> "Patch":
        return Patch(self.alphabet, (self.offset[0] + dx, self.offset[1] + dy), self.rows, self.name)

    def at(self, offset: tuple[int, int]) -> "Patch":
        return Patch(self.alphabet, offset, self.rows, self.name)

    def act(self, g: D4 | str) -> "Patch":
        """Rotate/reflect the patch about its centre; the offset is kept."""
        g = D4.parse(g)
        w, h = self.width, self.height
        # image of the centred position (2i - (w-1), 2j - (h-1))
        cells = {}
        for i, j, t in self.cells():
            x, y = g.vec((2 * i - (w - 1), 2 * j - (h - 1)))
            cells[x, y] = None if t is None else t.act(g)
        nw, nh = (w, h) if g.vec((1, 0))[0] != 0 else (h, w)
        rows = tuple(tuple(cells[2 * i - (nw - 1), 2 * j - (nh - 1)] for i in range(nw)) for j in range(nh))
        return Patch(self.alphabet, self.offset, rows)

    def replace(self, i: int, j: int, t) -> "Patch":
        rows = [list(r) for r in self.rows]
        rows[j][i] = t
        return Patch(self.alphabet, self.offset, rows, self.name)

    def map(self, f: Callable, alphabet: Alphabet) -> "Patch":
        return Patch(alphabet, self.offset, tuple(tuple(f(t) for t in r) for r in self.rows))

    # text format -----------------------------------------------------------
    def to_text(self) -> str:
        """``patch <alphabet> <w> <h> <offx> <offy>`` then rows, top row first."""
        lines = [f"patch {self.alphabet.name} {self.width} {self.height} {self.offset[0]} {self.offset[1]}"]
        for r in reversed(self.rows):
            lines.append(" ".join("?" if t is None else t.id for t in r))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, alphabets: dict[str, Alphabet] | Alphabet) -> "Patch":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise PatchError("empty patch text")
        head = lines[0].split()
        if len(head) != 6 or head[0] != "patch":
            raise PatchError("line 1: expected 'patch <alphabet> <w> <h> <offx> <offy>'")
        name = head[1]
        w, h, ox, oy = (int(x) for x in head[2:])
        if isinstance(alphabets, Alphabet):
            alph = alphabets
        else:
            if name not in alphabets:
                raise PatchError(f"line 1: unknown alphabet {name!r}")
            alph = alphabets[name]
        body = lines[1:]
        if len(body) != h:
            raise PatchError(f"expected {h} rows, found {len(body)}")
        rows = []
        for k, ln in enumerate(body):
            ids = ln.split()
            if len(ids) != w:
                raise PatchError(f"row {k + 1}: expected {w} tiles, found {len(ids)}")
            try:
                rows.append(tuple(None if s == "?" else alph.tile(s) for s in ids))
            except KeyError as exc:
                raise PatchError(f"row {k + 1}: {exc.args[0]}") from None
        return cls(alph, (ox, oy), tuple(reversed(rows)))

    def ascii(self) -> str:
        width = max(len(t.id) if t is not None else 1 for r in self.rows for t in r)
        return "\n".join(" ".join(("?" if t is None else t.id).ljust(width) for t in r)
                         for r in reversed(self.rows)) + "\n"


# ---------------------------------------------------------------------------
# admissibility


def matches_everywhere(p: Patch) -> bool:
    """Every adjacency between two present tiles is legal."""
    A = p.alphabet
    for i, j, t in p.cells():
        if t is None:
            continue
        if i + 1 < p.width and p[i + 1, j] is not None and not match_edges(t, p[i + 1, j], "east", A):
            return False
        if j + 1 < p.height and p[i, j + 1] is not None and not match_edges(t, p[i, j + 1], "north", A):
            return False
    return True


def cross_parities(p: Patch) -> set[tuple[int, int]]:
    """Parity classes of absolute positions whose cells are all crosses."""
    out = set()
    for c in ((0, 0), (0, 1), (1, 0), (1, 1)):
        ok = True
        for i, j, t in p.cells():
            if ((p.offset[0] + i) % 2, (p.offset[1] + j) % 2) == c and not (t is not None and t.is_cross):
                ok = False
                break
        if ok:
            out.add(c)
    return out


def is_admissible(p: Patch) -> bool:
    """Local matching everywhere and, over ``A``, some fully crossed parity class."""
    if not matches_everywhere(p):
        return False
    if p.alphabet.prototiles:
        return bool(cross_parities(p))
    return True


def first_violation(p: Patch) -> str | None:
    """Human-readable description of the first admissibility failure."""
    A = p.alphabet
    for i, j, t in p.cells():
        if t is None:
            continue
        if i + 1 < p.width and p[i + 1, j] is not None and not match_edges(t, p[i + 1, j], "east", A):
            return f"({i},{j}) {t} | ({i + 1},{j}) {p[i + 1, j]}"
        if j + 1 < p.height and p[i, j + 1] is not None and not match_edges(t, p[i, j + 1], "north", A):
            return f"({i},{j}) {t} / ({i},{j + 1}) {p[i, j + 1]}"
    if p.alphabet.prototiles and not cross_parities(p):
        return "no parity class is fully crossed"
    return None


# ---------------------------------------------------------------------------
# constraint filling


def fill_constraints(partial: Patch, limit: int | None = None) -> list[Patch]:
    """All completions of the holes that satisfy the matching rules.

    Backtracking over the holes, always branching on the hole with the
    fewest remaining candidates, and pruning neighbours' candidate sets
    after each placement (forward checking).  The alternating cross rule
    is left to the caller.
    """
    A = partial.alphabet
    w, h = partial.width, partial.height
    grid = {(i, j): t for i, j, t in partial.cells()}
    if not matches_everywhere(partial):
        return []
    tiles = list(A.tiles)

    def ok(t, i, j) -> bool:
        for (di, dj), d, rev in (((1, 0), "east", False), ((-1, 0), "east", True),
                                 ((0, 1), "north", False), ((0, -1), "north", True)):
            n = grid.get((i + di, j + dj))
            if n is None:
                continue
            if not (match_edges(n, t, d, A) if rev else match_edges(t, n, d, A)):
                return False
        return True

    holes = [(i, j) for (i, j), t in grid.items() if t is None]
    dom = {c: [t for t in tiles if ok(t, *c)] for c in holes}
    out: list[Patch] = []

    def place(c, t, open_: set, dom: dict) -> bool:
        """Assign ``t`` to ``c``, then keep assigning cells left with a single candidate."""
        todo = [(c, t)]
        while todo:
            c, t = todo.pop()
            if c not in open_:
                continue
            grid[c] = t
            open_.discard(c)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                n = (c[0] + di, c[1] + dj)
                if n in open_:
                    dom[n] = [u for u in dom[n] if ok(u, *n)]
                    if not dom[n]:
                        return False
                    if len(dom[n]) == 1:
                        todo.append((n, dom[n][0]))
        return True

    def rec(open_: set, dom: dict) -> bool:
        if not open_:
            rows = tuple(tuple(grid[i, j] for i in range(w)) for j in range(h))
            out.append(Patch(A, partial.offset, rows))
            return limit is not None and len(out) >= limit
        c = min(open_, key=lambda c: (len(dom[c]), c[1], c[0]))
        for t in dom[c]:
            o2, d2 = set(open_), dict(dom)
            if place(c, t, o2, d2) and rec(o2, d2):
                return True
            for x in open_:
                grid[x] = None
        return False

    if all(dom[c] for c in holes):
        rec(set(holes), dom)
    out.sort(key=lambda p: tuple(t.id for r in p.rows for t in r))
    return out


# ---------------------------------------------------------------------------
# supercrosses


def side(n: int) -> int:
    return 2 ** (n + 1) - 1


def _orient_for(q: str) -> D4:
    return next(g for g in D4.all() if orientation_quadrant(g) == q)


@lru_cache(maxsize=None)
def _supercross(n: int, quadrant: str) -> tuple[Patch, int]:
    A = robinson_alphabet()
    if n == 0:
        return Patch(A, (0, 0), ((cross_tile(A, quadrant),),)), 1
    s = side(n - 1)
    S = side(n)
    grid = [[None] * S for _ in range(S)]
    for q, (x0, y0) in (("ne", (0, 0)), ("nw", (s + 1, 0)), ("se", (0, s + 1)), ("sw", (s + 1, s + 1))):
        # the sub-supercross in the opposite corner faces the centre
        sub, _ = _supercross(n - 1, q)
        for i, j, t in sub.cells():
            grid[y0 + j][x0 + i] = t
    grid[s][s] = cross_tile(A, quadrant)
    partial = Patch(A, (0, 0), grid)
    sols = fill_constraints(partial, limit=2)
    if len(sols) != 1:
        raise PatchError(f"{n}-supercross arms: {len(sols)} fillings (expected exactly one)")
    return sols[0], len(sols)


def build_supercross(n: int, orient: D4 | str = "r0") -> Patch:
    """The n-supercross whose central cross is the canonical cross turned by ``orient``.

    Four (n-1)-supercrosses facing the centre occupy the corners; the
    connecting row and column are solved for and must be unique.
    """
    if n < 0:
        raise ValueError("supercross level must be >= 0")
    q = orientation_quadrant(D4.parse(orient))
    p, _ = _supercross(n, q)
    return Patch(p.alphabet, (0, 0), p.rows, name=f"supercross-{n}-{q}")


def supercross_filling_count(n: int, quadrant: str = "ne") -> int:
    """Number of arm fillings of the n-supercross frame (1 when forced)."""
    if n == 0:
        return 1
    sub = build_supercross(n, _orient_for(quadrant))
    s = side(n - 1)
    grid = [list(r) for r in sub.rows]
    for k in range(side(n)):
        if k != s:
            grid[s][k] = None
            grid[k][s] = None
    return len(fill_constraints(Patch(sub.alphabet, (0, 0), grid)))


# ---------------------------------------------------------------------------
# occurrences


def occurrences(needle: Patch, hay: Patch) -> list[tuple[int, int]]:
    """Relative positions in ``hay`` where ``needle`` appears exactly."""
    if needle.alphabet.name != hay.alphabet.name:
        raise ValueError("needle and hay use different alphabets")
    w, h = needle.width, needle.height
    out = []
    first = needle.rows[0]
    for j in range(hay.height - h + 1):
        for i in range(hay.width - w + 1):
            if hay.rows[j][i:i + w] != first:
                continue
            if all(hay.rows[j + k][i:i + w] == needle.rows[k] for k in range(1, h)):
                out.append((i, j))
    return out


# ---------------------------------------------------------------------------
# fault lines


GREY_FILLINGS = 6


def _grey_row_fillings(level: int, shear: int) -> tuple[list[Patch], int, int]:
    A = robinson_alphabet()
    s = side(level)
    bottom = build_supercross(level, _orient_for("se"))
    top = build_supercross(level, _orient_for("ne"))
    lo = max(0, shear)
    hi = min(s, s + shear)
    width = hi - lo
    if width < 1:
        raise PatchError(f"shear {shear} leaves no common window at level {level}")
    rows = [bottom.rows[j][lo:hi] for j in range(s)]
    rows.append((None,) * width)
    rows += [top.rows[j][lo - shear:hi - shear] for j in range(s)]
    partial = Patch(A, (0, 0), rows)
    return fill_constraints(partial), width, s


def fault_patch(kind: str, shear: int = 0, filling: int = 1, level: int = 3) -> Patch:
    """A window of a tiling with two infinite-order supertiles.

    The lower and upper halves are level-``level`` supercrosses whose
    central crosses face away from the horizontal fault row between
    them; the upper half is shifted by ``shear`` columns.  The fault row
    is solved for; it admits six fillings and ``filling`` picks one
    (in a fixed order).

    ``kind`` is ``shear`` (alias ``A1-shear``) or ``filling`` (alias
    ``A2-filling``); the two differ only in which parameter is varied.
    """
    if kind not in ("shear", "A1-shear", "filling", "A2-filling"):
        raise ValueError(f"unknown fault kind {kind!r}")
    if shear % 2:
        raise PatchError("the upper supertile can only be shifted by an even number of columns")
    if not 1 <= filling <= GREY_FILLINGS:
        raise PatchError(f"filling must be in 1..{GREY_FILLINGS}")
    sols, _, _ = _grey_row_fillings(level, shear)
    if len(sols) != GREY_FILLINGS:
        raise PatchError(f"fault row has {len(sols)} fillings, expected {GREY_FILLINGS}")
    p = sols[filling - 1]
    return Patch(p.alphabet, (0, 0), p.rows, name=f"fault-{kind}-s{shear}-f{filling}-L{level}")


def raw_shear_patch(shear: int, level: int = 3) -> tuple[Patch | None, int]:
    """Sheared window without the evenness guard: (first filling or None, count)."""
    sols, _, _ = _grey_row_fillings(level, shear)
    return (sols[0] if sols else None), len(sols)


def fault_row_index(level: int) -> int:
    return side(level)


# ---------------------------------------------------------------------------
# language samples


@dataclass(frozen=True)
class LanguageSample:
    alphabet: Alphabet = field(repr=False)
    window: tuple[int, int]
    patches: frozenset
    provenance: str
    stable: bool | None = None
    level: int | None = None

    def __len__(self) -> int:
        return len(self.patches)

    def __contains__(self, p) -> bool:
        key = p.rows if isinstance(p, Patch) else p
        return key in self.patches

    def as_patches(self) -> list[Patch]:
        return [Patch(self.alphabet, (0, 0), rows) for rows in
                sorted(self.patches, key=lambda r: tuple(t.id for row in r for t in row))]

    def subwindows(self, w: int, h: int) -> set:
        out = set()
        for rows in self.patches:
            for j in range(len(rows) - h + 1):
                for i in range(len(rows[0]) - w + 1):
                    out.add(tuple(r[i:i + w] for r in rows[j:j + h]))
        return out


def windows_of(patches: Iterable[Patch], w: int, h: int) -> set:
    out = set()
    for p in patches:
        for j in range(p.height - h + 1):
            for i in range(p.width - w + 1):
                out.add(tuple(r[i:i + w] for r in p.rows[j:j + h]))
    return out


def supercross_windows(level: int, w: int, h: int) -> set:
    return windows_of((build_supercross(level, g) for g in ("r0", "r90", "r180", "r270")), w, h)


def sample_language(source, window: tuple[int, int], depth: int | None = None) -> LanguageSample:
    """Translation classes of all ``window``-sized subpatches of a source.

    ``source`` is a supercross level (int) or a substitution rule; for a
    rule, ``depth`` iterations are applied to every tile.  Supercross
    samples also report whether level ``L - 1`` already gave the same set.
    """
    w, h = window
    if isinstance(source, int):
        cur = supercross_windows(source, w, h)
        prev = supercross_windows(source - 1, w, h) if source > 0 else set()
        return LanguageSample(robinson_alphabet(), window, frozenset(cur), "supercross-levels",
                              stable=(cur == prev), level=source)
    from .substitution import iterate_tile
    rule = source
    depth = 3 if depth is None else depth
    pats = [iterate_tile(rule, t, depth) for t in rule.alphabet]
    return LanguageSample(rule.alphabet, window, frozenset(windows_of(pats, w, h)),
                          "substitution-depth", level=depth)


def stabilized_language(window: tuple[int, int], max_level: int = 7, extra: int = 2) -> LanguageSample:
    """Supercross sample at the first level equal to its predecessor, confirmed ``extra`` more levels."""
    w, h = window
    prev = supercross_windows(0, w, h)
    for L in range(1, max_level + 1):
        cur = supercross_windows(L, w, h)
        if cur == prev:
            for k in range(1, extra + 1):
                nxt = supercross_windows(L + k, w, h)
                if nxt != cur:
                    raise PatchError(f"window language grew again at level {L + k}")
            return LanguageSample(robinson_alphabet(), window, frozenset(cur), "supercross-levels",
                                  stable=True, level=L)
        prev = cur
    raise PatchError(f"window language did not stabilise by level {max_level}")
