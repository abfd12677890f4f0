"""Square 2x2 substitutions on corner tiles and decorated corner tiles.

The corner substitution ``omega`` inflates a corner tile by two: each old
quarter cell moves to an even position of a 3x3 cell grid (old crosses
become solid ``F`` markers), a fresh ``E`` cross appears in the middle
facing the old ``E`` cross, and the four new corner tiles are read off
around the fresh cross.

The decorated substitution ``omega~`` applies the same move to the base
and transports the line arrows: an arrow on the row (column) that keeps
its role is copied into both cells of that row (``a -> aa``), and the
other row (column) receives the arm of the promoted cross.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import networkx as nx

from .alphabet import (
    Alphabet,
    Arrow,
    BLANK,
    CornerTile,
    D4,
    DATA_DIR,
    Decoration,
    Marker,
    QUARTERS,
    corners_overlap,
    load_alphabet,
    quad_act,
)
from .patchwork import Patch
from .zlinalg import IntMatrix


class RuleError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class SubstitutionRule:
    """A total map from tiles to 2x2 blocks ``(sw, se, nw, ne)``."""

    alphabet: Alphabet = field(repr=False)
    images: dict = field(repr=False)
    name: str = "rule"

    def __post_init__(self):
        for t in self.alphabet:
            if t not in self.images:
                raise RuleError(f"rule {self.name}: tile {t.id} has no image")
        for t, img in self.images.items():
            if len(img) != 4:
                raise RuleError(f"rule {self.name}: image of {t.id} is not 2x2")
            for u in img:
                if u not in self.alphabet:
                    raise RuleError(f"rule {self.name}: image of {t.id} contains {u} outside the alphabet")

    def image(self, t) -> tuple:
        return self.images[t]

    def image_patch(self, t) -> Patch:
        sw, se, nw, ne = self.images[t]
        return Patch(self.alphabet, (0, 0), ((sw, se), (nw, ne)))

    def to_text(self, comment: str = "") -> str:
        lines = [f"# {ln}" if ln else "#" for ln in comment.splitlines()]
        lines.append(f"rule {self.name} over {self.alphabet.name}")
        for t in self.alphabet:
            lines.append(f"image {t.id} = " + " ".join(u.id for u in self.images[t]))
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        if not isinstance(other, SubstitutionRule):
            return NotImplemented
        return (self.alphabet.tiles == other.alphabet.tiles
                and all(self.images[t] == other.images[t] for t in self.alphabet))

    def __hash__(self):
        return hash((self.name, self.alphabet.tiles))


def parse_rule(text: str, alphabet: Alphabet) -> SubstitutionRule:
    """Parse ``rule <name> over <alphabet>`` / ``image <t> = <sw> <se> <nw> <ne>``."""
    name = None
    images = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^rule\s+(\S+)\s+over\s+(\S+)$", line)
        if m:
            name = m.group(1)
            if m.group(2) != alphabet.name:
                raise RuleError(f"rule is over {m.group(2)}, not {alphabet.name}", lineno)
            continue
        m = re.match(r"^image\s+(\S+)\s*=\s*(\S+)\s+(\S+)\s+(\S+)\s+(\S+)$", line)
        if not m:
            raise RuleError(f"cannot parse {line!r}", lineno)
        if name is None:
            raise RuleError("image line before the rule header", lineno)
        try:
            t = alphabet.tile(m.group(1))
            img = tuple(alphabet.tile(m.group(k)) for k in range(2, 6))
        except KeyError as exc:
            raise RuleError(exc.args[0], lineno) from None
        if t in images:
            raise RuleError(f"second image for {t.id}", lineno)
        images[t] = img
    if name is None:
        raise RuleError("missing rule header")
    try:
        return SubstitutionRule(alphabet, images, name)
    except RuleError as exc:
        raise RuleError(str(exc)) from None


def load_rule(path: str | Path, alphabet: Alphabet) -> SubstitutionRule:
    return parse_rule(Path(path).read_text(), alphabet)


# ---------------------------------------------------------------------------
# applying rules


def substitute_rows(rule: SubstitutionRule, rows: Sequence[Sequence]) -> tuple:
    out = []
    img = rule.images
    for r in rows:
        lo, hi = [], []
        for t in r:
            sw, se, nw, ne = img[t]
            lo += (sw, se)
            hi += (nw, ne)
        out.append(tuple(lo))
        out.append(tuple(hi))
    return tuple(out)


def substitute(rule: SubstitutionRule, p: Patch) -> Patch:
    """Replace every tile by its 2x2 image; the offset doubles."""
    if p.alphabet.name != rule.alphabet.name:
        raise RuleError(f"patch over {p.alphabet.name} given to rule over {rule.alphabet.name}")
    return Patch(rule.alphabet, (2 * p.offset[0], 2 * p.offset[1]), substitute_rows(rule, p.rows))


def iterate_tile(rule: SubstitutionRule, t, n: int) -> Patch:
    p = Patch(rule.alphabet, (0, 0), ((t,),))
    for _ in range(n):
        p = substitute(rule, p)
    return p


def transition_matrix(rule: SubstitutionRule) -> IntMatrix:
    """Entry (b, a) counts occurrences of b in the image of a."""
    idx = rule.alphabet.index
    n = len(rule.alphabet)
    M = IntMatrix(n, n)
    for a in rule.alphabet:
        for b in rule.images[a]:
            r = M.row(idx[b])
            r[idx[a]] = r.get(idx[a], 0) + 1
    return M


def wielandt_bound(n: int) -> int:
    return (n - 1) ** 2 + 1


def is_primitive(rule: SubstitutionRule, max_power: int | None = None) -> tuple[bool, int]:
    """(True, n) for the least n with a positive n-th power, else (False, bound).

    Tracks, for each tile, the set of tiles in its n-th image as a
    bitmask.  The sequence of these sets is eventually periodic, so a
    repeat without positivity is also a definitive negative answer.
    """
    tiles = rule.alphabet.tiles
    n = len(tiles)
    bound = wielandt_bound(n) if max_power is None else max_power
    idx = rule.alphabet.index
    step = [0] * n
    for a in tiles:
        for b in rule.images[a]:
            step[idx[a]] |= 1 << idx[b]
    full = (1 << n) - 1
    cur = list(step)
    seen = set()
    for k in range(1, bound + 1):
        if all(c == full for c in cur):
            return True, k
        key = tuple(cur)
        if key in seen:
            return False, bound
        seen.add(key)
        nxt = []
        for c in cur:
            acc = 0
            while c:
                low = c & -c
                acc |= step[low.bit_length() - 1]
                c ^= low
            nxt.append(acc)
        cur = nxt
    return False, bound


def occurrence_graph(rule: SubstitutionRule) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_nodes_from(rule.alphabet.tiles)
    for a in rule.alphabet:
        for b in rule.images[a]:
            G.add_edge(a, b)
    return G


# ---------------------------------------------------------------------------
# language


def _windows(rows, w, h):
    H, W = len(rows), len(rows[0])
    for j in range(H - h + 1):
        for i in range(W - w + 1):
            yield tuple(r[i:i + w] for r in rows[j:j + h])


def language_windows(rule: SubstitutionRule, w: int, h: int) -> tuple[frozenset, int]:
    """All w x h patches of the substitution language, plus the number of sweeps.

    Starts from the windows of ``rule^n(t)`` for every tile (with ``2^n``
    at least the window size) and closes under "substitute, then cut
    out windows"; every legal window is reached because a w x h window
    of a level-N block lies in the image of a window of level N-1.
    """
    n0 = 0
    while 2 ** n0 < max(w, h):
        n0 += 1
    found = set()
    for t in rule.alphabet:
        rows = ((t,),)
        for _ in range(n0):
            rows = substitute_rows(rule, rows)
        found.update(_windows(rows, w, h))
    frontier = set(found)
    sweeps = 0
    while frontier:
        sweeps += 1
        new = set()
        for win in frontier:
            for x in _windows(substitute_rows(rule, win), w, h):
                if x not in found:
                    new.add(x)
        found |= new
        frontier = new
    return frozenset(found), sweeps


def language_pairs(rule: SubstitutionRule) -> tuple[set, set, int]:
    """(horizontal pairs (west, east), vertical pairs (south, north), sweeps)."""
    hw, s1 = language_windows(rule, 2, 1)
    vw, s2 = language_windows(rule, 1, 2)
    return {(r[0][0], r[0][1]) for r in hw}, {(r[0][0], r[1][0]) for r in vw}, max(s1, s2)


# ---------------------------------------------------------------------------
# the corner substitution and its decoration


def _grid(base: CornerTile) -> tuple[dict, int, int]:
    e = base.e_quarter
    if e is None:
        raise RuleError(f"corner tile {base.id} does not have exactly one E marker")
    ex, ey = QUARTERS.index(e) % 2, QUARTERS.index(e) // 2
    grid = {}
    for k, m in enumerate(base.cells):
        cx, cy = k % 2, k // 2
        grid[2 * cx, 2 * cy] = Marker("F", m.quadrant) if m.is_cross else BLANK
    q = ("n" if ey else "s") + ("e" if ex else "w")
    grid[1, 1] = Marker("E", q)
    for p in ((1, 0), (0, 1), (2, 1), (1, 2)):
        grid[p] = BLANK
    return grid, ex, ey


def _cells(grid, qx, qy) -> CornerTile:
    return CornerTile(tuple(grid[qx + dx, qy + dy] for dy in (0, 1) for dx in (0, 1)))


def omega_corner_image(base: CornerTile) -> tuple[CornerTile, ...]:
    grid, _, _ = _grid(base)
    return tuple(_cells(grid, qx, qy) for qy in (0, 1) for qx in (0, 1))


def omega_tilde_image(t: Decoration) -> tuple[Decoration, ...]:
    """Image of a decorated tile; tiles lacking required arrows are kept as they are."""
    b = t.base
    grid, ex, ey = _grid(b)
    out = []
    for qy in (0, 1):
        for qx in (0, 1):
            cells = _cells(grid, qx, qy)
            if grid[2 * qx, 2 * qy].is_cross:
                out.append(Decoration(cells))
                continue
            # horizontal arrow: the line in local row 2*qy between columns qx and qx + 1
            if qy != ey:
                h = t.h_arrow
                old = b.cells[(1 - ex) + 2 * qy]
                if h is None and old.is_cross:
                    h = Arrow.from_line(old.arm("E" if ex == 1 else "W"))
            else:
                h = Arrow.from_line(grid[2 * ex, 2 * qy].arm("E" if 2 * ex < qx + 0.5 else "W"))
            if qx != ex:
                v = t.v_arrow
                old = b.cells[qx + 2 * (1 - ey)]
                if v is None and old.is_cross:
                    v = Arrow.from_line(old.arm("N" if ey == 1 else "S"))
            else:
                v = Arrow.from_line(grid[2 * qx, 2 * ey].arm("N" if 2 * ey < qy + 0.5 else "S"))
            out.append(Decoration(cells, h, v))
    return tuple(out)


def _closure(seeds: Iterable, image: Callable, cap: int) -> dict:
    images = {}
    work = list(seeds)
    while work:
        t = work.pop()
        if t in images:
            continue
        if len(images) >= cap:
            raise RuleError(f"closure exceeded {cap} tiles; last tile {t.id}")
        images[t] = tuple(image(t))
        work.extend(u for u in images[t] if u not in images)
    return images


def recurrent_core(images: dict) -> set:
    """Tiles reachable from every recurrent strongly connected component."""
    G = nx.DiGraph()
    G.add_nodes_from(images)
    for a, img in images.items():
        for b in img:
            G.add_edge(a, b)
    recurrent = [c for c in nx.strongly_connected_components(G)
                 if len(c) > 1 or any(G.has_edge(x, x) for x in c)]
    keep = None
    for comp in recurrent:
        start = next(iter(comp))
        reach = nx.descendants(G, start) | {start}
        keep = reach if keep is None else keep & reach
    return keep or set()


@dataclass
class ClosureReport:
    created: int
    kept: int
    recurrent_components: list[int]


def decoration_closure(base: SubstitutionRule, seeds: Iterable[Decoration] | None = None,
                       image: Callable[[Decoration], Sequence[Decoration]] = omega_tilde_image,
                       cap: int = 10000) -> tuple[Alphabet, SubstitutionRule, ClosureReport]:
    """Generate the decorated alphabet and substitution.

    Tiles are created from the seeds by applying ``image`` until nothing
    new appears; then only tiles reachable from every recurrent strongly
    connected component of the occurrence graph are kept.  Each kept
    tile's image must project onto the base rule's image of its base.
    """
    if seeds is None:
        seeds = [Decoration(b) for b in base.alphabet]
    images = _closure(seeds, image, cap)
    for t, img in images.items():
        if t.base not in base.alphabet:
            raise RuleError(f"decorated tile {t.id} has a base outside {base.alphabet.name}")
        if tuple(u.base for u in img) != base.images[t.base]:
            raise RuleError(f"decorated image of {t.id} does not project onto the base image")
    keep = recurrent_core(images)
    G = nx.DiGraph()
    G.add_nodes_from(images)
    G.add_edges_from((a, b) for a, img in images.items() for b in img)
    sizes = sorted((len(c) for c in nx.strongly_connected_components(G)
                    if len(c) > 1 or any(G.has_edge(x, x) for x in c)), reverse=True)
    alph = Alphabet("Btilde", tuple(keep))
    rule = SubstitutionRule(alph, {t: images[t] for t in keep}, "omega-tilde")
    return alph, rule, ClosureReport(len(images), len(keep), sizes)


def generate_omega() -> tuple[Alphabet, SubstitutionRule]:
    """The corner alphabet as the recurrent closure of one corner tile."""
    seed = CornerTile((Marker("E", "ne"), BLANK, BLANK, BLANK))
    images = _closure([seed], omega_corner_image, 1000)
    keep = recurrent_core(images)
    alph = Alphabet("B", tuple(keep))
    return alph, SubstitutionRule(alph, {t: images[t] for t in keep}, "omega")


def psi_compatible(decorated: SubstitutionRule, base: SubstitutionRule) -> str | None:
    """First tile violating psi(omega~(t)) == omega(psi(t)), or None."""
    for t in decorated.alphabet:
        if tuple(u.base for u in decorated.images[t]) != base.images[t.base]:
            return t.id
    return None


def is_equivariant(rule: SubstitutionRule) -> bool:
    """image(g t) == g image(t), with the 2x2 block permuted by g."""
    for g in D4.all():
        for t in rule.alphabet:
            gt = t.act(g)
            if gt not in rule.alphabet:
                return False
            moved = {}
            for q, u in zip(QUARTERS, rule.images[t]):
                moved[quad_act(g, q)] = u.act(g)
            if tuple(moved[q] for q in QUARTERS) != rule.images[gt]:
                return False
    return True


def arrow_factor_check(rule: SubstitutionRule) -> bool:
    """Every arrow reappears unchanged in both cells of its row (column) of the image.

    The row keeping the arrow is the one that does not contain the
    tile's ``E`` quarter.
    """
    for t in rule.alphabet:
        if not isinstance(t, Decoration) or (t.h_arrow is None and t.v_arrow is None):
            continue
        e = t.base.e_quarter
        ex, ey = QUARTERS.index(e) % 2, QUARTERS.index(e) // 2
        img = rule.images[t]
        if t.h_arrow is not None:
            qy = 1 - ey
            if any(img[qx + 2 * qy].h_arrow != t.h_arrow for qx in (0, 1)):
                return False
        if t.v_arrow is not None:
            qx = 1 - ex
            if any(img[qx + 2 * qy].v_arrow != t.v_arrow for qy in (0, 1)):
                return False
    return True


# ---------------------------------------------------------------------------
# border forcing


def _ring(rows, k: int) -> tuple:
    n = 2 ** k
    lo, hi = 2 ** k - 1, 2 * 2 ** k    # block occupies [2^k, 2^(k+1)) in the 3 * 2^k image
    inner = range(lo, hi + 1)
    cells = []
    for j in inner:
        for i in inner:
            if i in (lo, hi) or j in (lo, hi):
                cells.append(rows[j][i])
    return tuple(cells)


def border_forcing_check(rule: SubstitutionRule, k_max: int = 3,
                         collars: Iterable | None = None) -> tuple[bool, int, dict]:
    """Does rule^k(t) determine the ring of tiles around it, for every t?

    Collars (3x3 language windows) are substituted ``k`` times and the
    ring of tiles bordering the central block is compared across all
    collars of the same centre tile.  Returns ``(forced, k, ambiguous)``
    where ``ambiguous`` maps levels to the number of centre tiles with
    more than one ring.
    """
    if collars is None:
        collars, _ = language_windows(rule, 3, 3)
    by_centre: dict = {}
    for c in collars:
        by_centre.setdefault(c[1][1], []).append(c)
    ambiguous = {}
    for k in range(1, k_max + 1):
        bad = 0
        for t, cs in by_centre.items():
            rings = set()
            for c in cs:
                rows = c
                for _ in range(k):
                    rows = substitute_rows(rule, rows)
                rings.add(_ring(rows, k))
                if len(rings) > 1:
                    break
            bad += len(rings) > 1
        ambiguous[k] = bad
        if bad == 0:
            return True, k, ambiguous
    return False, k_max, ambiguous


# ---------------------------------------------------------------------------
# packaged rules


def omega_rule() -> SubstitutionRule:
    """The packaged corner substitution."""
    if "omega" not in _RULES:
        A = load_alphabet(DATA_DIR / "corner_B.tiles", "B")
        _RULES["omega"] = load_rule(DATA_DIR / "omega.rule", A)
    return _RULES["omega"]


def omega_tilde_rule() -> SubstitutionRule:
    """The packaged decorated substitution, with language pairs attached."""
    if "omega-tilde" not in _RULES:
        A = load_alphabet(DATA_DIR / "decorated_Btilde.tiles", "Btilde")
        r = load_rule(DATA_DIR / "omega_tilde.rule", A)
        h, v, _ = language_pairs(r)
        A2 = A.with_pairs(h, v)
        _RULES["omega-tilde"] = SubstitutionRule(A2, {A2.tile(t.id): tuple(A2.tile(u.id) for u in img)
                                                       for t, img in r.images.items()}, r.name)
    return _RULES["omega-tilde"]


def torus_rule() -> SubstitutionRule:
    """One tile whose image is four copies of itself."""
    t = CornerTile((Marker("E", "ne"), BLANK, BLANK, BLANK))
    alph = Alphabet("T", (t,))
    return SubstitutionRule(alph, {t: (t, t, t, t)}, "torus")


_RULES: dict = {}


def rule_by_name(name: str) -> SubstitutionRule:
    name = name.lower().replace("_", "-")
    if name in ("omega", "w"):
        return omega_rule()
    if name in ("omega-tilde", "omegatilde", "decorated"):
        return omega_tilde_rule()
    if name in ("torus", "toy"):
        return torus_rule()
    raise KeyError(f"unknown rule {name!r} (expected omega, omega-tilde or torus)")
