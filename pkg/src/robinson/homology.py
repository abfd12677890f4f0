"""Anderson-Putnam complexes of square substitutions and their cohomology.

The complex has one square 2-cell per (possibly collared) tile.  Edges
and vertices are the classes of tile sides and tile corners under the
identifications seen in the substitution language.  The substitution
induces cochain maps; the Cech cohomology of the tiling space is the
direct limit of the cohomology of the complex under them.

Orientation conventions: horizontal edges run west to east, vertical
edges south to north, and the boundary of a face is ``S + E - N - W``.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .alphabet import QUARTERS
from .substitution import (
    SubstitutionRule,
    border_forcing_check,
    language_windows,
    substitute_rows,
)
from .zlinalg import (
    ContractError,
    FgAbGroup,
    IntMatrix,
    LimitGroup,
    cohomology_groups,
    compose_on_group,
    direct_limit,
    induced_endomorphism,
    snf_audit,
    verify_group_isomorphism,
)

SIDES = ("N", "E", "S", "W")
SIGN = {"N": -1, "E": 1, "S": 1, "W": -1}
TAIL = {"S": "sw", "N": "nw", "W": "sw", "E": "se"}
HEAD = {"S": "se", "N": "ne", "W": "nw", "E": "ne"}
_CORNER_OFF = {"sw": (0, 0), "se": (1, 0), "nw": (0, 1), "ne": (1, 1)}


class ComplexError(ValueError):
    """Inconsistent identifications or cochain maps, with a witness."""

    def __init__(self, msg: str, witness=None):
        self.witness = witness
        super().__init__(msg)


@dataclass(frozen=True)
class CollaredTile:
    """A tile together with the eight tiles around it."""

    window: tuple

    @property
    def center(self):
        return self.window[1][1]

    @property
    def collar(self) -> tuple:
        return tuple(t for j, r in enumerate(self.window) for i, t in enumerate(r) if (i, j) != (1, 1))

    @property
    def id(self) -> str:
        return "[" + " / ".join(" ".join(t.id for t in r) for r in reversed(self.window)) + "]"

    def __str__(self) -> str:
        return self.id


def _wkey(w) -> tuple:
    return tuple(t.id for r in w for t in r)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, a):
        p = self.parent
        p.setdefault(a, a)
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:
            p[a], a = root, p[a]
        return root

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            lo, hi = sorted((a, b))
            self.parent[hi] = lo


@dataclass
class CWComplex2:
    """A square 2-complex: vertices, oriented edges and four-sided faces.

    ``faces[f]`` lists the edges on sides N, E, S, W.  ``face_labels``
    records the (collared) tile of each face, ``edge_members`` and
    ``vertex_members`` the (face, side) and (face, corner) incidences
    that were identified into each cell.
    """

    edges: list[tuple[int, int]]
    faces: list[tuple[int, int, int, int]]
    face_labels: list
    edge_members: list[list[tuple[int, str]]]
    vertex_members: list[list[tuple[int, str]]]
    collared: bool = False
    radius: int = 0
    rule_name: str = ""
    forcing: tuple | None = None
    windows: list = field(default_factory=list, repr=False)

    @property
    def nv(self) -> int:
        return len(self.vertex_members)

    @property
    def ne(self) -> int:
        return len(self.edges)

    @property
    def nf(self) -> int:
        return len(self.faces)

    @property
    def euler(self) -> int:
        return self.nv - self.ne + self.nf

    def vertex_of(self, f: int, corner: str) -> int:
        return self._vidx[f, corner]

    def edge_of(self, f: int, side: str) -> int:
        return self.faces[f][SIDES.index(side)]

    def __post_init__(self):
        self._vidx = {m: v for v, ms in enumerate(self.vertex_members) for m in ms}
        self.face_index = {w: i for i, w in enumerate(self.windows)}

    def delta0(self) -> IntMatrix:
        d = IntMatrix(self.ne, self.nv)
        for e, (t, h) in enumerate(self.edges):
            if t != h:
                d._r[e] = {h: 1, t: -1}
        return d

    def delta1(self) -> IntMatrix:
        d = IntMatrix(self.nf, self.ne)
        for f, es in enumerate(self.faces):
            row: dict = {}
            for s, e in zip(SIDES, es):
                row[e] = row.get(e, 0) + SIGN[s]
            d._r[f] = {e: v for e, v in row.items() if v}
        return d

    def to_text(self) -> str:
        lines = [f"complex {self.rule_name or '-'} collared={'yes' if self.collared else 'no'}",
                 f"vertices {self.nv}"]
        lines += [f"v{v} " + " ".join(f"f{f}.{c}" for f, c in ms[:4]) + (" ..." if len(ms) > 4 else "")
                  for v, ms in enumerate(self.vertex_members)]
        lines.append(f"edges {self.ne}")
        lines += [f"e{e} v{t} v{h}" for e, (t, h) in enumerate(self.edges)]
        lines.append(f"faces {self.nf}")
        for f, es in enumerate(self.faces):
            cells = " ".join(f"{'+' if SIGN[s] > 0 else '-'}e{e}" for s, e in zip(SIDES, es))
            lines.append(f"f{f} {cells} {self.face_labels[f]}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


# ---------------------------------------------------------------------------
# construction


def _shrink(w, i, j, n):
    return tuple(tuple(r[i:i + n]) for r in w[j:j + n])


def build_ap_complex(rule: SubstitutionRule, collar: str = "auto", k_max: int = 3) -> CWComplex2:
    """The Anderson-Putnam complex of ``rule``.

    Faces are the language windows of side ``2c + 1`` (c = 0 plain, c = 1
    collared); edges are identified along the language windows of two
    faces side by side, vertices along those of four faces around a
    point.  ``collar='auto'`` collars exactly when the substitution
    does not force its border by level ``k_max``.
    """
    forcing = None
    if collar == "auto":
        forced, k, amb = border_forcing_check(rule, k_max)
        forcing = (forced, k, amb)
        use = not forced
    elif collar in ("on", "off"):
        use = collar == "on"
    else:
        raise ValueError(f"collar must be auto, on or off, not {collar!r}")
    c = 1 if use else 0
    n = 2 * c + 1
    wins = sorted(language_windows(rule, n, n)[0], key=_wkey)
    fid = {w: i for i, w in enumerate(wins)}
    hwins, _ = language_windows(rule, n + 1, n)
    vwins, _ = language_windows(rule, n, n + 1)
    qwins, _ = language_windows(rule, n + 1, n + 1)

    uf = _UnionFind()
    for f in range(len(wins)):
        for s in SIDES:
            uf.find(("e", f, s))
        for q in QUARTERS:
            uf.find(("v", f, q))
    for w in sorted(hwins, key=_wkey):
        a, b = fid[_shrink(w, 0, 0, n)], fid[_shrink(w, 1, 0, n)]
        uf.union(("e", a, "E"), ("e", b, "W"))
    for w in sorted(vwins, key=_wkey):
        a, b = fid[_shrink(w, 0, 0, n)], fid[_shrink(w, 0, 1, n)]
        uf.union(("e", a, "N"), ("e", b, "S"))
    for w in sorted(qwins, key=_wkey):
        sw, se = fid[_shrink(w, 0, 0, n)], fid[_shrink(w, 1, 0, n)]
        nw, ne = fid[_shrink(w, 0, 1, n)], fid[_shrink(w, 1, 1, n)]
        uf.union(("v", sw, "ne"), ("v", se, "nw"))
        uf.union(("v", sw, "ne"), ("v", nw, "se"))
        uf.union(("v", sw, "ne"), ("v", ne, "sw"))

    def classes(kind, labels):
        groups: dict = {}
        for f in range(len(wins)):
            for x in labels:
                groups.setdefault(uf.find((kind, f, x)), []).append((f, x))
        return sorted(groups.values())

    vmembers = classes("v", QUARTERS)
    emembers = classes("e", SIDES)
    vidx = {m: v for v, ms in enumerate(vmembers) for m in ms}
    eidx = {m: e for e, ms in enumerate(emembers) for m in ms}
    edges = []
    for e, ms in enumerate(emembers):
        ends = {(vidx[f, TAIL[s]], vidx[f, HEAD[s]]) for f, s in ms}
        if len(ends) != 1:
            raise ComplexError(f"edge class {e} has inconsistent endpoints {sorted(ends)}", ms)
        edges.append(ends.pop())
    faces = [tuple(eidx[f, s] for s in SIDES) for f in range(len(wins))]
    labels = [w[0][0] if c == 0 else CollaredTile(w) for w in wins]
    return CWComplex2(edges, faces, labels, emembers, vmembers, bool(c), c,
                      rule.name, forcing, wins)


def substitution_cochain_maps(rule: SubstitutionRule, gamma: CWComplex2) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Cochain maps ``(M0, M1, M2)`` induced by the substitution.

    Row ``x`` of ``Mk`` lists the cells of the image of cell ``x``: the
    four faces of an image block, the two halves of an image edge, the
    matching corner of an image block.  Rows index the source cell, so
    every row of ``M2`` sums to 4.
    """
    c, n = gamma.radius, 2 * gamma.radius + 1
    nf, ne, nv = gamma.nf, gamma.ne, gamma.nv
    M2, M1, M0 = IntMatrix(nf, nf), IntMatrix(ne, ne), IntMatrix(nv, nv)
    set1: list = [None] * ne
    set0: list = [None] * nv
    for f, w in enumerate(gamma.windows):
        big = substitute_rows(rule, w)
        im = {}
        for q, (dx, dy) in _CORNER_OFF.items():
            sub = _shrink(big, c + dx, c + dy, n) if c else ((big[dy][dx],),)
            if sub not in gamma.face_index:
                raise ComplexError(f"image window of face {f} is not a face", (f, q))
            im[q] = gamma.face_index[sub]
        row: dict = {}
        for g in im.values():
            row[g] = row.get(g, 0) + 1
        M2._r[f] = row
        halves = {"S": (("sw", "S"), ("se", "S")), "N": (("nw", "N"), ("ne", "N")),
                  "W": (("sw", "W"), ("nw", "W")), "E": (("se", "E"), ("ne", "E"))}
        for s in SIDES:
            e = gamma.edge_of(f, s)
            r: dict = {}
            for q, ss in halves[s]:
                k = gamma.edge_of(im[q], ss)
                r[k] = r.get(k, 0) + 1
            if set1[e] is not None and set1[e] != r:
                raise ComplexError(f"edge {e} has two different images", (f, s))
            set1[e] = r
            M1._r[e] = dict(r)
        for q in QUARTERS:
            v = gamma.vertex_of(f, q)
            r = {gamma.vertex_of(im[q], q): 1}
            if set0[v] is not None and set0[v] != r:
                raise ComplexError(f"vertex {v} has two different images", (f, q))
            set0[v] = r
            M0._r[v] = dict(r)
    d0, d1 = gamma.delta0(), gamma.delta1()
    if d1 @ M1 != M2 @ d1:
        raise ComplexError("M1 does not commute with delta1")
    if d0 @ M0 != M1 @ d0:
        raise ComplexError("M0 does not commute with delta0")
    return M0, M1, M2


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class CohomologyResult:
    """Direct-limit cohomology together with every intermediate."""

    rule: str
    H0: LimitGroup
    H1: LimitGroup
    H2: LimitGroup
    gamma_groups: tuple[FgAbGroup, FgAbGroup, FgAbGroup]
    complex: CWComplex2
    maps: tuple[IntMatrix, IntMatrix, IntMatrix]
    induced: tuple[IntMatrix, IntMatrix, IntMatrix]
    checks: dict
    snf_log: list
    timings: dict
    log: list = field(default_factory=list)

    @property
    def groups(self) -> dict:
        return {"H0": self.H0, "H1": self.H1, "H2": self.H2}

    @property
    def collared(self) -> bool:
        return self.complex.collared

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def matches(self, expected: dict) -> bool:
        """Compare with expected groups given as strings or LimitGroups."""
        for k, g in self.groups.items():
            want = expected[k]
            want = LimitGroup.parse(want) if isinstance(want, str) else want
            if not g.resolved or not verify_group_isomorphism(g, want):
                return False
        return True

    def report(self) -> str:
        return "\n".join(f"{k} = {g}" for k, g in sorted(self.groups.items(), reverse=True))

    def write_audit(self, directory: str | Path) -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        files = {
            "complex.txt": self.complex.to_text(),
            "delta0.txt": self.complex.delta0().to_text(),
            "delta1.txt": self.complex.delta1().to_text(),
            "audit.log": "\n".join(self.log) + "\n",
        }
        for k, (M, F) in enumerate(zip(self.maps, self.induced)):
            files[f"M{k}.txt"] = M.to_text()
            files[f"induced{k}.txt"] = F.to_text()
        out = []
        for name, text in files.items():
            p = d / name
            p.write_text(text)
            out.append(p)
        return out


def compute_cohomology(rule: SubstitutionRule, collar: str = "auto", k_max: int = 3,
                       max_power: int = 12) -> CohomologyResult:
    """Complex, cohomology of the complex, induced maps and their direct limits, with self-checks."""
    timings: dict = {}
    log: list[str] = []
    t0 = time.perf_counter()
    with snf_audit() as snf_log:
        gamma = build_ap_complex(rule, collar, k_max)
        timings["complex"] = time.perf_counter() - t0
        if gamma.forcing is not None:
            forced, k, amb = gamma.forcing
            log.append(f"border forcing: {'yes at level ' + str(k) if forced else 'no'}; "
                       f"ambiguous centres per level {amb}")
        log.append(f"complex: collared={gamma.collared} V={gamma.nv} E={gamma.ne} F={gamma.nf}")
        log.append(f"complex digest: {gamma.digest()}")
        M = substitution_cochain_maps(rule, gamma)
        log.append("cochain maps commute with both coboundaries")
        d0, d1 = gamma.delta0(), gamma.delta1()
        t1 = time.perf_counter()
        Hs = cohomology_groups(d0, d1)
        timings["cohomology"] = time.perf_counter() - t1
        for k, H in enumerate(Hs):
            log.append(f"H{k} of the complex: {H}")
        checks = {"delta1 delta0 = 0": (d1 @ d0).is_zero(), "cochain maps commute": True}
        ranks = [H.free_rank for H in Hs]
        checks["Euler characteristic"] = gamma.euler == ranks[0] - ranks[1] + ranks[2]
        neighbours = ((None, d0), (d0, d1), (d1, None))
        t2 = time.perf_counter()
        induced, limits = [], []
        for k, (H, Mk, (din, dout)) in enumerate(zip(Hs, M, neighbours)):
            F = induced_endomorphism(Mk, H, din, dout)
            F2 = induced_endomorphism(Mk @ Mk, H, din, dout)
            checks[f"induced square on H{k}"] = F2 == compose_on_group(F, F, H)
            L = direct_limit(H, F, max_power)
            L2 = direct_limit(H, F2, max_power)
            checks[f"limit under square on H{k}"] = (L.resolved and L2.resolved
                                                    and verify_group_isomorphism(L, L2))
            log.append(f"induced map on H{k}: {F.rows}x{F.cols}, limit {L}")
            induced.append(F)
            limits.append(L)
        timings["limits"] = time.perf_counter() - t2
    checks["SNF verified"] = bool(snf_log) and all(v for *_, v in snf_log)
    checks["H0 connected"] = limits[0].resolved and str(limits[0]) == "Z"
    for shape, rank, inv, _ in snf_log:
        log.append(f"snf {shape[0]}x{shape[1]} rank {rank} invariant factors {inv}")
    for name, ok in checks.items():
        log.append(f"check {name}: {'PASS' if ok else 'FAIL'}")
    timings["total"] = time.perf_counter() - t0
    return CohomologyResult(rule.name, limits[0], limits[1], limits[2], Hs, gamma, M,
                            tuple(induced), checks, list(snf_log), timings, log)


def load_golden(path: str | Path | None = None) -> dict:
    """Expected groups per rule, from ``data/golden.txt``: ``<rule> <key> = <value>``."""
    from .alphabet import DATA_DIR

    p = Path(path) if path else DATA_DIR / "golden.txt"
    out: dict = {}
    for raw in p.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, value = line.partition("=")
        rule, key = head.split()
        out.setdefault(rule, {})[key] = value.strip()
    return out
