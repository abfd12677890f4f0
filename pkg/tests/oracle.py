"""Independent model of minimal Robinson tilings by 2-adic arithmetic.

Cell (x, y) of the tiling with offset (ox, oy) looks at X = x + ox and
Y = y + oy.  Crosses sit where v2(X) == v2(Y) (the common value is the
cross level); other cells are arm tiles whose principal line belongs to
the cross of higher valuation in their row or column.  Offsets are
arbitrary integers, so random large offsets sample the minimal space.

Nothing here uses the package's construction code; it only needs the
alphabet to name tiles.
"""
from __future__ import annotations

import random

from robinson.alphabet import Line, robinson_alphabet

_QUAD = {(1, 1): "ne", (-1, 1): "nw", (1, -1): "se", (-1, -1): "sw"}


def v2(n: int) -> int:
    if n == 0:
        return 10 ** 9
    n = abs(n)
    k = 0
    while n % 2 == 0:
        n //= 2
        k += 1
    return k


def facing(c: int, k: int) -> int:
    return 1 if ((c >> k) & 3) == 1 else -1


def cell(x: int, y: int, ox: int = 0, oy: int = 0) -> tuple:
    X, Y = x + ox, y + oy
    a, b = v2(X), v2(Y)
    if a == b:
        return ("X", facing(X, a), facing(Y, a), a)
    if a > b:
        return _arm(X, Y, a, b, vertical=True)
    t = _arm(Y, X, b, a, vertical=False)
    return t


def _arm(U, W, a, b, vertical):
    # U: coordinate along which the high-valuation cross sits (column if vertical)
    k = a
    m = W >> k
    Wc = (m << k) if (m & 1) else ((m + 1) << k)
    d = 1 if W > Wc else -1
    sw = facing(Wc, k)
    su = facing(U, k)
    pk = "D" if sw == d else "S"
    pc = su if pk == "D" else 0
    lo, hi = U - (1 << b), U + (1 << b)
    lk = "D" if facing(lo, b) == 1 else "S"
    hk = "D" if facing(hi, b) == -1 else "S"
    assert lk == hk
    lc = facing(W, b) if lk == "D" else 0
    return ("V" if vertical else "H", d, pk, pc, lk, lc)


def lines(c: tuple) -> dict:
    kind = {"S": "single", "D": "double"}
    if c[0] == "X":
        return None
    _, d, pk, pc, sk, sc = c
    if c[0] == "V":
        p = Line(kind[pk], "N" if d == 1 else "S", ("E" if pc == 1 else "W") if pk == "D" else None)
        scomp = ("N" if sc == 1 else "S") if sk == "D" else None
        return {"N": p, "S": p, "W": Line(kind[sk], "E", scomp), "E": Line(kind[sk], "W", scomp)}
    p = Line(kind[pk], "E" if d == 1 else "W", ("N" if pc == 1 else "S") if pk == "D" else None)
    scomp = ("E" if sc == 1 else "W") if sk == "D" else None
    return {"E": p, "W": p, "S": Line(kind[sk], "N", scomp), "N": Line(kind[sk], "S", scomp)}


_LOOKUP: dict = {}


def tile_of(c: tuple):
    A = robinson_alphabet()
    if not _LOOKUP:
        for t in A:
            if t.is_cross:
                _LOOKUP[("X", t.quadrant)] = t
            else:
                _LOOKUP[tuple(sorted((s, t.line(s)) for s in "NESW"))] = t
    if c[0] == "X":
        return _LOOKUP[("X", _QUAD[(c[1], c[2])])]
    return _LOOKUP[tuple(sorted(lines(c).items()))]


def level0(c: tuple) -> bool:
    return c[0] == "X" and c[3] == 0


def grid(w: int, h: int, ox: int, oy: int) -> list[list]:
    """Rows (bottom first) of A tiles for the window at offset (ox, oy)."""
    return [[tile_of(cell(x, y, ox, oy)) for x in range(w)] for y in range(h)]


def random_offsets(n: int, seed: int = 0, bits: int = 48):
    rnd = random.Random(seed)
    for _ in range(n):
        yield rnd.getrandbits(bits), rnd.getrandbits(bits)


def supercross_offset(n: int) -> tuple[int, int]:
    """Offset placing an n-supercross at cells [0, 2^(n+1) - 2]^2."""
    return 1, 1
