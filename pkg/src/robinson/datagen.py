"""Regenerate the packaged corner and decorated data files.

The corner alphabet, the corner substitution and the decorated alphabet
and substitution are all derived from the structural inflation rule in
``substitution``; the files under ``data/`` are frozen copies so that
changes to the generator show up as diffs and as test failures.

    python -m robinson.datagen [--check]
"""
from __future__ import annotations

import sys

from .alphabet import DATA_DIR, alphabet_to_text
from .substitution import decoration_closure, generate_omega

_B_NOTE = """Corner alphabet B.  A corner tile is four quarter cells meeting at a
lattice vertex, listed sw.se.nw.ne.  A quarter is blank (_) or a cross
marker: E = cross obeying the alternating rule (empty triangles),
F = any other cross (solid triangles), followed by the quadrant the
cross faces.  The set is the recurrent closure of the corner
substitution started from one tile; it is regenerated by
robinson.datagen and must not be edited by hand."""

_BT_NOTE = """Decorated corner alphabet B~.  Each record is a corner tile plus the
arrow on the row without the E quarter (harrow) and on the column
without the E quarter (varrow).  white = single line; black-plain /
black-dotted = double line whose plain companion runs on the left /
right of the arrow.  Tiles whose diagonal quarter holds a cross carry
no arrows, so every tile has either no arrow or both.  Generated by
decoration closure from the undecorated corner tiles followed by
recurrent trimming (robinson.datagen); do not edit by hand."""

_OM_NOTE = """Corner substitution: image <tile> = <sw> <se> <nw> <ne>.
Generated by robinson.datagen."""

_OMT_NOTE = """Decorated substitution: image <tile> = <sw> <se> <nw> <ne>.
Generated by robinson.datagen."""


def render() -> dict[str, str]:
    B, om = generate_omega()
    Bt, omt, _ = decoration_closure(om)
    return {
        "corner_B.tiles": alphabet_to_text(B, _B_NOTE),
        "omega.rule": om.to_text(_OM_NOTE),
        "decorated_Btilde.tiles": alphabet_to_text(Bt, _BT_NOTE),
        "omega_tilde.rule": omt.to_text(_OMT_NOTE),
    }


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    files = render()
    stale = [n for n, text in files.items()
             if not (DATA_DIR / n).exists() or (DATA_DIR / n).read_text() != text]
    if "--check" in argv:
        for n in stale:
            print(f"stale: {n}")
        return 1 if stale else 0
    for n in stale:
        (DATA_DIR / n).write_text(files[n])
        print(f"wrote {n}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
