import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from conftest import oracle_windows
from robinson.alphabet import D4, robinson_alphabet
from robinson.patchwork import (
    GREY_FILLINGS,
    Patch,
    PatchError,
    build_supercross,
    cross_parities,
    fault_patch,
    fill_constraints,
    first_violation,
    is_admissible,
    occurrences,
    raw_shear_patch,
    side,
    stabilized_language,
    supercross_filling_count,
    supercross_windows,
)

A = robinson_alphabet()

# window-language sizes, from the 2-adic model (150k sampled offsets)
ORACLE_2x2 = 224
ORACLE_3x3 = 528


@pytest.mark.parametrize("n", range(0, 5))
def test_supercross_matches_oracle(n):
    s = side(n)
    p = build_supercross(n)
    assert p.shape == (s, s)
    assert [list(r) for r in p.rows] == oracle.grid(s, s, 1, 1)
    assert is_admissible(p)


@pytest.mark.parametrize("n", range(1, 5))
def test_supercross_is_forced(n):
    assert supercross_filling_count(n) == 1


@pytest.mark.parametrize("n", range(2, 5))
def test_supercross_contains_four_smaller_ones(n):
    big = build_supercross(n)
    count = sum(len(occurrences(build_supercross(n - 1, g), big)) for g in ("r0", "r90", "r180", "r270"))
    assert count == 4


@pytest.mark.parametrize("g", [g.name for g in D4.all()])
def test_supercross_orientations(g):
    p = build_supercross(3, g)
    q = build_supercross(3).act(g)
    assert p.rows == q.rows


def test_level0_crosses_on_even_lattice():
    p = build_supercross(4)
    for i, j, t in p.cells():
        if i % 2 == 0 and j % 2 == 0:
            assert t.is_cross
    assert (0, 0) in cross_parities(p)


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 2 ** 40), st.integers(3, 2 ** 40), st.integers(1, 5), st.integers(1, 5))
def test_oracle_windows_are_admissible(ox, oy, w, h):
    p = Patch(A, (ox, oy), oracle.grid(w, h, ox, oy))
    assert is_admissible(p), first_violation(p)


def test_small_language_matches_oracle():
    lang = stabilized_language((2, 2))
    assert len(lang) == ORACLE_2x2
    assert set(lang.patches) == oracle_windows(2, 2, 150000)


def test_three_by_three_language(language3, oracle3):
    assert len(language3) == ORACLE_3x3
    assert set(language3.patches) == oracle3
    assert language3.stable


def test_language_grows_before_stabilising():
    assert len(supercross_windows(2, 3, 3)) < ORACLE_3x3


def test_text_roundtrip():
    p = build_supercross(2).at((5, -3))
    q = Patch.from_text(p.to_text(), {"A": A})
    assert q == p
    assert q.offset == (5, -3)


@pytest.mark.parametrize("text, msg", [
    ("", "empty"),
    ("patch A 1 1 0\na.r0\n", "line 1"),
    ("patch Q 1 1 0 0\na.r0\n", "unknown alphabet"),
    ("patch A 2 1 0 0\na.r0\n", "row 1"),
    ("patch A 1 2 0 0\na.r0\n", "expected 2 rows"),
    ("patch A 1 1 0 0\nz.r0\n", "row 1"),
])
def test_text_errors(text, msg):
    with pytest.raises(PatchError, match=msg):
        Patch.from_text(text, {"A": A})


def test_ragged_and_foreign_tiles_rejected():
    with pytest.raises(PatchError):
        Patch(A, (0, 0), ((A.tiles[0],), (A.tiles[0], A.tiles[1])))
    from robinson.alphabet import corner_alphabet
    with pytest.raises(PatchError):
        Patch(A, (0, 0), ((corner_alphabet().tiles[0],),))


def test_fill_recovers_removed_cells():
    p = build_supercross(3)
    holes = p
    for i in range(1, 6):
        holes = holes.replace(i, 7, None)
    sols = fill_constraints(holes)
    assert p in sols


def test_broken_patch_reports_violation():
    p = build_supercross(2)
    bad = p.replace(1, 1, next(t for t in A if t != p[1, 1] and not t.is_cross))
    assert not is_admissible(bad)
    assert first_violation(bad) is not None


@pytest.mark.parametrize("shear", [-4, 0, 2, 6])
def test_fault_rows_have_six_fillings(shear):
    seen = set()
    for k in range(1, GREY_FILLINGS + 1):
        p = fault_patch("shear", shear=shear, filling=k, level=2)
        assert is_admissible(p)
        seen.add(p.rows)
    assert len(seen) == GREY_FILLINGS


@pytest.mark.parametrize("shear", [-3, -1, 1, 5])
def test_odd_shear_is_not_admissible(shear):
    # the fault row still fills locally, but the two halves disagree on the cross lattice
    p, count = raw_shear_patch(shear, level=2)
    assert count == GREY_FILLINGS
    assert not is_admissible(p)
    assert first_violation(p) == "no parity class is fully crossed"
    with pytest.raises(PatchError):
        fault_patch("shear", shear=1, level=2)


def test_fault_argument_errors():
    with pytest.raises(ValueError):
        fault_patch("twist")
    with pytest.raises(PatchError):
        fault_patch("filling", filling=7, level=2)
