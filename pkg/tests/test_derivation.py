import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from robinson.alphabet import BLANK, decorated_alphabet, marker_alphabet, psi, robinson_alphabet
from robinson.derivation import (
    DerivationError,
    apply_d1,
    apply_d2,
    apply_derivation,
    d1,
    d1_rule,
    d2,
    d2_rule,
    factor_witness,
    identity_derivation,
    level0_at,
    marking_check,
    mirror_roundtrip_check,
    non_injectivity_witness,
    parse_rules,
    phi,
    phi1,
    phi2,
    phi2_inverse,
    phi_window,
    roundtrip_check,
    shear_check,
    supercross_image_in_all,
)
from robinson.patchwork import Patch, build_supercross, stabilized_language

A = robinson_alphabet()
offsets = st.integers(3, 2 ** 40)

HEADER = "derivation d1 from A to Btilde\nsymmetry none\n"
RULE = "when A window 2x2 matches {preds} then add {out}\n"


def _window(ox, oy, w, h):
    return Patch(A, (ox, oy), oracle.grid(w, h, ox, oy))


def test_rule_tables_load():
    assert len(d1_rule().rules) == 48
    assert len(d2_rule().rules) == 56
    assert d1_rule().lint() == []
    assert d2_rule().lint() == []


@settings(max_examples=150, deadline=None)
@given(offsets, offsets)
def test_marking_agrees_with_oracle(ox, oy):
    p = _window(ox, oy, 4, 4)
    m = phi1(p)
    for i, j, t in p.cells():
        c = oracle.cell(i, j, ox, oy)
        if t.is_cross:
            assert level0_at(p.rows, i, j) == oracle.level0(c)
            assert m[i, j].letter == ("E" if oracle.level0(c) else "F")
            assert m[i, j].quadrant == t.quadrant
        else:
            assert m[i, j] == BLANK


@settings(max_examples=150, deadline=None)
@given(offsets, offsets)
def test_d1_lifts_phi(ox, oy):
    p = _window(ox, oy, 2, 2)
    t = d1(p)
    assert t in decorated_alphabet()
    assert psi(t) == phi_window(p.rows)
    assert psi(t) == phi(p)[0, 0]


@settings(max_examples=100, deadline=None)
@given(offsets, offsets, st.integers(3, 6), st.integers(3, 6))
def test_roundtrip_on_oracle_patches(ox, oy, w, h):
    p = _window(ox, oy, w, h)
    back = apply_d2(apply_d1(p))
    assert back.rows == p.subpatch(1, 1, w - 2, h - 2).rows


def test_d1_is_onto_decorated_tiles():
    lang = stabilized_language((2, 2))
    image = {d1(rows) for rows in lang.patches}
    assert image == set(decorated_alphabet().tiles)


def test_roundtrip_on_whole_language(language3):
    r = roundtrip_check(language3.patches)
    assert r.passed, r.failures[:3]
    assert r.checked == 528


def test_mirror_roundtrip(tilde_windows3):
    r = mirror_roundtrip_check(tilde_windows3)
    assert r.passed, r.failures[:3]
    assert r.checked == 880


def test_apply_on_supercross_keeps_interior():
    p = build_supercross(3)
    mid = apply_d1(p)
    assert mid.shape == (p.width - 1, p.height - 1)
    assert apply_d2(mid).rows == p.subpatch(1, 1, p.width - 2, p.height - 2).rows


def test_phi_is_injective_on_supercross_orientations():
    for n in (1, 2, 3):
        images = {phi(build_supercross(n, g)).rows for g in ("r0", "r90", "r180", "r270")}
        assert len(images) == 4


def test_phi2_inverse():
    m = phi1(build_supercross(2))
    assert phi2_inverse(phi2(m)) == m


def test_phi2_inverse_detects_disagreement():
    c = phi(build_supercross(1))
    # the sw quarter of cell (1, 0) is also the se quarter of cell (0, 0)
    other = next(t for t in c.alphabet if t.quarter("sw") != c[1, 0].quarter("sw"))
    with pytest.raises(DerivationError):
        phi2_inverse(c.replace(1, 0, other))


def test_phi1_lone_cross():
    with pytest.raises(DerivationError):
        phi1(Patch(A, (0, 0), ((A.crosses[0],),)))


def test_phi2_rejects_non_corner_quarters():
    M = marker_alphabet()
    ms = [m for m in M if m.is_cross]
    p = Patch(M, (0, 0), ((ms[0], ms[1]), (ms[2], ms[3])))
    with pytest.raises(DerivationError):
        phi2(p)


def test_unmapped_window_raises():
    with pytest.raises(DerivationError):
        apply_derivation(identity_derivation(A), Patch(A, (0, 0), ((None,),)))
    B = decorated_alphabet()
    t = B.tiles[0]
    with pytest.raises(DerivationError):
        d2(((t, t), (t, t)))


def test_linter_reports_conflicting_rules():
    text = HEADER + RULE.format(preds="ne=cross0 sw=noncross", out="harrow=white,right") \
        + RULE.format(preds="ne=cross", out="harrow=black-plain,right")
    with pytest.raises(DerivationError, match="may conflict"):
        parse_rules(text)


def test_disjoint_rules_pass_linter():
    text = HEADER + RULE.format(preds="ne=cross0", out="harrow=white,right") \
        + RULE.format(preds="ne=crossN", out="harrow=black-plain,right")
    d = parse_rules(text)
    assert len(d.rules) == 2


@pytest.mark.parametrize("text, line", [
    (HEADER + "\nwhen A window 2x2 matches ne=bogus then add harrow=white,right\n", 4),
    (HEADER + "when A window 2x2 matches ne=cross0 then add harrow=white,up\n", 3),
    (HEADER + "when B window 2x2 matches ne=cross0 then add harrow=white,right\n", 3),
    ("symmetry D8\n", 1),
    ("when A window 2x2 matches ne=cross0 then add harrow=white,right\n", 1),
    (HEADER + "garbage\n", 3),
])
def test_rule_parse_errors(text, line):
    with pytest.raises(DerivationError) as exc:
        parse_rules(text)
    assert exc.value.line == line


def test_symmetry_closure_counts():
    text = "derivation d1 from A to Btilde\nsymmetry D4\n" + \
        RULE.format(preds="ne=cross0 sw=noncross se=noncross nw=noncross line(sw|se)=single,right",
                    out="harrow=white,right")
    assert len(parse_rules(text).rules) == 8


def test_marking_check():
    r = marking_check(5)
    assert r.passed
    assert r.details["arm_test"] == r.checked
    # the diagonal criterion is right wherever it can be evaluated
    assert r.details["diagonal_test"] + r.details["diagonal_undecided"] == r.checked


def test_six_to_one():
    r = non_injectivity_witness(level=3)
    assert r.passed
    assert r.details == {"fillings": 6, "images": 1, "blank_row": True}


def test_shears():
    r = shear_check(range(-4, 5, 2), level=2, max_level=4)
    assert r.passed, r.failures
    for s, (adm, count, occ) in r.details["shears"].items():
        assert adm and count == 6
        assert (occ > 0) == (s == 0)


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_factor_witness(level):
    assert factor_witness(level).passed


@pytest.mark.parametrize("n", [1, 2, 3])
def test_supercross_images_in_every_block(n):
    assert supercross_image_in_all(n).passed
