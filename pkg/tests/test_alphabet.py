import pytest
from hypothesis import given
from hypothesis import strategies as st

from robinson.alphabet import (
    D4,
    AlphabetError,
    AlphabetInvalid,
    Arrow,
    CornerTile,
    Decoration,
    EdgeSignature,
    Line,
    Marker,
    alphabet_to_text,
    corner_alphabet,
    cross_tile,
    d4_act,
    decorated_alphabet,
    load_alphabet,
    marker_alphabet,
    match_edges,
    parse_alphabet,
    psi,
    robinson_alphabet,
)

A = robinson_alphabet()
group = st.sampled_from(D4.all())
a_tiles = st.sampled_from(A.tiles)


def test_robinson_alphabet_has_28_tiles():
    assert len(A) == 28
    assert len(A.crosses) == 4
    orbits = {}
    for t in A:
        orbits[t.pid] = orbits.get(t.pid, 0) + 1
    assert orbits == {"a": 4, "b": 4, "c": 4, "d": 8, "e": 8}


def test_crosses_face_each_quadrant():
    assert sorted(c.quadrant for c in A.crosses) == ["ne", "nw", "se", "sw"]
    assert cross_tile(A, "sw").act(D4.parse("r180")) == cross_tile(A, "ne")


def test_arm_tiles_have_a_principal_axis():
    for t in A:
        assert (t.principal_axis is None) == t.is_cross


def test_corner_alphabets_sizes():
    assert len(corner_alphabet()) == 44
    assert len(decorated_alphabet()) == 208
    assert all(isinstance(t, Decoration) for t in decorated_alphabet())
    assert len(marker_alphabet()) == 9


@given(group, group)
def test_d4_is_a_group(g, h):
    assert (g * h).matrix == tuple(
        tuple(sum(g.matrix[i][k] * h.matrix[k][j] for k in range(2)) for j in range(2)) for i in range(2))
    assert g * g.inverse() == D4.identity()
    assert (g * h).det == g.det * h.det


@given(group, group, a_tiles)
def test_action_is_compatible_with_composition(g, h, t):
    assert t.act(h).act(g) == t.act(g * h)
    assert t.act(g) in A


@given(group, a_tiles, a_tiles)
def test_matching_is_equivariant(g, a, b):
    for direction, vec in (("east", (1, 0)), ("north", (0, 1))):
        w = g.vec(vec)
        ga, gb = a.act(g), b.act(g)
        if w in ((-1, 0), (0, -1)):
            ga, gb, w = gb, ga, (-w[0], -w[1])
        assert match_edges(a, b, direction) == match_edges(ga, gb, "east" if w == (1, 0) else "north")


@given(st.sampled_from(corner_alphabet().tiles), group)
def test_corner_tiles_closed_under_d4(t, g):
    assert d4_act(g, t) in corner_alphabet()


@given(st.sampled_from(decorated_alphabet().tiles), group)
def test_psi_commutes_with_symmetries(t, g):
    assert psi(t.act(g)) == psi(t).act(g)
    assert psi(t) in corner_alphabet()


@given(a_tiles)
def test_facing_is_an_involution(t):
    for side in "NESW":
        sig = t.edge(side)
        assert sig.facing().facing() == sig
        assert sig.reflect().reflect() == sig


def test_signature_text_roundtrip():
    for t in A:
        for side in "NESW":
            sig = t.edge(side)
            assert EdgeSignature.parse(str(sig)) == sig


@given(st.sampled_from(["single", "double"]), st.sampled_from("NESW"), group)
def test_line_roundtrip_and_action(kind, d, g):
    comp = None
    if kind == "double":
        comp = {"N": "E", "S": "W", "E": "S", "W": "N"}[d]
    ln = Line(kind, d, comp)
    assert Line.parse(str(ln)) == ln
    assert ln.act(g).act(g.inverse()) == ln


def test_arrow_line_conversion():
    for kind in ("white", "black-plain", "black-dotted"):
        for d in "NESW":
            a = Arrow(kind, d)
            assert Arrow.parse(str(a)) == a


def test_marker_and_corner_parse():
    assert str(Marker.parse("Fne")) == "Fne"
    c = CornerTile.parse("_._._.Ene")
    assert c.quarter("ne") == Marker("E", "ne")
    assert c.e_quarter == "ne"
    with pytest.raises(ValueError):
        Marker.parse("Gne")


def test_file_roundtrip():
    for alph in (A, corner_alphabet(), decorated_alphabet()):
        again = parse_alphabet(alphabet_to_text(alph))
        assert again.tiles == alph.tiles


def test_missing_tile_is_named(tmp_path):
    protos = alphabet_to_text(A).split("\n", 1)[1]
    tiles = "".join(f"tile {t.id}\n" for t in A.tiles if t.id != "d.s90")
    f = tmp_path / "a27.tiles"
    f.write_text("alphabet A\n" + protos + tiles)
    with pytest.raises(AlphabetInvalid, match="missing d.s90"):
        load_alphabet(f)


def test_wrong_count_rejected():
    with pytest.raises(AlphabetInvalid, match="expected 27"):
        parse_alphabet(alphabet_to_text(A).replace("expect=28", "expect=27"))


@pytest.mark.parametrize("text, line", [
    ("alphabet X\nprototile a kind=cross\nedge N = single,head\n", 3),
    ("alphabet X\nedge N = -\n", 2),
    ("alphabet X\nprototile a kind=cross\nedge N = -\nedge N = -\n", 4),
    ("alphabet X\n\n# comment\nbogus line\n", 4),
    ("alphabet X\ntile _._._.Gne\n", 2),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(AlphabetError) as exc:
        parse_alphabet(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_prototile_missing_edge():
    with pytest.raises(AlphabetError, match="lacks edges"):
        parse_alphabet("prototile a kind=cross\nedge N = -\n")


def test_mixing_tile_families_is_an_error():
    with pytest.raises(ValueError):
        match_edges(A.tiles[0], corner_alphabet().tiles[0], "east")
    with pytest.raises(ValueError):
        match_edges(A.tiles[0], A.tiles[0], "west")


def test_unknown_tile_id():
    with pytest.raises(KeyError, match="not in alphabet"):
        A.tile("z.r0")
