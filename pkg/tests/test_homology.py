import pytest

from robinson.homology import (
    CollaredTile,
    build_ap_complex,
    compute_cohomology,
    load_golden,
    substitution_cochain_maps,
)
from robinson.substitution import omega_rule, omega_tilde_rule, torus_rule
from robinson.zlinalg import IntMatrix, LimitGroup, verify_group_isomorphism
from test_substitution import thue_morse

GOLDEN = load_golden()


def _iso(g, text):
    return g.resolved and verify_group_isomorphism(g, LimitGroup.parse(text))


def test_torus_complex_and_groups():
    r = compute_cohomology(torus_rule())
    g = r.complex
    assert (g.nv, g.ne, g.nf) == (1, 2, 1)
    assert f"V={g.nv} E={g.ne} F={g.nf}" == GOLDEN["torus"]["complex"]
    assert r.matches(GOLDEN["torus"])
    assert r.ok


def test_torus_induced_maps_are_multiplications():
    r = compute_cohomology(torus_rule())
    assert r.induced[0] == IntMatrix.from_rows([[1]])
    assert r.induced[1] == IntMatrix.diagonal([2, 2])
    assert r.induced[2] == IntMatrix.from_rows([[4]])


def test_thue_morse_matches_product_formula():
    # square Thue-Morse is the product of two one-dimensional ones, whose
    # first cohomology is Z[1/2] + Z; the Kunneth formula then gives these
    r = compute_cohomology(thue_morse())
    assert r.collared
    assert _iso(r.H0, "Z")
    assert _iso(r.H1, "Z[1/2]^2 (+) Z^2")
    assert _iso(r.H2, "Z[1/2]^3 (+) Z")
    assert r.ok


def test_coboundaries_compose_to_zero():
    g = build_ap_complex(omega_rule(), collar="on")
    assert (g.delta1() @ g.delta0()).is_zero()


def test_face_boundary_signs():
    g = build_ap_complex(torus_rule())
    # S + E - N - W with N = S and E = W on the torus
    assert g.delta1().tolist() == [[0, 0]]
    assert g.faces[0][0] == g.faces[0][2]


def test_face_map_rows_sum_to_four():
    for rule in (omega_rule(), thue_morse()):
        g = build_ap_complex(rule)
        M0, M1, M2 = substitution_cochain_maps(rule, g)
        assert all(sum(M2.row(i).values()) == 4 for i in range(M2.rows))
        assert all(sum(M1.row(i).values()) == 2 for i in range(M1.rows))
        assert all(sum(M0.row(i).values()) == 1 for i in range(M0.rows))


def test_complex_is_deterministic():
    a = build_ap_complex(omega_rule(), collar="on")
    b = build_ap_complex(omega_rule(), collar="on")
    assert a.to_text() == b.to_text()
    assert a.digest() == b.digest()


def test_corner_rule_forces_border_and_is_collar_invariant():
    plain = compute_cohomology(omega_rule(), collar="auto")
    assert not plain.collared
    assert (plain.complex.nv, plain.complex.ne, plain.complex.nf) == (23, 60, 44)
    collared = compute_cohomology(omega_rule(), collar="on")
    assert (collared.complex.nv, collared.complex.ne, collared.complex.nf) == (127, 296, 176)
    for k in ("H0", "H1", "H2"):
        assert verify_group_isomorphism(plain.groups[k], collared.groups[k])
    assert _iso(plain.H2, "Z[1/4] (+) Z^4")
    assert _iso(plain.H1, "Z[1/2]^2")


def test_decorated_rule_without_collar_gives_other_groups():
    # the decorated substitution does not force its border, so the plain
    # complex is not a valid approximant; its groups come out different
    r = compute_cohomology(omega_tilde_rule(), collar="off")
    assert (r.complex.nv, r.complex.ne, r.complex.nf) == (81, 264, 208)
    assert _iso(r.H2, "Z[1/4] (+) Z[1/2]^10 (+) Z^9")
    assert not r.matches(GOLDEN["omega-tilde"])


def test_decorated_cohomology(tilde_cohomology):
    r = tilde_cohomology
    gold = GOLDEN["omega-tilde"]
    assert r.collared
    assert f"V={r.complex.nv} E={r.complex.ne} F={r.complex.nf}" == gold["complex"]
    assert [str(g) for g in r.gamma_groups] == [gold["gamma_H0"], gold["gamma_H1"], gold["gamma_H2"]]
    assert r.matches(gold)
    assert r.ok, {k: v for k, v in r.checks.items() if not v}


def test_decorated_faces_are_collared_tiles(tilde_cohomology):
    labels = tilde_cohomology.complex.face_labels
    assert all(isinstance(t, CollaredTile) for t in labels)
    assert len({t.center for t in labels}) == 208


def test_audit_files(tilde_cohomology, tmp_path):
    files = tilde_cohomology.write_audit(tmp_path)
    names = sorted(p.name for p in files)
    assert names == sorted(["complex.txt", "delta0.txt", "delta1.txt", "audit.log"]
                           + [f"M{k}.txt" for k in range(3)] + [f"induced{k}.txt" for k in range(3)])
    d1 = IntMatrix.from_text((tmp_path / "delta1.txt").read_text())
    assert d1 == tilde_cohomology.complex.delta1()
    log = (tmp_path / "audit.log").read_text()
    assert "check SNF verified: PASS" in log


def test_bad_collar_option():
    with pytest.raises(ValueError):
        build_ap_complex(torus_rule(), collar="maybe")
