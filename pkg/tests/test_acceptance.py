"""The twelve acceptance criteria, one test each.

Every test records its verdict before asserting, so the terminal summary
prints one PASS/FAIL line per criterion even when some fail.
"""
from conftest import ACCEPTANCE

from robinson.alphabet import DATA_DIR, load_alphabet
from robinson.derivation import (
    mirror_roundtrip_check,
    non_injectivity_witness,
    roundtrip_check,
    shear_check,
    supercross_image_in_all,
)
from robinson.homology import compute_cohomology, load_golden
from robinson.patchwork import (
    build_supercross,
    is_admissible,
    occurrences,
    supercross_filling_count,
)
from robinson.substitution import (
    arrow_factor_check,
    decoration_closure,
    is_primitive,
    omega_rule,
    omega_tilde_rule,
    psi_compatible,
    torus_rule,
)
from robinson.zlinalg import FgAbGroup, IntMatrix, direct_limit, verify_group_isomorphism

ROTATIONS = ("r0", "r90", "r180", "r270")


def record(n: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[n] = (bool(ok), title + (f" [{detail}]" if detail else ""))
    print(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f" [{detail}]" if detail else ""))
    assert ok, f"criterion {n} failed: {detail}"


def test_01_alphabet_count():
    A = load_alphabet(DATA_DIR / "robinson_A.tiles")
    record(1, "alphabet A has 28 tiles", len(A) == 28, f"{len(A)} tiles")


def test_02_supercross_construction():
    p = build_supercross(2)
    subs = sum(len(occurrences(build_supercross(1, g), p)) for g in ROTATIONS)
    centre = p[3, 3].is_cross
    unique = [supercross_filling_count(n) for n in range(1, 5)]
    ok = p.shape == (7, 7) and is_admissible(p) and subs == 4 and centre and unique == [1, 1, 1, 1]
    record(2, "2-supercross is 7x7 with four 1-supercrosses; arms unique for levels 1-4", ok,
           f"shape {p.shape}, {subs} sub-supercrosses, fillings {unique}")


def test_03_lattice_premise():
    bad = []
    for n in range(1, 6):
        p = build_supercross(n)
        even = all(p[i, j].is_cross for i in range(0, p.width, 2) for j in range(0, p.height, 2))
        rows = all(any(p[i, j].is_cross for i in range(p.width)) for j in range(p.height))
        cols = all(any(p[i, j].is_cross for j in range(p.height)) for i in range(p.width))
        if not (even and rows and cols):
            bad.append(n)
    record(3, "crosses on the even lattice, every row and column crossed (n <= 5)", not bad,
           f"failing levels {bad}" if bad else "levels 1-5")


def test_04_primitivity():
    w, k = is_primitive(omega_rule())
    wt, kt = is_primitive(omega_tilde_rule())
    record(4, "omega and omega-tilde primitive", w and wt, f"powers {k} and {kt}")


def test_05_decoration_closure():
    alph, rule, rep = decoration_closure(omega_rule())
    bad = psi_compatible(rule, omega_rule())
    ok = len(alph) == 208 and bad is None and arrow_factor_check(rule)
    record(5, "closure gives 208 tiles, psi intertwines, a -> aa", ok,
           f"{rep.created} created, {rep.kept} kept")


def test_06_factor_evidence():
    fails = [n for n in range(1, 5) if not supercross_image_in_all(n).passed]
    record(6, "omega^n(t) contains phi of an (n-1)-supercross, n <= 4", not fails,
           f"failing n {fails}" if fails else "n = 1..4, all 44 tiles")


def test_07_conjugacy_roundtrip(language3, tilde_windows3):
    r1 = roundtrip_check(language3.patches)
    r2 = mirror_roundtrip_check(tilde_windows3)
    record(7, "d2 o d1 and d1 o d2 return the centre tile", r1.passed and r2.passed,
           f"{r1.checked} A windows (stable at level {language3.level}), {r2.checked} B~ windows, "
           f"{len(r1.failures) + len(r2.failures)} failures")


def test_08_non_injectivity():
    r = non_injectivity_witness()
    record(8, "six fillings with one phi-image and a blank row", r.passed,
           ", ".join(f"{k}={v}" for k, v in r.details.items()))


def test_09_fault_shear():
    r = shear_check(range(-8, 9, 2), level=3, max_level=5)
    absent = all(occ == 0 for s, (_, _, occ) in r.details["shears"].items() if s)
    record(9, "even shears admissible, sheared windows absent from supercrosses", r.passed and absent,
           f"{r.checked} shears")


def test_10_cohomology(tilde_cohomology):
    gold = load_golden()["omega-tilde"]
    r = tilde_cohomology
    ok = r.matches(gold)
    record(10, "cohomology of the decorated substitution", ok,
           "; ".join(f"{k} = {g}" for k, g in sorted(r.groups.items(), reverse=True)))


def test_11_torus_toy():
    r = compute_cohomology(torus_rule())
    ok = r.matches({"H0": "Z", "H1": "Z[1/2]^2", "H2": "Z[1/4]"})
    record(11, "one-tile torus substitution", ok,
           "; ".join(f"{k} = {g}" for k, g in sorted(r.groups.items(), reverse=True)))


def test_12_self_checks(tilde_cohomology):
    keys = ("SNF verified", "delta1 delta0 = 0", "cochain maps commute", "induced square on H0",
            "induced square on H1", "induced square on H2")
    checks = {k: tilde_cohomology.checks[k] for k in keys}
    g = tilde_cohomology.complex
    M0, M1, M2 = tilde_cohomology.maps
    d0, d1 = g.delta0(), g.delta1()
    checks["M1 delta0 = delta0 M0"] = d0 @ M0 == M1 @ d0
    checks["M2 delta1 = delta1 M1"] = d1 @ M1 == M2 @ d1
    fixtures = [IntMatrix.from_rows(m) for m in ([[4]], [[2, 0], [0, 1]], [[1, 1], [1, 0]], [[3, 1], [0, 1]])]
    for F in fixtures:
        G = FgAbGroup(F.rows, [])
        checks[f"limit square fixture {F.tolist()}"] = verify_group_isomorphism(
            direct_limit(G, F), direct_limit(G, F @ F))
    failed = [k for k, v in checks.items() if not v]
    record(12, "exactness self-checks", not failed,
           f"failed {failed}" if failed else f"{len(checks)} checks, {len(tilde_cohomology.snf_log)} SNFs verified")
