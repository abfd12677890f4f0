import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from robinson.zlinalg import (
    ContractError,
    FgAbGroup,
    IntMatrix,
    LimitGroup,
    cohomology_groups,
    compose_on_group,
    direct_limit,
    homology_at,
    image_basis,
    induced_endomorphism,
    smith_normal_form,
    snf_audit,
    solve_exact,
    verify_group_isomorphism,
)

small = st.integers(-6, 6)


@st.composite
def matrices(draw, max_dim=5):
    m = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    return IntMatrix.from_rows([[draw(small) for _ in range(n)] for _ in range(m)], cols=n)


def _sympy_factors(A: IntMatrix) -> list[int]:
    if A.is_zero():
        return []
    D = sympy_snf(sympy.Matrix(A.tolist()), domain=sympy.ZZ)
    return sorted(abs(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0)


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_snf_verifies_and_agrees_with_sympy(A):
    s = smith_normal_form(A)
    s.verify(A)
    assert s.diagonal == _sympy_factors(A)
    assert s.rank == A.rank()


@settings(max_examples=60, deadline=None)
@given(matrices(), matrices())
def test_matmul_matches_dense(A, B):
    if A.cols != B.rows:
        B = IntMatrix.from_rows([[1] * B.cols for _ in range(A.cols)], cols=B.cols)
    dense = [[sum(A[i, k] * B[k, j] for k in range(A.cols)) for j in range(B.cols)] for i in range(A.rows)]
    assert (A @ B).tolist() == dense


def test_snf_small_cases():
    assert smith_normal_form(IntMatrix.from_rows([[2, 4], [6, 8]])).diagonal == [2, 4]
    assert smith_normal_form(IntMatrix.from_rows([[0, 0], [0, 0]])).diagonal == []
    assert smith_normal_form(IntMatrix.from_rows([[6]])).invariant_factors() == [6]


def test_snf_large_entries_stay_exact():
    big = 10 ** 30
    A = IntMatrix.from_rows([[big, big + 1], [big + 2, big + 3]])
    s = smith_normal_form(A)
    assert s.diagonal == [1, 2]


def test_snf_audit_records_verification():
    with snf_audit() as log:
        smith_normal_form(IntMatrix.from_rows([[3, 0], [0, 6]]))
        smith_normal_form(IntMatrix.from_rows([[3, 0], [0, 6]]), transforms=False)
    assert [entry[2] for entry in log] == [[3, 6], [3, 6]]
    assert all(entry[3] for entry in log)


def test_text_roundtrip():
    A = IntMatrix.from_rows([[1, 0, -3], [0, 0, 7]])
    assert IntMatrix.from_text(A.to_text()) == A


def test_det_and_power():
    A = IntMatrix.from_rows([[2, 1], [1, 1]])
    assert A.det() == 1
    assert (A ** 3).tolist() == [[13, 8], [8, 5]]


def test_image_basis_and_solve():
    A = IntMatrix.from_rows([[2, 4], [0, 0], [1, 2]])
    B = image_basis(A)
    assert B.cols == 1
    X = solve_exact(B, A)
    assert B @ X == A


def test_cohomology_of_torus_and_klein_bottle():
    d0 = IntMatrix(2, 1)
    d1 = IntMatrix(1, 2)
    H0, H1, H2 = cohomology_groups(d0, d1)
    assert (str(H0), str(H1), str(H2)) == ("Z", "Z^2", "Z")
    # Klein bottle: boundary a + b - a + b = 2b
    d1k = IntMatrix.from_rows([[0, 2]])
    H0, H1, H2 = cohomology_groups(d0, d1k)
    assert (str(H0), str(H1), str(H2)) == ("Z", "Z", "Z/2")


def test_subdivided_cell_gives_isomorphic_groups():
    # square with identified opposite sides (torus) versus the same torus with
    # its face cut in two by a diagonal edge
    d0 = IntMatrix(2, 1)
    d1 = IntMatrix(1, 2)
    a = [str(g) for g in cohomology_groups(d0, d1)]
    # edges a, b, c (diagonal); faces: a + b - c, c - a - b  (all edges are loops)
    d0s = IntMatrix(3, 1)
    d1s = IntMatrix.from_rows([[1, 1, -1], [-1, -1, 1]])
    b = [str(g) for g in cohomology_groups(d0s, d1s)]
    assert a == b


def test_cohomology_rejects_non_complex():
    d0 = IntMatrix.from_rows([[1], [1]])
    d1 = IntMatrix.from_rows([[1, 0]])
    with pytest.raises(ContractError):
        cohomology_groups(d0, d1)


def test_homology_at_shapes_checked():
    with pytest.raises(ValueError):
        homology_at(IntMatrix(2, 2), IntMatrix(2, 3), 2)


def test_fg_group_rejects_bad_chain():
    with pytest.raises(ContractError):
        FgAbGroup(0, [4, 6])


def _lim(mat, torsion=(), free=None):
    F = IntMatrix.from_rows(mat)
    r = F.rows - len(torsion) if free is None else free
    return direct_limit(FgAbGroup(r, list(torsion)), F)


@pytest.mark.parametrize("mat, torsion, expected", [
    ([[4]], (), "Z[1/4]"),
    ([[2, 0], [0, 1]], (), "Z[1/2] (+) Z"),
    ([[1, 1], [1, 0]], (), "Z^2"),
    ([[0]], (), "0"),
    ([[2, 0], [0, 0]], (), "Z[1/2]"),
    ([[1, 0], [0, 3]], (2,), "Z[1/3] (+) Z/2"),
    ([[2, 0], [0, 3]], (2,), "Z[1/3]"),
    ([[1, 0, 0], [0, 2, 0], [0, 0, 2]], (2, 4), "Z[1/2] (+) Z/2"),
    ([[3, 1], [0, 1]], (), "Z[1/3] (+) Z"),
])
def test_direct_limit_fixtures(mat, torsion, expected):
    L = _lim(mat, torsion)
    assert L.resolved
    assert verify_group_isomorphism(L, LimitGroup.parse(expected))


def test_direct_limit_unresolved_is_reported():
    L = _lim([[2, 1], [0, 3]])
    assert not L.resolved
    assert "unresolved" in str(L)
    with pytest.raises(ContractError):
        L.canonical()


@pytest.mark.parametrize("mat", [[[4]], [[2, 0], [0, 1]], [[3, 1], [0, 1]], [[1, 1], [1, 0]], [[4, 0], [0, 2]]])
def test_direct_limit_invariant_under_squaring(mat):
    F = IntMatrix.from_rows(mat)
    G = FgAbGroup(F.rows, [])
    assert verify_group_isomorphism(direct_limit(G, F), direct_limit(G, F @ F))


def test_limit_group_parse_roundtrip():
    for s in ("Z[1/4] (+) Z[1/2]^10 (+) Z^8 (+) Z/4", "Z[1/2]^2 (+) Z", "Z", "0"):
        assert str(LimitGroup.parse(s)) == s


def test_localisations_compared_by_radical():
    assert verify_group_isomorphism(LimitGroup.parse("Z[1/4]"), LimitGroup.parse("Z[1/2]"))
    assert not verify_group_isomorphism(LimitGroup.parse("Z[1/2]"), LimitGroup.parse("Z[1/3]"))


def test_induced_endomorphism_on_torus_doubling():
    d0, d1 = IntMatrix(2, 1), IntMatrix(1, 2)
    H0, H1, H2 = cohomology_groups(d0, d1)
    M1 = IntMatrix.diagonal([2, 2])
    F = induced_endomorphism(M1, H1, d0, d1)
    assert F == IntMatrix.diagonal([2, 2])
    assert compose_on_group(F, F, H1) == induced_endomorphism(M1 @ M1, H1, d0, d1)


def test_induced_endomorphism_rejects_non_chain_map():
    d0 = IntMatrix.from_rows([[1, -1]])     # one edge between two vertices
    H0 = homology_at(None, d0, 2)
    with pytest.raises(ContractError):
        induced_endomorphism(IntMatrix.from_rows([[1, 0], [0, 0]]), H0, None, d0)
