"""Exact integer linear algebra.

Sparse arbitrary-precision integer matrices, Smith normal form with
unimodular transforms, cohomology of a three-term cochain complex,
induced maps on finitely generated abelian groups, and direct limits
of such groups under an endomorphism.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import sympy


class ContractError(ValueError):
    """A documented precondition of a linear-algebra routine does not hold."""


def _axpy(dst: dict, q: int, src: dict) -> None:
    # dst += q * src, dropping zeros
    for k, v in src.items():
        w = dst.get(k, 0) + q * v
        if w:
            dst[k] = w
        else:
            dst.pop(k, None)


class IntMatrix:
    """Integer matrix stored as one ``{col: value}`` dict per row.

    Entries are Python ints, so no arithmetic ever overflows.  Boundary
    maps of cell complexes are very sparse; all products skip zeros.
    """

    __slots__ = ("rows", "cols", "_r")

    def __init__(self, rows: int, cols: int, entries: Sequence[dict] | None = None):
        self.rows = rows
        self.cols = cols
        if entries is None:
            self._r = [dict() for _ in range(rows)]
        else:
            if len(entries) != rows:
                raise ValueError("row count mismatch")
            self._r = [{j: int(v) for j, v in r.items() if v} for r in entries]

    # construction -------------------------------------------------------
    @classmethod
    def from_rows(cls, data: Iterable[Iterable[int]], cols: int | None = None) -> "IntMatrix":
        data = [list(r) for r in data]
        if cols is None:
            cols = len(data[0]) if data else 0
        for r in data:
            if len(r) != cols:
                raise ValueError("ragged rows")
        return cls(len(data), cols, [{j: v for j, v in enumerate(r) if v} for r in data])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def diagonal(cls, diag: Sequence[int], rows: int | None = None, cols: int | None = None) -> "IntMatrix":
        rows = len(diag) if rows is None else rows
        cols = len(diag) if cols is None else cols
        m = cls(rows, cols)
        for i, d in enumerate(diag):
            if d:
                m._r[i][i] = int(d)
        return m

    # access -------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self._r[i].get(j, 0)

    def row(self, i: int) -> dict:
        return self._r[i]

    def tolist(self) -> list[list[int]]:
        return [[r.get(j, 0) for j in range(self.cols)] for r in self._r]

    def nnz(self) -> int:
        return sum(len(r) for r in self._r)

    def is_zero(self) -> bool:
        return not any(self._r)

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [dict(r) for r in self._r])

    def column(self, j: int) -> list[int]:
        return [r.get(j, 0) for r in self._r]

    def columns_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.cols)]
        for i, r in enumerate(self._r):
            for j, v in r.items():
                out[j][i] = v
        return out

    # algebra ------------------------------------------------------------
    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, self.columns_dicts())

    @property
    def T(self) -> "IntMatrix":
        return self.transpose()

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        orows = other._r
        for r in self._r:
            acc: dict = {}
            for k, v in r.items():
                _axpy(acc, v, orows[k])
            out.append(acc)
        return IntMatrix(self.rows, other.cols, out)

    def apply(self, vec: Sequence[int]) -> list[int]:
        return [sum(v * vec[j] for j, v in r.items()) for r in self._r]

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = [dict(r) for r in self._r]
        for a, b in zip(out, other._r):
            _axpy(a, 1, b)
        return IntMatrix(self.rows, self.cols, out)

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + other.scale(-1)

    def scale(self, q: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [{j: q * v for j, v in r.items()} for r in self._r])

    def __pow__(self, k: int) -> "IntMatrix":
        if self.rows != self.cols or k < 0:
            raise ValueError("power of a non-square matrix or negative exponent")
        result = IntMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self._r == other._r

    def __hash__(self):
        return hash((self.shape, tuple(tuple(sorted(r.items())) for r in self._r)))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "IntMatrix":
        cpos = {c: k for k, c in enumerate(cols)}
        out = []
        for i in rows:
            out.append({cpos[j]: v for j, v in self._r[i].items() if j in cpos})
        return IntMatrix(len(rows), len(cols), out)

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = self.tolist()
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k]:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def rank(self) -> int:
        return smith_normal_form(self, transforms=False).rank

    # text format ----------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"matrix {self.rows} {self.cols}"]
        lines += [" ".join(str(v) for v in row) for row in self.tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "IntMatrix":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines or not lines[0].startswith("matrix"):
            raise ValueError("missing 'matrix <rows> <cols>' header")
        _, r, c = lines[0].split()
        r, c = int(r), int(c)
        body = [[int(t) for t in ln.split()] for ln in lines[1:]]
        if len(body) != r or any(len(b) != c for b in body):
            raise ValueError(f"matrix body does not match declared shape {r}x{c}")
        return cls.from_rows(body, cols=c)

    def __repr__(self) -> str:
        if self.rows * self.cols <= 64:
            return f"IntMatrix({self.tolist()})"
        return f"IntMatrix<{self.rows}x{self.cols}, nnz={self.nnz()}>"


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SmithForm:
    """``U @ A @ V == S`` with U, V unimodular and S in Smith form.

    ``Uinv`` and ``Vinv`` are the exact inverses of ``U`` and ``V``; they
    are produced alongside the transforms so that kernels, cokernels and
    coordinates never need rational arithmetic.
    """

    U: IntMatrix | None
    S: IntMatrix
    V: IntMatrix | None
    Uinv: IntMatrix | None
    Vinv: IntMatrix | None
    diagonal: list[int]

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    def invariant_factors(self) -> list[int]:
        return [d for d in self.diagonal if d != 1]

    def verify(self, A: IntMatrix) -> None:
        """Re-check every SNF property by exact multiplication."""
        if self.U is None:
            raise ContractError("transforms were not computed")
        if self.U @ A @ self.V != self.S:
            raise ContractError("U A V != S")
        if self.U @ self.Uinv != IntMatrix.identity(self.U.rows):
            raise ContractError("U is not unimodular")
        if self.V @ self.Vinv != IntMatrix.identity(self.V.rows):
            raise ContractError("V is not unimodular")
        d = self.diagonal
        for i, x in enumerate(d):
            if x <= 0 or (i and x % d[i - 1]):
                raise ContractError(f"diagonal {d} is not a positive divisibility chain")
        for i, r in enumerate(self.S._r):
            if any(j != i for j in r):
                raise ContractError("S is not diagonal")


class _Elim:
    # Sparse elimination state: A rows, column index, and the four transforms.
    def __init__(self, A: IntMatrix, transforms: bool):
        self.m, self.n = A.rows, A.cols
        self.a = [dict(r) for r in A._r]
        self.colidx: list[set] = [set() for _ in range(self.n)]
        for i, r in enumerate(self.a):
            for j in r:
                self.colidx[j].add(i)
        self.tf = transforms
        if transforms:
            self.U = [{i: 1} for i in range(self.m)]        # rows of U
            self.Uic = [{i: 1} for i in range(self.m)]      # columns of U^-1
            self.Vc = [{i: 1} for i in range(self.n)]       # columns of V
            self.Vir = [{i: 1} for i in range(self.n)]      # rows of V^-1

    def row_add(self, i: int, q: int, j: int) -> None:
        # row_i += q * row_j
        if not q:
            return
        ri, rj = self.a[i], self.a[j]
        for k, v in rj.items():
            w = ri.get(k, 0) + q * v
            if w:
                if k not in ri:
                    self.colidx[k].add(i)
                ri[k] = w
            else:
                del ri[k]
                self.colidx[k].discard(i)
        if self.tf:
            _axpy(self.U[i], q, self.U[j])
            _axpy(self.Uic[j], -q, self.Uic[i])

    def col_add(self, i: int, q: int, j: int) -> None:
        # col_i += q * col_j
        if not q:
            return
        for r in list(self.colidx[j]):
            row = self.a[r]
            w = row.get(i, 0) + q * row[j]
            if w:
                if i not in row:
                    self.colidx[i].add(r)
                row[i] = w
            else:
                del row[i]
                self.colidx[i].discard(r)
        if self.tf:
            _axpy(self.Vc[i], q, self.Vc[j])
            _axpy(self.Vir[j], -q, self.Vir[i])

    def row_neg(self, i: int) -> None:
        self.a[i] = {k: -v for k, v in self.a[i].items()}
        if self.tf:
            self.U[i] = {k: -v for k, v in self.U[i].items()}
            self.Uic[i] = {k: -v for k, v in self.Uic[i].items()}

    def pick_pivot(self, active_rows: set) -> tuple[int, int] | None:
        best, best_key = None, None
        for i in active_rows:
            r = self.a[i]
            if not r:
                continue
            rl = len(r) - 1
            for j, v in r.items():
                key = (abs(v), rl * (len(self.colidx[j]) - 1), i, j)
                if best_key is None or key < best_key:
                    best_key, best = key, (i, j)
                    if key[0] == 1 and key[1] == 0:
                        return best
        return best

    def run(self) -> list[tuple[int, int]]:
        active = {i for i in range(self.m) if self.a[i]}
        pivots = []
        while True:
            pc = self.pick_pivot(active)
            if pc is None:
                break
            r, c = pc
            while True:
                p = self.a[r][c]
                moved = False
                for s in list(self.colidx[c]):
                    if s == r:
                        continue
                    q, rem = divmod(self.a[s][c], p)
                    self.row_add(s, -q, r)
                    if rem:
                        r, moved = s, True
                        break
                if moved:
                    continue
                for j in list(self.a[r]):
                    if j == c:
                        continue
                    q, rem = divmod(self.a[r][j], p)
                    self.col_add(j, -q, c)
                    if rem:
                        c, moved = j, True
                        break
                if not moved:
                    break
            if self.a[r][c] < 0:
                self.row_neg(r)
            pivots.append((r, c))
            active.discard(r)
        return pivots

    def fix_chain(self, pivots: list[tuple[int, int]]) -> None:
        # enforce d_0 | d_1 | ... with 2x2 unimodular moves on pairs of pivots
        k = len(pivots)
        for i in range(k):
            for j in range(i + 1, k):
                (ri, ci), (rj, cj) = pivots[i], pivots[j]
                a, b = self.a[ri][ci], self.a[rj][cj]
                if b % a == 0:
                    continue
                g, x, y = _xgcd(a, b)
                ag, bg = a // g, b // g
                self.a[ri][ci], self.a[rj][cj] = g, a * bg
                if not self.tf:
                    continue
                # rows: L = [[x, y], [-b/g, a/g]]
                Ui, Uj = self.U[ri], self.U[rj]
                ni: dict = {}
                _axpy(ni, x, Ui); _axpy(ni, y, Uj)
                nj: dict = {}
                _axpy(nj, -bg, Ui); _axpy(nj, ag, Uj)
                self.U[ri], self.U[rj] = ni, nj
                Ci, Cj = self.Uic[ri], self.Uic[rj]
                ni, nj = {}, {}
                _axpy(ni, ag, Ci); _axpy(ni, bg, Cj)
                _axpy(nj, -y, Ci); _axpy(nj, x, Cj)
                self.Uic[ri], self.Uic[rj] = ni, nj
                # cols: R = [[1, -y b/g], [1, x a/g]]
                Vi, Vj = self.Vc[ci], self.Vc[cj]
                ni, nj = {}, {}
                _axpy(ni, 1, Vi); _axpy(ni, 1, Vj)
                _axpy(nj, -y * bg, Vi); _axpy(nj, x * ag, Vj)
                self.Vc[ci], self.Vc[cj] = ni, nj
                Ri, Rj = self.Vir[ci], self.Vir[cj]
                ni, nj = {}, {}
                _axpy(ni, x * ag, Ri); _axpy(ni, y * bg, Rj)
                _axpy(nj, -1, Ri); _axpy(nj, 1, Rj)
                self.Vir[ci], self.Vir[cj] = ni, nj


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


_AUDIT: list | None = None


@contextmanager
def snf_audit():
    """Collect ``(shape, rank, invariant factors, verified)`` for every SNF computed inside."""
    global _AUDIT
    prev, _AUDIT = _AUDIT, []
    try:
        yield _AUDIT
    finally:
        _AUDIT = prev


def smith_normal_form(A: IntMatrix, transforms: bool = True, verify: bool = True) -> SmithForm:
    """Smith normal form ``U A V = S`` of an integer matrix.

    Pivoting picks the smallest nonzero entry in absolute value, ties
    broken by Markowitz fill estimate and then position, so the result is
    deterministic.  With ``verify`` (the default) the transforms are always
    computed and the result is re-checked by exact multiplication before
    it is returned; ``transforms=False`` then only drops them from the
    result.  ``verify=False, transforms=False`` computes the diagonal alone.
    """
    snf = _smith(A, transforms or verify)
    if verify:
        snf.verify(A)
        if not transforms:
            snf = SmithForm(None, snf.S, None, None, None, snf.diagonal)
    if _AUDIT is not None:
        _AUDIT.append((A.shape, snf.rank, snf.invariant_factors(), verify))
    return snf


def _smith(A: IntMatrix, transforms: bool) -> SmithForm:
    st = _Elim(A, transforms)
    pivots = st.run()
    pivots.sort(key=lambda rc: (st.a[rc[0]][rc[1]], rc))
    st.fix_chain(pivots)
    diag = [st.a[r][c] for r, c in pivots]
    m, n = A.rows, A.cols
    S = IntMatrix.diagonal(diag, m, n)
    if not transforms:
        return SmithForm(None, S, None, None, None, diag)
    prow = [r for r, _ in pivots]
    prow += [i for i in range(m) if i not in set(prow)]
    pcol = [c for _, c in pivots]
    pcol += [j for j in range(n) if j not in set(pcol)]
    U = IntMatrix(m, m, [st.U[i] for i in prow])
    Uinv = IntMatrix(m, m, [dict() for _ in range(m)])
    for newj, oldj in enumerate(prow):
        for i, v in st.Uic[oldj].items():
            Uinv._r[i][newj] = v
    V = IntMatrix(n, n, [dict() for _ in range(n)])
    for newj, oldj in enumerate(pcol):
        for i, v in st.Vc[oldj].items():
            V._r[i][newj] = v
    Vinv = IntMatrix(n, n, [st.Vir[j] for j in pcol])
    return SmithForm(U, S, V, Uinv, Vinv, diag)


def image_basis(A: IntMatrix) -> IntMatrix:
    """Columns spanning the image lattice ``A Z^n`` (a Z-basis of it)."""
    snf = smith_normal_form(A)
    r = snf.rank
    # A V = U^-1 S, so the first r columns of U^-1 scaled by d_i span the image
    cols = snf.Uinv.columns_dicts()[:r]
    out = IntMatrix(A.rows, r)
    for j, (c, d) in enumerate(zip(cols, snf.diagonal)):
        for i, v in c.items():
            out._r[i][j] = v * d
    return out


def solve_exact(B: IntMatrix, X: IntMatrix) -> IntMatrix:
    """Integer Y with ``B Y = X`` for B of full column rank; raises if none."""
    snf = smith_normal_form(B)
    if snf.rank != B.cols:
        raise ContractError("solve_exact needs a matrix of full column rank")
    # B = Uinv S Vinv  ->  S (Vinv Y) = U X
    UX = snf.U @ X
    Z = IntMatrix(B.cols, X.cols)
    for i, d in enumerate(snf.diagonal):
        for j, v in UX._r[i].items():
            q, rem = divmod(v, d)
            if rem:
                raise ContractError("system has no integer solution")
            Z._r[i][j] = q
    for i in range(B.cols, B.rows):
        if UX._r[i]:
            raise ContractError("system is inconsistent")
    return snf.V @ Z


# ---------------------------------------------------------------------------
# finitely generated abelian groups


@dataclass
class FgAbGroup:
    """``Z^free_rank (+) Z/t_1 (+) ...`` together with a witness basis.

    ``generators`` are cochains (columns of ``gens``) representing the
    normal-form generators, torsion ones first.  ``coords`` maps a cocycle
    to its coordinates in those generators (torsion coordinates are taken
    modulo the corresponding invariant factor).
    """

    free_rank: int
    torsion: list[int]
    gens: IntMatrix | None = None
    coords: IntMatrix | None = None

    def __post_init__(self):
        for i, t in enumerate(self.torsion):
            if t < 2 or (i and t % self.torsion[i - 1]):
                raise ContractError(f"bad invariant factors {self.torsion}")

    @property
    def ngens(self) -> int:
        return len(self.torsion) + self.free_rank

    @property
    def moduli(self) -> list[int]:
        return list(self.torsion) + [0] * self.free_rank

    def coordinates(self, cochain: Sequence[int]) -> list[int]:
        c = self.coords.apply(cochain)
        return [x % m if m else x for x, m in zip(c, self.moduli)]

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        return " (+) ".join(parts) if parts else "0"


def homology_at(d_in: IntMatrix | None, d_out: IntMatrix | None, dim: int) -> FgAbGroup:
    """``ker d_out / im d_in`` on the middle group ``Z^dim``."""
    if d_out is not None and d_out.cols != dim:
        raise ValueError("d_out has the wrong number of columns")
    if d_in is not None and d_in.rows != dim:
        raise ValueError("d_in has the wrong number of rows")
    if d_out is None or d_out.is_zero():
        r_o = 0
        K = IntMatrix.identity(dim)
        P = IntMatrix.identity(dim)        # coordinates of a cocycle in K
    else:
        so = smith_normal_form(d_out)
        r_o = so.rank
        K = so.V.submatrix(range(dim), range(r_o, dim))
        P = so.Vinv.submatrix(range(r_o, dim), range(dim))
    z = dim - r_o
    if d_in is None or d_in.is_zero() or z == 0:
        gens, coords, tors, free = K, P, [], z
        return FgAbGroup(free, tors, gens, coords)
    Y = P @ d_in
    sy = smith_normal_form(Y)
    diag = sy.diagonal
    keep = [i for i, d in enumerate(diag) if d != 1] + list(range(len(diag), z))
    tors = [d for d in diag if d != 1]
    G = K @ sy.Uinv.submatrix(range(z), keep)
    C = sy.U.submatrix(keep, range(z)) @ P
    return FgAbGroup(z - len(diag), tors, G, C)


def cohomology_groups(delta0: IntMatrix, delta1: IntMatrix) -> tuple[FgAbGroup, FgAbGroup, FgAbGroup]:
    """Cohomology of ``C0 --delta0--> C1 --delta1--> C2``."""
    if delta0.rows != delta1.cols:
        raise ValueError("coboundary shapes do not compose")
    if not (delta1 @ delta0).is_zero():
        raise ContractError("delta1 @ delta0 != 0")
    H0 = homology_at(None, delta0, delta0.cols)
    H1 = homology_at(delta0, delta1, delta0.rows)
    H2 = homology_at(delta1, None, delta1.rows)
    return H0, H1, H2


def induced_endomorphism(M: IntMatrix, H: FgAbGroup,
                         d_in: IntMatrix | None = None,
                         d_out: IntMatrix | None = None) -> IntMatrix:
    """Matrix of the map induced by the cochain map M on H's generators.

    Column j holds the coordinates of ``M g_j``.  When the neighbouring
    coboundaries are supplied, M is checked to send cocycles to cocycles
    and coboundaries to coboundaries.
    """
    if H.gens is None:
        raise ContractError("group carries no basis witnesses")
    MG = M @ H.gens
    if d_out is not None and not (d_out @ MG).is_zero():
        raise ContractError("cochain map does not preserve cocycles")
    if d_in is not None:
        MB = M @ d_in
        for j in range(MB.cols):
            col = MB.column(j)
            if any(H.coordinates(col)):
                raise ContractError("cochain map does not preserve coboundaries")
    F = IntMatrix(H.ngens, H.ngens)
    for j in range(H.ngens):
        for i, c in enumerate(H.coordinates(MG.column(j))):
            if c:
                F._r[i][j] = c
    return F


def compose_on_group(F: IntMatrix, G: IntMatrix, H: FgAbGroup) -> IntMatrix:
    """``F @ G`` reduced modulo the torsion moduli of H."""
    P = F @ G
    out = IntMatrix(P.rows, P.cols)
    for i, (r, m) in enumerate(zip(P._r, H.moduli)):
        out._r[i] = {j: (v % m if m else v) for j, v in r.items() if (v % m if m else v)}
    return out


# ---------------------------------------------------------------------------
# direct limits


def _radical(m: int) -> int:
    return math.prod(sympy.primefactors(m)) if m > 1 else 1


@dataclass
class LimitGroup:
    """Direct limit of a f.g. abelian group under an endomorphism.

    When ``resolved`` the group is ``(+)_i Z[1/m_i]^{mult_i} (+) Z^free_rank
    (+) torsion``; ``localized`` keeps the raw growth factors exactly as
    detected (so Z[1/4] is reported as such).  When not resolved the
    presentation (generator matrix of the map and moduli) is kept in
    ``presentation`` and no decomposition is claimed.
    """

    localized: list[tuple[int, int]] = field(default_factory=list)
    free_rank: int = 0
    torsion: list[int] = field(default_factory=list)
    resolved: bool = True
    presentation: dict | None = None
    note: str = ""

    def canonical(self) -> tuple[tuple[tuple[int, int], ...], int, tuple[int, ...]]:
        if not self.resolved:
            raise ContractError("unresolved limit has no canonical form")
        merged: dict[int, int] = {}
        free = self.free_rank
        for m, k in self.localized:
            r = _radical(m)
            if r == 1:
                free += k
            else:
                merged[r] = merged.get(r, 0) + k
        return tuple(sorted(merged.items(), reverse=True)), free, tuple(self.torsion)

    def __str__(self) -> str:
        if not self.resolved:
            return "unresolved: " + (self.note or "no decomposition found")
        parts = []
        for m, k in sorted(self.localized, key=lambda mk: -mk[0]):
            parts.append(f"Z[1/{m}]" + (f"^{k}" if k > 1 else ""))
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        return " (+) ".join(parts) if parts else "0"

    @classmethod
    def parse(cls, text: str) -> "LimitGroup":
        """Inverse of ``str`` for resolved groups, e.g. ``Z[1/2]^2 (+) Z``."""
        text = text.strip()
        if text == "0":
            return cls()
        loc: dict[int, int] = {}
        free, tors = 0, []
        for part in text.split("(+)"):
            part = part.strip()
            base, _, exp = part.partition("^")
            k = int(exp) if exp else 1
            if base.startswith("Z[1/"):
                m = int(base[4:-1])
                loc[m] = loc.get(m, 0) + k
            elif base == "Z":
                free += k
            elif base.startswith("Z/"):
                tors += [int(base[2:])] * k
            else:
                raise ValueError(f"cannot parse group summand {part!r}")
        return cls(sorted(loc.items(), reverse=True), free, _invariant_factors(tors))


def _invariant_factors(orders: Sequence[int]) -> list[int]:
    """Invariant factors of a direct sum of cyclic groups of given orders."""
    orders = [o for o in orders if o != 1]
    if not orders:
        return []
    return [d for d in smith_normal_form(IntMatrix.diagonal(orders), transforms=False).diagonal if d != 1]


def _subgroup_type(gens: IntMatrix, moduli: Sequence[int]) -> list[int]:
    # invariant factors of the subgroup of (+) Z/m_i generated by the columns of gens
    n = len(moduli)
    lat = IntMatrix(n, gens.cols + n)
    for i in range(n):
        lat._r[i] = dict(gens._r[i])
        lat._r[i][gens.cols + i] = moduli[i]
    B = image_basis(lat)                      # basis of span + mZ^n, full rank
    Minv_t = solve_exact(B, IntMatrix.diagonal(moduli))
    return [d for d in smith_normal_form(Minv_t, transforms=False).diagonal if d != 1]


def _torsion_limit(F: IntMatrix, H: FgAbGroup) -> list[int]:
    nt = len(H.torsion)
    if nt == 0:
        return []
    FT = F.submatrix(range(nt), range(nt))
    for i in range(nt, F.rows):
        for j in range(nt):
            if F[i, j]:
                raise ContractError("endomorphism sends torsion to a free coordinate")
    mods = H.torsion
    cur = IntMatrix.identity(nt)
    prev = None
    # the image chain of a finite group stabilises after at most log2|T| strict drops
    for _ in range(4 * sum(t.bit_length() for t in mods) + 4):
        typ = _subgroup_type(cur, mods)
        if typ == prev:
            return typ
        prev = typ
        cur = FT @ cur
        cur = IntMatrix(nt, cur.cols, [{j: v % m for j, v in r.items() if v % m} for r, m in zip(cur._r, mods)])
    raise ContractError("torsion image chain did not stabilise")


def _growth_pattern(A: IntMatrix, max_power: int = 12, confirm: int = 3) -> list[int] | None:
    # per-index ratios d_i(A^{k+1}) / d_i(A^k), required constant over `confirm` steps
    n = A.rows
    seq = []
    P = IntMatrix.identity(n)
    for _ in range(max_power + 1):
        seq.append(smith_normal_form(P, transforms=False).diagonal)
        P = P @ A
    for start in range(1, max_power - confirm + 1):
        ratios = None
        ok = True
        for k in range(start, start + confirm + 1):
            a, b = seq[k], seq[k + 1]
            if len(a) != n or len(b) != n or any(y % x for x, y in zip(a, b)):
                ok = False
                break
            r = [y // x for x, y in zip(a, b)]
            if ratios is None:
                ratios = r
            elif r != ratios:
                ok = False
                break
        if ok:
            return ratios
    return None


def _charpoly_split(A: IntMatrix) -> tuple[dict[int, int], int] | None:
    """Decompose the limit of an injective A via its characteristic polynomial.

    Returns ({prime: rank of the Z[1/p] part}, unit rank) when every
    irreducible factor is either a unit factor (constant term +-1) or is
    congruent to a monomial modulo the one prime dividing its constant term
    and at most one prime occurs overall; None otherwise.
    """
    x = sympy.Symbol("x")
    M = sympy.Matrix(A.tolist())
    chi = sympy.Poly(M.charpoly(x).as_expr(), x)
    _, factors = sympy.factor_list(chi.as_expr(), x)
    primes: dict[int, int] = {}
    unit = 0
    for f, mult in factors:
        fp = sympy.Poly(f, x)
        deg = fp.degree()
        c0 = int(fp.eval(0))
        if abs(c0) == 1:
            unit += deg * mult
            continue
        ps = sympy.primefactors(abs(c0))
        if len(ps) != 1:
            return None
        p = ps[0]
        coeffs = [int(c) for c in fp.all_coeffs()]   # leading first
        if any(c % p for c in coeffs[1:]):
            return None
        primes[p] = primes.get(p, 0) + deg * mult
    if len(primes) > 1:
        return None
    return primes, unit


def direct_limit(G: FgAbGroup, F: IntMatrix, max_power: int = 12) -> LimitGroup:
    """``lim (G, F)`` for a f.g. abelian group G with endomorphism matrix F.

    Torsion: the eventual image of F on the torsion subgroup.  Free part:
    F is restricted to the eventual image lattice ``A^k Z^r`` of the induced
    map A on G/torsion, where it is injective; the Smith invariants of
    its powers give the growth factors c_i, which are confirmed on further
    powers and cross-checked against the characteristic polynomial.  The
    torsion/free extension always splits for a finite torsion subgroup
    because Ext(lim Z^r, T) = lim^1 Hom(Z^r, T) vanishes.
    """
    if F.rows != G.ngens or F.cols != G.ngens:
        raise ValueError("endomorphism does not match the group")
    torsion = _torsion_limit(F, G)
    nt = len(G.torsion)
    r = G.free_rank
    if r == 0:
        return LimitGroup([], 0, torsion)
    A = F.submatrix(range(nt, nt + r), range(nt, nt + r))
    # eventual image
    k, P = 0, IntMatrix.identity(r)
    rk = r
    while True:
        nxt = P @ A
        nrk = nxt.rank()
        if nrk == rk:
            break
        k, P, rk = k + 1, nxt, nrk
    if rk == 0:
        return LimitGroup([], 0, torsion)
    B = image_basis(P)
    AL = solve_exact(B, A @ B)
    presentation = {"free_map": AL.tolist(), "torsion": torsion, "eventual_power": k}
    pattern = _growth_pattern(AL, max_power=max_power)
    split = _charpoly_split(AL)
    if pattern is None or split is None:
        return LimitGroup([], 0, torsion, resolved=False, presentation=presentation,
                          note="no stable growth pattern" if pattern is None else
                          "characteristic polynomial outside the single-prime split case")
    loc: dict[int, int] = {}
    free = 0
    for c in pattern:
        if c == 1:
            free += 1
        else:
            loc[c] = loc.get(c, 0) + 1
    result = LimitGroup(sorted(loc.items(), reverse=True), free, torsion,
                        presentation=presentation)
    primes, unit = split
    canon_loc, canon_free, _ = result.canonical()
    if canon_free != unit or dict(canon_loc) != primes:
        return LimitGroup([], 0, torsion, resolved=False, presentation=presentation,
                          note="growth pattern disagrees with characteristic polynomial")
    return result


def verify_group_isomorphism(a: LimitGroup, b: LimitGroup) -> bool:
    """True iff two resolved limits are isomorphic as abstract groups.

    Z[1/m] and Z[1/rad(m)] are the same subgroup of Q, so localisations
    are compared by the radical of their denominators.
    """
    if not (a.resolved and b.resolved):
        raise ContractError("cannot compare unresolved limit groups")
    return a.canonical() == b.canonical()


def limit_from_fg(G: FgAbGroup) -> LimitGroup:
    return LimitGroup([], G.free_rank, list(G.torsion))
