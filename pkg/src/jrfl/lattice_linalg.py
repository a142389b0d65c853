"""Linear algebra over O'_v: matrices, wedge powers, normal forms and lattices.

Matrices hold :class:`~jrfl.local_fields.LaurentScalar` or
:class:`~jrfl.local_fields.SplitPair` entries.  Lattice routines work over a
single residue field; split places pass components separately.

Lattices are stored in column Hermite normal form: upper triangular, the
diagonal is ``pi**d_i`` and the entry in row ``i`` of a later column is a
Laurent polynomial with every exponent below ``d_i``.  This form is unique
for the coset ``g GL_n(O)``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from itertools import combinations, product

from .errors import PrecisionExhausted, RankDeficient, SingularMatrix
from .local_fields import LaurentScalar, SplitPair

__all__ = [
    "SeriesMatrix",
    "LatticeRep",
    "smith_normal_form",
    "smith_exponents",
    "hermite_lattice",
    "wedge_matrix",
    "dual_lattice",
    "lattice_sum",
    "lattice_intersection",
    "is_selfdual_hermitian",
    "enumerate_lattices",
    "LatticeFilter",
    "standard_lattice",
]


# ---------------------------------------------------------------------------
# matrices


class SeriesMatrix:
    """A dense matrix of local-field scalars (immutable by convention)."""

    __slots__ = ("rows", "nrows", "ncols", "zero")

    def __init__(self, rows, zero=None):
        rows = tuple(tuple(r) for r in rows)
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        if any(len(r) != self.ncols for r in rows):
            raise ValueError("ragged matrix")
        if zero is None:
            if not rows or not rows[0]:
                raise ValueError("an empty matrix needs an explicit zero")
            zero = rows[0][0] * 0
        self.zero = zero

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n, one):
        zero = one * 0
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], zero)

    @classmethod
    def zeros(cls, nrows, ncols, zero):
        return cls([[zero] * ncols for _ in range(nrows)], zero)

    @classmethod
    def diagonal(cls, entries, zero=None):
        zero = entries[0] * 0 if zero is None else zero
        n = len(entries)
        return cls([[entries[i] if i == j else zero for j in range(n)] for i in range(n)], zero)

    @classmethod
    def from_columns(cls, columns, zero=None):
        nrows = len(columns[0])
        return cls([[col[i] for col in columns] for i in range(nrows)], zero)

    @classmethod
    def column_vector(cls, entries, zero=None):
        return cls([[x] for x in entries], zero)

    @classmethod
    def row_vector(cls, entries, zero=None):
        return cls([list(entries)], zero)

    # -- access ------------------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def column(self, j):
        return [r[j] for r in self.rows]

    def columns(self):
        return [self.column(j) for j in range(self.ncols)]

    def row(self, i):
        return list(self.rows[i])

    def entries(self):
        for r in self.rows:
            yield from r

    def one(self):
        return self.zero + 1

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        return SeriesMatrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)], self.zero)

    def __sub__(self, other):
        return SeriesMatrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)], self.zero)

    def __neg__(self):
        return SeriesMatrix([[-a for a in r] for r in self.rows], self.zero)

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.columns()
        zero = self.zero
        out = []
        for r in self.rows:
            new_row = []
            for c in cols:
                acc = zero
                for a, b in zip(r, c):
                    if a.is_exact_zero() or b.is_exact_zero():
                        continue
                    acc = acc + a * b
                new_row.append(acc)
            out.append(new_row)
        return SeriesMatrix(out, zero)

    def scale(self, c):
        return SeriesMatrix([[c * a for a in r] for r in self.rows], self.zero)

    def map(self, fn):
        return SeriesMatrix([[fn(a) for a in r] for r in self.rows], fn(self.zero))

    def transpose(self):
        return SeriesMatrix([list(col) for col in zip(*self.rows)], self.zero) if self.rows else self

    def conj(self):
        return self.map(lambda a: a.conj())

    def conj_transpose(self):
        return self.conj().transpose()

    def shift(self, k):
        return self.map(lambda a: a.shift(k))

    def truncate(self, prec):
        return self.map(lambda a: a.truncate(prec))

    def trace(self):
        acc = self.zero
        for i in range(min(self.nrows, self.ncols)):
            acc = acc + self.rows[i][i]
        return acc

    def submatrix(self, row_idx, col_idx):
        return SeriesMatrix([[self.rows[i][j] for j in col_idx] for i in row_idx], self.zero)

    def hstack(self, other):
        return SeriesMatrix([list(a) + list(b) for a, b in zip(self.rows, other.rows)], self.zero)

    def vstack(self, other):
        return SeriesMatrix(list(self.rows) + list(other.rows), self.zero)

    def power(self, k):
        result = SeriesMatrix.identity(self.nrows, self.one())
        for _ in range(k):
            result = result @ self
        return result

    def det(self):
        """Determinant by dynamic programming over column subsets."""
        n = self.nrows
        if n != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        if n == 0:
            return self.one()
        return _minor_table(self.rows, list(range(n)), n)[(1 << n) - 1]

    def adjugate(self):
        n = self.nrows
        if n == 1:
            return SeriesMatrix([[self.one()]], self.zero)
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                rows = [r for r in range(n) if r != j]
                cols = [c for c in range(n) if c != i]
                minor = self.submatrix(rows, cols).det()
                out[i][j] = minor if (i + j) % 2 == 0 else -minor
        return SeriesMatrix(out, self.zero)

    def inverse(self, prec=None):
        """Inverse via the adjugate; ``prec`` bounds non-exact quotients."""
        d = self.det()
        if d.is_exact_zero():
            raise SingularMatrix("matrix is singular")
        if isinstance(d, SplitPair):
            inv = d.inverse(prec) if not (d.left.is_monomial() and d.right.is_monomial() and d.exact) else d.inverse()
        elif d.exact and d.is_monomial():
            inv = d.inverse()
        else:
            inv = d.inverse(prec)
        return self.adjugate().scale(inv)

    def min_valuation(self):
        best = None
        for a in self.entries():
            if a.is_zero_to_precision():
                continue
            v = a.valuation()
            if best is None or v < best:
                best = v
        return best

    def is_integral(self):
        """All entries lie in O'_v (decided from stored coefficients)."""
        for a in self.entries():
            if isinstance(a, SplitPair):
                parts = (a.left, a.right)
            else:
                parts = (a,)
            for s in parts:
                if s.coeffs and s.val < 0:
                    return False
                if not s.coeffs and s.prec is not None and s.prec < 0:
                    raise PrecisionExhausted("integrality undecidable below precision 0")
        return True

    def is_exact(self):
        return all(a.exact for a in self.entries())

    def components(self):
        """(left, right) matrices of a split-place matrix."""
        left = SeriesMatrix([[a.left for a in r] for r in self.rows], self.zero.left)
        right = SeriesMatrix([[a.right for a in r] for r in self.rows], self.zero.right)
        return left, right

    @classmethod
    def from_components(cls, left, right):
        return cls(
            [[SplitPair(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(left.rows, right.rows)],
            SplitPair(left.zero, right.zero),
        )

    def is_zero_to_precision(self):
        return all(a.is_zero_to_precision() for a in self.entries())

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return all(a == b for a, b in zip(self.entries(), other.entries()))

    def __ne__(self, other):
        res = self.__eq__(other)
        return res if res is NotImplemented else not res

    __hash__ = None

    def __repr__(self):
        from .local_fields import format_scalar

        body = "; ".join(", ".join(format_scalar(a) for a in r) for r in self.rows)
        return f"SeriesMatrix[{body}]"


def _minor_table(rows, row_idx, size):
    """Determinants of ``rows[row_idx[:k]]`` against every k-subset of columns.

    Returns a dict keyed by column bitmask for subsets of size ``size``
    (intermediate sizes are discarded).
    """
    ncols = len(rows[0])
    one = rows[0][0] * 0 + 1
    layer = {0: one}
    for k in range(size):
        r = rows[row_idx[k]]
        nxt = {}
        for mask, val in layer.items():
            if val.is_exact_zero():
                continue
            # expand along row k: columns above the highest set bit keep sign bookkeeping simple
            for c in range(ncols):
                bit = 1 << c
                if mask & bit:
                    continue
                entry = r[c]
                if entry.is_exact_zero():
                    continue
                # sign = (-1)^(number of chosen columns greater than c)
                above = bin(mask >> (c + 1)).count("1")
                term = entry * val
                if above % 2:
                    term = -term
                key = mask | bit
                prev = nxt.get(key)
                nxt[key] = term if prev is None else prev + term
        layer = nxt
    zero = one * 0
    out = {}
    for cols in combinations(range(ncols), size):
        mask = 0
        for c in cols:
            mask |= 1 << c
        out[mask] = layer.get(mask, zero)
    return out


def wedge_matrix(M, i):
    """Matrix of the i-th exterior power in the lexicographic basis e_S."""
    n = M.nrows
    if M.ncols != n:
        raise ValueError("wedge of a non-square matrix")
    if not 0 <= i <= n:
        raise ValueError("wedge degree out of range")
    subsets = list(combinations(range(n), i))
    if i == 0:
        return SeriesMatrix([[M.one()]], M.zero)
    masks = []
    for T in subsets:
        mask = 0
        for c in T:
            mask |= 1 << c
        masks.append(mask)
    out = []
    for S in subsets:
        table = _minor_table(M.rows, list(S), i)
        out.append([table[m] for m in masks])
    return SeriesMatrix(out, M.zero)


# ---------------------------------------------------------------------------
# Smith normal form


def _pick_pivot(A, k, n):
    best = None
    undecided = None
    for i in range(k, n):
        for j in range(k, n):
            a = A[i][j]
            if a.coeffs:
                if best is None or a.val < best[0]:
                    best = (a.val, i, j)
            elif a.prec is not None:
                undecided = a.prec if undecided is None else min(undecided, a.prec)
    if best is None:
        if undecided is not None:
            raise PrecisionExhausted("remaining block is zero to precision")
        raise SingularMatrix("matrix is singular")
    if undecided is not None and undecided <= best[0]:
        raise PrecisionExhausted("pivot valuation not determined by the available precision")
    return best


def smith_exponents(M):
    """Elementary-divisor exponents of a square matrix, descending.

    Uses unimodular row and column operations that only multiply by unit
    polynomials, so exact inputs give exact exponents.
    """
    n = M.nrows
    if n != M.ncols:
        raise ValueError("Smith form of a non-square matrix")
    A = [list(r) for r in M.rows]
    out = []
    for k in range(n):
        d, pi_, pj = _pick_pivot(A, k, n)
        A[k], A[pi_] = A[pi_], A[k]
        for r in A:
            r[k], r[pj] = r[pj], r[k]
        piv = A[k][k]
        unit = piv.shift(-d)
        for i in range(k + 1, n):
            a = A[i][k]
            if a.is_zero_to_precision():
                continue
            f = a.shift(-d)
            A[i] = [unit * x - f * y for x, y in zip(A[i], A[k])]
        for j in range(k + 1, n):
            a = A[k][j]
            if a.is_zero_to_precision():
                continue
            f = a.shift(-d)
            for i in range(n):
                A[i][j] = unit * A[i][j] - f * A[i][k]
        out.append(d)
    return tuple(sorted(out, reverse=True))


def smith_normal_form(M, prec=None):
    """Return ``(exponents, U, V)`` with ``U @ M @ V = diag(pi**e)`` descending.

    ``U`` and ``V`` are unimodular; they are exact when every pivot unit is
    a monomial and otherwise correct modulo ``pi**prec`` relative to the
    diagonal (default: enough digits to see every exponent).
    """
    exps = smith_exponents(M)
    n = M.nrows
    if prec is None:
        low = M.min_valuation() or 0
        prec = max(exps) - min(0, low) + 2 * n + 4
    one = M.one()
    zero = M.zero
    A = [list(r) for r in M.rows]
    U = [[one if i == j else zero for j in range(n)] for i in range(n)]
    V = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for k in range(n):
        d, pi_, pj = _pick_pivot(A, k, n)
        A[k], A[pi_] = A[pi_], A[k]
        U[k], U[pi_] = U[pi_], U[k]
        for r in A:
            r[k], r[pj] = r[pj], r[k]
        for r in V:
            r[k], r[pj] = r[pj], r[k]
        unit = A[k][k].shift(-d)
        uinv = unit.inverse(prec) if not (unit.exact and unit.is_monomial()) else unit.inverse()
        A[k] = [uinv * x for x in A[k]]
        U[k] = [uinv * x for x in U[k]]
        for i in range(k + 1, n):
            a = A[i][k]
            if a.is_zero_to_precision():
                continue
            f = a.shift(-d)
            A[i] = [x - f * y for x, y in zip(A[i], A[k])]
            U[i] = [x - f * y for x, y in zip(U[i], U[k])]
        for j in range(k + 1, n):
            a = A[k][j]
            if a.is_zero_to_precision():
                continue
            f = a.shift(-d)
            for i in range(n):
                A[i][j] = A[i][j] - f * A[i][k]
                V[i][j] = V[i][j] - f * V[i][k]
    # pivots were taken in ascending order; reverse to descending
    order = list(range(n - 1, -1, -1))
    Um = SeriesMatrix([U[i] for i in order], zero)
    Vm = SeriesMatrix([[V[r][j] for j in order] for r in range(n)], zero)
    return exps, Um, Vm


# ---------------------------------------------------------------------------
# lattices


class LatticeRep:
    """A full-rank lattice given by its column Hermite normal form."""

    __slots__ = ("basis", "diag", "key", "_inverse", "_cartan")

    def __init__(self, basis, diag):
        self.basis = basis
        self.diag = tuple(diag)
        n = len(self.diag)
        self.key = (self.diag,) + tuple(
            (basis.rows[i][j].val, basis.rows[i][j].coeffs) for j in range(n) for i in range(j)
        )
        self._inverse = None
        self._cartan = None

    @property
    def rank(self):
        return len(self.diag)

    @property
    def field(self):
        return self.basis.zero.field

    def inverse_basis(self):
        """Exact inverse of the triangular basis."""
        if self._inverse is None:
            self._inverse = _triangular_inverse(self.basis, self.diag)
        return self._inverse

    @property
    def cartan(self):
        if self._cartan is None:
            self._cartan = smith_exponents(self.basis)
        return self._cartan

    def det_valuation(self):
        return sum(self.diag)

    def contains_vector(self, v):
        """``v`` (a list of scalars) lies in the lattice."""
        inv = self.inverse_basis()
        for row in inv.rows:
            acc = None
            for a, b in zip(row, v):
                if a.is_exact_zero() or b.is_exact_zero():
                    continue
                t = a * b
                acc = t if acc is None else acc + t
            if acc is not None and acc.coeffs and acc.val < 0:
                return False
            if acc is not None and not acc.coeffs and acc.prec is not None and acc.prec < 0:
                raise PrecisionExhausted("membership undecidable at this precision")
        return True

    def contains(self, other):
        """``other`` is a sublattice of this lattice."""
        return all(self.contains_vector(c) for c in other.basis.columns())

    def dual_contains_covector(self, w):
        """The row vector ``w`` pairs integrally with the lattice."""
        for col in self.basis.columns():
            acc = None
            for a, b in zip(w, col):
                if a.is_exact_zero() or b.is_exact_zero():
                    continue
                t = a * b
                acc = t if acc is None else acc + t
            if acc is not None and acc.coeffs and acc.val < 0:
                return False
            if acc is not None and not acc.coeffs and acc.prec is not None and acc.prec < 0:
                raise PrecisionExhausted("pairing undecidable at this precision")
        return True

    def is_stable_under(self, M):
        """``M @ Lambda`` is contained in ``Lambda``."""
        return (self.inverse_basis() @ M @ self.basis).is_integral()

    def scaled(self, k):
        """The lattice ``pi**k * Lambda``."""
        return LatticeRep(self.basis.shift(k), [d + k for d in self.diag])

    def __eq__(self, other):
        if not isinstance(other, LatticeRep):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"LatticeRep(diag={self.diag}, basis={self.basis!r})"


def standard_lattice(n, field):
    one = LaurentScalar.from_int(field, 1)
    return LatticeRep(SeriesMatrix.identity(n, one), [0] * n)


def _triangular_inverse(B, diag):
    """Inverse of an upper-triangular matrix with monomial diagonal (exact)."""
    n = len(diag)
    zero = B.zero
    inv_diag = [B.rows[i][i].inverse() for i in range(n)]
    X = [[zero] * n for _ in range(n)]
    for j in range(n):
        X[j][j] = inv_diag[j]
        for i in range(j - 1, -1, -1):
            acc = zero
            for k in range(i + 1, j + 1):
                a = B.rows[i][k]
                b = X[k][j]
                if a.is_exact_zero() or b.is_exact_zero():
                    continue
                acc = acc + a * b
            X[i][j] = -(acc * inv_diag[i]) if not acc.is_exact_zero() else zero
    return SeriesMatrix(X, zero)


def _low_part(x, d):
    """Terms of ``x`` with exponent below ``d`` and the quotient by ``pi**d``."""
    if x.prec is not None and x.prec < d:
        raise PrecisionExhausted(f"entry known only to pi^{x.prec}, need pi^{d}")
    coeffs = x.coeffs
    if not coeffs:
        zero = LaurentScalar.zero(x.field)
        return zero, LaurentScalar.zero(x.field, None if x.prec is None else x.prec - d)
    cut = d - x.val
    if cut <= 0:
        return LaurentScalar.zero(x.field), x.shift(-d)
    low = LaurentScalar._build(x.field, list(coeffs[:cut]), x.val, None)
    high = LaurentScalar._build(x.field, list(coeffs[cut:]), 0, None if x.prec is None else x.prec - d)
    return low, high


def _reduce_triangular(cols, diag):
    """Reduce an upper-triangular column list with monomial diagonal to HNF (in place)."""
    n = len(diag)
    for j in range(n):
        col = cols[j]
        for i in range(j - 1, -1, -1):
            x = col[i]
            if x.is_zero_to_precision() and x.prec is None:
                continue
            low, high = _low_part(x, diag[i])
            if high.is_zero_to_precision():
                col[i] = low
                continue
            piv = cols[i]
            for k in range(i):
                b = piv[k]
                if not b.is_exact_zero():
                    col[k] = col[k] - high * b
            col[i] = low
    return cols


def _finish_hnf(cols, diag, zero):
    n = len(diag)
    rows = [[cols[j][i] for j in range(n)] for i in range(n)]
    return LatticeRep(SeriesMatrix(rows, zero), diag)


def hermite_lattice(generators, prec=None):
    """Column Hermite normal form of the lattice spanned by the columns of ``generators``."""
    n = generators.nrows
    zero = generators.zero
    if isinstance(zero, SplitPair):
        raise TypeError("lattices at a split place are handled componentwise")
    field = zero.field
    cols = [list(c) for c in generators.columns()]
    active = list(range(len(cols)))
    pivot_of = [None] * n
    for r in range(n - 1, -1, -1):
        best = None
        undecided = False
        for c in active:
            a = cols[c][r]
            if a.coeffs:
                if best is None or a.val < cols[best][r].val:
                    best = c
            elif a.prec is not None:
                undecided = True
        if best is None:
            if undecided:
                raise PrecisionExhausted("pivot row is zero to precision")
            raise RankDeficient("generators do not span a full-rank lattice")
        piv = cols[best][r]
        d = piv.val
        unit = piv.shift(-d)
        unit_is_one = unit.exact and unit.coeffs == (1,)
        for c in active:
            if c == best:
                continue
            a = cols[c][r]
            if a.is_zero_to_precision():
                cols[c][r] = LaurentScalar.zero(field)
                continue
            f = a.shift(-d)
            old = cols[c]
            base = cols[best]
            if unit_is_one:
                new = [x - f * y for x, y in zip(old[: r + 1], base[: r + 1])]
            else:
                new = [unit * x - f * y for x, y in zip(old[: r + 1], base[: r + 1])]
            new[r] = LaurentScalar.zero(field)
            cols[c] = new + old[r + 1:]
        active.remove(best)
        pivot_of[r] = best
    for c in active:
        for a in cols[c]:
            if a.coeffs:
                raise PrecisionExhausted("leftover generator did not reduce to zero")
    tri = [cols[pivot_of[j]] for j in range(n)]
    diag = [tri[j][j].val for j in range(n)]
    units = [tri[j][j].shift(-diag[j]) for j in range(n)]
    if all(u.exact and u.is_monomial() for u in units):
        out = []
        for j in range(n):
            inv = units[j].inverse()
            out.append([x * inv for x in tri[j][: j + 1]] + [LaurentScalar.zero(field)] * (n - j - 1))
        for j in range(n):
            out[j][j] = LaurentScalar.monomial(field, 1, diag[j])
        _reduce_triangular(out, diag)
        return _finish_hnf(out, diag, LaurentScalar.zero(field))
    spread = max(diag) - min(diag)
    lowest = min((x.val for col in tri for x in col if x.coeffs), default=0)
    work = prec if prec is not None else max(diag) - min(lowest, 0) + spread + n + 4
    for _ in range(6):
        try:
            out = []
            for j in range(n):
                inv = units[j].inverse(work) if not (units[j].exact and units[j].is_monomial()) else units[j].inverse()
                col = [(x * inv).truncate(work + max(diag)) for x in tri[j][:j]]
                col.append(LaurentScalar.monomial(field, 1, diag[j]))
                col.extend([LaurentScalar.zero(field)] * (n - j - 1))
                out.append(col)
            _reduce_triangular(out, diag)
            for j in range(n):
                for i in range(j):
                    if out[j][i].prec is not None:
                        out[j][i] = out[j][i].truncate(diag[i])
                        out[j][i] = LaurentScalar._build(field, list(out[j][i].coeffs), out[j][i].val, None)
            return _finish_hnf(out, diag, LaurentScalar.zero(field))
        except PrecisionExhausted:
            work *= 2
    raise PrecisionExhausted("Hermite normal form did not stabilize")


def dual_lattice(lattice):
    """The dual lattice, identified with column vectors via the transpose."""
    inv = lattice.inverse_basis()
    return hermite_lattice(inv.transpose())


def lattice_sum(a, b):
    return hermite_lattice(a.basis.hstack(b.basis))


def lattice_intersection(a, b):
    return dual_lattice(lattice_sum(dual_lattice(a), dual_lattice(b)))


def conjugate_lattice(lattice):
    """Coefficientwise Frobenius of the lattice (HNF is preserved)."""
    return LatticeRep(lattice.basis.conj(), lattice.diag)


def is_selfdual_hermitian(lattice, h, h_scale=None):
    """Self-duality of ``lattice`` for the form ``(x, y) = conj(x)^T h^{-1} y``.

    Equivalent to ``Lambda = h * conj(Lambda)^vee``.  ``h`` may be passed as
    an exact numerator with scalar denominator ``h_scale``; the test is then
    ``h_num conj(B)^{-T} Lambda_0 = h_scale * Lambda``.
    """
    B = lattice.basis
    inv_conj_t = lattice.inverse_basis().conj().transpose()
    if h.is_exact():
        lhs = hermite_lattice(h @ inv_conj_t)
        rhs = lattice if h_scale is None else hermite_lattice(B.scale(h_scale))
        return lhs == rhs
    hinv = h.inverse(h.min_valuation() + 2 * max(abs(d) for d in lattice.diag) + 2 * lattice.rank + 8)
    if h_scale is not None:
        hinv = hinv.scale(h_scale)
    gram = B.conj_transpose() @ hinv @ B
    if not gram.is_integral():
        return False
    d = gram.det()
    return d.coeffs != () and d.val == 0


# ---------------------------------------------------------------------------
# bounded enumeration


class LatticeFilter:
    """Predicate hooks for :func:`enumerate_lattices`.

    ``partial(columns, j)`` sees a basis (in standard coordinates) of the
    part of a candidate lattice in the span of the first ``j + 1`` standard
    vectors and must return ``False`` only when no completion can pass.
    ``accept(lattice)`` is the exact test on a finished lattice.
    """

    def partial(self, columns, j):
        return True

    def accept(self, lattice):
        return True


def _as_lattice_bound(n, field, bound, lower, upper):
    one = LaurentScalar.from_int(field, 1)
    low = LatticeRep(SeriesMatrix.identity(n, one).shift(bound), [bound] * n)
    up = LatticeRep(SeriesMatrix.identity(n, one).shift(-bound), [-bound] * n)
    if lower is not None:
        low = lattice_sum(low, lower)
    if upper is not None:
        up = lattice_intersection(up, upper)
    return low, up


def _times_upper(BU, Ycols, n, field):
    """Columns of ``B_U @ Y`` for upper-triangular data."""
    out = []
    for col in Ycols:
        new = []
        for i in range(n):
            acc = LaurentScalar.zero(field)
            row = BU.rows[i]
            for k in range(i, n):
                a = row[k]
                b = col[k]
                if a.is_exact_zero() or b.is_exact_zero():
                    continue
                acc = acc + a * b
            new.append(acc)
        out.append(new)
    return out


def _digit_choices(field, r_i, s, d_i):
    """All ``x`` in O/pi^d_i with ``r_i - pi^s x = 0 mod pi^d_i``; yields exact x."""
    # exponents below min(s, d_i) of r_i must already vanish
    size = field.size
    fixed = {}
    for e in range(min(s, d_i)):
        if r_i.coefficient(e):
            return
    for e in range(s, d_i):
        fixed[e - s] = r_i.coefficient(e)
    free_positions = [k for k in range(d_i) if k not in fixed]
    for digits in product(range(size), repeat=len(free_positions)):
        coeffs = [0] * d_i
        for k, c in fixed.items():
            coeffs[k] = c
        for k, c in zip(free_positions, digits):
            coeffs[k] = c
        yield LaurentScalar._build(field, coeffs, 0, None)


def _columns_for(field, n, j, d_j, Ycols, ydiag, lcol, l_j):
    """Candidate y-coordinate columns j with diagonal pi^d_j containing lower column j."""
    s = l_j - d_j
    pi_s = LaurentScalar.monomial(field, 1, s)
    zero = LaurentScalar.zero(field)

    def rec(i, residual, chosen):
        if i < 0:
            col = [None] * n
            for k in range(j):
                col[k] = chosen[k]
            col[j] = LaurentScalar.monomial(field, 1, d_j)
            for k in range(j + 1, n):
                col[k] = zero
            yield col
            return
        d_i = ydiag[i]
        for x in _digit_choices(field, residual[i], s, d_i):
            ri = residual[i] - pi_s * x
            c = ri.shift(-d_i)
            new_res = list(residual)
            if not c.is_exact_zero():
                piv = Ycols[i]
                for k in range(i):
                    b = piv[k]
                    if not b.is_exact_zero():
                        new_res[k] = new_res[k] - c * b
            new_res[i] = zero
            chosen[i] = x
            yield from rec(i - 1, new_res, chosen)

    yield from rec(j - 1, list(lcol[:j]), [None] * j)


def _enumerate_diagonal(args):
    field, n, ydiag, BU, Lcols, ldiag, filters = args
    results = []

    def dfs(j, Ycols):
        if j == n:
            xcols = _times_upper(BU, Ycols, n, field)
            diag = [BU.rows[i][i].val + ydiag[i] for i in range(n)]
            cols = [list(c) for c in xcols]
            for k in range(n):
                cols[k][k] = LaurentScalar.monomial(field, 1, diag[k])
            _reduce_triangular(cols, diag)
            lat = _finish_hnf(cols, diag, LaurentScalar.zero(field))
            if all(f.accept(lat) for f in filters):
                results.append(lat)
            return
        for col in _columns_for(field, n, j, ydiag[j], Ycols, ydiag, Lcols[j], ldiag[j]):
            nxt = Ycols + [col]
            if filters:
                xcols = _times_upper(BU, nxt, n, field)
                if not all(f.partial(xcols, j) for f in filters):
                    continue
            dfs(j + 1, nxt)

    dfs(0, [])
    return results


def enumerate_lattices(bound, filters=(), *, rank, field, lower=None, upper=None, workers=1):
    """All lattices with ``pi^N L0 + lower <= Lambda <= pi^-N L0 & upper`` passing ``filters``.

    The outer loop runs over diagonal exponent vectors of the HNF, the inner
    loop over the reduced off-diagonal digits, with ``filters`` consulted
    after each finished column.  Work is split by diagonal vector; output
    order is deterministic and independent of ``workers``.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    n = rank
    low, up = _as_lattice_bound(n, field, bound, lower, upper)
    if not up.contains(low):
        return []
    BU = up.basis
    # lower bound in coordinates where the upper bound is the standard lattice
    Lp = hermite_lattice(up.inverse_basis() @ low.basis)
    Lcols = Lp.basis.columns()
    ldiag = Lp.diag
    tasks = [
        (field, n, list(ydiag), BU, Lcols, ldiag, tuple(filters))
        for ydiag in product(*[range(0, l + 1) for l in ldiag])
    ]
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_enumerate_diagonal, tasks))
    else:
        chunks = [_enumerate_diagonal(t) for t in tasks]
    out = []
    for chunk in chunks:
        out.extend(chunk)
    return out
