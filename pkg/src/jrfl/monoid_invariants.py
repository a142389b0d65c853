"""Monoid points, their sections and invariants, and the twisted invariant space.

A point of the monoid for SL_n is stored as its abelianization ``z`` (one
coordinate per simple root) together with its action ``x_i`` on every
fundamental representation ``V_i = wedge^i`` (i = 1..n-1).  Wedge bases are
indexed by lexicographically ordered subsets of ``range(n)``.

All routines are generic in the scalar type: exact Laurent polynomials,
truncated series, or split-place pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import ConstraintUnsatisfiable, PrecisionExhausted, SingularMatrix
from .lattice_linalg import SeriesMatrix, wedge_matrix
from .local_fields import LaurentScalar, LocalField, SplitPair, format_scalar

__all__ = [
    "MonoidPoint",
    "DeformedPoint",
    "InvariantPoint",
    "wedge_basis",
    "delta_scaling",
    "companion_matrix",
    "beta_matrix",
    "companion_section",
    "section_MH",
    "hinvariants",
    "deformed_section",
    "deformed_invariants",
    "pure_tensors",
    "disc",
    "disc_plus",
    "charpoly_coefficients",
    "poly_discriminant",
    "involution_iota",
    "involution_tau",
    "reconstruct_from_x1",
    "check_twisted",
    "random_twisted",
    "wedge_left",
    "contraction",
]


def _one_like(x):
    return x * 0 + 1


def _zero_like(x):
    return x * 0


def _monomial_in_z(z, exps):
    acc = _one_like(z[0])
    for zi, c in zip(z, exps):
        for _ in range(c):
            acc = acc * zi
    return acc


def _exact_div(num, den, prec=None):
    """``num / den``: exact polynomial quotient when possible, else to ``prec``."""
    if num.is_exact_zero():
        return num
    if num.exact and den.exact:
        try:
            return num.exact_quotient(den)
        except ValueError:
            if prec is None:
                raise PrecisionExhausted("quotient is not a Laurent polynomial; pass prec") from None
    return num.divide(den, prec)


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class MonoidPoint:
    z: tuple
    x: tuple  # x[i-1] acts on V_i

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(self.z))
        object.__setattr__(self, "x", tuple(self.x))

    @property
    def n(self):
        return self.x[0].nrows

    def x_at(self, i):
        return self.x[i - 1]

    def conjugate(self, g, ginv):
        """``g x g^-1`` on every fundamental representation."""
        xs = []
        for i, xi in enumerate(self.x, start=1):
            xs.append(wedge_matrix(g, i) @ xi @ wedge_matrix(ginv, i))
        return MonoidPoint(self.z, xs)


@dataclass(frozen=True)
class DeformedPoint:
    point: MonoidPoint
    e: tuple
    edual: tuple

    def __post_init__(self):
        object.__setattr__(self, "e", tuple(self.e))
        object.__setattr__(self, "edual", tuple(self.edual))

    @property
    def n(self):
        return self.point.n

    @property
    def b0(self):
        acc = _zero_like(self.e[0])
        for a, b in zip(self.edual, self.e):
            acc = acc + a * b
        return acc

    def act(self, g, ginv):
        """``(g x g^-1, g e, e^vee g^-1)``."""
        e_col = SeriesMatrix.column_vector(self.e)
        ed_row = SeriesMatrix.row_vector(self.edual)
        return DeformedPoint(
            self.point.conjugate(g, ginv),
            (g @ e_col).column(0),
            (ed_row @ ginv).row(0),
        )


@dataclass
class InvariantPoint:
    """Coordinates ``(z_i, a_i, b_i, b_0)`` of a point of the invariant space."""

    z: tuple
    a: tuple
    b: tuple
    b0: object
    place: object = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.z = tuple(self.z)
        self.a = tuple(self.a)
        self.b = tuple(self.b)

    @property
    def n(self):
        return len(self.z) + 1

    def coordinates(self):
        return self.z + self.a + self.b + (self.b0,)

    def disc(self):
        if "disc" not in self._cache:
            self._cache["disc"] = disc(self)
        return self._cache["disc"]

    def disc_plus(self):
        if "disc_plus" not in self._cache:
            self._cache["disc_plus"] = disc_plus(self.z, self.a)
        return self._cache["disc_plus"]

    def val_disc(self):
        return self.disc().valuation()

    def val_disc_plus(self):
        return self.disc_plus().valuation()

    def is_srs(self):
        return not (self.disc().is_zero() or self.disc_plus().is_zero())

    def same_coordinates(self, other):
        return all(x == y for x, y in zip(self.coordinates(), other.coordinates()))

    def to_json(self):
        place = None
        if self.place is not None:
            p = self.place
            place = {"p": p.p, "d": p.d, "n": p.n, "kind": p.kind, "prec": p.prec}
        srs = self.is_srs()
        return {
            "n": self.n,
            "place": place,
            "z": [format_scalar(c) for c in self.z],
            "a": [format_scalar(c) for c in self.a],
            "b": [format_scalar(c) for c in self.b],
            "b0": format_scalar(self.b0),
            "val_disc": self.val_disc() if srs else None,
            "val_disc_plus": self.val_disc_plus() if srs else None,
            "srs": srs,
        }


# ---------------------------------------------------------------------------
# wedge combinatorics


def wedge_basis(n, i):
    return list(combinations(range(n), i))


def delta_scaling(z, i):
    """Diagonal action of the abelianization section on ``V_i``.

    The eigenvalue on ``e_S`` is ``prod_j z_j**c_j`` with
    ``c_j = min(j, i) - |S & {1..j}|`` (1-based ``j``).
    """
    n = len(z) + 1
    if not 1 <= i <= n - 1:
        raise ValueError("fundamental representation index out of range")
    entries = []
    for S in wedge_basis(n, i):
        exps = [min(j, i) - sum(1 for s in S if s < j) for j in range(1, n)]
        entries.append(_monomial_in_z(z, exps))
    return SeriesMatrix.diagonal(entries, _zero_like(z[0]))


def companion_matrix(a, one):
    """First row ``(a_1, -a_2, ..., (-1)^(n-2) a_{n-1}, (-1)^(n-1))``, ones below the diagonal."""
    n = len(a) + 1
    zero = one * 0
    top = [a[k] if k % 2 == 0 else -a[k] for k in range(n - 1)]
    top.append(one if (n - 1) % 2 == 0 else -one)
    rows = [top]
    for r in range(1, n):
        rows.append([one if c == r - 1 else zero for c in range(n)])
    return SeriesMatrix(rows, zero)


def beta_matrix(b, one, inverse=False):
    """Unipotent matrix with last row ``((-1)^(n-1) b_1, ..., -b_{n-1}, 1)``."""
    n = len(b) + 1
    zero = one * 0
    rows = [[one if c == r else zero for c in range(n)] for r in range(n - 1)]
    last = []
    for k in range(n - 1):
        entry = b[k] if (n - 1 - k) % 2 == 0 else -b[k]
        last.append(-entry if inverse else entry)
    last.append(one)
    rows.append(last)
    return SeriesMatrix(rows, zero)


def _section_x(z, A):
    return [delta_scaling(z, i) @ wedge_matrix(A, i) for i in range(1, len(z) + 1)]


def companion_section(z, a):
    one = _one_like(z[0])
    return MonoidPoint(z, _section_x(z, companion_matrix(a, one)))


def section_MH(z, a1, a2):
    """Section of the invariant map for the H-action: ``beta(a'') eps_M(z, a) beta(a'')^-1``."""
    one = _one_like(z[0])
    a = [p + q for p, q in zip(a1, a2)]
    point = companion_section(z, a)
    return point.conjugate(beta_matrix(a2, one), beta_matrix(a2, one, inverse=True))


def hinvariants(m):
    """``(z, a', a'')``: traces on the summands without and with the last basis vector."""
    n = m.n
    a1, a2 = [], []
    for i in range(1, n):
        xi = m.x_at(i)
        t1 = t2 = xi.zero
        for k, S in enumerate(wedge_basis(n, i)):
            if n - 1 in S:
                t2 = t2 + xi[k, k]
            else:
                t1 = t1 + xi[k, k]
        a1.append(t1)
        a2.append(t2)
    return m.z, tuple(a1), tuple(a2)


def wedge_left(e, i):
    """Matrix of ``v -> e ^ v`` from ``V_i`` to ``V_{i+1}``."""
    n = len(e)
    zero = _zero_like(e[0])
    src = wedge_basis(n, i)
    dst = wedge_basis(n, i + 1)
    index = {S: k for k, S in enumerate(dst)}
    rows = [[zero] * len(src) for _ in dst]
    for c, T in enumerate(src):
        for k in range(n):
            if k in T or e[k].is_exact_zero():
                continue
            sign = sum(1 for t in T if t < k) % 2
            r = index[tuple(sorted(T + (k,)))]
            rows[r][c] = rows[r][c] + (-e[k] if sign else e[k])
    return SeriesMatrix(rows, zero)


def contraction(edual, i):
    """Matrix of contraction with ``e^vee`` from ``V_i`` to ``V_{i-1}``."""
    n = len(edual)
    zero = _zero_like(edual[0])
    src = wedge_basis(n, i)
    dst = wedge_basis(n, i - 1)
    index = {S: k for k, S in enumerate(dst)}
    rows = [[zero] * len(src) for _ in dst]
    for c, S in enumerate(src):
        for j, s in enumerate(S):
            if edual[s].is_exact_zero():
                continue
            r = index[S[:j] + S[j + 1:]]
            rows[r][c] = rows[r][c] + (-edual[s] if j % 2 else edual[s])
    return SeriesMatrix(rows, zero)


def _covector_wedge(phi, psi, i):
    """``phi ^ psi`` for ``phi`` in ``V_i^vee`` and ``psi`` in ``V_1^vee`` (determinant pairing)."""
    n = len(psi)
    zero = _zero_like(psi[0])
    src = wedge_basis(n, i)
    index = {S: k for k, S in enumerate(src)}
    out = []
    for S in wedge_basis(n, i + 1):
        acc = zero
        for k in S:
            rest = tuple(t for t in S if t != k)
            a = phi[index[rest]]
            b = psi[k]
            if a.is_exact_zero() or b.is_exact_zero():
                continue
            term = a * b
            if sum(1 for t in rest if t > k) % 2:
                term = -term
            acc = acc + term
        out.append(acc)
    return out


def _wedge_vector(e, v, i):
    """``e ^ v`` for ``v`` in ``V_i``."""
    col = SeriesMatrix.column_vector(v, _zero_like(e[0])) if i > 0 else None
    if i == 0:
        return [e[k] * v[0] for k in range(len(e))]
    return (wedge_left(e, i) @ col).column(0)


# ---------------------------------------------------------------------------
# deformed section and invariants


def deformed_section(z, a, b, b0):
    """``(eps_M(z, a), e_n, e_b^vee)`` with ``e_b^vee = sum (-1)^(n-i) b_i e_i^vee + b_0 e_n^vee``."""
    point = companion_section(z, a)
    n = point.n
    one = _one_like(z[0])
    zero = one * 0
    e = [zero] * (n - 1) + [one]
    edual = [b[k] if (n - 1 - k) % 2 == 0 else -b[k] for k in range(n - 1)] + [b0]
    return DeformedPoint(point, e, edual)


def deformed_invariants(m, place=None):
    n = m.n
    a = tuple(m.point.x_at(i).trace() for i in range(1, n))
    b = []
    for i in range(1, n):
        comp = contraction(m.edual, i) @ m.point.x_at(i) @ wedge_left(m.e, i - 1)
        b.append(comp.trace())
    return InvariantPoint(m.point.z, a, tuple(b), m.b0, place)


def pure_tensors(m):
    """``(f_1..f_n, f_1^vee..f_n^vee)`` as coefficient lists in the wedge bases."""
    n = m.n
    e, ed = list(m.e), list(m.edual)
    x1 = m.point.x_at(1)
    f = [(x1 @ SeriesMatrix.column_vector(e)).column(0)]
    fd = [(SeriesMatrix.row_vector(ed) @ x1).row(0)]
    for i in range(2, n):
        xi = m.point.x_at(i)
        w = _wedge_vector(e, f[-1], i - 1)
        f.append((xi @ SeriesMatrix.column_vector(w)).column(0))
        wd = _covector_wedge(fd[-1], ed, i - 1)
        fd.append((SeriesMatrix.row_vector(wd) @ xi).row(0))
    f.append(_wedge_vector(e, f[-1], n - 1))
    fd.append(_covector_wedge(fd[-1], ed, n - 1))
    return f, fd


def disc(obj):
    """``f_n^vee f_n`` of a deformed point, or of the section point of an invariant point."""
    if isinstance(obj, InvariantPoint):
        obj = deformed_section(obj.z, obj.a, obj.b, obj.b0)
    f, fd = pure_tensors(obj)
    return f[-1][0] * fd[-1][0]


def charpoly_coefficients(z, a):
    """``c_1..c_n`` of ``det(T - x_1) = T^n - c_1 T^(n-1) + ... + (-1)^n c_n``."""
    n = len(z) + 1
    out = []
    for i in range(1, n):
        out.append(a[i - 1] * _monomial_in_z(z, [max(i - k, 0) for k in range(1, n)]))
    out.append(_monomial_in_z(z, [n - k for k in range(1, n)]))
    return out


def poly_discriminant(c):
    """``prod_{i<j} (r_i - r_j)^2`` for the monic polynomial with elementary symmetric values ``c``."""
    n = len(c)
    one = _one_like(c[0])
    zero = one * 0
    # coefficients of f from the top degree down
    f = [one] + [c[k] if k % 2 else -c[k] for k in range(n)]
    df = [f[k] * (n - k) for k in range(n)]
    size = 2 * n - 1
    rows = []
    for r in range(n - 1):
        rows.append([zero] * r + f + [zero] * (size - r - len(f)))
    for r in range(n):
        rows.append([zero] * r + df + [zero] * (size - r - len(df)))
    res = SeriesMatrix(rows, zero).det()
    return res if (n * (n - 1) // 2) % 2 == 0 else -res


def disc_plus(z, a):
    """Discriminant of the characteristic polynomial of ``x_1`` over ``prod z_j^((n-j)(n-j-1))``."""
    n = len(z) + 1
    d = poly_discriminant(charpoly_coefficients(z, a))
    mono = _monomial_in_z(z, [(n - j) * (n - j - 1) for j in range(1, n)])
    return _exact_div(d, mono)


# ---------------------------------------------------------------------------
# involutions


def reconstruct_from_x1(z, x1, prec=None):
    """``x_i = wedge^i x_1 / prod_{k<i} z_k^(i-k)`` on the invertible locus."""
    n = len(z) + 1
    xs = [x1]
    for i in range(2, n):
        w = wedge_matrix(x1, i)
        mono = _monomial_in_z(z, [max(i - k, 0) for k in range(1, n)])
        xs.append(w.map(lambda t, m=mono: _exact_div(t, m, prec)))
    return MonoidPoint(z, xs)


def _flip(z):
    return tuple(reversed(z))


def _scaled_inverse(z, x1, prec):
    total = z[0]
    for zi in z[1:]:
        total = total * zi
    d = x1.det()
    if d.is_exact_zero():
        raise SingularMatrix("x_1 is not invertible")
    adj = x1.adjugate()
    return adj.map(lambda t: _exact_div(t * total, d, prec))


def involution_iota(m, prec=None):
    """Flip ``z``; ``x_1 -> (prod z_i) x_1^-1``; higher ``x_i`` rebuilt."""
    z2 = _flip(m.z)
    return reconstruct_from_x1(z2, _scaled_inverse(m.z, m.x_at(1), prec), prec)


def involution_tau(m, prec=None):
    """Flip ``z``; ``x_1 -> (prod z_i) (x_1^T)^-1``; higher ``x_i`` rebuilt."""
    z2 = _flip(m.z)
    return reconstruct_from_x1(z2, _scaled_inverse(m.z, m.x_at(1), prec).transpose(), prec)


# ---------------------------------------------------------------------------
# twisted invariant space


def check_twisted(pt):
    """The Galois relations ``z_i = s(z_{n-i})``, ``a_i = s(a_{n-i})``,
    ``b_i = s(b_0 a_{n-i} - b_{n-i})`` with ``a_n = 1``, ``b_n = 0``."""
    n = pt.n
    one = _one_like(pt.b0)
    zero = one * 0
    a = (None,) + pt.a + (one,)
    b = (pt.b0,) + pt.b + (zero,)
    z = (None,) + pt.z
    for i in range(1, n):
        if z[i] != z[n - i].conj() or a[i] != a[n - i].conj():
            return False
    for i in range(0, n):
        if b[i] != (pt.b0 * a[n - i] - b[n - i]).conj():
            return False
    return True


def _anti_invariant_unit(lf):
    """A residue constant ``w`` with ``conj(w) = -w``, as a scalar of F'_v."""
    if lf.split:
        one = LaurentScalar.from_int(lf.residue, 1)
        return SplitPair(one, -one)
    F = lf.residue
    for c in range(1, F.size):
        if F.frob_t[c] == F.neg_t[c]:
            return lf.const(c)
    raise ArithmeticError("no anti-invariant constant")


def _random_free(lf, rng, length, val=0, unit=False):
    return lf.random(rng, val=val, length=length, unit=unit)


def _random_rational(lf, rng, length, val=0, unit=False):
    return lf.random(rng, val=val, length=length, rational=True, unit=unit)


def _twisted_pairs(n, make_free, make_fixed):
    """Fill ``x_1..x_{n-1}`` with ``x_{n-i} = conj(x_i)``."""
    out = [None] * (n - 1)
    for i in range(1, n):
        j = n - i
        if i < j:
            v = make_free(i)
            out[i - 1] = v
            out[j - 1] = v.conj()
        elif i == j:
            out[i - 1] = make_fixed(i)
    return out


def twisted_point(lf, z, a, b_free, b0, b_mid=None):
    """Complete partial data to a twisted point.

    ``b_free[i]`` is used for ``i < n - i``; the partner is forced.  For even
    ``n`` the middle ``b`` is ``b_0 a_mid / 2 + b_mid`` with ``b_mid``
    anti-invariant (default 0).
    """
    n = len(z) + 1
    b = [None] * (n - 1)
    for i in range(1, n):
        j = n - i
        if i < j:
            b[i - 1] = b_free[i - 1]
            b[j - 1] = (b0 * a[i - 1] - b_free[i - 1]).conj()
        elif i == j:
            half = lf.const(lf.residue.inv(lf.residue.from_int(2)))
            mid = b0 * a[i - 1] * half
            b[i - 1] = mid if b_mid is None else mid + b_mid
    return InvariantPoint(z, a, b, b0, lf.place)


def random_twisted(place, rng, *, z_vals=None, disc_parity=None, srs=True, b0=None,
                   length=3, max_tries=500):
    """Sample a twisted invariant point over O'_v.

    ``z_vals`` pins the valuations of ``z_i`` (must satisfy
    ``z_vals[i] == z_vals[n-2-i]``); ``disc_parity`` pins ``val(disc) mod 2``.
    ``b0`` defaults to a random unit of O_v.
    """
    lf = LocalField(place)
    n = place.n
    if z_vals is not None:
        z_vals = list(z_vals)
        if len(z_vals) != n - 1 or any(z_vals[i] != z_vals[n - 2 - i] for i in range(n - 1)):
            raise ConstraintUnsatisfiable("z valuations must be symmetric under the flip")
    anti = _anti_invariant_unit(lf)
    for _ in range(max_tries):
        def zfree(i):
            v = 0 if z_vals is None else z_vals[i - 1]
            return _random_free(lf, rng, length, val=v, unit=True)

        def zfixed(i):
            v = 0 if z_vals is None else z_vals[i - 1]
            return _random_rational(lf, rng, length, val=v, unit=True)

        z = _twisted_pairs(n, zfree, zfixed)
        a = _twisted_pairs(n, lambda i: _random_free(lf, rng, length),
                           lambda i: _random_rational(lf, rng, length))
        bb0 = b0 if b0 is not None else _random_rational(lf, rng, length, unit=True)
        b_free = [_random_free(lf, rng, length) for _ in range(n - 1)]
        b_mid = None
        if n % 2 == 0:
            b_mid = anti * _random_rational(lf, rng, length)
        pt = twisted_point(lf, z, a, b_free, bb0, b_mid)
        if srs or disc_parity is not None:
            if not pt.is_srs():
                continue
        if disc_parity is not None and pt.val_disc() % 2 != disc_parity % 2:
            continue
        return pt
    raise ConstraintUnsatisfiable("no twisted point satisfied the constraints within the retry budget")
