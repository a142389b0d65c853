"""Base points over O'_v, Galois cocycles, obstruction, and group-level matching data.

Cocycles are returned as exact pairs ``(num, den)`` with ``num`` a matrix of
Laurent polynomials and ``den`` a scalar, so every identity is checked
without truncation.  At a split place the cocycles are the identity.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    MembershipFailed,
    NoSolution,
    NotInSymmetricSpace,
    NotIntegral,
    NotSRS,
    PrecisionExhausted,
)
from .lattice_linalg import SeriesMatrix, smith_exponents, wedge_matrix
from .local_fields import LaurentScalar, LocalField, SplitPair
from .monoid_invariants import (
    DeformedPoint,
    InvariantPoint,
    MonoidPoint,
    _anti_invariant_unit,
    _exact_div,
    charpoly_coefficients,
    contraction,
    deformed_invariants,
    deformed_section,
    poly_discriminant,
    pure_tensors,
    reconstruct_from_x1,
    wedge_left,
)
from .satake import Coweight

__all__ = [
    "BasePoint",
    "Cocycle",
    "lift_basepoint",
    "solve_cocycle",
    "check_cocycle",
    "obstruction",
    "is_matching_pair",
    "boundary_coweight",
    "newton_point",
    "group_invariants",
    "disc_n",
    "is_srs_element",
    "lift_to_monoid",
    "cartan_invariant",
    "transfer_factor",
    "involution_element",
    "w0_matrix",
    "cartan_representative",
    "random_symmetric_element",
    "random_unitary_element",
    "random_integral_unit_matrix",
    "point_digest",
    "match_record",
]


# ---------------------------------------------------------------------------
# base points


@dataclass
class BasePoint:
    """The deformed section point ``(gamma, e, e^vee)`` over O'_v lying over ``a``."""

    invariants: InvariantPoint
    deformed: DeformedPoint

    @property
    def n(self):
        return self.deformed.n

    @property
    def place(self):
        return self.invariants.place

    @property
    def x1(self):
        return self.deformed.point.x_at(1)

    @property
    def e(self):
        return list(self.deformed.e)

    @property
    def edual(self):
        return list(self.deformed.edual)

    def krylov(self):
        """Columns ``gamma_1^k e`` for ``k < n``."""
        cols = [self.e]
        x1 = self.x1
        for _ in range(1, self.n):
            cols.append((x1 @ SeriesMatrix.column_vector(cols[-1])).column(0))
        return SeriesMatrix.from_columns(cols)

    def covector_krylov(self):
        """Rows ``e^vee gamma_1^k`` for ``k < n``."""
        rows = [self.edual]
        x1 = self.x1
        for _ in range(1, self.n):
            rows.append((SeriesMatrix.row_vector(rows[-1]) @ x1).row(0))
        return SeriesMatrix(rows)

    def fn_dual(self):
        """The scalar ``f_n^vee`` of the base point."""
        return pure_tensors(self.deformed)[1][-1][0]

    def fn(self):
        return pure_tensors(self.deformed)[0][-1][0]


def _require_integral(a):
    for c in a.coordinates():
        parts = (c.left, c.right) if isinstance(c, SplitPair) else (c,)
        for s in parts:
            if s.coeffs and s.val < 0:
                raise NotIntegral("invariant coordinates must lie in O'_v")


def lift_basepoint(a):
    _require_integral(a)
    return BasePoint(a, deformed_section(a.z, a.a, a.b, a.b0))


# ---------------------------------------------------------------------------
# cocycles


@dataclass
class Cocycle:
    """``num / den`` for ``side`` in {symmetric, unitary, involution}."""

    side: str
    num: SeriesMatrix
    den: object

    def det_valuation(self):
        return self.num.det().valuation() - self.num.nrows * self.den.valuation()

    def matrix(self, prec=None):
        inv = self.den.inverse() if self.den.exact and _is_monomial(self.den) else self.den.inverse(prec)
        return self.num.scale(inv)


def _is_monomial(s):
    if isinstance(s, SplitPair):
        return s.left.is_monomial() and s.right.is_monomial()
    return s.is_monomial()


def _prod(items, one):
    acc = one
    for x in items:
        acc = acc * x
    return acc


def _conj_twist(bp):
    """``(I, delta)`` with ``prod(conj z) * conj(gamma_1)^{-1} = I / delta``."""
    x1b = bp.x1.conj()
    one = bp.x1.one()
    zbar = _prod([z.conj() for z in bp.invariants.z], one)
    return x1b.adjugate().scale(zbar), x1b.det()


def _krylov_columns(M, v, delta, n):
    """Columns ``delta^(n-1-k) M^k v``: the Krylov matrix of ``M / delta`` times ``delta^(n-1)``."""
    cols = [v]
    for _ in range(1, n):
        cols.append((M @ SeriesMatrix.column_vector(cols[-1])).column(0))
    scaled = []
    for k, c in enumerate(cols):
        f = delta ** (n - 1 - k) if n - 1 - k else None
        scaled.append([x * f for x in c] if f is not None else c)
    return SeriesMatrix.from_columns(scaled)


def _identity_cocycle(bp, side):
    one = bp.x1.one()
    return Cocycle(side, SeriesMatrix.identity(bp.n, one), one)


def solve_cocycle(a, side, basept=None):
    """The unique ``s`` (symmetric) or ``h`` (unitary) carried by ``a``.

    symmetric: ``s gamma s^-1 = iota(conj gamma)``, ``s e = conj e``, ``e^vee s^-1 = conj e^vee``.
    unitary:   ``h^-1 gamma h = tau(conj gamma)``, ``h^-1 e = conj(e^vee)^T``, ``e^vee h = conj(e)^T``.
    """
    bp = basept or lift_basepoint(a)
    if side not in ("symmetric", "unitary"):
        raise ValueError(f"unknown side {side!r}")
    if isinstance(bp.x1.zero, SplitPair):
        return _identity_cocycle(bp, side)
    n = bp.n
    x1 = bp.x1
    e_col = SeriesMatrix.column_vector(bp.e)
    ed_row = SeriesMatrix.row_vector(bp.edual)
    I, delta = _conj_twist(bp)
    if delta.is_exact_zero():
        raise NoSolution("gamma_1 is singular")
    K = bp.krylov()
    detK = K.det()
    if detK.is_zero():
        raise NoSolution("Krylov matrix is singular; input is not strongly regular")
    if side == "symmetric":
        ebar = [x.conj() for x in bp.e]
        Kt = _krylov_columns(I, ebar, delta, n)
        num = Kt @ K.adjugate()
        den = delta ** (n - 1) * detK
        ok = (
            num @ x1.scale(delta) == I @ num
            and num @ e_col == SeriesMatrix.column_vector(ebar).scale(den)
            and ed_row.scale(den) == SeriesMatrix.row_vector([x.conj() for x in bp.edual]) @ num
        )
    else:
        Iu = I.transpose()
        se = [x.conj() for x in bp.edual]
        KU = _krylov_columns(Iu, se, delta, n)
        den = KU.det()
        if den.is_zero():
            raise NoSolution("twisted Krylov matrix is singular")
        num = (K @ KU.adjugate()).scale(delta ** (n - 1)) if n > 1 else K @ KU.adjugate()
        ok = (
            x1 @ num.scale(delta) == num @ Iu
            and e_col.scale(den) == num @ SeriesMatrix.column_vector(se)
            and ed_row @ num == SeriesMatrix.row_vector([x.conj() for x in bp.e]).scale(den)
        )
    if not ok:
        raise NoSolution(f"no {side} cocycle: the point is not Galois-twisted")
    return Cocycle(side, num, den)


def check_cocycle(c):
    """``s conj(s) = 1`` (symmetric) or ``h = conj(h)^T`` (unitary), exactly."""
    if c.side == "symmetric":
        lhs = c.num @ c.num.conj()
        return lhs == SeriesMatrix.identity(c.num.nrows, c.num.one()).scale(c.den * c.den.conj())
    if c.side == "unitary":
        return c.num.scale(c.den.conj()) == c.num.conj_transpose().scale(c.den)
    raise ValueError(f"no cocycle identity for side {c.side!r}")


def involution_element(a, basept=None):
    """``d`` with ``(gamma^*, e^vee^T, e^T) = (Ad_d gamma, d e, e^vee d^-1)``: ``d = R^T K^-1``."""
    bp = basept or lift_basepoint(a)
    K = bp.krylov()
    detK = K.det()
    if detK.is_zero():
        raise NoSolution("Krylov matrix is singular")
    R = bp.covector_krylov()
    return Cocycle("involution", R.transpose() @ K.adjugate(), detK)


# ---------------------------------------------------------------------------
# obstruction and coweights


def obstruction(a):
    if a.place is not None and not a.place.inert:
        return "trivial"
    if isinstance(a.b0, SplitPair):
        return "trivial"
    return "nontrivial" if a.val_disc() % 2 else "trivial"


def is_matching_pair(a):
    return a.is_srs() and obstruction(a) == "trivial"


def _val(s):
    if isinstance(s, SplitPair):
        return s.left.valuation()
    return s.valuation()


def boundary_coweight(a):
    """Dominant adjoint coweight with ``<alpha_i, lambda> = val z_i``."""
    vals = [_val(z) for z in a.z]
    n = len(vals) + 1
    parts = [sum(vals[j:]) for j in range(n - 1)] + [0]
    return Coweight(tuple(parts)).adjoint()


def newton_point(a):
    """Root valuations of the characteristic polynomial of ``gamma_1``, recentred and sorted."""
    c = charpoly_coefficients(a.z, a.a)
    n = len(c)
    pts = [(0, Fraction(0))]
    for i, ci in enumerate(c, start=1):
        if not ci.is_zero_to_precision():
            pts.append((i, Fraction(_val(ci))))
    hull = [pts[0]]
    for p in pts[1:]:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    if hull[-1][0] != n:
        raise PrecisionExhausted("constant term of the characteristic polynomial is not visible")
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.extend([(y2 - y1) / (x2 - x1)] * (x2 - x1))
    return Coweight.dominant(slopes).adjoint()


# ---------------------------------------------------------------------------
# group side


def _standard(n, one):
    zero = one * 0
    e = [zero] * (n - 1) + [one]
    return e, list(e)


def _is_identity(M):
    I = SeriesMatrix.identity(M.nrows, M.one())
    try:
        return M == I
    except PrecisionExhausted:
        return True


def _check_group(A, group):
    if A.nrows != A.ncols:
        raise MembershipFailed("not a square matrix")
    if group == "S_n":
        if not _is_identity(A @ A.conj()):
            raise NotInSymmetricSpace("A conj(A) != 1")
    elif group == "G'":
        if not _is_identity(A @ A.conj_transpose()):
            raise MembershipFailed("A conj(A)^T != 1")
    elif group == "GL'_n":
        if A.det().is_zero():
            raise MembershipFailed("matrix is singular")
    else:
        raise ValueError(f"unknown group {group!r}")


@dataclass
class GroupInvariants:
    det: object
    a: tuple
    b: tuple


def group_invariants(A):
    """``(det, a_i = tr wedge^i A, b_i = tr(e^vee o wedge^i A o e ^))`` for ``A`` in ``S_n``."""
    _check_group(A, "S_n")
    n = A.nrows
    e, ed = _standard(n, A.one())
    a, b = [], []
    for i in range(1, n):
        W = wedge_matrix(A, i)
        a.append(W.trace())
        b.append((contraction(ed, i) @ W @ wedge_left(e, i - 1)).trace())
    return GroupInvariants(A.det(), tuple(a), tuple(b))


def _pair_gram(A):
    """``det(e^vee A^(i+j) e)`` for standard ``e, e^vee``."""
    n = A.nrows
    powers = [SeriesMatrix.identity(n, A.one())]
    for _ in range(2 * n - 2):
        powers.append(powers[-1] @ A)
    rows = [[powers[i + j][n - 1, n - 1] for j in range(n)] for i in range(n)]
    return SeriesMatrix(rows).det()


def disc_n(A, prec=None):
    """``det(A)^(1-n) det(e^vee A^(i+j) e)``."""
    _check_group(A, "S_n")
    n = A.nrows
    d = A.det()
    g = _pair_gram(A)
    den = d ** (n - 1) if n > 1 else A.one()
    return _exact_div(g, den, prec)


def _charpoly_disc(A):
    n = A.nrows
    c = [wedge_matrix(A, i).trace() for i in range(1, n)] + [A.det()]
    return poly_discriminant(c)


def is_srs_element(A):
    """Squarefree characteristic polynomial and ``Disc_n != 0``."""
    return not (_charpoly_disc(A).is_zero() or _pair_gram(A).is_zero())


def cartan_invariant(x, group="S_n"):
    """Descending Smith exponents (the left component at a split place)."""
    _check_group(x, group)
    M = x.components()[0] if isinstance(x.zero, SplitPair) else x
    return Coweight(tuple(smith_exponents(M)))


def transfer_factor(A, place=None):
    if isinstance(A.zero, SplitPair) or (place is not None and not place.inert):
        return 1
    n = A.nrows
    _, ed = _standard(n, A.one())
    rows = [ed]
    for _ in range(1, n):
        rows.append((SeriesMatrix.row_vector(rows[-1]) @ A).row(0))
    d = SeriesMatrix(rows).det()
    if d.is_zero():
        raise NotSRS("covector Krylov wedge vanishes")
    return -1 if d.valuation() % 2 else 1


def _hilbert90(d, lf):
    """A unit ``w`` with ``conj(w) / w = d`` for ``d`` of norm one."""
    one = lf.one()
    w = one + d.conj()
    if w.valuation() == 0:
        return w
    omega = _anti_invariant_unit(lf)
    w = omega * (d.conj() - one)
    if w.valuation() != 0:
        raise ArithmeticError("Hilbert 90 construction failed")
    return w


def lift_to_monoid(A, place, lam=None, group="S_n", e=None, edual=None):
    """Invariant point ``chi(c A, e, e^vee)``.

    ``lam`` (adjoint, outer-fixed, integral after centring) sets the boundary;
    it defaults to the Cartan invariant of ``A``.  ``e`` and ``edual`` default
    to the standard vectors; supplied ones must be rational and integral, and
    the srs test then applies to the supplied triple rather than to ``A``.
    """
    _check_group(A, group)
    n = A.nrows
    one = A.one()
    se, sed = _standard(n, one)
    custom = e is not None or edual is not None
    e = se if e is None else list(e)
    edual = sed if edual is None else list(edual)
    if not custom and not is_srs_element(A):
        raise NotSRS("A is not strongly regular semisimple")
    lf = LocalField(place)
    if lf.split:
        xs, z = _split_lift(A, place)
    else:
        xs, z = _inert_lift(A, place, lf, lam, group)
    m = DeformedPoint(MonoidPoint(z, xs), e, edual)
    a = deformed_invariants(m, place)
    if custom and not a.is_srs():
        raise NotSRS("the supplied triple is not strongly regular semisimple")
    return a


def _inert_lift(A, place, lf, lam, group):
    n = A.nrows
    if lam is None:
        lam = cartan_invariant(A, group).adjoint()
    lam = lam.adjoint()
    if not lam.is_integral():
        raise NotSRS(f"boundary {lam} is not realized by a scalar multiple of A")
    parts = [int(p) for p in lam.parts]
    d = A.det()
    w = _hilbert90(d, lf)
    pi = lf.pi
    z = []
    for i in range(n - 1):
        z.append(pi(parts[i] - parts[i + 1]))
    if n == 2:
        z[0] = z[0] * w * w.conj()
    else:
        z[0] = z[0] * w
        z[n - 2] = z[n - 2] * w.conj()
    c = pi(parts[0]) * w
    x1 = A.scale(c)
    if not x1.is_integral():
        raise NotIntegral(f"c A is not integral for boundary {lam}")
    m = reconstruct_from_x1(tuple(z), x1, place.prec)
    return m.x, tuple(z)


def _split_lift(A, place):
    n = A.nrows
    A1, A2 = A.components()
    mu = smith_exponents(A1)
    F = A1.zero.field
    mono = lambda k: LaurentScalar.monomial(F, 1, k)
    c1 = mono(-mu[-1])
    d1 = A1.det()
    zeta = [mono(mu[i] - mu[i + 1]) for i in range(n - 2)]
    rest = c1 ** n * d1
    for k, zk in enumerate(zeta, start=1):
        rest = _exact_div(rest, zk ** (n - k), place.prec)
    zeta.append(rest)
    total = _prod(zeta, mono(0))
    c2 = _exact_div(total, c1, place.prec)
    z = tuple(SplitPair(zeta[i], zeta[n - 2 - i]) for i in range(n - 1))
    x1 = SeriesMatrix.from_components(A1.scale(c1), A2.scale(c2))
    if not x1.is_integral():
        raise NotIntegral("scaled element is not integral")
    m = reconstruct_from_x1(z, x1, place.prec)
    return m.x, z


# ---------------------------------------------------------------------------
# Cartan representatives and random group elements


def w0_matrix(n, one):
    """Antidiagonal ``w0`` with entries ``(-1)^(n-1), ..., -1, 1`` from the top-right corner down."""
    zero = one * 0
    rows = [[zero] * n for _ in range(n)]
    for i in range(n):
        sign = (n - 1 - i) % 2
        rows[i][n - 1 - i] = -one if sign else one
    return SeriesMatrix(rows, zero)


def cartan_representative(lam, lf):
    """``c * pi^lam * w0`` in ``S_n`` (inert place), ``c`` a constant of norm ``(-1)^(n-1)``."""
    parts = lam.as_ints()
    n = len(parts)
    one = lf.one()
    F = lf.residue
    target = F.from_int((-1) ** (n - 1))
    root = next(c for c in range(1, F.size) if F.mul_t[c * F.size + F.frob_t[c]] == target)
    D = SeriesMatrix.diagonal([lf.pi(p) for p in parts], one * 0)
    return (D @ w0_matrix(n, one)).scale(lf.const(root))


def random_integral_unit_matrix(lf, rng, n, length=2, rational=False, steps=None):
    """A product of elementary matrices and a constant diagonal: exact, in ``GL_n(O)``."""
    one = lf.one()
    zero = one * 0
    F = lf.base_residue if rational or lf.split else lf.residue
    diag = []
    for _ in range(n):
        c = lf.const(rng.randrange(1, F.size))
        if lf.split and not rational:
            c = SplitPair(c.left, lf.const(rng.randrange(1, F.size)).left)
        diag.append(c)
    M = SeriesMatrix.diagonal(diag, zero)
    for _ in range(steps if steps is not None else 2 * n):
        i, j = rng.sample(range(n), 2)
        t = lf.random(rng, val=0, length=length, rational=rational)
        E = [[one if r == c else zero for c in range(n)] for r in range(n)]
        E[i][j] = t
        M = M @ SeriesMatrix(E, zero)
    return M


def _pi_diag(lf, exps):
    return SeriesMatrix.diagonal([lf.pi(k) for k in exps], lf.zero())


def _inverse_monomial_det(M):
    d = M.det()
    return M.adjugate().scale(d.inverse())


def random_symmetric_element(place, rng, *, spread=1, length=2):
    """``A = g conj(g)^-1`` with ``g = U1 pi^k U2`` exact."""
    lf = LocalField(place)
    n = place.n
    U1 = random_integral_unit_matrix(lf, rng, n, length)
    U2 = random_integral_unit_matrix(lf, rng, n, length)
    exps = [rng.randint(-spread, spread) for _ in range(n)]
    g = U1 @ _pi_diag(lf, exps) @ U2
    return g @ _inverse_monomial_det(g.conj())


def _isotropic_vector(lf, rng, n, length):
    """A vector ``v`` with ``conj(v)^T v = 0`` supported on two coordinates."""
    F = lf.residue
    target = F.from_int(-1)
    if lf.split:
        zeta_l = lf.one().left
        zeta_r = zeta_l * -1
        zeta = SplitPair(zeta_l, zeta_r)
    else:
        zeta = None
        for c in range(1, F.size):
            if F.mul_t[c * F.size + F.frob_t[c]] == target:
                zeta = lf.const(c)
                break
    i, j = rng.sample(range(n), 2)
    v = [lf.zero()] * n
    t = lf.random(rng, val=0, length=length)
    v[i] = t
    v[j] = t * zeta
    return v


def random_unitary_element(place, rng, *, steps=3, length=2, spread=1):
    """A product of unitary transvections ``1 + c v v^*`` (``v`` isotropic, ``c`` anti-invariant)."""
    lf = LocalField(place)
    n = place.n
    one = lf.one()
    zero = one * 0
    if lf.split:
        # G' at a split place is {(g, g^-T)}
        half = [rng.randint(0, spread) for _ in range(n // 2)]
        exps = half + [0] * (n % 2) + [-k for k in reversed(half)]
        g = (random_integral_unit_matrix(lf, rng, n, length, rational=True)
             @ _pi_diag(lf, exps)
             @ random_integral_unit_matrix(lf, rng, n, length, rational=True))
        left = g.components()[0]
        right = _inverse_monomial_det(left).transpose()
        return SeriesMatrix.from_components(left, right)
    omega = _anti_invariant_unit(lf)
    F = lf.residue
    norm_one = [c for c in range(1, F.size) if F.mul_t[c * F.size + F.frob_t[c]] == 1]
    A = SeriesMatrix.diagonal([lf.const(rng.choice(norm_one)) for _ in range(n)], zero)
    for _ in range(steps):
        v = _isotropic_vector(lf, rng, n, length)
        c = omega * lf.pi(rng.randint(-spread, spread))
        col = SeriesMatrix.column_vector(v, zero)
        T = SeriesMatrix.identity(n, one) + (col @ col.conj_transpose()).scale(c)
        A = A @ T
    return A


# ---------------------------------------------------------------------------
# reports


def point_digest(a):
    payload = json.dumps(
        {k: v for k, v in a.to_json().items() if k in ("n", "z", "a", "b", "b0", "place")},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.blake2b(payload.encode(), digest_size=8).hexdigest()


def match_record(a):
    return {
        "a_digest": point_digest(a),
        "val_disc": a.val_disc(),
        "parity": a.val_disc() % 2,
        "obstruction": obstruction(a),
        "boundary": boundary_coweight(a).to_json(),
        "newton": newton_point(a).to_json(),
    }
