"""Affine Jacquet-Rallis fibers as finite sets of lattices, with their weights.

A fiber point is a lattice ``Lambda`` in ``(F'_v)^n`` with

* ``x_i wedge^i Lambda <= wedge^i Lambda`` for ``i = 1..n-1``,
* ``e`` in ``Lambda`` and ``e^vee`` in ``Lambda^vee``,
* ``s Lambda = conj(Lambda)`` (symmetric side) or self-duality for
  ``conj(x)^T h^-1 y`` (unitary side).

The first two conditions trap ``Lambda`` between the Krylov lattice
``O[gamma] e`` and the dual of ``O[gamma]^T e^vee``.  Every
``gamma``-stable lattice in that interval is reached from the bottom by
minimal ``gamma``-stable extensions, which are computed over the residue
field.  At a split place the fiber is the plain lattice description for one
component: the left one on the symmetric side, the right one on the
unitary side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import NotSRS, PrecisionExhausted, StratumOutOfRange, Unstable
from .lattice_linalg import (
    LatticeRep,
    SeriesMatrix,
    conjugate_lattice,
    dual_lattice,
    hermite_lattice,
    is_selfdual_hermitian,
    smith_exponents,
    wedge_matrix,
)
from .local_fields import LaurentScalar, SplitPair, format_scalar
from .local_matching import lift_basepoint, solve_cocycle
from .monoid_invariants import pure_tensors
from .satake import Coweight, dominance_leq, stratum_value

__all__ = [
    "FiberPoint",
    "FiberProblem",
    "fiber_bounds",
    "enumerate_symmetric",
    "enumerate_unitary",
    "eta_weight",
    "ic_weight",
    "involution_star",
    "weighted_count",
    "validate_point",
    "minimal_stable_extensions",
]


@dataclass(frozen=True)
class FiberPoint:
    lattice: LatticeRep
    eta_exponent: int
    mu: Coweight
    side: str = "symmetric"

    def to_json(self, ic_value=None, inert=True):
        B = self.lattice.basis
        return {
            "basis": [[format_scalar(x) for x in row] for row in B.rows],
            "mu": self.mu.to_json(),
            "eta": (-1) ** self.eta_exponent if inert and self.side == "symmetric" else 1,
            "ic_value": None if ic_value is None else str(ic_value),
        }


# ---------------------------------------------------------------------------
# residue-field linear algebra (matrices as lists of int rows)


def _residue_matrix(M):
    return [[x.coefficient(0) for x in row] for row in M.rows]


def _rref(F, rows, ncols):
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = F.inv(rows[r][c])
        rows[r] = [F.mul(inv, x) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _kernel(F, M, ncols):
    red, pivots = _rref(F, M, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, p in zip(red, pivots):
            v[p] = F.neg(row[f])
        basis.append(v)
    return basis


def _matvec(F, M, v):
    out = []
    for row in M:
        acc = 0
        for a, b in zip(row, v):
            if a and b:
                acc = F.add(acc, F.mul(a, b))
        out.append(acc)
    return out


def _span_contains(F, basis, v, n):
    if not basis:
        return not any(v)
    red, _ = _rref(F, basis, n)
    red2, _ = _rref(F, basis + [v], n)
    return len(red2) == len(red)


def _coords(F, basis, v, n):
    """Coordinates of ``v`` in ``basis`` (assumed to lie in the span)."""
    m = len(basis)
    # solve sum c_j basis_j = v via rref of the transposed system
    rows = [[basis[j][i] for j in range(m)] + [v[i]] for i in range(n)]
    red, pivots = _rref(F, rows, m + 1)
    c = [0] * m
    for row, p in zip(red, pivots):
        if p == m:
            raise ValueError("vector is not in the span")
        c[p] = row[m]
    return c


# polynomials over the residue field: coefficient lists, low degree first


def _ptrim(p):
    while p and p[-1] == 0:
        p = p[:-1]
    return p


def _pmul(F, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = F.add(out[i + j], F.mul(x, y))
    return _ptrim(out)


def _psub(F, a, b):
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _ptrim([F.sub(x, y) for x, y in zip(a, b)])


def _pdivmod(F, a, b):
    a = list(a)
    q = [0] * max(len(a) - len(b) + 1, 0)
    inv = F.inv(b[-1])
    while len(a) >= len(b) and a:
        c = F.mul(a[-1], inv)
        k = len(a) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            a[k + i] = F.sub(a[k + i], F.mul(c, y))
        a = _ptrim(a)
    return _ptrim(q), a


def _charpoly(F, T):
    """``det(x I - T)`` by Laplace expansion with polynomial entries."""
    m = len(T)
    P = [[_ptrim([F.neg(T[i][j]), 1 if i == j else 0]) if i == j else _ptrim([F.neg(T[i][j])]) for j in range(m)]
         for i in range(m)]

    def det(rows, cols):
        if not rows:
            return [1]
        r = rows[0]
        acc = []
        for k, c in enumerate(cols):
            entry = P[r][c]
            if not entry:
                continue
            sub = det(rows[1:], cols[:k] + cols[k + 1:])
            term = _pmul(F, entry, sub)
            acc = _psub(F, acc, term) if k % 2 else _psub(F, acc, _psub(F, [], term))
        return acc

    return det(list(range(m)), list(range(m)))


def _monic_polys(F, d):
    for coeffs in product(range(F.size), repeat=d):
        yield list(coeffs) + [1]


def _irreducible_factors(F, f):
    """Distinct monic irreducible factors of ``f``."""
    out = []
    f = list(f)
    for r in range(F.size):
        lin = [F.neg(r), 1]
        qt, rem = _pdivmod(F, f, lin)
        if rem:
            continue
        out.append(lin)
        while True:
            qt, rem = _pdivmod(F, f, lin)
            if rem:
                break
            f = qt
    d = 2
    while len(f) - 1 >= 2 * d:
        for g in _monic_polys(F, d):
            qt, rem = _pdivmod(F, f, g)
            if rem:
                continue
            out.append(g)
            while True:
                qt, rem = _pdivmod(F, f, g)
                if rem:
                    break
                f = qt
        d += 1
    if len(f) > 1:
        inv = F.inv(f[-1])
        out.append([F.mul(inv, c) for c in f])
    return out


def _poly_at_matrix(F, p, T):
    m = len(T)
    acc = [[0] * m for _ in range(m)]
    power = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    for c in p:
        if c:
            acc = [[F.add(a, F.mul(c, b)) for a, b in zip(ra, rb)] for ra, rb in zip(acc, power)]
        power = [[sum_row for sum_row in _matvec(F, T, col)] for col in zip(*power)]
        power = [list(r) for r in zip(*power)]
    return acc


def _simple_submodules(F, T):
    """Minimal nonzero ``T``-invariant subspaces of ``k^m`` as lists of basis vectors."""
    m = len(T)
    if m == 0:
        return []
    out = []
    for p in _irreducible_factors(F, _charpoly(F, T)):
        d = len(p) - 1
        K = _kernel(F, _poly_at_matrix(F, p, T), m)
        if not K:
            continue
        r = len(K) // d

        def cyclic(v):
            vecs = [v]
            for _ in range(d - 1):
                vecs.append(_matvec(F, T, vecs[-1]))
            return vecs

        if r == 1:
            out.append(K)
            continue
        # a basis over k[T]/p
        basis, span = [], []
        for v in K:
            if _span_contains(F, span, v, m):
                continue
            basis.append(v)
            span.extend(cyclic(v))
        coeff_polys = list(product(range(F.size), repeat=d))
        for j in range(r):
            tails = product(coeff_polys, repeat=r - 1 - j)
            for tail in tails:
                v = list(basis[j])
                for w, cp in zip(basis[j + 1:], tail):
                    cw = cyclic(w)
                    for c, u in zip(cp, cw):
                        if c:
                            v = [F.add(x, F.mul(c, y)) for x, y in zip(v, u)]
                out.append(cyclic(v))
    return out


# ---------------------------------------------------------------------------
# problem setup


def _component(x, idx):
    if isinstance(x, SplitPair):
        return x.left if idx == 0 else x.right
    return x


def _component_matrix(M, idx):
    if isinstance(M.zero, SplitPair):
        return M.components()[idx]
    return M


def _lattice_of_columns(M):
    return hermite_lattice(M)


def _dual_of_rows(R):
    """``{x : R x integral}`` for an invertible exact ``R``."""
    d = R.det()
    if d.is_zero():
        raise NotSRS("covector Krylov matrix is singular")
    return hermite_lattice(R.adjugate().shift(-d.valuation()))


@dataclass
class FiberProblem:
    """Data for enumerating one side of the fiber over ``a``."""

    a: object
    side: str
    bp: object = None
    comp: int = 0
    xs: list = field(default_factory=list)
    e: list = field(default_factory=list)
    edual: list = field(default_factory=list)
    cocycle: object = None
    fd_val: int = 0
    split: bool = False
    _cache: dict = field(default_factory=dict)

    @classmethod
    def build(cls, a, side):
        if side not in ("symmetric", "unitary"):
            raise ValueError(f"unknown side {side!r}")
        bp = lift_basepoint(a)
        split = isinstance(a.b0, SplitPair)
        comp = 1 if (split and side == "unitary") else 0
        m = bp.deformed
        xs = [_component_matrix(x, comp) for x in m.point.x]
        e = [_component(c, comp) for c in m.e]
        ed = [_component(c, comp) for c in m.edual]
        if not all(x.is_exact() for x in xs) or not all(c.exact for c in e + ed):
            raise PrecisionExhausted("fiber enumeration needs exact invariant coordinates")
        fd = pure_tensors(m)[1][-1][0]
        fd = _component(fd, comp)
        if fd.is_zero():
            raise NotSRS("f_n^vee vanishes")
        cocycle = None
        if not split:
            cocycle = solve_cocycle(a, side, bp)
        return cls(a, side, bp, comp, xs, e, ed, cocycle, fd.valuation(), split)

    @property
    def n(self):
        return len(self.e)

    @property
    def x1(self):
        return self.xs[0]

    def krylov(self):
        cols = [self.e]
        for _ in range(1, self.n):
            cols.append((self.x1 @ SeriesMatrix.column_vector(cols[-1])).column(0))
        return SeriesMatrix.from_columns(cols)

    def covector_krylov(self):
        rows = [self.edual]
        for _ in range(1, self.n):
            rows.append((SeriesMatrix.row_vector(rows[-1]) @ self.x1).row(0))
        return SeriesMatrix(rows)

    def lower(self):
        if "lower" not in self._cache:
            K = self.krylov()
            if K.det().is_zero():
                raise NotSRS("Krylov matrix is singular")
            self._cache["lower"] = _lattice_of_columns(K)
        return self._cache["lower"]

    def upper(self):
        if "upper" not in self._cache:
            self._cache["upper"] = _dual_of_rows(self.covector_krylov())
        return self._cache["upper"]

    def boundary(self):
        """GL-level boundary of this component: ``lambda_j = sum_{i >= j} val z_i``."""
        vals = [_component(z, self.comp).valuation() for z in self.a.z]
        n = self.n
        return Coweight(tuple(sum(vals[j:]) for j in range(n - 1)) + (0,))

    # -- bounded interval --------------------------------------------------

    def operators(self):
        """Operators whose common stable lattices include the fiber.

        ``x_{n-1}`` on ``wedge^{n-1}`` is transported to ``V`` through the
        cofactor identification ``wedge^{n-1} V = det V (x) V^vee``.
        """
        if "ops" not in self._cache:
            ops = [self.x1]
            n = self.n
            if n >= 3:
                X = self.xs[n - 2]
                rows = []
                for a in range(n):
                    row = []
                    for b in range(n):
                        v = X.rows[n - 1 - b][n - 1 - a]
                        row.append(-v if (a + b) % 2 else v)
                    rows.append(row)
                ops.append(SeriesMatrix(rows, X.zero))
            self._cache["ops"] = ops
        return self._cache["ops"]

    def close_up(self, lat):
        """Smallest lattice containing ``lat`` and stable under :meth:`operators`."""
        while True:
            gens = lat.basis
            for op in self.operators():
                gens = gens.hstack(op @ lat.basis)
            nxt = hermite_lattice(gens)
            if nxt == lat:
                return lat
            lat = nxt

    def close_down(self, lat):
        """Largest sublattice of ``lat`` stable under :meth:`operators`."""
        while True:
            W = lat.inverse_basis()
            rows = W
            for op in self.operators():
                rows = rows.vstack(W @ op)
            nxt = dual_lattice(hermite_lattice(rows.transpose()))
            if nxt == lat:
                return lat
            lat = nxt

    def interval(self, bound):
        """Smallest and largest stable lattices of the fiber box at ``bound``."""
        L, U = self.lower(), self.upper()
        n = self.n
        box = SeriesMatrix.identity(n, self.x1.one()).shift(bound)
        low = self.close_up(hermite_lattice(L.basis.hstack(box)))
        inner = dual_lattice(hermite_lattice(U.inverse_basis().transpose().hstack(box)))
        return low, self.close_down(inner)

    # -- conditions --------------------------------------------------------

    def stable_all_levels(self, lat):
        B, Binv = lat.basis, lat.inverse_basis()
        if not (Binv @ self.x1 @ B).is_integral():
            return False
        for i in range(2, self.n):
            Wi = wedge_matrix(Binv, i) @ self.xs[i - 1] @ wedge_matrix(B, i)
            if not Wi.is_integral():
                return False
        return True

    def side_condition(self, lat):
        if self.split:
            return True
        c = self.cocycle
        if self.side == "symmetric":
            image = hermite_lattice(c.num @ lat.basis).scaled(-c.den.valuation())
            return image == conjugate_lattice(lat)
        return is_selfdual_hermitian(lat, c.num, c.den)

    def make_point(self, lat):
        B, Binv = lat.basis, lat.inverse_basis()
        mu = Coweight(tuple(smith_exponents(Binv @ self.x1 @ B)))
        return FiberPoint(lat, self.fd_val + lat.det_valuation(), mu, self.side)


def minimal_stable_extensions(lat, M, upper):
    """``M``-stable lattices ``Lambda' <= upper`` with ``Lambda'/Lambda`` simple."""
    F = lat.field
    B = lat.basis
    n = lat.rank
    Mbar = _residue_matrix(upper.inverse_basis() @ B)
    S = _kernel(F, Mbar, n)
    if not S:
        return []
    G = _residue_matrix(lat.inverse_basis() @ M @ B)
    m = len(S)
    T = []
    images = [_matvec(F, G, v) for v in S]
    cols = [_coords(F, S, w, n) for w in images]
    T = [[cols[j][i] for j in range(m)] for i in range(m)]
    out = []
    for sub in _simple_submodules(F, T):
        vecs = []
        for c in sub:
            v = [0] * n
            for cj, s in zip(c, S):
                if cj:
                    v = [F.add(x, F.mul(cj, y)) for x, y in zip(v, s)]
            vecs.append(v)
        gens = SeriesMatrix.from_columns(
            [[LaurentScalar.monomial(F, x, 0) for x in v] for v in vecs]
        )
        out.append(hermite_lattice(B.hstack((B @ gens).shift(-1))))
    return out


def _stable_interval(low, up, M, close=None):
    """All stable lattices between ``low`` and ``up``.

    Extensions are minimal for ``M``; ``close`` maps each to the smallest
    lattice stable under the remaining commuting operators, which still
    reaches every lattice stable under all of them.
    """
    if not up.contains(low):
        return []
    seen = {low.key: low}
    frontier = [low]
    while frontier:
        nxt = []
        for lat in frontier:
            for ext in minimal_stable_extensions(lat, M, up):
                if close is not None:
                    ext = close(ext)
                if ext.key not in seen:
                    seen[ext.key] = ext
                    nxt.append(ext)
        frontier = nxt
    return sorted(seen.values(), key=lambda l: (l.det_valuation(), repr(l.key)))


def _enumerate(problem, bound):
    key = ("points", bound)
    if key not in problem._cache:
        low, up = problem.interval(bound)
        pts = []
        for lat in _stable_interval(low, up, problem.x1, problem.close_up):
            if problem.stable_all_levels(lat) and problem.side_condition(lat):
                pts.append(problem.make_point(lat))
        problem._cache[key] = pts
    return problem._cache[key]


def fiber_bounds(a, problem=None):
    """``N`` with ``pi^N L0 <= Lambda <= pi^-N L0`` for every fiber lattice."""
    pr = problem or FiberProblem.build(a, "symmetric")
    lo = smith_exponents(pr.lower().basis)
    up = smith_exponents(pr.upper().basis)
    return max(0, max(lo), -min(up))


def _enumerate_side(a, side, bound=None, certify=True, problem=None):
    pr = problem or FiberProblem.build(a, side)
    N = fiber_bounds(a, pr) if bound is None else bound
    pts = _enumerate(pr, N)
    if certify:
        more = _enumerate(pr, N + 1)
        if {p.lattice.key for p in pts} != {p.lattice.key for p in more}:
            raise Unstable(f"fiber changed between bound {N} and {N + 1}")
    return pts


def enumerate_symmetric(a, bound=None, certify=True, problem=None):
    return _enumerate_side(a, "symmetric", bound, certify, problem)


def enumerate_unitary(a, bound=None, certify=True, problem=None):
    return _enumerate_side(a, "unitary", bound, certify, problem)


def validate_point(fp, problem):
    """Re-check every defining condition of ``fp`` from scratch."""
    lat = fp.lattice
    B = lat.basis
    if not lat.contains_vector(problem.e):
        return False
    if not lat.dual_contains_covector(problem.edual):
        return False
    for i in range(1, problem.n):
        Wi = wedge_matrix(B, i)
        Winv = wedge_matrix(lat.inverse_basis(), i)
        if not (Winv @ problem.xs[i - 1] @ Wi).is_integral():
            return False
    if not problem.split:
        c = problem.cocycle
        if problem.side == "symmetric":
            lhs = hermite_lattice(c.num @ B)
            rhs = hermite_lattice(B.conj().scale(c.den))
            if lhs != rhs:
                return False
        else:
            Binv = lat.inverse_basis()
            lhs = hermite_lattice(c.num @ Binv.conj().transpose())
            rhs = hermite_lattice(B.scale(c.den))
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# weights


def eta_weight(fp, basept=None, inert=True):
    if not inert:
        return 1
    return -1 if fp.eta_exponent % 2 else 1


def ic_weight(fp, lam, q, mode="satake"):
    """Satake weight of the stratum ``mu(Lambda)`` in the closure of ``lam``.

    ``lam`` is compared in the adjoint class; ``mode="indicator"`` returns 1
    on ``Gr^{<= lam}``.
    """
    mu = fp.mu
    lam_gl = lam.adjoint().shifted(mu.total / mu.n)
    if not dominance_leq(mu, lam_gl):
        raise StratumOutOfRange(f"stratum {mu} is not below {lam}")
    if mode == "indicator":
        return Fraction(1)
    return stratum_value(lam_gl, mu, q)


def involution_star(fp, problem, d=None):
    """``Lambda* = d^-1 (Lambda^vee)`` with ``d = R^T K^-1``."""
    K = problem.krylov()
    R = problem.covector_krylov()
    Rt = R.transpose()
    dual_basis = fp.lattice.inverse_basis().transpose()
    lat = hermite_lattice(K @ Rt.adjugate() @ dual_basis).scaled(-Rt.det().valuation())
    return problem.make_point(lat)


def weighted_count(a, lam=None, side="symmetric", q=None, mode="satake", points=None, problem=None):
    """Sum over fiber points of ``(eta if symmetric) * ic_weight`` as an exact rational."""
    pr = problem or FiberProblem.build(a, side)
    pts = points if points is not None else _enumerate_side(a, side, problem=pr)
    if lam is None:
        lam = pr.boundary()
    if q is None:
        q = a.place.q
    inert = not pr.split
    total = Fraction(0)
    for fp in pts:
        w = ic_weight(fp, lam, q, mode)
        if side == "symmetric":
            w *= eta_weight(fp, inert=inert)
        total += w
    return total
