"""Orbital integrals, the fundamental-lemma check, and the Case A / Case B scenarios."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    ConstraintUnsatisfiable,
    NotInSymmetricSpace,
    NotIntegral,
    NotSigmaOutFixed,
    NotSRS,
    RankUnsupported,
    SumMismatch,
    Unstable,
)
from .fibers import (
    FiberProblem,
    _enumerate_side,
    eta_weight,
    fiber_bounds,
    ic_weight,
    involution_star,
    weighted_count,
)
from .lattice_linalg import SeriesMatrix, enumerate_lattices
from .local_fields import LaurentScalar, LocalField, PlaceData, SplitPair
from .local_matching import (
    _check_group,
    _pair_gram,
    boundary_coweight,
    cartan_invariant,
    disc_n,
    is_srs_element,
    lift_to_monoid,
    newton_point,
    point_digest,
    random_symmetric_element,
    transfer_factor,
)
from .monoid_invariants import (
    DeformedPoint,
    _anti_invariant_unit,
    check_twisted,
    deformed_invariants,
    random_twisted,
    reconstruct_from_x1,
)
from .satake import Coweight, dominance_leq, stratum_value, sigma_out_fixed

__all__ = [
    "FLReport",
    "stratum_weight",
    "direct_oi_symmetric",
    "direct_oi_unitary",
    "default_search_bound",
    "lifted_transfer_factor",
    "fl_check",
    "functional_equation_check",
    "case_a_scenario",
    "case_b_scenario",
    "place_of_matrix",
    "random_fl_point",
    "oi_double_path",
]


def _fmt(x):
    return str(x) if isinstance(x, Fraction) else str(Fraction(x))


@dataclass
class FLReport:
    a_digest: str
    lam: Coweight
    lhs: Fraction
    rhs: Fraction
    verdict: str
    timings: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "kind": "fl_report",
            "a_digest": self.a_digest,
            "lambda": self.lam.to_json(),
            "lhs": _fmt(self.lhs),
            "rhs": _fmt(self.rhs),
            "verdict": self.verdict,
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
            "bounds": dict(self.bounds),
        }


def place_of_matrix(A):
    """Recover the place from the coefficient field of ``A``."""
    z = A.zero
    n = A.nrows
    if isinstance(z, SplitPair):
        F = z.left.field
        return PlaceData(F.p, F.degree, n, "split")
    F = z.field
    return PlaceData(F.p, F.degree // 2, n, "inert")


def stratum_weight(mu, lam, q, mode="satake"):
    """``f_lam`` at the Cartan stratum ``mu`` (zero off ``Gr^{<= lam}``)."""
    lam_gl = lam.adjoint().shifted(mu.total / mu.n)
    try:
        if not dominance_leq(mu, lam_gl):
            return Fraction(0)
    except SumMismatch:
        return Fraction(0)
    if mode == "indicator":
        return Fraction(1)
    try:
        return stratum_value(lam_gl, mu, q)
    except SumMismatch:
        return Fraction(0)


def default_search_bound(A, lam):
    try:
        d = disc_n(A)
    except NotInSymmetricSpace:
        d = _pair_gram(A)
    if isinstance(d, SplitPair):
        d = d.left
    return int(d.valuation() + lam.adjoint().two_rho_pairing()) + 2


def _embed_base(lf, s):
    t = LaurentScalar(s.coeffs, s.val, None, lf.residue)
    return SplitPair(t, t) if lf.split else t


def _embed_pair(lf, s, t):
    return SplitPair(LaurentScalar(s.coeffs, s.val, None, lf.residue),
                     LaurentScalar(t.coeffs, t.val, None, lf.residue))


def _oi_at_bound(A, lam, place, lf, bound, mode, group="S_n", twisted=True):
    n = A.nrows
    one = lf.one()
    zero = one * 0
    total = Fraction(0)
    for lat in enumerate_lattices(bound, rank=n - 1, field=lf.base_residue):
        hb = lat.basis
        hinv = lat.inverse_basis()
        h = [[zero] * n for _ in range(n)]
        hi = [[zero] * n for _ in range(n)]
        for i in range(n - 1):
            for j in range(n - 1):
                if group == "G'" and lf.split:
                    # H' at a split place is {(h, h^-T)}
                    h[i][j] = _embed_pair(lf, hb.rows[i][j], hinv.rows[j][i])
                    hi[i][j] = _embed_pair(lf, hinv.rows[i][j], hb.rows[j][i])
                else:
                    h[i][j] = _embed_base(lf, hb.rows[i][j])
                    hi[i][j] = _embed_base(lf, hinv.rows[i][j])
        h[n - 1][n - 1] = one
        hi[n - 1][n - 1] = one
        B = SeriesMatrix(hi, zero) @ A @ SeriesMatrix(h, zero)
        w = stratum_weight(cartan_invariant(B, group), lam, place.q, mode)
        if w and twisted and place.inert and lat.det_valuation() % 2:
            w = -w
        total += w
    return total


def direct_oi_symmetric(A, lam, search_bound=None, *, place=None, mode="satake", certify=True):
    """``sum_h f_lam(h^-1 A h) eta(det h)`` over ``h`` in ``H(F)/H(O)``, ``H = GL_{n-1}``.

    Cosets are lattices in ``F^{n-1}`` inside the box of radius ``search_bound``;
    the value is certified by recomputing at ``search_bound + 1``.
    """
    _check_group(A, "S_n")
    place = place or place_of_matrix(A)
    lf = LocalField(place)
    N = default_search_bound(A, lam) if search_bound is None else search_bound
    val = _oi_at_bound(A, lam, place, lf, N, mode)
    if certify and _oi_at_bound(A, lam, place, lf, N + 1, mode) != val:
        raise Unstable(f"orbital integral changed between bound {N} and {N + 1}")
    return val


def direct_oi_unitary(Aprime, lam, search_bound=None, *, place=None, mode="satake", certify=True):
    """``sum_h f'_lam(h^-1 A' h)`` over ``H'(F)/H'(O)`` for ``n = 2``.

    At an inert place ``H' = U_1`` is compact and the sum is the single term
    ``f'_lam(A')``; at a split place ``H' = GL_1`` and cosets are ``pi^k``.
    """
    _check_group(Aprime, "G'")
    if Aprime.nrows != 2:
        raise RankUnsupported("the direct unitary orbital integral is implemented for n = 2 only")
    place = place or place_of_matrix(Aprime)
    if place.inert:
        return stratum_weight(cartan_invariant(Aprime, "G'"), lam, place.q, mode)
    lf = LocalField(place)
    N = default_search_bound(Aprime, lam) if search_bound is None else search_bound
    val = _oi_at_bound(Aprime, lam, place, lf, N, mode, "G'", twisted=False)
    if certify and _oi_at_bound(Aprime, lam, place, lf, N + 1, mode, "G'", twisted=False) != val:
        raise Unstable(f"orbital integral changed between bound {N} and {N + 1}")
    return val


def lifted_transfer_factor(A, lam, place=None):
    """``Delta(c A)`` for the scalar ``c = pi^{lam_1} w`` used by :func:`lift_to_monoid`.

    Scaling by ``c`` multiplies the covector Krylov determinant by
    ``c^{n(n-1)/2}``; this is the sign relating the orbital integral of ``A``
    to the eta-weighted count on the lifted point.
    """
    place = place or place_of_matrix(A)
    base = transfer_factor(A, place)
    if not place.inert:
        return base
    n = A.nrows
    lam1 = lam.adjoint().parts[0]
    if lam1.denominator != 1:
        raise ConstraintUnsatisfiable(f"{lam} is not realized by a scalar multiple of A")
    return base * (-1) ** ((int(lam1) * n * (n - 1) // 2) % 2)


def fl_check(a, lam=None, *, mode="satake"):
    """Compare the eta- and IC-weighted symmetric count with the IC-weighted unitary count."""
    boundary = boundary_coweight(a)
    lam = boundary if lam is None else lam
    if not sigma_out_fixed(lam):
        raise NotSigmaOutFixed(f"{lam} is not fixed by the outer automorphism")
    if not lam.same_adjoint(boundary):
        raise ConstraintUnsatisfiable(f"boundary {boundary} of the point differs from {lam}")
    timings, bounds = {}, {}
    sides = {}
    for side in ("symmetric", "unitary"):
        t0 = time.perf_counter()
        pr = FiberProblem.build(a, side)
        bounds[side] = fiber_bounds(a, pr)
        pts = _enumerate_side(a, side, problem=pr)
        sides[side] = weighted_count(a, lam, side, a.place.q, mode, points=pts, problem=pr)
        timings[side] = time.perf_counter() - t0
    lhs, rhs = sides["symmetric"], sides["unitary"]
    if a.place.inert and a.val_disc() % 2:
        verdict = "skipped_odd_disc" if lhs == 0 and rhs == 0 else "unequal"
    else:
        verdict = "equal" if lhs == rhs else "unequal"
    return FLReport(point_digest(a), lam.adjoint(), lhs, rhs, verdict, timings, bounds)


def functional_equation_check(a, weight="satake", lam=None):
    """Pair fiber points by ``Lambda -> Lambda*`` and test ``Cnt = eta(Disc) Cnt``."""
    if not a.place.inert:
        raise ValueError("the functional equation is stated at inert places")
    pr = FiberProblem.build(a, "symmetric")
    pts = _enumerate_side(a, "symmetric", problem=pr)
    lam = pr.boundary() if lam is None else lam
    q = a.place.q
    by_key = {p.lattice.key: p for p in pts}
    sign = -1 if a.val_disc() % 2 else 1
    total = Fraction(0)
    for p in pts:
        s = involution_star(p, pr)
        if s.lattice.key not in by_key:
            return False
        if involution_star(s, pr).lattice.key != p.lattice.key:
            return False
        if not s.mu.same_adjoint(p.mu):
            return False
        if eta_weight(s) != sign * eta_weight(p):
            return False
        w = ic_weight(p, lam, q, weight)
        if ic_weight(s, lam, q, weight) != w:
            return False
        total += eta_weight(p) * w
    return total == sign * total


# ---------------------------------------------------------------------------
# scenarios


def _norm_one_constants(lf):
    F = lf.residue
    return [c for c in range(2, F.size) if F.mul(c, F.conj(c)) == 1]


def _swap_block(lf, r):
    """``P diag(r, 1/r) P^-1`` with ``P = [[1, 1], [w, -w]]`` and the eigen-bases ``P``, ``P^-1``."""
    one = lf.one()
    om = _anti_invariant_unit(lf)
    P = SeriesMatrix([[one, one], [om, -om]])
    Pinv = P.inverse()
    r = lf.from_int(r)
    D = SeriesMatrix.diagonal([r, r.inverse()])
    return P @ D @ Pinv, P, Pinv


def _ramified_block(lf):
    """``[[x, w], [w g, x]]`` with ``x = 1 + pi``, ``w^2 g = 2 pi + pi^2``: norm one, ramified eigenvalues."""
    one = lf.one()
    om = _anti_invariant_unit(lf)
    x = one + lf.pi(1)
    g = (lf.pi(1) * 2 + lf.pi(2)) * (om * om).inverse()
    return x, om, om * g


def _pair_vectors(lf, P, Pinv, e, ed):
    """Rational vectors with eigen-coordinates ``pi^e`` and ``pi^ed`` on a swapped pair."""
    al, be = lf.pi(e), lf.pi(ed)
    col = [al * P[i, 0] + al.conj() * P[i, 1] for i in range(2)]
    row = [be * Pinv[0, j] + be.conj() * Pinv[1, j] for j in range(2)]
    return col, row


def _assemble(lf, n, blocks):
    """Block-diagonal matrix from ``(indices, block)`` pairs."""
    zero = lf.zero()
    rows = [[zero] * n for _ in range(n)]
    for idx, blk in blocks:
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                rows[i][j] = blk[a][b]
    return SeriesMatrix(rows, zero)


def _distinct_split_residues(q, count):
    """Residues ``r`` of ``F_q`` with ``r != +-1`` and ``{r, 1/r}`` pairwise disjoint."""
    used, out = set(), []
    if count == 0:
        return out
    for r in range(2, q - 1):
        inv = pow(r, -1, q)
        if r == inv or r in used or inv in used:
            continue
        out.append(r)
        used.update((r, inv))
        if len(out) == count:
            return out
    raise ConstraintUnsatisfiable(f"F_{q} has too few residues for {count} swapped pairs")


def _validate(a, boundary, newton=None):
    if not check_twisted(a):
        raise ConstraintUnsatisfiable("scenario point is not twisted")
    if not boundary_coweight(a).same_adjoint(boundary):
        raise ConstraintUnsatisfiable("scenario boundary does not match")
    if newton is not None and not newton_point(a).same_adjoint(newton):
        raise ConstraintUnsatisfiable("scenario Newton point does not match")


def case_a_scenario(n, q, pairs=()):
    """Ramified block on indices ``1, n``; the middle carries ``pairs`` of swapped eigenvalues.

    ``pairs`` lists ``(e_i, e_i^vee)`` valuations for each swapped pair; the
    other middle indices are fixed by Frobenius.  Returns ``(a, expected)``
    with ``expected = prod (e_i + e_i^vee + 1)``.
    """
    if n < 3:
        raise ConstraintUnsatisfiable("Case A needs n >= 3")
    pairs = list(pairs)
    fixed = n - 2 - 2 * len(pairs)
    if fixed < 0:
        raise ConstraintUnsatisfiable("too many swapped pairs for this rank")
    place = PlaceData(q, n=n, kind="inert")
    lf = LocalField(place)
    one = lf.one()
    zero = lf.zero()
    x, b12, b21 = _ramified_block(lf)
    blocks = [((0, n - 1), [[x, b12], [b21, x]])]
    e = [zero] * n
    ed = [zero] * n
    e[0] = e[n - 1] = one
    ed[0] = ed[n - 1] = one
    units = [c for c in _norm_one_constants(lf) if c != 1]
    if len(units) < fixed:
        raise ConstraintUnsatisfiable("not enough norm-one residues")
    pos = 1
    expected = 1
    for k in range(fixed):
        blocks.append(((pos,), [[lf.const(units[k])]]))
        e[pos] = ed[pos] = one
        pos += 1
    for (ev, edv), r in zip(pairs, _distinct_split_residues(q, len(pairs))):
        if ev < 0 or edv < 0:
            raise ConstraintUnsatisfiable("valuations must be non-negative")
        M, P, Pinv = _swap_block(lf, r)
        blocks.append(((pos, pos + 1), [M.row(0), M.row(1)]))
        col, row = _pair_vectors(lf, P, Pinv, ev, edv)
        e[pos], e[pos + 1] = col
        ed[pos], ed[pos + 1] = row
        expected *= ev + edv + 1
        pos += 2
    A = _assemble(lf, n, blocks)
    a = lift_to_monoid(A, place, lam=Coweight.zero(n), e=e, edual=ed)
    _validate(a, Coweight.zero(n), Coweight.zero(n))
    if a.val_disc_plus() != 1:
        raise ConstraintUnsatisfiable("Case A requires val Disc+ = 1")
    return a, expected


def case_b_scenario(n, q, pairs=(), lam=None):
    """A torus element over the unramified integers with swapped pairs ``pairs``.

    With ``lam = None`` (boundary 0) the remaining indices are fixed; at
    ``n = 2`` ``lam`` may be the fundamental coweight ``(1, 0)``, realized by
    eigenvalues ``pi`` and a unit on the swapped pair.
    """
    pairs = list(pairs)
    place = PlaceData(q, n=n, kind="inert")
    lf = LocalField(place)
    one = lf.one()
    zero = lf.zero()
    boundary = Coweight.zero(n) if lam is None else lam
    if not sigma_out_fixed(boundary):
        raise NotSigmaOutFixed(f"{boundary} is not fixed by the outer automorphism")
    if not boundary.same_adjoint(Coweight.zero(n)):
        if n != 2 or len(pairs) != 1 or not boundary.same_adjoint(Coweight((1, 0))):
            raise ConstraintUnsatisfiable("nonzero boundary is only realized for n = 2 with one swapped pair")
        (ev, edv), = pairs
        r = _distinct_split_residues(q, 1)[0]
        om = _anti_invariant_unit(lf)
        P = SeriesMatrix([[one, one], [om, -om]])
        Pinv = P.inverse()
        rr = lf.from_int(r)
        x1 = P @ SeriesMatrix.diagonal([lf.pi(1), rr]) @ Pinv
        z = (lf.pi(1) * rr,)
        col, row = _pair_vectors(lf, P, Pinv, ev, edv)
        m = reconstruct_from_x1(z, x1, place.prec)
        a = deformed_invariants(DeformedPoint(m, col, row), place)
        if not a.is_srs():
            raise ConstraintUnsatisfiable("scenario is not srs")
        _validate(a, boundary)
        return a, ev + edv + 1
    fixed = n - 2 * len(pairs)
    if fixed < 0:
        raise ConstraintUnsatisfiable("too many swapped pairs for this rank")
    units = _norm_one_constants(lf)
    units = [1] + [c for c in units if c != 1]
    if len(units) < fixed:
        raise ConstraintUnsatisfiable("not enough norm-one residues")
    blocks, e, ed = [], [zero] * n, [zero] * n
    pos = 0
    expected = 1
    for k in range(fixed):
        blocks.append(((pos,), [[lf.const(units[k])]]))
        e[pos] = ed[pos] = one
        pos += 1
    for (ev, edv), r in zip(pairs, _distinct_split_residues(q, len(pairs))):
        if ev < 0 or edv < 0:
            raise ConstraintUnsatisfiable("valuations must be non-negative")
        M, P, Pinv = _swap_block(lf, r)
        blocks.append(((pos, pos + 1), [M.row(0), M.row(1)]))
        col, row = _pair_vectors(lf, P, Pinv, ev, edv)
        e[pos], e[pos + 1] = col
        ed[pos], ed[pos + 1] = row
        expected *= ev + edv + 1
        pos += 2
    A = _assemble(lf, n, blocks)
    a = lift_to_monoid(A, place, lam=Coweight.zero(n), e=e, edual=ed)
    _validate(a, boundary, Coweight.zero(n))
    return a, expected


# ---------------------------------------------------------------------------
# sampling and the double-path orbital integral


def random_fl_point(place, rng, lam=None, *, parity=0, max_val_disc=None, max_tries=400):
    """Lift a random srs ``A`` in ``S_n`` whose Cartan class lies below ``lam``.

    The returned invariant point has boundary ``lam`` (default 0) and
    ``val Disc`` of the requested ``parity`` (``None`` for either), at most
    ``max_val_disc`` when given.
    """
    n = place.n
    lam = Coweight.zero(n) if lam is None else lam.adjoint()
    if not lam.is_integral():
        # not the class of any A in S_n: sample the invariant point directly
        z_vals = [int(lam.parts[i] - lam.parts[i + 1]) for i in range(n - 1)]
        for _ in range(max_tries):
            a = random_twisted(place, rng, z_vals=z_vals, disc_parity=parity)
            if max_val_disc is None or a.val_disc() <= max_val_disc:
                return a
        raise ConstraintUnsatisfiable("no twisted point met the constraints within the retry budget")
    spread = int(lam.parts[0] - lam.parts[-1])
    for _ in range(max_tries):
        A = random_symmetric_element(place, rng, spread=rng.randint(0, spread), length=2)
        if not is_srs_element(A):
            continue
        mu = cartan_invariant(A).adjoint()
        if not dominance_leq(mu, lam):
            continue
        try:
            a = lift_to_monoid(A, place, lam=lam)
        except (NotSRS, NotIntegral):
            continue
        if not a.is_srs():
            continue
        v = a.val_disc()
        if parity is not None and v % 2 != parity % 2:
            continue
        if max_val_disc is not None and v > max_val_disc:
            continue
        return a
    raise ConstraintUnsatisfiable("no symmetric element met the constraints within the retry budget")


def oi_double_path(A, group="S_n", lam=None, *, mode="satake"):
    """Direct coset-sum orbital integral of ``A`` against the fiber count of its lift.

    For ``S_n`` the comparison is ``Delta * OI = Cnt`` with the lifted
    transfer factor; for ``G'`` it is ``OI = Cnt`` (``n = 2``).
    """
    place = place_of_matrix(A)
    lam = cartan_invariant(A, group).adjoint() if lam is None else lam.adjoint()
    a = lift_to_monoid(A, place, lam=lam, group=group)
    if group == "S_n":
        delta = lifted_transfer_factor(A, lam, place)
        direct = direct_oi_symmetric(A, lam, place=place, mode=mode)
        count = weighted_count(a, lam, "symmetric", place.q, mode)
    else:
        delta = 1
        direct = direct_oi_unitary(A, lam, place=place, mode=mode)
        count = weighted_count(a, lam, "unitary", place.q, mode)
    return {
        "kind": "oi_report",
        "group": group,
        "place": place.kind,
        "a_digest": point_digest(a),
        "lambda": lam.to_json(),
        "delta": delta,
        "direct": _fmt(direct),
        "count": _fmt(count),
        "verdict": "equal" if delta * direct == count else "unequal",
    }
