import random

import pytest
from hypothesis import given, settings, strategies as st

from jrfl.errors import NotInSymmetricSpace, NotIntegral, NotSRS
from jrfl.lattice_linalg import SeriesMatrix
from jrfl.local_fields import LocalField, eta
from jrfl.local_matching import (
    boundary_coweight,
    cartan_invariant,
    cartan_representative,
    check_cocycle,
    disc_n,
    group_invariants,
    involution_element,
    is_srs_element,
    lift_basepoint,
    lift_to_monoid,
    match_record,
    newton_point,
    obstruction,
    random_integral_unit_matrix,
    random_symmetric_element,
    solve_cocycle,
    transfer_factor,
    w0_matrix,
)
from jrfl.monoid_invariants import InvariantPoint, deformed_invariants, random_twisted
from jrfl.satake import Coweight, dominance_leq

from conftest import inert, seeds, split

PLACES = {2: inert(5, 2), 3: inert(7, 3)}


def twisted(n, seed, **kw):
    return random_twisted(PLACES[n], random.Random(seed), **kw)


def twisted_conjugate(A, g):
    """``g^-1 A conj(g)`` for ``g`` with a constant determinant."""
    ginv = g.adjugate().scale(g.det().inverse(None))
    return ginv @ A @ g.conj()


# -- base points ---------------------------------------------------------------


@given(seeds, st.sampled_from([2, 3]))
def test_base_point_roundtrip(seed, n):
    a = twisted(n, seed)
    bp = lift_basepoint(a)
    assert deformed_invariants(bp.deformed).same_coordinates(a)


def test_base_point_rank_two_shape():
    place = PLACES[2]
    lf = LocalField(place)
    u = lf.const(3)
    a = InvariantPoint((lf.pi(1),), (u,), (lf.zero(),), lf.one(), place)
    g = lift_basepoint(a).x1
    assert g == SeriesMatrix([[u, -lf.one()], [lf.pi(1), lf.zero()]])
    assert g.det().valuation() == 1


@given(seeds, st.sampled_from([2, 3]))
def test_base_point_determinant_is_abelianization_monomial(seed, n):
    a = twisted(n, seed, z_vals=[1] * (n - 1))
    g = lift_basepoint(a).x1
    mono = a.z[0] * 0 + 1
    for i, z in enumerate(a.z, start=1):
        mono = mono * z ** (n - i)
    assert g.det() == mono or g.det() == -mono


def test_base_point_requires_integrality():
    place = PLACES[2]
    lf = LocalField(place)
    a = InvariantPoint((lf.pi(-1),), (lf.zero(),), (lf.zero(),), lf.one(), place)
    with pytest.raises(NotIntegral):
        lift_basepoint(a)


# -- cocycles ------------------------------------------------------------------


@settings(max_examples=25)
@given(seeds, st.sampled_from([2, 3]))
def test_cocycle_identities_and_parity(seed, n):
    a = twisted(n, seed)
    s = solve_cocycle(a, "symmetric")
    h = solve_cocycle(a, "unitary")
    assert check_cocycle(s)
    assert check_cocycle(h)
    assert h.det_valuation() % 2 == a.val_disc() % 2


def test_cocycle_at_split_place_is_trivial():
    a = random_twisted(split(5, 2), random.Random(1))
    s = solve_cocycle(a, "symmetric")
    assert s.num == SeriesMatrix.identity(2, s.num.one())


def test_cocycle_side_validation():
    with pytest.raises(ValueError):
        solve_cocycle(twisted(2, 0), "orthogonal")


@settings(max_examples=25)
@given(seeds, st.sampled_from([2, 3]))
def test_involution_element_relations(seed, n):
    a = twisted(n, seed)
    bp = lift_basepoint(a)
    d = involution_element(a)
    D, den = d.num, d.den
    x1 = bp.x1
    e = SeriesMatrix.column_vector(bp.e)
    ed = SeriesMatrix.row_vector(bp.edual)
    assert D @ x1 == x1.transpose() @ D
    assert D @ e == ed.transpose().scale(den)
    assert e.transpose() @ D == ed.scale(den)


# -- obstruction and coweights --------------------------------------------------


@pytest.mark.parametrize("parity, expected", [(0, "trivial"), (1, "nontrivial")])
def test_obstruction_follows_parity(parity, expected):
    for seed in range(10):
        a = twisted(2, seed, disc_parity=parity)
        assert obstruction(a) == expected


def test_obstruction_examples_val_zero_and_one():
    rng = random.Random(2)
    seen = set()
    while len(seen) < 2:
        a = random_twisted(PLACES[2], rng)
        v = a.val_disc()
        if v in (0, 1):
            seen.add(v)
            assert obstruction(a) == ("trivial" if v == 0 else "nontrivial")


def test_split_place_has_no_obstruction():
    a = random_twisted(split(5, 2), random.Random(0), disc_parity=1)
    assert obstruction(a) == "trivial"


def test_boundary_coweight_examples():
    assert boundary_coweight(twisted(3, 1)) == Coweight.zero(3).adjoint()
    lam = boundary_coweight(twisted(2, 1, z_vals=[2]))
    assert lam.simple_root_pairings() == (2,)
    lam3 = boundary_coweight(twisted(3, 1, z_vals=[1, 1]))
    assert lam3.simple_root_pairings() == (1, 1)


def test_newton_point_examples():
    lf = LocalField(PLACES[2])
    # unit eigenvalues
    a = InvariantPoint((lf.const(2),), (lf.const(3),), (lf.zero(),), lf.one(), PLACES[2])
    assert newton_point(a) == Coweight.zero(2).adjoint()
    # char poly T^2 - pi: both roots of valuation 1/2, centred to 0
    b = InvariantPoint((lf.pi(1),), (lf.zero(),), (lf.zero(),), lf.one(), PLACES[2])
    assert newton_point(b) == Coweight.zero(2).adjoint()
    # T^2 - T - ... with z = pi^2: slopes (0, 2) centre to (-1, 1)
    c = InvariantPoint((lf.pi(2),), (lf.one(),), (lf.zero(),), lf.one(), PLACES[2])
    assert newton_point(c) == Coweight((1, -1))


@given(seeds)
def test_newton_point_is_dominated_by_boundary(seed):
    a = twisted(3, seed, z_vals=[1, 1])
    assert dominance_leq(newton_point(a), boundary_coweight(a))


def test_match_record_fields():
    rec = match_record(twisted(2, 4))
    assert rec["parity"] == rec["val_disc"] % 2
    assert rec["obstruction"] in ("trivial", "nontrivial")


# -- group side ------------------------------------------------------------------


@pytest.mark.parametrize("q", [5, 7])
def test_longest_element_representative(q):
    place = inert(q, 2)
    lf = LocalField(place)
    A = cartan_representative(Coweight((0, 0)), lf)
    assert A @ A.conj() == SeriesMatrix.identity(2, lf.one())
    inv = group_invariants(A)
    assert inv.det * inv.det.conj() == lf.one()
    assert disc_n(A).valuation() == 0


@pytest.mark.parametrize("lam", [(0, 0, 0), (1, 0, -1), (2, 0, -2)])
def test_cartan_invariant_of_representatives(lam):
    lf = LocalField(PLACES[3])
    A = cartan_representative(Coweight(lam), lf)
    assert cartan_invariant(A) == Coweight(lam)


def test_cartan_invariant_of_integral_units():
    rng = random.Random(6)
    place = PLACES[3]
    for _ in range(20):
        A = random_symmetric_element(place, rng, spread=0)
        assert cartan_invariant(A) == Coweight((0, 0, 0))


def embedded_h(lf, rng, n, k=0):
    """``diag(h', 1)`` with ``h'`` in GL_(n-1)(F_v) and ``val det h' = k``."""
    one, zero = lf.one(), lf.zero()
    steps = None if n > 2 else 0
    block = random_integral_unit_matrix(lf, rng, n - 1, rational=True, steps=steps)
    rows = [list(r) + [zero] for r in block.rows]
    rows[0] = [x * lf.pi(k) for x in rows[0][:-1]] + [zero]
    rows.append([zero] * (n - 1) + [one])
    h = SeriesMatrix(rows, zero)
    return h, h.adjugate().scale(h.det().inverse(None))


@settings(max_examples=20)
@given(seeds, st.sampled_from([2, 3]))
def test_group_invariants_under_h_conjugation(seed, n):
    rng = random.Random(seed)
    place = PLACES[n]
    lf = LocalField(place)
    A = random_symmetric_element(place, rng, spread=1)
    h, hinv = embedded_h(lf, rng, n, rng.randint(-1, 1))
    B = hinv @ A @ h
    ia, ib = group_invariants(A), group_invariants(B)
    assert ia.det == ib.det and ia.a == ib.a and ia.b == ib.b
    assert disc_n(A) == disc_n(B)


@settings(max_examples=20)
@given(seeds, st.sampled_from([2, 3]))
def test_cartan_invariant_under_twisted_conjugation(seed, n):
    rng = random.Random(seed)
    place = PLACES[n]
    lf = LocalField(place)
    A = random_symmetric_element(place, rng, spread=2)
    B = twisted_conjugate(A, random_integral_unit_matrix(lf, rng, n))
    assert B @ B.conj() == SeriesMatrix.identity(n, lf.one())
    assert cartan_invariant(A) == cartan_invariant(B)


def test_group_membership_is_checked():
    lf = LocalField(PLACES[2])
    M = SeriesMatrix([[lf.pi(1), lf.zero()], [lf.zero(), lf.one()]])
    with pytest.raises(NotInSymmetricSpace):
        group_invariants(M)


@settings(max_examples=40)
@given(seeds, st.sampled_from([2, 3]))
def test_lift_parity_link(seed, n):
    rng = random.Random(seed)
    place = PLACES[n]
    A = random_symmetric_element(place, rng, spread=1)
    if not is_srs_element(A):
        with pytest.raises(NotSRS):
            lift_to_monoid(A, place)
        return
    a = lift_to_monoid(A, place)
    assert a.val_disc() % 2 == disc_n(A).valuation() % 2
    assert boundary_coweight(a) == cartan_invariant(A).adjoint()


def test_lift_of_unit_cartan_has_trivial_boundary():
    lf = LocalField(PLACES[2])
    rng = random.Random(8)
    g = random_integral_unit_matrix(lf, rng, 2)
    A = twisted_conjugate(cartan_representative(Coweight((0, 0)), lf), g)
    if is_srs_element(A):
        assert boundary_coweight(lift_to_monoid(A, PLACES[2])) == Coweight.zero(2).adjoint()


# -- transfer factor ----------------------------------------------------------------


def test_transfer_factor_examples():
    place = inert(5, 2)
    lf = LocalField(place)
    one, zero = lf.one(), lf.zero()
    # e^vee A = (pi, 0): the wedge e^vee ^ e^vee A has valuation 1
    u = lf.const(2)
    A = SeriesMatrix([[zero, u.conj().inverse(None) * lf.pi(-1)], [lf.pi(1) * u, zero]])
    assert A @ A.conj() == SeriesMatrix.identity(2, one)
    assert transfer_factor(A) == -1
    B = w0_matrix(2, one).scale(cartan_representative(Coweight((0, 0)), lf)[1, 0])
    assert transfer_factor(B) == 1
    assert transfer_factor(A, split(5, 2)) == 1


@settings(max_examples=40)
@given(seeds, st.sampled_from([2, 3]))
def test_transfer_factor_twists_by_eta_of_det_h(seed, n):
    rng = random.Random(seed)
    place = PLACES[n]
    lf = LocalField(place)
    A = random_symmetric_element(place, rng, spread=1)
    if not is_srs_element(A):
        return
    h, hinv = embedded_h(lf, rng, n, rng.randint(-2, 2))
    B = hinv @ A @ h
    assert transfer_factor(B) == eta(h.det(), place) * transfer_factor(A)
