import random

import pytest
from hypothesis import given, strategies as st

from jrfl.errors import RankDeficient
from jrfl.lattice_linalg import (
    LatticeFilter,
    SeriesMatrix,
    dual_lattice,
    enumerate_lattices,
    hermite_lattice,
    is_selfdual_hermitian,
    smith_exponents,
    smith_normal_form,
    standard_lattice,
    wedge_matrix,
)
from jrfl.local_fields import LaurentScalar, LocalField, residue_field
from jrfl.local_matching import random_integral_unit_matrix

from conftest import inert, seeds
from oracles import submodule_count, wedge_by_minors

LF = LocalField(inert(7, 3))
F = LF.residue


def rand_matrix(rng, n, low=-1, high=2):
    rows = [[LF.random(rng, val=rng.randint(low, high), length=2) for _ in range(n)] for _ in range(n)]
    return SeriesMatrix(rows)


def rand_invertible(rng, n):
    while True:
        M = rand_matrix(rng, n)
        if not M.det().is_zero():
            return M


def diag(*exps):
    return SeriesMatrix.diagonal([LF.pi(k) for k in exps], LF.zero())


# -- Smith ----------------------------------------------------------------


def test_smith_diagonal():
    assert smith_exponents(diag(1, -1)) == (1, -1)


def test_smith_antidiagonal():
    M = SeriesMatrix([[LF.zero(), LF.pi(1)], [LF.one(), LF.zero()]])
    assert smith_exponents(M) == (1, 0)


@given(seeds)
def test_smith_unimodular_invariance(seed):
    rng = random.Random(seed)
    M = rand_invertible(rng, 3)
    U = random_integral_unit_matrix(LF, rng, 3)
    V = random_integral_unit_matrix(LF, rng, 3)
    exps = smith_exponents(M)
    assert smith_exponents(U @ M @ V) == exps
    assert sum(exps) == M.det().valuation()


@given(seeds)
def test_smith_normal_form_factorization(seed):
    rng = random.Random(seed)
    M = rand_invertible(rng, 2)
    exps, U, V = smith_normal_form(M)
    D = U @ M @ V
    for i in range(2):
        for j in range(2):
            if i != j:
                assert D[i, j].is_zero_to_precision()
        assert D[i, i].valuation() == exps[i]
    assert U.det().valuation() == 0 and V.det().valuation() == 0


# -- Hermite and duals ----------------------------------------------------


def test_hermite_identity():
    lat = hermite_lattice(SeriesMatrix.identity(3, LF.one()))
    assert lat == standard_lattice(3, F)


@given(seeds)
def test_hermite_coset_invariance(seed):
    rng = random.Random(seed)
    g = rand_invertible(rng, 3)
    u = random_integral_unit_matrix(LF, rng, 3)
    a, b = hermite_lattice(g), hermite_lattice(g @ u)
    assert a == b
    assert hermite_lattice(a.basis) == a


def test_hermite_small_example_against_spans():
    lf = LocalField(inert(5, 2))
    M = SeriesMatrix([[lf.pi(1), lf.one()], [lf.zero(), lf.one()]])
    lat = hermite_lattice(M)
    assert lat.det_valuation() == 1
    # the O-span of (pi, 0), (1, 1) has index q in O^2 and misses e_1
    assert lat.contains_vector([lf.pi(1), lf.zero()])
    assert lat.contains_vector([lf.one(), lf.one()])
    assert not lat.contains_vector([lf.one(), lf.zero()])
    assert standard_lattice(2, lf.residue).contains(lat)


def test_hermite_rank_deficient():
    M = SeriesMatrix([[LF.one(), LF.one()], [LF.one(), LF.one()]])
    with pytest.raises(RankDeficient):
        hermite_lattice(M)


def test_dual_examples():
    L0 = standard_lattice(3, F)
    assert dual_lattice(L0) == L0
    lat = hermite_lattice(diag(2, 0, -1))
    assert dual_lattice(lat) == hermite_lattice(diag(-2, 0, 1))


@given(seeds)
def test_dual_reflexive(seed):
    rng = random.Random(seed)
    lat = hermite_lattice(rand_invertible(rng, 3))
    assert dual_lattice(dual_lattice(lat)) == lat


# -- wedges ----------------------------------------------------------------


def test_wedge_identity_and_top():
    I = SeriesMatrix.identity(3, LF.one())
    for i in (1, 2, 3):
        W = wedge_matrix(I, i)
        assert W == SeriesMatrix.identity(W.nrows, LF.one())
    rng = random.Random(4)
    M = rand_matrix(rng, 2)
    assert wedge_matrix(M, 2)[0, 0] == M.det()


@given(seeds, st.integers(1, 3))
def test_wedge_matches_minor_oracle_and_is_multiplicative(seed, i):
    rng = random.Random(seed)
    A, B = rand_matrix(rng, 3), rand_matrix(rng, 3)
    assert wedge_matrix(A, i) == wedge_by_minors(A, i)
    assert wedge_matrix(A @ B, i) == wedge_matrix(A, i) @ wedge_matrix(B, i)


# -- hermitian self-duality ------------------------------------------------


def test_selfdual_examples():
    lf = LocalField(inert(5, 2))
    I = SeriesMatrix.identity(2, lf.one())
    L0 = standard_lattice(2, lf.residue)
    assert is_selfdual_hermitian(L0, I)
    assert not is_selfdual_hermitian(L0.scaled(1), I)


@pytest.mark.parametrize("k, expect_some", [(1, False), (2, True)])
def test_selfdual_against_gram_brute_force(k, expect_some):
    # val det h odd leaves no self-dual lattice at all
    lf = LocalField(inert(5, 2))
    h = SeriesMatrix.diagonal([lf.one(), lf.pi(k)], lf.zero())
    hinv = SeriesMatrix.diagonal([lf.one(), lf.pi(-k)], lf.zero())
    hits = 0
    for lat in enumerate_lattices(1, rank=2, field=lf.residue):
        B = lat.basis
        gram = B.conj_transpose() @ hinv @ B
        brute = gram.is_integral() and gram.det().valuation() == 0
        assert is_selfdual_hermitian(lat, h) == brute
        hits += brute
    assert (hits > 0) == expect_some


# -- enumeration -----------------------------------------------------------


def test_enumerate_rank_one():
    lats = enumerate_lattices(1, rank=1, field=residue_field(5))
    assert sorted(l.diag for l in lats) == [(-1,), (0,), (1,)]


def test_enumerate_rank_two_against_submodule_oracle():
    # lattices between pi L0 and pi^-1 L0 <-> submodules of (O/pi^2)^2
    assert len(enumerate_lattices(1, rank=2, field=residue_field(3))) == submodule_count(3, 2)
    # frozen from the same oracle's closed form q^2 + 3q + 5 at q = 5
    assert len(enumerate_lattices(1, rank=2, field=residue_field(5))) == 45


def test_enumeration_unique_keys():
    lats = enumerate_lattices(2, rank=2, field=residue_field(5))
    assert len({l.key for l in lats}) == len(lats)


class _StableUnder(LatticeFilter):
    def __init__(self, M):
        self.M = M

    def accept(self, lattice):
        return lattice.is_stable_under(self.M)


def test_filter_soundness_against_post_filter():
    field = residue_field(5)
    one = LaurentScalar.from_int(field, 1)
    M = SeriesMatrix.diagonal([LaurentScalar.monomial(field, 1, 1), one], one * 0)
    full = enumerate_lattices(2, rank=2, field=field)
    post = {l.key for l in full if l.is_stable_under(M)}
    assert post
    assert {l.key for l in enumerate_lattices(2, [_StableUnder(M)], rank=2, field=field)} == post


def test_enumeration_independent_of_workers():
    field = residue_field(5)
    a = [l.key for l in enumerate_lattices(1, rank=2, field=field, workers=1)]
    b = [l.key for l in enumerate_lattices(1, rank=2, field=field, workers=2)]
    assert a == b
