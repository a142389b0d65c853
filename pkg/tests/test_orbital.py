import random
from fractions import Fraction

import pytest

from jrfl.errors import NotSigmaOutFixed, RankUnsupported
from jrfl.local_fields import LocalField
from jrfl.local_matching import (
    cartan_invariant,
    disc_n,
    is_srs_element,
    random_symmetric_element,
    random_unitary_element,
)
from jrfl.monoid_invariants import random_twisted
from jrfl.orbital import (
    case_a_scenario,
    case_b_scenario,
    direct_oi_symmetric,
    direct_oi_unitary,
    fl_check,
    functional_equation_check,
    oi_double_path,
    place_of_matrix,
    random_fl_point,
    stratum_weight,
)
from jrfl.satake import Coweight, satake_value

from conftest import inert, split


def srs_symmetric(place, rng, spread=1):
    while True:
        A = random_symmetric_element(place, rng, spread=spread)
        if is_srs_element(A):
            return A


# -- direct orbital integrals ----------------------------------------------------


def test_place_is_recovered_from_matrix():
    rng = random.Random(0)
    for place in (inert(5, 2), split(7, 2), inert(7, 3)):
        A = random_symmetric_element(place, rng)
        got = place_of_matrix(A)
        assert (got.q, got.n, got.kind) == (place.q, place.n, place.kind)


def test_stratum_weight_off_closure_is_zero():
    assert stratum_weight(Coweight((2, -2)), Coweight((1, -1)), 5) == 0
    assert stratum_weight(Coweight((0, 0)), Coweight((1, -1)), 5) == Fraction(1, 5)
    assert stratum_weight(Coweight((0, 0)), Coweight((1, -1)), 5, mode="indicator") == 1


def test_symmetric_oi_vanishes_for_odd_discriminant():
    place = inert(5, 2)
    rng = random.Random(4)
    found = 0
    while found < 5:
        A = srs_symmetric(place, rng)
        if disc_n(A).valuation() % 2 == 0:
            continue
        found += 1
        lam = cartan_invariant(A).adjoint()
        assert direct_oi_symmetric(A, lam) == 0


def test_unitary_oi_inert_single_coset():
    place = inert(5, 2)
    rng = random.Random(3)
    for _ in range(10):
        A = random_unitary_element(place, rng, spread=1)
        mu = cartan_invariant(A, "G'").adjoint()
        assert direct_oi_unitary(A, mu) == satake_value(mu, mu, 5)
        smaller = Coweight((0, 0))
        if mu != smaller:
            assert direct_oi_unitary(A, smaller) == 0


def test_unitary_oi_needs_rank_two():
    place = inert(7, 3)
    A = random_unitary_element(place, random.Random(1))
    with pytest.raises(RankUnsupported):
        direct_oi_unitary(A, Coweight.zero(3))


@pytest.mark.parametrize("place", [inert(5, 2), split(5, 2), inert(7, 2)])
def test_double_path_symmetric(place):
    rng = random.Random(place.q)
    for _ in range(8):
        A = srs_symmetric(place, rng, spread=1)
        rep = oi_double_path(A, "S_n")
        assert rep["verdict"] == "equal", rep


@pytest.mark.parametrize("place", [inert(5, 2), split(5, 2)])
def test_double_path_unitary(place):
    rng = random.Random(11)
    done = 0
    while done < 8:
        A = random_unitary_element(place, rng, spread=2)
        if not is_srs_element(A):
            continue
        rep = oi_double_path(A, "G'")
        assert rep["verdict"] == "equal", rep
        done += 1


# -- fundamental lemma checks ------------------------------------------------------


def test_fl_check_split_place():
    place = split(5, 2)
    rng = random.Random(2)
    for _ in range(4):
        a = random_twisted(place, rng)
        rep = fl_check(a)
        assert rep.verdict == "equal" and rep.lhs == rep.rhs


@pytest.mark.parametrize("place", [inert(5, 2), inert(7, 3)])
def test_fl_check_odd_discriminant(place):
    rng = random.Random(8)
    for _ in range(3):
        a = random_twisted(place, rng, disc_parity=1)
        rep = fl_check(a, mode="indicator")
        assert rep.verdict == "skipped_odd_disc"
        assert rep.lhs == rep.rhs == 0


@pytest.mark.parametrize("lam", [(0, 0), (1, -1), (2, -2)])
def test_fl_check_rank_two_random(lam):
    place = inert(5, 2)
    rng = random.Random(sum(lam) + 7 * lam[0])
    for _ in range(6):
        a = random_fl_point(place, rng, Coweight(lam))
        rep = fl_check(a, Coweight(lam))
        assert rep.verdict == "equal", rep.to_json()


def test_fl_check_rejects_non_fixed_weight():
    a = random_fl_point(inert(7, 3), random.Random(0))
    with pytest.raises(NotSigmaOutFixed):
        fl_check(a, Coweight((1, 0, 0)))


def test_report_shape():
    a = random_fl_point(inert(5, 2), random.Random(0))
    rec = fl_check(a).to_json()
    assert set(rec) == {"kind", "a_digest", "lambda", "lhs", "rhs", "verdict", "timings", "bounds"}
    assert rec["kind"] == "fl_report"


# -- scenarios ------------------------------------------------------------------------


def test_case_a_rank_three():
    a, expected = case_a_scenario(3, 7)
    assert expected == 1
    rep = fl_check(a, mode="indicator")
    assert rep.lhs == rep.rhs == 1


@pytest.mark.parametrize("pair", [(0, 0), (1, 0), (0, 1), (1, 1)])
def test_case_b_rank_two(pair):
    a, expected = case_b_scenario(2, 5, [pair])
    assert expected == sum(pair) + 1
    rep = fl_check(a, mode="indicator")
    assert rep.lhs == rep.rhs == expected


def test_case_b_rank_two_fundamental_coweight():
    a, expected = case_b_scenario(2, 5, [(1, 0)], lam=Coweight((1, 0)))
    assert expected == 2
    rep = fl_check(a, Coweight((1, 0)), mode="indicator")
    assert rep.lhs == rep.rhs == 2


def test_case_b_rank_three():
    a, expected = case_b_scenario(3, 7)
    assert expected == 1
    rep = fl_check(a, mode="indicator")
    assert rep.lhs == rep.rhs == 1
    a, expected = case_b_scenario(3, 7, [(1, 0)])
    rep = fl_check(a, mode="indicator")
    assert rep.lhs == rep.rhs == expected == 2
    with pytest.raises(NotSigmaOutFixed):
        case_b_scenario(3, 7, lam=Coweight((1, 0, 0)))


# -- functional equation ------------------------------------------------------------------


@pytest.mark.parametrize("place", [inert(5, 2), inert(7, 3)])
def test_functional_equation_across_parities(place):
    rng = random.Random(6)
    for parity in (0, 1, 0, 1):
        a = random_twisted(place, rng, disc_parity=parity)
        assert functional_equation_check(a, "indicator")


def test_functional_equation_is_inert_only():
    a = random_twisted(split(5, 2), random.Random(0))
    with pytest.raises(ValueError):
        functional_equation_check(a)
