"""Acceptance criteria 1-12.

Run under pytest for a PASS/FAIL line per criterion in the terminal summary,
or directly (``python tests/test_acceptance.py``) for the same lines on stdout.
"""

import random
import time

import pytest

from jrfl.errors import Unstable
from jrfl.fibers import (
    FiberProblem,
    enumerate_symmetric,
    enumerate_unitary,
    eta_weight,
    fiber_bounds,
    involution_star,
    weighted_count,
)
from jrfl.lattice_linalg import SeriesMatrix, wedge_matrix
from jrfl.local_fields import LocalField
from jrfl.local_matching import (
    cartan_invariant,
    check_cocycle,
    is_srs_element,
    random_integral_unit_matrix,
    random_symmetric_element,
    random_unitary_element,
    solve_cocycle,
)
from jrfl.monoid_invariants import (
    MonoidPoint,
    companion_section,
    deformed_invariants,
    deformed_section,
    hinvariants,
    pure_tensors,
    random_twisted,
    section_MH,
)
from jrfl.orbital import (
    case_a_scenario,
    case_b_scenario,
    fl_check,
    functional_equation_check,
    oi_double_path,
    random_fl_point,
)
from jrfl.satake import Coweight, evaluate, kostka_foulkes, partitions

from conftest import inert, split
from oracles import fraction_free_rank, kostka_lusztig
from test_monoid_invariants import _covector_rows, _special_linear, _wedge_rows, monomial, rand_vec, rand_z

criterion = pytest.mark.criterion


def field(q):
    # the sections are rank-agnostic algebra; the field only depends on q
    return LocalField(inert(q, 2))


def points_of(a, side, bound=None, certify=True):
    pr = FiberProblem.build(a, side)
    enum = enumerate_symmetric if side == "symmetric" else enumerate_unitary
    return pr, enum(a, bound=bound, certify=certify, problem=pr)


# -- 1 ------------------------------------------------------------------------------


@criterion(1)
def test_criterion_01_section_roundtrips():
    t0 = time.perf_counter()
    for q in (5, 7):
        lf = field(q)
        for n in (2, 3):
            rng = random.Random(1000 * q + n)
            for _ in range(1000):
                z, a, b = rand_z(lf, rng, n), rand_vec(lf, rng, n - 1), rand_vec(lf, rng, n - 1)
                _, a1, a2 = hinvariants(companion_section(z, a))
                assert tuple(x + y for x, y in zip(a1, a2)) == a
                zz, a1, a2 = hinvariants(section_MH(z, a, b))
                assert (zz, a1, a2) == (z, a, b)
                b0 = lf.random(rng, length=2)
                assert deformed_invariants(deformed_section(z, a, b, b0)).coordinates() == z + a + b + (b0,)
    assert time.perf_counter() - t0 < 10


# -- 2 ------------------------------------------------------------------------------


@criterion(2)
def test_criterion_02_low_rank_invariant_formulas():
    t0 = time.perf_counter()
    lf = field(7)
    rng = random.Random(2)
    for _ in range(100):
        A, B, C, D = rand_vec(lf, rng, 4)
        x = SeriesMatrix([[A, B], [C, D]])
        z, a1, a2 = hinvariants(MonoidPoint((x.det(),), [x]))
        assert (z[0], a1[0], a2[0]) == (A * D - B * C, A, D)
    for _ in range(100):
        g = _special_linear(lf, rng)
        t1, t2 = monomial(lf, rng), monomial(lf, rng)
        z = (t1 * t2.inverse(None), t1 * t2 * t2)
        m = MonoidPoint(z, [g.map(lambda s: t1 * s), wedge_matrix(g, 2).map(lambda s: t1 * t2 * s)])
        (A, B, C), (D, E, F), (G, H, I) = g.rows
        zz, a1, a2 = hinvariants(m)
        assert zz == z
        assert a1 == (t1 * (A + E), t1 * t2 * (A * E - B * D))
        assert a2 == (t1 * I, t1 * t2 * (A * I - C * G + E * I - F * H))
    assert time.perf_counter() - t0 < 5


# -- 3 ------------------------------------------------------------------------------


@criterion(3)
def test_criterion_03_purity_rank_test():
    rng = random.Random(3)
    fields = {2: LocalField(inert(7, 2)), 3: LocalField(inert(7, 3)), 4: LocalField(inert(11, 4))}
    for k in range(500):
        n = 2 + k % 3
        lf = fields[n]
        m = deformed_section(rand_z(lf, rng, n), rand_vec(lf, rng, n - 1), rand_vec(lf, rng, n - 1),
                             lf.random(rng, length=2))
        U = random_integral_unit_matrix(lf, rng, n)
        m = m.act(U, U.adjugate().scale(U.det().inverse(None)))
        f, fd = pure_tensors(m)
        for i in range(1, n):
            if not all(c.is_exact_zero() for c in f[i - 1]):
                assert fraction_free_rank(_wedge_rows(lf, f[i - 1], n, i)) == n - i
            if not all(c.is_exact_zero() for c in fd[i - 1]):
                assert fraction_free_rank(_covector_rows(lf, fd[i - 1], n, i)) == n - i


# -- 4 ------------------------------------------------------------------------------


@criterion(4)
def test_criterion_04_cocycle_invariants():
    for n, q in ((2, 5), (3, 7)):
        rng = random.Random(40 + n)
        for _ in range(100):
            a = random_twisted(inert(q, n), rng)
            assert a.is_srs()
            s, h = solve_cocycle(a, "symmetric"), solve_cocycle(a, "unitary")
            assert check_cocycle(s) and check_cocycle(h)
            assert h.det_valuation() % 2 == a.val_disc() % 2


# -- 5 ------------------------------------------------------------------------------


@criterion(5)
def test_criterion_05_unitary_fiber_nonempty_iff_even_disc():
    t0 = time.perf_counter()
    rng = random.Random(5)
    place = inert(5, 2)
    seen = {0: 0, 1: 0}
    while min(seen.values()) < 25:
        a = random_twisted(place, rng, disc_parity=rng.randrange(2))
        pr = FiberProblem.build(a, "unitary")
        if fiber_bounds(a, pr) > 3:
            continue
        _, pts = points_of(a, "unitary")
        parity = a.val_disc() % 2
        assert bool(pts) == (parity == 0)
        seen[parity] += 1
    assert time.perf_counter() - t0 < 120


# -- 6 ------------------------------------------------------------------------------


@criterion(6)
def test_criterion_06_odd_disc_vanishing_and_pairing():
    cases = [(inert(5, 2), 40), (inert(7, 3), 12)]
    for place, count in cases:
        rng = random.Random(60 + place.n)
        for _ in range(count):
            a = random_twisted(place, rng, disc_parity=1)
            v = a.val_disc()
            assert v % 2 == 1
            _, upts = points_of(a, "unitary")
            assert upts == []
            pr, spts = points_of(a, "symmetric")
            lam = pr.boundary()
            for mode in ("satake", "indicator"):
                assert weighted_count(a, lam, "symmetric", place.q, mode, points=spts, problem=pr) == 0
            keys = {p.lattice.key for p in spts}
            for p in spts:
                s = involution_star(p, pr)
                assert s.lattice.key in keys
                assert involution_star(s, pr).lattice == p.lattice
                assert s.mu == p.mu
                assert eta_weight(s) == -eta_weight(p)
            assert functional_equation_check(a)


# -- 7 ------------------------------------------------------------------------------


@criterion(7)
def test_criterion_07_case_a():
    a, expected = case_a_scenario(3, 7)
    rep = fl_check(a, mode="indicator")
    assert expected == 1 and rep.lhs == rep.rhs == 1
    for pair in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)]:
        a, expected = case_a_scenario(4, 11, [pair])
        assert expected == sum(pair) + 1
        rep = fl_check(a, mode="indicator")
        assert rep.lhs == rep.rhs == expected, (pair, rep.to_json())


# -- 8 ------------------------------------------------------------------------------


@criterion(8)
def test_criterion_08_case_b():
    for pair in [(0, 0), (1, 0), (0, 1), (1, 1)]:
        a, expected = case_b_scenario(2, 5, [pair])
        assert expected == sum(pair) + 1
        rep = fl_check(a, mode="indicator")
        assert rep.lhs == rep.rhs == expected
    # every fundamental coweight of GL_3 is moved by the outer automorphism
    a, expected = case_b_scenario(3, 7)
    rep = fl_check(a, mode="indicator")
    assert expected == 1 and rep.lhs == rep.rhs == 1


# -- 9 ------------------------------------------------------------------------------


@criterion(9)
def test_criterion_09_main_identity():
    t0 = time.perf_counter()
    for q in (5, 7):
        for lam in [(0, 0), (1, -1), (2, -2)]:
            rng = random.Random(q * 100 + lam[0])
            for _ in range(100):
                a = random_fl_point(inert(q, 2), rng, Coweight(lam))
                assert a.val_disc() % 2 == 0
                rep = fl_check(a, Coweight(lam))
                assert rep.verdict == "equal", rep.to_json()
    rng = random.Random(93)
    for _ in range(20):
        a = random_fl_point(inert(7, 3), rng, max_val_disc=2)
        assert a.val_disc() <= 2
        rep = fl_check(a)
        assert rep.verdict == "equal", rep.to_json()
    assert time.perf_counter() - t0 < 3600


# -- 10 -----------------------------------------------------------------------------


def _srs(sample):
    while True:
        A = sample()
        if is_srs_element(A):
            return A


@criterion(10)
def test_criterion_10_orbital_integral_double_path():
    for place in (inert(5, 2), split(5, 2)):
        rng = random.Random(100 + place.inert)
        for _ in range(50):
            A = _srs(lambda: random_symmetric_element(place, rng, spread=rng.randint(0, 2)))
            rep = oi_double_path(A, "S_n")
            assert rep["verdict"] == "equal", rep
        for _ in range(50):
            A = _srs(lambda: random_unitary_element(place, rng, spread=2))
            rep = oi_double_path(A, "G'")
            assert rep["verdict"] == "equal", rep


# -- 11 -----------------------------------------------------------------------------


def _pad(p, n):
    return tuple(p) + (0,) * (n - len(p))


@criterion(11)
def test_criterion_11_kostka_and_cartan():
    for size in range(1, 7):
        for lam in partitions(size):
            L = Coweight(_pad(lam, size))
            assert kostka_foulkes(L, L) == (1,)
            for mu in partitions(size):
                M = Coweight(_pad(mu, size))
                assert kostka_foulkes(L, M) == kostka_lusztig(L.as_ints(), M.as_ints())
    assert kostka_foulkes(Coweight((2, 0)), Coweight((1, 1))) == (0, 1)
    # K(1) counts semistandard tableaux: K_{(2,1),(1,1,1)}(1) = 2
    assert evaluate(kostka_foulkes(Coweight((2, 1, 0)), Coweight((1, 1, 1))), 1) == 2
    for k in range(500):
        n, q = (2, 5) if k % 2 == 0 else (3, 7)
        lf = LocalField(inert(q, n))
        rng = random.Random(1100 + k)
        A = random_symmetric_element(inert(q, n), rng, spread=2)
        g = random_integral_unit_matrix(lf, rng, n)
        B = g.adjugate().scale(g.det().inverse(None)) @ A @ g.conj()
        assert cartan_invariant(A) == cartan_invariant(B)


# -- 12 -----------------------------------------------------------------------------


@criterion(12)
def test_criterion_12_counts_stable_one_step_past_bound():
    cases = [(inert(5, 2), 20), (split(5, 2), 10), (inert(7, 3), 10)]
    for place, count in cases:
        rng = random.Random(120 + place.n + place.inert)
        for _ in range(count):
            a = random_twisted(place, rng)
            for side in ("symmetric", "unitary"):
                try:
                    pr, pts = points_of(a, side)
                except Unstable as exc:
                    pytest.fail(f"certificate failed: {exc}")
                N = fiber_bounds(a, pr)
                _, more = points_of(a, side, bound=N + 1, certify=False)
                assert {p.lattice.key for p in pts} == {p.lattice.key for p in more}
                lam = pr.boundary()
                here = weighted_count(a, lam, side, place.q, "indicator", points=pts, problem=pr)
                past = weighted_count(a, lam, side, place.q, "indicator", points=more, problem=pr)
                assert here == past


# -- direct run -----------------------------------------------------------------------


def main():
    tests = sorted((name, fn) for name, fn in globals().items() if name.startswith("test_criterion_"))
    failed = 0
    for name, fn in tests:
        n = int(name.split("_")[2])
        t0 = time.perf_counter()
        try:
            fn()
            verdict = "PASS"
        except (Exception, pytest.fail.Exception) as exc:  # report every criterion, not just the first failure
            verdict = f"FAIL ({type(exc).__name__}: {exc})"
            failed += 1
        print(f"criterion {n:2d}: {verdict}  [{time.perf_counter() - t0:.1f}s]", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
