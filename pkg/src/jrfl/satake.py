"""Coweights, dominance, Kostka-Foulkes polynomials and Satake weights."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import NotSigmaOutFixed, StratumOutOfRange, SumMismatch

__all__ = [
    "Coweight",
    "dominance_leq",
    "sigma_out_fixed",
    "kostka_foulkes",
    "charge",
    "semistandard_tableaux",
    "reading_word",
    "evaluate",
    "satake_value",
    "stratum_value",
    "spherical_transfer",
    "align",
    "partitions",
]


@dataclass(frozen=True)
class Coweight:
    """A weakly decreasing vector of rationals.

    Integral vectors are GL_n-level coweights; :meth:`adjoint` recentres to
    sum zero, which is how adjoint classes are compared.
    """

    parts: tuple

    def __post_init__(self):
        parts = tuple(Fraction(p) for p in self.parts)
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"coweight {self.parts} is not dominant")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def dominant(cls, values):
        return cls(tuple(sorted((Fraction(v) for v in values), reverse=True)))

    @classmethod
    def parse(cls, text, n=None):
        """Parse ``"1,-1"`` or ``"1/2,-1/2"``; ``"0"`` expands to the zero coweight of rank ``n``."""
        items = [Fraction(t.strip()) for t in str(text).replace(" ", "").split(",") if t.strip()]
        if n is not None and len(items) == 1 and items[0] == 0:
            items = [Fraction(0)] * n
        if n is not None and len(items) != n:
            raise ValueError(f"coweight {text!r} does not have {n} parts")
        return cls(tuple(items))

    @classmethod
    def zero(cls, n):
        return cls((0,) * n)

    @property
    def n(self):
        return len(self.parts)

    @property
    def total(self):
        return sum(self.parts, Fraction(0))

    def is_integral(self):
        return all(p.denominator == 1 for p in self.parts)

    def adjoint(self):
        mean = self.total / self.n
        return Coweight(tuple(p - mean for p in self.parts))

    def shifted(self, c):
        return Coweight(tuple(p + c for p in self.parts))

    def rho_pairing(self):
        n = self.n
        return sum((Fraction(n + 1 - 2 * i, 2) * p for i, p in enumerate(self.parts, start=1)), Fraction(0))

    def two_rho_pairing(self):
        return 2 * self.rho_pairing()

    def simple_root_pairings(self):
        return tuple(self.parts[i] - self.parts[i + 1] for i in range(self.n - 1))

    def same_adjoint(self, other):
        return self.adjoint().parts == other.adjoint().parts

    def as_ints(self):
        if not self.is_integral():
            raise ValueError(f"coweight {self} is not integral")
        return tuple(int(p) for p in self.parts)

    def to_json(self):
        return [int(p) if p.denominator == 1 else str(p) for p in self.parts]

    def __str__(self):
        return "(" + ",".join(str(p) for p in self.parts) + ")"


def align(mu, lam):
    """Shift ``mu`` by a constant so its total matches ``lam``; the shift must be integral."""
    diff = lam.total - mu.total
    if diff % lam.n:
        raise SumMismatch(f"{mu} and {lam} lie in different classes modulo the root lattice")
    return mu.shifted(diff / lam.n)


def dominance_leq(mu, lam):
    if mu.n != lam.n or mu.total != lam.total:
        raise SumMismatch(f"{mu} and {lam} have different totals")
    s_mu = s_lam = Fraction(0)
    for a, b in zip(mu.parts, lam.parts):
        s_mu += a
        s_lam += b
        if s_mu > s_lam:
            return False
    return True


def sigma_out_fixed(lam):
    adj = lam.adjoint().parts
    n = len(adj)
    return all(adj[i] == -adj[n - 1 - i] for i in range(n))


# ---------------------------------------------------------------------------
# tableaux and charge


def partitions(total, max_parts=None, max_part=None):
    """Partitions of ``total`` in decreasing order of parts."""
    if max_part is None:
        max_part = total

    def rec(remaining, cap, slots):
        if remaining == 0:
            yield ()
            return
        if slots == 0:
            return
        for first in range(min(cap, remaining), 0, -1):
            for rest in rec(remaining - first, first, slots - 1):
                yield (first,) + rest

    yield from rec(total, max_part, total if max_parts is None else max_parts)


def _horizontal_strips(inner, outer_shape, size):
    """Shapes ``nu`` with ``inner <= nu <= outer_shape`` and ``nu / inner`` a horizontal strip of ``size`` boxes."""
    rows = len(outer_shape)
    inner = list(inner) + [0] * (rows - len(inner))

    def rec(r, left, acc):
        if r == rows:
            if left == 0:
                yield tuple(acc)
            return
        cap = outer_shape[r]
        if r > 0:
            cap = min(cap, inner[r - 1])
        for add in range(min(left, cap - inner[r]) + 1):
            yield from rec(r + 1, left - add, acc + [inner[r] + add])

    yield from rec(0, size, [])


def semistandard_tableaux(shape, content):
    """All SSYT of ``shape`` with ``content[k]`` entries equal to ``k + 1`` (rows as tuples)."""
    shape = tuple(p for p in shape if p)
    if sum(shape) != sum(content):
        return
    chains = [((0,) * len(shape), [])]
    for k, c in enumerate(content):
        nxt = []
        for inner, fills in chains:
            for nu in _horizontal_strips(inner, shape, c):
                nxt.append((nu, fills + [(k + 1, inner, nu)]))
        chains = nxt
    for nu, fills in chains:
        if tuple(nu) != shape:
            continue
        rows = [[] for _ in shape]
        for value, inner, outer in fills:
            for r in range(len(shape)):
                rows[r].extend([value] * (outer[r] - inner[r]))
        yield tuple(tuple(r) for r in rows)


def reading_word(tableau):
    """Rows read left to right, from the bottom row to the top row."""
    word = []
    for row in reversed(tableau):
        word.extend(row)
    return tuple(word)


def charge(word):
    """Lascoux-Schutzenberger charge of a word with partition content."""
    letters = list(word)
    alive = [True] * len(letters)
    total = 0
    while any(alive):
        top = max(letters[i] for i in range(len(letters)) if alive[i])
        pos = max(i for i in range(len(letters)) if alive[i] and letters[i] == 1)
        used = [pos]
        index = 0
        for r in range(2, top + 1):
            found = None
            for i in range(pos - 1, -1, -1):
                if alive[i] and letters[i] == r:
                    found = i
                    break
            if found is None:
                index += 1
                for i in range(len(letters) - 1, pos, -1):
                    if alive[i] and letters[i] == r:
                        found = i
                        break
            if found is None:
                raise ValueError("content of the word is not a partition")
            total += index
            pos = found
            used.append(found)
        for i in used:
            alive[i] = False
    return total


@lru_cache(maxsize=None)
def _kostka_partitions(lam, mu):
    coeffs = {}
    for t in semistandard_tableaux(lam, mu):
        c = charge(reading_word(t))
        coeffs[c] = coeffs.get(c, 0) + 1
    if not coeffs:
        return (0,)
    top = max(coeffs)
    return tuple(coeffs.get(k, 0) for k in range(top + 1))


def _to_partitions(lam, mu):
    if lam.n != mu.n:
        raise SumMismatch("coweights of different rank")
    if mu.total != lam.total:
        raise SumMismatch(f"{mu} and {lam} have different totals")
    low = min(min(lam.parts), min(mu.parts))
    if low.denominator != 1:
        low = Fraction(low.numerator // low.denominator)
    lp = lam.shifted(-low)
    mp = mu.shifted(-low)
    if not (lp.is_integral() and mp.is_integral()):
        raise SumMismatch("coweights are not integral after the common shift")
    return lp.as_ints(), mp.as_ints()


def kostka_foulkes(lam, mu):
    """Coefficients ``(c_0, c_1, ...)`` of ``K_{lam,mu}(t)``; zero polynomial is ``(0,)``."""
    lp, mp = _to_partitions(lam, mu)
    if not dominance_leq(Coweight(mp), Coweight(lp)):
        return (0,)
    return _kostka_partitions(lp, mp)


def evaluate(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def satake_value(lam, mu, q):
    """Value at the stratum ``mu`` of the Satake basis element attached to ``lam``.

    Equals ``q^{-<rho,mu>} K_{lam,mu}(q^{-1})``; ``mu`` is compared in the
    adjoint class of ``lam``.
    """
    mu = align(mu, lam)
    if not dominance_leq(mu, lam):
        raise StratumOutOfRange(f"{mu} is not below {lam}")
    rp = mu.rho_pairing()
    if rp.denominator != 1:
        raise ValueError(f"<rho, {mu}> = {rp} is not an integer")
    return evaluate(kostka_foulkes(lam, mu), Fraction(1, q)) / Fraction(q) ** int(rp)


def stratum_value(lam, mu, q):
    """:func:`satake_value`, rescaled by ``q^{<rho,lam>}`` when ``<rho,lam>`` is not an integer.

    The rescaling is one constant for all strata below ``lam``, so identities
    between weighted sums are unaffected and every value stays rational.
    """
    if lam.rho_pairing().denominator == 1:
        return satake_value(lam, mu, q)
    mu = align(mu, lam)
    if not dominance_leq(mu, lam):
        raise StratumOutOfRange(f"{mu} is not below {lam}")
    shift = lam.rho_pairing() - mu.rho_pairing()
    return evaluate(kostka_foulkes(lam, mu), Fraction(1, q)) * Fraction(q) ** int(shift)


def spherical_transfer(lam):
    if not sigma_out_fixed(lam):
        raise NotSigmaOutFixed(f"{lam} is not fixed by the outer automorphism")
    return lam
