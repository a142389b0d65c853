"""Finite fields, their quadratic extensions, and truncated Laurent series.

Residue fields are table driven.  An element of a field of size Q is an
integer in ``range(Q)``.  For the prime field this is the residue itself;
an extension of a field B by a monic irreducible polynomial of degree k
encodes ``c_0 + c_1 u + ... + c_{k-1} u^{k-1}`` as ``sum(c_i * |B|**i)``.
In particular the quadratic extension of F_q encodes ``x + y u`` as
``x + q*y`` and F_q sits inside it as ``range(q)``.

A :class:`LaurentScalar` is either exact (``prec is None``, a Laurent
polynomial) or known modulo ``pi**prec``.  Stored coefficients never
include leading or trailing zeros; positions in ``[val, prec)`` beyond the
stored tuple are known zeros.

A split place uses :class:`SplitPair`, with Frobenius swapping the two
components.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .errors import DivisionByZero, PrecisionExhausted

__all__ = [
    "FiniteField",
    "residue_field",
    "quadratic_extension",
    "PlaceData",
    "LaurentScalar",
    "SplitPair",
    "LocalField",
    "scalar_arith",
    "frobenius",
    "sqrt_in_quadratic",
    "eta",
    "format_scalar",
    "parse_scalar",
]


def _is_prime(p):
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


class FiniteField:
    """A finite field with precomputed operation tables.

    ``base`` is the field this one was built over (``None`` for a prime
    field) and ``modulus`` the defining monic polynomial as a coefficient
    tuple ``(c_0, ..., c_{k-1})`` of the non-leading terms.
    """

    def __init__(self, p, base=None, modulus=None, factory=None):
        self.p = p
        self._factory = factory
        self.base = base
        self.modulus = tuple(modulus) if modulus is not None else None
        if base is None:
            self.size = p
            self.degree = 1
            self._build_prime()
        else:
            self.degree = base.degree * len(self.modulus)
            self.size = base.size ** len(self.modulus)
            self._build_extension()
        size = self.size
        self.neg_t = [self.sub_t[e] for e in range(size)]
        self.inv_t = [0] * size
        for a in range(1, size):
            row = a * size
            for b in range(1, size):
                if self.mul_t[row + b] == 1:
                    self.inv_t[a] = b
                    break
        self.frob_t = self._power_table(base.size if base is not None else 1)

    def _build_prime(self):
        p = self.p
        self.add_t = [(a + b) % p for a in range(p) for b in range(p)]
        # sub_t[a*p + b] = a - b; first row doubles as negation
        self.sub_t = [(a - b) % p for a in range(p) for b in range(p)]
        self.mul_t = [(a * b) % p for a in range(p) for b in range(p)]

    def _build_extension(self):
        base = self.base
        bsize = base.size
        k = len(self.modulus)
        size = self.size
        digits = [self._digits(e, bsize, k) for e in range(size)]
        encode = {d: e for e, d in enumerate(digits)}
        badd, bsub, bmul = base.add_t, base.sub_t, base.mul_t
        self.add_t = [0] * (size * size)
        self.sub_t = [0] * (size * size)
        self.mul_t = [0] * (size * size)
        mod = self.modulus
        for a in range(size):
            da = digits[a]
            for b in range(size):
                db = digits[b]
                idx = a * size + b
                self.add_t[idx] = encode[tuple(badd[x * bsize + y] for x, y in zip(da, db))]
                self.sub_t[idx] = encode[tuple(bsub[x * bsize + y] for x, y in zip(da, db))]
                prod = [0] * (2 * k - 1)
                for i, x in enumerate(da):
                    if x:
                        for j, y in enumerate(db):
                            if y:
                                prod[i + j] = badd[prod[i + j] * bsize + bmul[x * bsize + y]]
                for top in range(2 * k - 2, k - 1, -1):
                    c = prod[top]
                    if c:
                        prod[top] = 0
                        for i, m in enumerate(mod):
                            pos = top - k + i
                            prod[pos] = bsub[prod[pos] * bsize + bmul[c * bsize + m]]
                self.mul_t[idx] = encode[tuple(prod[:k])]

    @staticmethod
    def _digits(e, b, k):
        out = []
        for _ in range(k):
            out.append(e % b)
            e //= b
        return tuple(out)

    def _power_table(self, exponent):
        if exponent == 1:
            return list(range(self.size))
        return [self.power(a, exponent) for a in range(self.size)]

    def add(self, a, b):
        return self.add_t[a * self.size + b]

    def sub(self, a, b):
        return self.sub_t[a * self.size + b]

    def mul(self, a, b):
        return self.mul_t[a * self.size + b]

    def neg(self, a):
        return self.neg_t[a]

    def inv(self, a):
        if a == 0:
            raise DivisionByZero("inverse of 0 in a finite field")
        return self.inv_t[a]

    def power(self, a, e):
        result = 1
        base = a
        if e < 0:
            base = self.inv(a)
            e = -e
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def from_int(self, n):
        return n % self.p

    def elements(self):
        return range(self.size)

    def is_base_element(self, a):
        """True when ``a`` lies in the field this one was built over."""
        return self.base is None or a < self.base.size

    def conj(self, a):
        """Frobenius of this field over its base (identity on a prime field)."""
        return self.frob_t[a]

    def to_wire(self, a):
        if self.base is None:
            return a
        return [self.base.to_wire(c) for c in self._digits(a, self.base.size, len(self.modulus))]

    def from_wire(self, obj):
        if self.base is None:
            return int(obj) % self.p
        k = len(self.modulus)
        if not isinstance(obj, (list, tuple)) or len(obj) != k:
            raise ValueError(f"expected a list of {k} base-field digits, got {obj!r}")
        e = 0
        for c in reversed(obj):
            e = e * self.base.size + self.base.from_wire(c)
        return e

    def __reduce__(self):
        # rebuild through the cached constructors so identity survives pickling
        if self._factory is None:
            return (FiniteField, (self.p, self.base, self.modulus))
        return self._factory

    def __repr__(self):
        return f"FiniteField(size={self.size})"


def _has_root_free_factorization(base, coeffs):
    """True when the monic polynomial with low coefficients ``coeffs`` is irreducible."""
    k = len(coeffs)
    full = list(coeffs) + [1]

    def poly_mod(num, den):
        num = list(num)
        dl = len(den) - 1
        inv_lead = base.inv(den[-1])
        while len(num) - 1 >= dl and any(num):
            if num[-1] == 0:
                num.pop()
                continue
            c = base.mul(num[-1], inv_lead)
            shift = len(num) - 1 - dl
            for i, d in enumerate(den):
                num[shift + i] = base.sub(num[shift + i], base.mul(c, d))
            num.pop()
        return num

    for deg in range(1, k // 2 + 1):
        for low in product(range(base.size), repeat=deg):
            rem = poly_mod(full, list(low) + [1])
            if not any(rem):
                return False
    return True


def _smallest_irreducible(base, k):
    # lexicographic order on (c_{k-1}, ..., c_0)
    for high_first in product(range(base.size), repeat=k):
        coeffs = tuple(reversed(high_first))
        if coeffs[0] == 0:
            continue
        if _has_root_free_factorization(base, coeffs):
            return coeffs
    raise ValueError("no irreducible polynomial found")


def residue_field(p, d=1):
    """The field F_q with q = p**d, built over F_p by the smallest irreducible."""
    return _residue_field(int(p), int(d))


def quadratic_extension(p, d=1):
    """F_{q^2} = F_q[u]/(m) for the lexicographically smallest irreducible monic quadratic m."""
    return _quadratic_extension(int(p), int(d))


@lru_cache(maxsize=None)
def _residue_field(p, d):
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if d == 1:
        return FiniteField(p, factory=(residue_field, (p, 1)))
    prime = residue_field(p, 1)
    return FiniteField(p, prime, _smallest_irreducible(prime, d), factory=(residue_field, (p, d)))


@lru_cache(maxsize=None)
def _quadratic_extension(p, d):
    base = residue_field(p, d)
    return FiniteField(p, base, _smallest_irreducible(base, 2), factory=(quadratic_extension, (p, d)))


# ---------------------------------------------------------------------------
# places


@dataclass(frozen=True)
class PlaceData:
    """Residue characteristic p, q = p**d, rank n, place kind and precision."""

    p: int
    d: int = 1
    n: int = 2
    kind: str = "inert"
    prec: int = 24

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.d < 1:
            raise ValueError("extension degree d must be at least 1")
        if self.n < 1:
            raise ValueError("rank n must be at least 1")
        if self.p <= 2 * self.n:
            raise ValueError(f"residue characteristic {self.p} must exceed 2n = {2 * self.n}")
        if self.kind not in ("split", "inert"):
            raise ValueError(f"place kind must be 'split' or 'inert', got {self.kind!r}")
        if self.prec < 1:
            raise ValueError("precision must be at least 1")

    @property
    def q(self):
        return self.p ** self.d

    @property
    def inert(self):
        return self.kind == "inert"

    def with_n(self, n):
        return PlaceData(self.p, self.d, n, self.kind, self.prec)

    def with_kind(self, kind):
        return PlaceData(self.p, self.d, self.n, kind, self.prec)


# ---------------------------------------------------------------------------
# Laurent series


def _strip(coeffs, val):
    start = 0
    while start < len(coeffs) and coeffs[start] == 0:
        start += 1
    end = len(coeffs)
    while end > start and coeffs[end - 1] == 0:
        end -= 1
    return tuple(coeffs[start:end]), val + start


def _min_prec(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    return p1 if p1 < p2 else p2


class LaurentScalar:
    """Truncated Laurent series ``sum c_i pi**(val+i)`` over a finite field.

    ``prec=None`` marks an exact Laurent polynomial.  Otherwise every
    coefficient at an exponent ``>= prec`` is unknown.  A scalar that is
    zero to precision has no coefficients and ``val == prec``.
    """

    __slots__ = ("field", "coeffs", "val", "prec")

    def __init__(self, coeffs, val=0, prec=None, field=None):
        if field is None:
            raise ValueError("a residue field is required")
        coeffs = [c % field.size if isinstance(c, int) else c for c in coeffs]
        if prec is not None and len(coeffs) > prec - val:
            coeffs = coeffs[: max(prec - val, 0)]
        stripped, v = _strip(coeffs, val)
        self.field = field
        self.prec = prec
        if stripped:
            self.coeffs = stripped
            self.val = v
        else:
            self.coeffs = ()
            self.val = 0 if prec is None else prec

    @classmethod
    def _raw(cls, field, coeffs, val, prec):
        obj = object.__new__(cls)
        obj.field = field
        obj.coeffs = coeffs
        obj.val = val
        obj.prec = prec
        return obj

    @classmethod
    def _build(cls, field, coeffs, val, prec):
        """Normalize an internal coefficient list (may have zeros at both ends)."""
        if prec is not None and len(coeffs) > prec - val:
            coeffs = coeffs[: max(prec - val, 0)]
        start = 0
        n = len(coeffs)
        while start < n and coeffs[start] == 0:
            start += 1
        if start == n:
            return cls._raw(field, (), 0 if prec is None else prec, prec)
        end = n
        while coeffs[end - 1] == 0:
            end -= 1
        return cls._raw(field, tuple(coeffs[start:end]), val + start, prec)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, field, prec=None):
        return cls._raw(field, (), 0 if prec is None else prec, prec)

    @classmethod
    def monomial(cls, field, coeff, exponent, prec=None):
        coeff %= field.size
        if prec is not None and exponent >= prec:
            return cls.zero(field, prec)
        if coeff == 0:
            return cls.zero(field, prec)
        return cls._raw(field, (coeff,), exponent, prec)

    @classmethod
    def from_int(cls, field, n, prec=None):
        return cls.monomial(field, field.from_int(n), 0, prec)

    # -- queries -----------------------------------------------------------

    @property
    def exact(self):
        return self.prec is None

    def is_exact_zero(self):
        return not self.coeffs and self.prec is None

    def is_zero_to_precision(self):
        """No nonzero coefficient is known (exact zero or truncated zero)."""
        return not self.coeffs

    def is_zero(self):
        if self.coeffs:
            return False
        if self.prec is None:
            return True
        raise PrecisionExhausted(f"scalar is zero to precision {self.prec}; cannot decide")

    def valuation(self):
        """Valuation of a nonzero scalar; ``math.inf`` for the exact zero."""
        if self.coeffs:
            return self.val
        if self.prec is None:
            return math.inf
        raise PrecisionExhausted(f"valuation unknown: zero to precision {self.prec}")

    def coefficient(self, exponent):
        if self.prec is not None and exponent >= self.prec:
            raise PrecisionExhausted(f"coefficient of pi^{exponent} is beyond precision {self.prec}")
        i = exponent - self.val
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0

    def degree(self):
        """Largest exponent with a stored nonzero coefficient."""
        if not self.coeffs:
            raise ValueError("zero has no degree")
        return self.val + len(self.coeffs) - 1

    def is_monomial(self):
        return len(self.coeffs) == 1

    def leading(self):
        if not self.coeffs:
            raise PrecisionExhausted("zero scalar has no leading coefficient")
        return self.coeffs[0]

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, LaurentScalar):
            return other
        if isinstance(other, int):
            return LaurentScalar.from_int(self.field, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _add(self, other, False)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _add(self, other, True)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _add(other, self, True)

    def __neg__(self):
        neg = self.field.neg_t
        return LaurentScalar._raw(self.field, tuple(neg[c] for c in self.coeffs), self.val, self.prec)

    def __mul__(self, other):
        if isinstance(other, SplitPair):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.divide(other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other.divide(self)

    def __pow__(self, e):
        if e < 0:
            return (LaurentScalar.from_int(self.field, 1)).divide(self ** (-e))
        result = LaurentScalar.from_int(self.field, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def shift(self, k):
        """Multiply by pi**k (exact, precision shifts along)."""
        if not self.coeffs and self.prec is None:
            return self
        prec = None if self.prec is None else self.prec + k
        return LaurentScalar._raw(self.field, self.coeffs, self.val + k, prec)

    def scale(self, c):
        """Multiply by a residue-field element."""
        c %= self.field.size
        if c == 0:
            return LaurentScalar.zero(self.field, None if self.prec is None else self.prec)
        mul, size = self.field.mul_t, self.field.size
        row = c * size
        return LaurentScalar._raw(self.field, tuple(mul[row + x] for x in self.coeffs), self.val, self.prec)

    def truncate(self, prec):
        """Forget coefficients at exponents ``>= prec``."""
        prec = _min_prec(self.prec, prec)
        return LaurentScalar._build(self.field, list(self.coeffs), self.val, prec)

    def inverse(self, prec=None):
        """Multiplicative inverse to absolute precision ``prec``.

        Monomials invert exactly.  A truncated scalar keeps its relative
        precision.  An exact non-monomial needs an explicit ``prec``.
        """
        if not self.coeffs:
            if self.prec is None:
                raise DivisionByZero("division by exact zero")
            raise PrecisionExhausted("division by a scalar that is zero to precision")
        F = self.field
        lead_inv = F.inv_t[self.coeffs[0]]
        v = self.val
        if len(self.coeffs) == 1 and self.prec is None:
            return LaurentScalar._raw(F, (lead_inv,), -v, None)
        if self.prec is not None:
            own = -v + (self.prec - v)
            prec = own if prec is None else min(prec, own)
        elif prec is None:
            raise PrecisionExhausted("inverse of an exact non-monomial needs an explicit precision")
        length = prec + v
        if length <= 0:
            return LaurentScalar.zero(F, prec)
        size = F.size
        mul_t, add_t, neg_t = F.mul_t, F.add_t, F.neg_t
        b = self.coeffs
        lb = len(b)
        out = [lead_inv] + [0] * (length - 1)
        li_row = lead_inv * size
        for k in range(1, length):
            acc = 0
            top = k if k < lb else lb - 1
            for i in range(1, top + 1):
                bi = b[i]
                if bi:
                    ck = out[k - i]
                    if ck:
                        acc = add_t[acc * size + mul_t[bi * size + ck]]
            out[k] = mul_t[li_row + neg_t[acc]] if acc else 0
        return LaurentScalar._build(F, out, -v, prec)

    def divide(self, other, prec=None):
        """``self / other`` to absolute precision ``prec`` when not exact."""
        if not other.coeffs:
            if other.prec is None:
                raise DivisionByZero("division by exact zero")
            raise PrecisionExhausted("division by a scalar that is zero to precision")
        if other.prec is None and len(other.coeffs) == 1:
            return _mul(self, other.inverse())
        if not self.coeffs and self.prec is None:
            return self
        inv_prec = None
        target = _min_prec(prec, None if self.prec is None else self.prec - other.val)
        if target is not None:
            a_val = self.val
            inv_prec = target - a_val
        result = _mul(self, other.inverse(inv_prec))
        return result if prec is None else result.truncate(prec)

    def exact_quotient(self, other):
        """Exact quotient of Laurent polynomials; ``ValueError`` if not divisible."""
        if self.prec is not None or other.prec is not None:
            raise ValueError("exact_quotient needs exact operands")
        if not other.coeffs:
            raise DivisionByZero("division by exact zero")
        if not self.coeffs:
            return self
        F = self.field
        size = F.size
        num = list(self.coeffs)
        den = other.coeffs
        ld = len(den)
        if len(num) < ld:
            raise ValueError("not divisible")
        inv0 = F.inv_t[den[0]]
        q = [0] * (len(num) - ld + 1)
        for i in range(len(q)):
            c = num[i]
            if c:
                t = F.mul_t[c * size + inv0]
                q[i] = t
                row = t * size
                for j in range(ld):
                    num[i + j] = F.sub_t[num[i + j] * size + F.mul_t[row + den[j]]]
        if any(num):
            raise ValueError("not divisible")
        return LaurentScalar._build(F, q, self.val - other.val, None)

    def conj(self):
        """Coefficientwise Frobenius of the residue field over its base."""
        frob = self.field.frob_t
        return LaurentScalar._raw(self.field, tuple(frob[c] for c in self.coeffs), self.val, self.prec)

    def is_base_rational(self):
        """All known coefficients lie in the base residue field."""
        base = self.field.base
        if base is None:
            return True
        return all(c < base.size for c in self.coeffs)

    def unit_part(self):
        """``self / pi**val`` (a unit of the valuation ring)."""
        if not self.coeffs:
            raise PrecisionExhausted("zero has no unit part")
        return self.shift(-self.val)

    # -- comparison --------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentScalar.from_int(self.field, other)
        if not isinstance(other, LaurentScalar):
            return NotImplemented
        if self.prec is None and other.prec is None:
            return self.val == other.val and self.coeffs == other.coeffs
        diff = _add(self, other, True)
        if diff.coeffs:
            return False
        raise PrecisionExhausted("scalars agree to precision; equality undecidable")

    def __ne__(self, other):
        res = self.__eq__(other)
        return res if res is NotImplemented else not res

    def __hash__(self):
        if self.prec is None:
            return hash((self.val, self.coeffs))
        return hash(("truncated", self.prec))

    def __repr__(self):
        return f"LaurentScalar({format_scalar(self)})"

    def __str__(self):
        if not self.coeffs:
            body = "0"
        else:
            terms = []
            for i, c in enumerate(self.coeffs):
                if c:
                    e = self.val + i
                    cw = self.field.to_wire(c)
                    terms.append(f"{cw}*pi^{e}" if e else f"{cw}")
            body = " + ".join(terms)
        return body if self.prec is None else f"{body} + O(pi^{self.prec})"


def _add(a, b, subtract):
    F = a.field
    if F is not b.field:
        raise ValueError("scalars over different residue fields")
    prec = _min_prec(a.prec, b.prec)
    ac, bc = a.coeffs, b.coeffs
    if not bc:
        if prec == a.prec:
            return a
        return LaurentScalar._build(F, list(ac), a.val, prec)
    if not ac:
        if subtract:
            b = -b
        if prec == b.prec:
            return b
        return LaurentScalar._build(F, list(b.coeffs), b.val, prec)
    va, vb = a.val, b.val
    lo = va if va < vb else vb
    hi = max(va + len(ac), vb + len(bc))
    if prec is not None and hi > prec:
        hi = prec
    if hi <= lo:
        return LaurentScalar.zero(F, prec)
    out = [0] * (hi - lo)
    oa = va - lo
    for i, c in enumerate(ac):
        k = oa + i
        if k >= len(out):
            break
        out[k] = c
    size = F.size
    table = F.sub_t if subtract else F.add_t
    ob = vb - lo
    for i, c in enumerate(bc):
        k = ob + i
        if k >= len(out):
            break
        if c:
            out[k] = table[out[k] * size + c]
    return LaurentScalar._build(F, out, lo, prec)


def _mul(a, b):
    F = a.field
    if F is not b.field:
        raise ValueError("scalars over different residue fields")
    ac, bc = a.coeffs, b.coeffs
    if not ac and a.prec is None:
        return a
    if not bc and b.prec is None:
        return b
    va, vb = a.val, b.val
    pa = None if a.prec is None else a.prec + vb
    pb = None if b.prec is None else b.prec + va
    # a zero-to-precision factor has val == prec, so the formula still holds
    prec = _min_prec(pa, pb)
    v = va + vb
    if not ac or not bc:
        return LaurentScalar.zero(F, prec)
    length = len(ac) + len(bc) - 1
    if prec is not None and prec - v < length:
        length = prec - v
        if length <= 0:
            return LaurentScalar.zero(F, prec)
    size = F.size
    mul_t, add_t = F.mul_t, F.add_t
    if len(ac) == 1 and len(bc) == 1:
        return LaurentScalar._raw(F, (mul_t[ac[0] * size + bc[0]],), v, prec)
    out = [0] * length
    lb = len(bc)
    for i, x in enumerate(ac):
        if i >= length:
            break
        if x:
            row = x * size
            lim = length - i
            if lim > lb:
                lim = lb
            for j in range(lim):
                y = bc[j]
                if y:
                    k = i + j
                    out[k] = add_t[out[k] * size + mul_t[row + y]]
    return LaurentScalar._build(F, out, v, prec)


# ---------------------------------------------------------------------------
# split places


class SplitPair:
    """An element of F_v x F_v; Frobenius swaps the components."""

    __slots__ = ("left", "right")

    def __init__(self, left, right):
        if left.field is not right.field:
            raise ValueError("components must share a residue field")
        self.left = left
        self.right = right

    @property
    def field(self):
        return self.left.field

    @property
    def prec(self):
        return _min_prec(self.left.prec, self.right.prec)

    @property
    def exact(self):
        return self.left.prec is None and self.right.prec is None

    def _coerce(self, other):
        if isinstance(other, SplitPair):
            return other
        if isinstance(other, int):
            s = LaurentScalar.from_int(self.left.field, other)
            return SplitPair(s, s)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return SplitPair(self.left + other.left, self.right + other.right)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return SplitPair(self.left - other.left, self.right - other.right)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self):
        return SplitPair(-self.left, -self.right)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return SplitPair(self.left * other.left, self.right * other.right)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.divide(other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other.divide(self)

    def __pow__(self, e):
        return SplitPair(self.left ** e, self.right ** e)

    def divide(self, other, prec=None):
        return SplitPair(self.left.divide(other.left, prec), self.right.divide(other.right, prec))

    def inverse(self, prec=None):
        return SplitPair(self.left.inverse(prec), self.right.inverse(prec))

    def exact_quotient(self, other):
        return SplitPair(self.left.exact_quotient(other.left), self.right.exact_quotient(other.right))

    def shift(self, k):
        return SplitPair(self.left.shift(k), self.right.shift(k))

    def truncate(self, prec):
        return SplitPair(self.left.truncate(prec), self.right.truncate(prec))

    def conj(self):
        return SplitPair(self.right, self.left)

    def is_base_rational(self):
        """Fixed by the swap (equality of components, decided exactly)."""
        return self.left == self.right

    def is_exact_zero(self):
        return self.left.is_exact_zero() and self.right.is_exact_zero()

    def is_zero_to_precision(self):
        return self.left.is_zero_to_precision() and self.right.is_zero_to_precision()

    def is_zero(self):
        return self.left.is_zero() and self.right.is_zero()

    def valuation(self):
        """Minimum of the component valuations."""
        return min(self.left.valuation(), self.right.valuation())

    def valuations(self):
        return (self.left.valuation(), self.right.valuation())

    def is_unit(self):
        return self.left.valuation() == 0 and self.right.valuation() == 0

    def __eq__(self, other):
        if isinstance(other, int):
            other = self._coerce(other)
        if not isinstance(other, SplitPair):
            return NotImplemented
        return self.left == other.left and self.right == other.right

    def __ne__(self, other):
        res = self.__eq__(other)
        return res if res is NotImplemented else not res

    def __hash__(self):
        return hash((self.left, self.right))

    def __repr__(self):
        return f"SplitPair({format_scalar(self.left)}, {format_scalar(self.right)})"


# ---------------------------------------------------------------------------
# the local field F'_v attached to a place


class LocalField:
    """Scalar factory for F'_v at a place.

    At an inert place scalars are :class:`LaurentScalar` over F_{q^2}; at a
    split place they are :class:`SplitPair` of series over F_q.  The
    attribute ``residue`` is the coefficient field of a single series.
    """

    def __init__(self, place):
        self.place = place
        self.base_residue = residue_field(place.p, place.d)
        if place.inert:
            self.residue = quadratic_extension(place.p, place.d)
        else:
            self.residue = self.base_residue

    @property
    def split(self):
        return not self.place.inert

    @property
    def q(self):
        return self.place.q

    def series(self, coeffs, val=0, prec=None):
        return LaurentScalar(coeffs, val, prec, self.residue)

    def wrap(self, s):
        """Embed a series: diagonally at a split place."""
        return SplitPair(s, s) if self.split else s

    def pair(self, left, right):
        if not self.split:
            raise ValueError("pairs only exist at split places")
        return SplitPair(left, right)

    def zero(self):
        return self.wrap(LaurentScalar.zero(self.residue))

    def one(self):
        return self.wrap(LaurentScalar.from_int(self.residue, 1))

    def from_int(self, n):
        return self.wrap(LaurentScalar.from_int(self.residue, n))

    def const(self, c):
        """A residue-field constant (encoded element of the coefficient field)."""
        return self.wrap(LaurentScalar.monomial(self.residue, c, 0))

    def pi(self, k=1):
        return self.wrap(LaurentScalar.monomial(self.residue, 1, k))

    def conj(self, x):
        return x.conj()

    def norm(self, x):
        return x * x.conj()

    def random_series(self, rng, val=0, length=3, rational=False, unit=False):
        """A random exact Laurent polynomial from ``val`` over ``length`` terms."""
        field = self.base_residue if rational or self.split else self.residue
        coeffs = [rng.randrange(field.size) for _ in range(length)]
        if unit and coeffs:
            while coeffs[0] == 0:
                coeffs[0] = rng.randrange(field.size)
        return LaurentScalar(coeffs, val, None, self.residue)

    def random(self, rng, val=0, length=3, rational=False, unit=False):
        """A random exact scalar of F'_v (or of F_v when ``rational``)."""
        left = self.random_series(rng, val, length, rational, unit)
        if not self.split:
            return left
        if rational:
            return SplitPair(left, left)
        return SplitPair(left, self.random_series(rng, val, length, True, unit))

    def __repr__(self):
        return f"LocalField({self.place})"


# ---------------------------------------------------------------------------
# module-level operations


def scalar_arith(a, b, op, prec=None):
    """Apply ``op`` in {add, sub, mul, div}; ``prec`` bounds inexact quotients."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a.divide(b, prec)
    raise ValueError(f"unknown operation {op!r}")


def frobenius(a):
    """Coefficientwise q-power on F_{q^2}-series; component swap on pairs."""
    return a.conj()


def sqrt_in_quadratic(c, p, d=1):
    """Least (in encoding order) square root in F_{q^2} of ``c`` in F_q^x."""
    field = quadratic_extension(p, d)
    if c == 0 or c >= field.base.size:
        raise ValueError("c must be a nonzero element of F_q")
    size = field.size
    for s in range(size):
        if field.mul_t[s * size + s] == c:
            return s
    raise ArithmeticError("no square root found")


def eta(a, place):
    """Quadratic character (-1)**val(a) at an inert place, +1 at a split place."""
    if not place.inert:
        return 1
    v = a.valuation()
    if v == math.inf:
        raise DivisionByZero("eta of zero")
    return -1 if v % 2 else 1


# ---------------------------------------------------------------------------
# wire format: val:prec:[c0,c1,...]


def format_scalar(a):
    if isinstance(a, SplitPair):
        return f"{format_scalar(a.left)}|{format_scalar(a.right)}"
    prec = "inf" if a.prec is None else str(a.prec)
    field = a.field
    body = ",".join(_wire_text(field.to_wire(c)) for c in a.coeffs)
    return f"{a.val}:{prec}:[{body}]"


def _wire_text(w):
    if isinstance(w, list):
        return "[" + ",".join(_wire_text(x) for x in w) + "]"
    return str(w)


_SCALAR_RE = re.compile(r"^\s*(-?\d+):(inf|-?\d+):\[(.*)\]\s*$")


def parse_scalar(text, field):
    """Inverse of :func:`format_scalar` for a single series over ``field``."""
    if "|" in text:
        left, right = text.split("|", 1)
        return SplitPair(parse_scalar(left, field), parse_scalar(right, field))
    m = _SCALAR_RE.match(text)
    if not m:
        raise ValueError(f"malformed scalar {text!r}")
    val = int(m.group(1))
    prec = None if m.group(2) == "inf" else int(m.group(2))
    items = json.loads("[" + m.group(3) + "]")
    coeffs = [field.from_wire(x) for x in items]
    return LaurentScalar(coeffs, val, prec, field)
