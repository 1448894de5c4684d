"""Exact scalar arithmetic for the whole engine.

Two number domains live here:

* ``CycloNumber``: an element of the cyclotomic field Q(zeta_M), stored as a
  dense vector of rationals in the power basis 1, zeta, ..., zeta^(phi(M)-1)
  reduced modulo the M-th cyclotomic polynomial.  Every group works inside a
  single fixed conductor M, so no field towers ever appear.

* ``LaurentPoly``: a sparse Laurent polynomial in one variable with exact
  coefficients (int, Fraction or CycloNumber).  The variable ``v`` carries the
  Hecke-algebra parameter; the same class with variable ``X`` carries Poincare
  series and fake-degree polynomials.

Everything is immutable by convention and hash/compare-safe, so values can be
shared freely across threads and used as dictionary keys.  No floating point
is used anywhere; a complex embedding is provided only for cross-checking in
tests.

>>> g = root_of_unity(5, 1) + root_of_unity(5, 4)
>>> g * g + g == cyclo_rational(5, 1)
True

The value above is 2*cos(2*pi/5), a root of x^2 + x - 1.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .errors import InternalInconsistencyError, UsageError

__all__ = [
    "CycloContext",
    "CycloNumber",
    "LaurentPoly",
    "RationalFunction",
    "cyclo_context",
    "cyclo_one",
    "cyclo_rational",
    "cyclo_zero",
    "cyclotomic_polynomial",
    "even_parity",
    "exact_divide",
    "is_palindromic",
    "poly_divmod",
    "root_of_unity",
    "two_cos_pi_over",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# dense integer polynomial helpers (ascending coefficient lists)

def _dense_trim(c: list) -> list:
    while c and not c[-1]:
        c.pop()
    return c


def _dense_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] += ai * bj
    return _dense_trim(out)


def _dense_exact_div(num: list, den: list) -> list:
    """Exact division of dense integer polynomials; remainder must vanish."""
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for k in range(len(num) - len(den), -1, -1):
        c = num[k + len(den) - 1]
        if c % lead:
            raise InternalInconsistencyError("inexact dense polynomial division")
        c //= lead
        q[k] = c
        if c:
            for j, dj in enumerate(den):
                num[k + j] -= c * dj
    if any(num):
        raise InternalInconsistencyError("inexact dense polynomial division")
    return q


@lru_cache(maxsize=None)
def _cyclotomic_coeffs(n: int) -> tuple:
    """Integer coefficients of the n-th cyclotomic polynomial, ascending."""
    if n < 1:
        raise UsageError("cyclotomic index must be positive")
    if n == 1:
        return (-1, 1)
    num = [-1] + [0] * (n - 1) + [1]          # X^n - 1
    den = [1]
    for d in range(1, n):
        if n % d == 0:
            den = _dense_mul(den, list(_cyclotomic_coeffs(d)))
    return tuple(_dense_exact_div(num, den))


# ---------------------------------------------------------------------------
# cyclotomic field context

class CycloContext:
    """Shared tables for one conductor M: reduction rows and zeta powers.

    Instances are interned through :func:`cyclo_context`; identity comparison
    of contexts is therefore safe and cheap.
    """

    __slots__ = (
        "order", "degree", "modulus", "_red", "_zeta_rows", "_conj_rows",
        "zero", "one",
    )

    def __init__(self, order: int):
        if order < 1:
            raise UsageError("conductor must be positive")
        self.order = order
        mod = _cyclotomic_coeffs(order)
        self.modulus = mod
        phi = len(mod) - 1
        self.degree = phi
        # reduction rows: zeta^k reduced mod Phi_M for k in [phi, 2*phi-2],
        # built by repeated shift-and-fold
        first = tuple(-c for c in mod[:phi])                # zeta^phi reduced
        red = [first]
        cur = list(first)
        for _ in range(phi, 2 * phi - 2):
            top = cur[phi - 1] if phi > 1 else cur[0]
            nxt = [0] + cur[:phi - 1]
            if top:
                for j in range(phi):
                    nxt[j] += top * first[j]
            cur = nxt
            red.append(tuple(cur))
        self._red = tuple(red)
        # zeta^k for all k modulo M, as integer vectors
        rows = []
        vec = [0] * phi
        vec[0] = 1
        for _ in range(order):
            rows.append(tuple(vec))
            top = vec[phi - 1]
            nxt = ([0] + vec[:phi - 1]) if phi > 1 else [0]
            if top:
                for j in range(phi):
                    nxt[j] += top * first[j]
            vec = nxt
        if tuple(vec) != rows[0]:
            raise InternalInconsistencyError("zeta powers do not close at M")
        self._zeta_rows = tuple(rows)
        self._conj_rows = tuple(rows[(order - k) % order] for k in range(order))
        self.zero = CycloNumber(self, (_ZERO,) * phi)
        self.one = CycloNumber(self, (_ONE,) + (_ZERO,) * (phi - 1))

    def __repr__(self) -> str:
        return f"CycloContext(order={self.order}, degree={self.degree})"

    def zeta_vector(self, k: int) -> tuple:
        return self._zeta_rows[k % self.order]

    @property
    def reduction_rows(self) -> tuple:
        """Integer vectors of zeta^k reduced mod Phi_M, k in [phi, 2*phi-2]."""
        return self._red


@lru_cache(maxsize=None)
def cyclo_context(order: int) -> CycloContext:
    return CycloContext(order)


class CycloNumber:
    """An element of Q(zeta_M) in the reduced power basis.

    Construct through the module-level helpers (:func:`cyclo_rational`,
    :func:`root_of_unity`, ...) rather than directly.  Arithmetic between
    different conductors is a usage error by design: one group, one field.
    """

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: CycloContext, coeffs: tuple):
        self.ctx = ctx
        self.coeffs = coeffs

    # -- helpers -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, CycloNumber):
            if other.ctx is not self.ctx:
                if other.ctx.order != self.ctx.order:
                    raise UsageError(
                        f"conductor mismatch: {self.ctx.order} vs {other.ctx.order}"
                    )
            return other
        if isinstance(other, (int, Fraction)):
            return cyclo_rational(self.ctx.order, other)
        return None

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycloNumber(
            self.ctx, tuple(a + b for a, b in zip(self.coeffs, o.coeffs))
        )

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycloNumber(
            self.ctx, tuple(a - b for a, b in zip(self.coeffs, o.coeffs))
        )

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return CycloNumber(self.ctx, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.ctx.zero
            if other == 1:
                return self
            return CycloNumber(self.ctx, tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        ctx = self.ctx
        phi = ctx.degree
        nza = [(i, a) for i, a in enumerate(self.coeffs) if a]
        nzb = [(j, b) for j, b in enumerate(o.coeffs) if b]
        if not nza or not nzb:
            return ctx.zero
        acc = [_ZERO] * (2 * phi - 1)
        for i, a in nza:
            for j, b in nzb:
                acc[i + j] += a * b
        red = ctx._red
        for k in range(2 * phi - 2, phi - 1, -1):
            c = acc[k]
            if c:
                row = red[k - phi]
                for j in range(phi):
                    r = row[j]
                    if r:
                        acc[j] += c * r
        return CycloNumber(ctx, tuple(acc[:phi]))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero scalar")
            return self * (Fraction(1) / Fraction(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.ctx.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self) -> "CycloNumber":
        """Multiplicative inverse via the extended Euclid algorithm mod Phi_M."""
        if not self:
            raise ZeroDivisionError("inverse of zero cyclotomic number")
        if self.is_rational():
            return cyclo_rational(self.ctx.order, 1 / self.coeffs[0])
        mod = [Fraction(c) for c in self.ctx.modulus]
        a = list(self.coeffs)
        inv = _fracpoly_invmod(a, mod)
        phi = self.ctx.degree
        inv = inv + [_ZERO] * (phi - len(inv))
        return CycloNumber(self.ctx, tuple(inv[:phi]))

    def conjugate(self) -> "CycloNumber":
        """Complex conjugation, i.e. the Galois map zeta -> zeta^(-1)."""
        ctx = self.ctx
        phi = ctx.degree
        acc = [_ZERO] * phi
        for j, c in enumerate(self.coeffs):
            if c:
                row = ctx._conj_rows[j]
                for k in range(phi):
                    r = row[k]
                    if r:
                        acc[k] += c * r
        return CycloNumber(ctx, tuple(acc))

    # -- predicates and conversions ---------------------------------------

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise UsageError("cyclotomic number is not rational")
        return self.coeffs[0]

    def is_integer(self) -> bool:
        return self.is_rational() and self.coeffs[0].denominator == 1

    def __eq__(self, other) -> bool:
        if isinstance(other, CycloNumber):
            return (
                self.ctx.order == other.ctx.order and self.coeffs == other.coeffs
            )
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.ctx.order, self.coeffs))

    def sort_key(self) -> tuple:
        """Deterministic total-order key (not a numeric comparison)."""
        return self.coeffs

    def complex_value(self, embedding: int = 1) -> complex:
        """Numeric value under zeta -> exp(2*pi*i*embedding/M); tests only."""
        if gcd(embedding, self.ctx.order) != 1:
            raise UsageError("embedding index must be coprime to the conductor")
        z = cmath.exp(2j * cmath.pi * embedding / self.ctx.order)
        return sum(float(c) * z ** k for k, c in enumerate(self.coeffs))

    def render(self) -> str:
        """Canonical text form, e.g. ``1/2 + z5^1 - z5^3``; bit-stable."""
        if self.is_rational():
            return str(self.coeffs[0])
        m = self.ctx.order
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            mag = str(abs(c)) if (abs(c) != 1 or k == 0) else ""
            base = f"z{m}^{k}" if k else ""
            body = f"{mag}*{base}" if (mag and base) else (mag or base)
            parts.append((c < 0, body))
        out = []
        for i, (neg, body) in enumerate(parts):
            if i == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __repr__(self) -> str:
        return f"CycloNumber({self.ctx.order}, {self.render()})"


def _fracpoly_divmod(a: list, b: list):
    """divmod for dense Fraction polynomials, ascending coefficients."""
    a = list(a)
    while a and not a[-1]:
        a.pop()
    db = len(b) - 1
    lead = b[-1]
    q = [_ZERO] * max(0, len(a) - db)
    while len(a) - 1 >= db and a:
        c = a[-1] / lead
        k = len(a) - 1 - db
        q[k] = c
        for j in range(db + 1):
            a[k + j] -= c * b[j]
        while a and not a[-1]:
            a.pop()
    return q, a


def _fracpoly_invmod(a: list, mod: list) -> list:
    """Inverse of a modulo mod over Q, both dense ascending Fraction lists."""
    r0, r1 = list(mod), [Fraction(x) for x in a]
    s0, s1 = [_ZERO], [_ONE]
    while True:
        while r1 and not r1[-1]:
            r1.pop()
        if len(r1) == 1:
            c = r1[0]
            return [x / c for x in s1]
        if not r1:
            raise InternalInconsistencyError("non-invertible cyclotomic element")
        q, r = _fracpoly_divmod(r0, r1)
        qs = _fracpoly_mul(q, s1)
        news = [x - y for x, y in _zip_pad(s0, qs)]
        r0, r1 = r1, r
        s0, s1 = s1, news


def _fracpoly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [_ZERO] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] += ai * bj
    return out


def _zip_pad(a: list, b: list):
    n = max(len(a), len(b))
    a = a + [_ZERO] * (n - len(a))
    b = b + [_ZERO] * (n - len(b))
    return zip(a, b)


# -- constructors ----------------------------------------------------------

def cyclo_zero(order: int) -> CycloNumber:
    return cyclo_context(order).zero


def cyclo_one(order: int) -> CycloNumber:
    return cyclo_context(order).one


def cyclo_rational(order: int, value) -> CycloNumber:
    ctx = cyclo_context(order)
    v = Fraction(value)
    if not v:
        return ctx.zero
    return CycloNumber(ctx, (v,) + (_ZERO,) * (ctx.degree - 1))


def root_of_unity(order: int, k: int) -> CycloNumber:
    """zeta_M^k as an exact field element."""
    ctx = cyclo_context(order)
    return CycloNumber(ctx, tuple(Fraction(c) for c in ctx.zeta_vector(k)))


def embed_cyclo(x: CycloNumber, order: int) -> CycloNumber:
    """Carry x from Q(zeta_m) into Q(zeta_order) via zeta_m -> zeta_order^(order/m).

    Requires m to divide order; the identity map when the orders agree.
    """
    src = x.ctx.order
    if src == order:
        return x
    if order % src:
        raise UsageError(
            f"cannot embed conductor {src} into conductor {order}"
        )
    ctx = cyclo_context(order)
    step = order // src
    out = [Fraction(0)] * ctx.degree
    for i, c in enumerate(x.coeffs):
        if c:
            for j, z in enumerate(ctx.zeta_vector((step * i) % order)):
                if z:
                    out[j] += c * z
    return CycloNumber(ctx, tuple(out))


def two_cos_pi_over(order: int, m: int) -> CycloNumber:
    """2*cos(pi/m) inside Q(zeta_order).

    Written as zeta_{2m} + zeta_{2m}^(-1) when zeta_{2m} lies in the field;
    for odd m the identity zeta_{2m} = -zeta_m^((m+1)/2) lets the value live
    in Q(zeta_m) already.
    """
    if m < 1:
        raise UsageError("cosine denominator must be positive")
    if order % (2 * m) == 0:
        k = order // (2 * m)
        return root_of_unity(order, k) + root_of_unity(order, -k % order)
    if m % 2 == 1 and order % m == 0:
        k = (order // m) * ((m + 1) // 2)
        return -(root_of_unity(order, k) + root_of_unity(order, -k % order))
    raise UsageError(f"2*cos(pi/{m}) does not lie in Q(zeta_{order})")


# ---------------------------------------------------------------------------
# sparse Laurent polynomials


def _czero(c) -> bool:
    return not c


class LaurentPoly:
    """Sparse Laurent polynomial in a single named variable.

    Coefficients may be int, Fraction or CycloNumber (mixing is fine, ints
    absorb into the richer domain).  Zero coefficients are never stored, so
    equality of the coefficient dictionaries is structural equality of the
    polynomials.  Treat instances as immutable.

    >>> p = LaurentPoly.monomial(1) + LaurentPoly.monomial(-1)
    >>> (p * p).render()
    'v^-2 + 2 + v^2'
    """

    __slots__ = ("var", "coeffs")

    def __init__(self, coeffs: dict | None = None, var: str = "v"):
        clean = {}
        if coeffs:
            for e, c in coeffs.items():
                if not _czero(c):
                    clean[e] = c
        self.var = var
        self.coeffs = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, var: str = "v") -> "LaurentPoly":
        return cls({}, var)

    @classmethod
    def constant(cls, c, var: str = "v") -> "LaurentPoly":
        return cls({0: c}, var)

    @classmethod
    def monomial(cls, exp: int, coeff=1, var: str = "v") -> "LaurentPoly":
        return cls({exp: coeff}, var)

    @classmethod
    def from_pairs(cls, pairs, var: str = "v") -> "LaurentPoly":
        d = {}
        for e, c in pairs:
            d[e] = d.get(e, 0) + c
        return cls(d, var)

    # -- basic structure ---------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def valuation(self) -> int:
        if not self.coeffs:
            raise UsageError("valuation of the zero polynomial")
        return min(self.coeffs)

    def degree(self) -> int:
        if not self.coeffs:
            raise UsageError("degree of the zero polynomial")
        return max(self.coeffs)

    def coeff(self, exp: int):
        return self.coeffs.get(exp, 0)

    def _check(self, other: "LaurentPoly"):
        if self.var != other.var:
            raise UsageError(f"variable mismatch: {self.var!r} vs {other.var!r}")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction, CycloNumber)):
            other = LaurentPoly.constant(other, self.var)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        self._check(other)
        d = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = d.get(e, 0) + c
            if _czero(s):
                d.pop(e, None)
            else:
                d[e] = s
        out = LaurentPoly.__new__(LaurentPoly)
        out.var = self.var
        out.coeffs = d
        return out

    __radd__ = __add__

    def __neg__(self):
        out = LaurentPoly.__new__(LaurentPoly)
        out.var = self.var
        out.coeffs = {e: -c for e, c in self.coeffs.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, CycloNumber)):
            other = LaurentPoly.constant(other, self.var)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycloNumber)):
            if _czero(other):
                return LaurentPoly.zero(self.var)
            out = LaurentPoly.__new__(LaurentPoly)
            out.var = self.var
            out.coeffs = {}
            for e, c in self.coeffs.items():
                p = c * other
                if not _czero(p):
                    out.coeffs[e] = p
            return out
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        self._check(other)
        d = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                s = d.get(e, 0) + c1 * c2
                d[e] = s
        out = LaurentPoly.__new__(LaurentPoly)
        out.var = self.var
        out.coeffs = {e: c for e, c in d.items() if not _czero(c)}
        return out

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by var^k."""
        out = LaurentPoly.__new__(LaurentPoly)
        out.var = self.var
        out.coeffs = {e + k: c for e, c in self.coeffs.items()}
        return out

    def stretch(self, k: int) -> "LaurentPoly":
        """Substitute var -> var^k (exponent dilation)."""
        out = LaurentPoly.__new__(LaurentPoly)
        out.var = self.var
        out.coeffs = {e * k: c for e, c in self.coeffs.items()}
        return out

    def rename(self, var: str) -> "LaurentPoly":
        out = LaurentPoly.__new__(LaurentPoly)
        out.var = var
        out.coeffs = dict(self.coeffs)
        return out

    def bar(self) -> "LaurentPoly":
        """The involution var -> var^(-1)."""
        out = LaurentPoly.__new__(LaurentPoly)
        out.var = self.var
        out.coeffs = {-e: c for e, c in self.coeffs.items()}
        return out

    # -- evaluation --------------------------------------------------------

    def at_one(self):
        """Sum of coefficients, i.e. evaluation at var = 1."""
        total = 0
        for c in self.coeffs.values():
            total = c + total
        return total

    def evaluate(self, value):
        inv = None
        total = 0
        for e, c in self.coeffs.items():
            if e >= 0:
                total = total + c * value ** e
            else:
                if inv is None:
                    inv = Fraction(1, value) if isinstance(value, int) else 1 / value
                total = total + c * inv ** (-e)
        return total

    # -- comparisons -------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, CycloNumber)):
            if _czero(other):
                return not self.coeffs
            return set(self.coeffs) == {0} and self.coeffs[0] == other
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.var == other.var and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.var, tuple(sorted(self.coeffs.items(), key=lambda t: t[0]))))

    # -- rendering ---------------------------------------------------------

    def render(self) -> str:
        """Canonical text, ascending exponents: ``v^-2 + 2 + v^2``."""
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            neg = False
            if isinstance(c, CycloNumber):
                if c.is_rational():
                    f = c.as_fraction()
                    neg = f < 0
                    cs = str(-f if neg else f)
                else:
                    cs = "(" + c.render() + ")"
            else:
                neg = c < 0
                cs = str(-c if neg else c)
            if e == 0:
                body = cs
            else:
                var = self.var if e == 1 else f"{self.var}^{e}"
                body = var if cs == "1" else f"{cs}*{var}"
            parts.append((neg, body))
        out = []
        for i, (neg, body) in enumerate(parts):
            if i == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __repr__(self) -> str:
        return f"LaurentPoly[{self.var}]({self.render()})"


# -- predicates and division ----------------------------------------------

def even_parity(p: LaurentPoly) -> bool:
    """True when only even powers of the variable occur (the zero poly passes)."""
    return all(e % 2 == 0 for e in p.coeffs)


def is_palindromic(p: LaurentPoly):
    """Return the witness u with coeff(e) == coeff(u - e) for all e, else None.

    Defined for nonzero polynomials with nonnegative exponents only; u is
    always valuation + degree.
    """
    if not p:
        raise UsageError("palindromicity of the zero polynomial is undefined")
    lo = p.valuation()
    if lo < 0:
        raise UsageError("palindromicity needs nonnegative exponents")
    u = lo + p.degree()
    for e, c in p.coeffs.items():
        if p.coeffs.get(u - e, 0) != c:
            return None
    return u


def _coeff_div(a, b):
    """Exact coefficient division a/b; raise when not exact over the ints."""
    if isinstance(b, CycloNumber) or isinstance(a, CycloNumber):
        if not isinstance(b, CycloNumber):
            b = cyclo_rational(a.ctx.order, b)
        return a * b.inverse() if isinstance(a, CycloNumber) else b.inverse() * a
    if isinstance(a, Fraction) or isinstance(b, Fraction):
        return Fraction(a) / Fraction(b)
    q, r = divmod(a, b)
    if r:
        raise InternalInconsistencyError("inexact integer coefficient division")
    return q


def exact_divide(num: LaurentPoly, den: LaurentPoly) -> LaurentPoly:
    """Exact polynomial division; a nonzero remainder is an internal error."""
    if not isinstance(num, LaurentPoly) or not isinstance(den, LaurentPoly):
        raise UsageError("exact_divide expects LaurentPoly operands")
    num._check(den)
    if not den:
        raise UsageError("division by the zero polynomial")
    if not num:
        return LaurentPoly.zero(num.var)
    shift = num.valuation() - den.valuation()
    work = dict(num.shift(-num.valuation()).coeffs)
    dvs = den.shift(-den.valuation()).coeffs
    dd = max(dvs)
    lead = dvs[dd]
    q = {}
    while work:
        wd = max(work)
        if wd < dd:
            raise InternalInconsistencyError(
                f"inexact division: remainder of degree {wd}"
            )
        c = _coeff_div(work[wd], lead)
        k = wd - dd
        q[k] = c
        for e, dc in dvs.items():
            t = work.get(k + e, 0) - c * dc
            if _czero(t):
                work.pop(k + e, None)
            else:
                work[k + e] = t
    return LaurentPoly(q, num.var).shift(shift)


def poly_divmod(num: LaurentPoly, den: LaurentPoly):
    """Quotient and remainder with deg(rem) < deg(den); exponents must be >= 0.

    Coefficient divisions must stay exact (integer leading coefficients other
    than +-1 can make them inexact; such a division raises).
    """
    num._check(den)
    if not den:
        raise UsageError("division by the zero polynomial")
    if (num and num.valuation() < 0) or den.valuation() < 0:
        raise UsageError("poly_divmod needs nonnegative exponents")
    work = dict(num.coeffs)
    dd = den.degree()
    lead = den.coeffs[dd]
    q = {}
    while work and max(work) >= dd:
        wd = max(work)
        c = _coeff_div(work[wd], lead)
        k = wd - dd
        q[k] = c
        for e, dc in den.coeffs.items():
            t = work.get(k + e, 0) - c * dc
            if _czero(t):
                work.pop(k + e, None)
            else:
                work[k + e] = t
    return LaurentPoly(q, num.var), LaurentPoly(work, num.var)


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int, var: str = "X") -> LaurentPoly:
    """The n-th cyclotomic polynomial with integer coefficients."""
    coeffs = _cyclotomic_coeffs(n)
    return LaurentPoly({e: c for e, c in enumerate(coeffs) if c}, var)


# ---------------------------------------------------------------------------
# rational functions


class RationalFunction:
    """Quotient of two Laurent polynomials, normalized lazily.

    Normalization keeps the denominator with unit leading coefficient and
    strips common monomial factors; full gcd reduction is not attempted.
    Equality is decided by cross multiplication, so unreduced representatives
    still compare correctly.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly):
        if not isinstance(num, LaurentPoly) or not isinstance(den, LaurentPoly):
            raise UsageError("RationalFunction expects LaurentPoly operands")
        num._check(den)
        if not den:
            raise UsageError("zero denominator")
        if num:
            k = min(num.valuation(), den.valuation())
            if k:
                num = num.shift(-k)
                den = den.shift(-k)
        lead = den.coeffs[den.degree()]
        if lead != 1:
            if isinstance(lead, CycloNumber):
                inv = lead.inverse()
            else:
                inv = Fraction(1) / Fraction(lead)
            num = num * inv
            den = den * inv
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p: LaurentPoly) -> "RationalFunction":
        return cls(p, LaurentPoly.constant(1, p.var))

    def __add__(self, other):
        if isinstance(other, LaurentPoly):
            other = RationalFunction.from_poly(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            other = RationalFunction.from_poly(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        raise TypeError("RationalFunction is not hashable")

    def as_poly(self) -> LaurentPoly:
        """Close the quotient to a polynomial; inexactness is an internal error."""
        return exact_divide(self.num, self.den)

    def __repr__(self) -> str:
        return f"RationalFunction(({self.num.render()}) / ({self.den.render()}))"
