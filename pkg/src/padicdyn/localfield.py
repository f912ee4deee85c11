"""Exact and capped-precision arithmetic in Q_p and small explicit extensions.

Two coefficient backends sit behind one element interface:

* ``ExactField`` -- elements wrap exact rationals tagged with a prime.
  Valuations are always exact.  This is the oracle backend and the default
  wherever Newton polygons need exactly known valuations.
* ``CappedField`` -- elements are cosets ``p^v * unit + O(p^(v+A))`` with a
  relative-precision cap ``A``.  Arithmetic never claims more precision
  than the standard propagation rules allow (add: min of absolute
  precisions, mul: valuations add, relative precisions take the min).
  An element that cancels down to ``O(p^k)`` enters a distinct
  "indistinguishable from zero" state; operations that need its exact
  valuation raise instead of guessing.

Extensions are towers of explicit Eisenstein or unramified stages of total
degree at most 8, built one stage at a time by ``ExtensionField``.  All
values are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import DomainError, InternalError, PrecisionError, UsageError

MAX_TOWER_DEGREE = 8


def _vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of integer zero")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def _modinv(a: int, m: int) -> int:
    return pow(a, -1, m)


class Valuation:
    """An additive valuation value, normalized so v(p) = 1.

    ``value is None`` encodes +infinity (the exact zero element).
    ``exact=False`` marks a lower bound -- "the valuation is at least
    this" -- which is all a capped element indistinguishable from zero
    can report.  Callers that need an exact valuation must branch on
    ``exact``.
    """

    __slots__ = ("value", "exact")

    def __init__(self, value, exact: bool = True):
        self.value = None if value is None else Fraction(value)
        self.exact = bool(exact)

    @classmethod
    def infinite(cls) -> "Valuation":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def as_fraction(self) -> Fraction:
        if self.value is None:
            raise PrecisionError("valuation is infinite")
        return self.value

    @staticmethod
    def _key(x):
        if isinstance(x, Valuation):
            x = x.value
        if x is None:
            return (1, 0)
        return (0, Fraction(x))

    def __lt__(self, other):
        return self._key(self) < self._key(other)

    def __le__(self, other):
        return self._key(self) <= self._key(other)

    def __gt__(self, other):
        return self._key(self) > self._key(other)

    def __ge__(self, other):
        return self._key(self) >= self._key(other)

    def __eq__(self, other):
        if isinstance(other, (Valuation, int, Fraction)):
            return self._key(self) == self._key(other)
        return NotImplemented

    def __hash__(self):
        return hash(self._key(self))

    def __add__(self, other):
        exact = self.exact
        if isinstance(other, Valuation):
            exact = exact and other.exact
            other = other.value
        if self.value is None or other is None:
            return Valuation(None)
        return Valuation(self.value + Fraction(other), exact)

    __radd__ = __add__

    def __mul__(self, k):
        if self.value is None:
            return Valuation(None)
        return Valuation(self.value * Fraction(k), self.exact)

    __rmul__ = __mul__

    def __str__(self):
        if self.value is None:
            return "+inf"
        text = str(self.value)
        return text if self.exact else ">=" + text

    def __repr__(self):
        return f"Valuation({self})"


# ---------------------------------------------------------------------------
# base-field elements
# ---------------------------------------------------------------------------


class ExactElement:
    """An exact rational viewed inside Q_p.  The oracle backend."""

    __slots__ = ("field", "value")

    def __init__(self, field: "ExactField", value):
        self.field = field
        self.value = value if type(value) is Fraction else Fraction(value)

    def _coerce(self, other):
        if isinstance(other, ExactElement):
            if other.field is not self.field and other.field != self.field:
                raise UsageError("operands belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return ExactElement(self.field, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return ExactElement(self.field, self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return ExactElement(self.field, self.value - other.value)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return ExactElement(self.field, -self.value)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return ExactElement(self.field, self.value * other.value)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.value == 0:
            raise ZeroDivisionError("division by exact zero")
        return ExactElement(self.field, self.value / other.value)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return other / self

    def __pow__(self, n: int):
        if n < 0:
            if self.value == 0:
                raise ZeroDivisionError("division by exact zero")
            return ExactElement(self.field, self.value ** n)
        return ExactElement(self.field, self.value ** n)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash((self.field, self.value))

    def is_zero(self) -> bool:
        return self.value == 0

    @property
    def is_exact_zero(self) -> bool:
        return self.value == 0

    def valuation(self) -> Valuation:
        if self.value == 0:
            return Valuation.infinite()
        p = self.field.p
        return Valuation(_vp_int(self.value.numerator, p)
                         - _vp_int(self.value.denominator, p))

    def __repr__(self):
        return f"{self.value} (p={self.field.p})"


class PadicElement:
    """A coset ``p^v * unit + O(p^(v+rel))`` in Q_p.

    ``unit == 0`` encodes a zero: exactly zero when ``v is None``, or
    "known to vanish modulo p^v" otherwise (the indistinguishable state).
    """

    __slots__ = ("field", "v", "unit", "rel")

    def __init__(self, field, v, unit, rel):
        self.field = field
        self.v = v
        self.unit = unit
        self.rel = rel

    # -- constructors ------------------------------------------------------

    @classmethod
    def _zero(cls, field, floor):
        return cls(field, floor, 0, 0)

    @classmethod
    def exact_zero(cls, field):
        return cls(field, None, 0, 0)

    @classmethod
    def _make(cls, field, v, unit, rel):
        p = field.p
        if rel <= 0:
            return cls._zero(field, v + rel)
        unit %= p ** rel
        if unit == 0:
            return cls._zero(field, v + rel)
        s = _vp_int(unit, p)
        if s:
            unit //= p ** s
            rel -= s
            v += s
            if rel <= 0:
                return cls._zero(field, v + rel)
        return cls(field, v, unit, rel)

    @classmethod
    def from_rational(cls, field, q) -> "PadicElement":
        q = Fraction(q)
        if q == 0:
            return cls.exact_zero(field)
        p = field.p
        vn = _vp_int(q.numerator, p)
        vd = _vp_int(q.denominator, p)
        rel = field.prec
        num_unit = q.numerator // p ** vn
        den_unit = q.denominator // p ** vd
        unit = (num_unit * _modinv(den_unit, p ** rel)) % (p ** rel)
        return cls._make(field, vn - vd, unit, rel)

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        """True when the element is indistinguishable from zero."""
        return self.unit == 0

    @property
    def is_exact_zero(self) -> bool:
        return self.unit == 0 and self.v is None

    def _absprec(self):
        """Absolute precision; None means exact (infinite)."""
        if self.unit == 0:
            return self.v  # None for exact zero
        return self.v + self.rel

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicElement):
            if other.field is not self.field and other.field != self.field:
                raise UsageError("operands belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicElement.from_rational(self.field, other)
        return None

    def _truncated(self, cap):
        """The same coset known only modulo p^cap."""
        if self.unit == 0:
            if self.v is None or self.v >= cap:
                return PadicElement._zero(self.field, cap)
            return self
        if self.v >= cap:
            return PadicElement._zero(self.field, cap)
        return PadicElement._make(self.field, self.v, self.unit, cap - self.v)

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self, other
        if a.is_exact_zero:
            return b
        if b.is_exact_zero:
            return a
        cap = min(a._absprec(), b._absprec())
        if a.unit == 0 and b.unit == 0:
            return PadicElement._zero(self.field, cap)
        if a.unit == 0:
            return b._truncated(cap)
        if b.unit == 0:
            return a._truncated(cap)
        p = self.field.p
        m = min(a.v, b.v)
        rel = cap - m
        s = (a.unit * p ** (a.v - m) + b.unit * p ** (b.v - m)) % (p ** rel)
        return PadicElement._make(self.field, m, s, rel)

    __radd__ = __add__

    def __neg__(self):
        if self.unit == 0:
            return self
        return PadicElement(self.field, self.v,
                            self.field.p ** self.rel - self.unit, self.rel)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self, other
        if a.is_exact_zero or b.is_exact_zero:
            return PadicElement.exact_zero(self.field)
        if a.unit == 0 and b.unit == 0:
            return PadicElement._zero(self.field, a.v + b.v)
        if a.unit == 0:
            return PadicElement._zero(self.field, a.v + b.v)
        if b.unit == 0:
            return PadicElement._zero(self.field, b.v + a.v)
        rel = min(a.rel, b.rel)
        return PadicElement._make(self.field, a.v + b.v,
                                  a.unit * b.unit, rel)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_exact_zero:
            raise ZeroDivisionError("division by exact zero")
        if other.unit == 0:
            raise PrecisionError(
                "insufficient precision: divisor indistinguishable from zero")
        if self.is_exact_zero:
            return self
        if self.unit == 0:
            return PadicElement._zero(self.field, self.v - other.v)
        rel = min(self.rel, other.rel)
        p = self.field.p
        unit = (self.unit * _modinv(other.unit, p ** rel)) % (p ** rel)
        return PadicElement._make(self.field, self.v - other.v, unit, rel)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return other / self

    def __pow__(self, n: int):
        if n < 0:
            one = PadicElement.from_rational(self.field, 1)
            return (one / self) ** (-n)
        result = PadicElement.from_rational(self.field, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    # -- inspection --------------------------------------------------------

    def valuation(self) -> Valuation:
        if self.unit == 0:
            if self.v is None:
                return Valuation.infinite()
            return Valuation(self.v, exact=False)
        return Valuation(self.v)

    def digits(self) -> list:
        """Base-p digits of the unit part, lowest first, one per known digit."""
        if self.unit == 0:
            return []
        out, u, p = [], self.unit, self.field.p
        for _ in range(self.rel):
            u, r = divmod(u, p)
            out.append(r)
        return out

    def __repr__(self):
        p = self.field.p
        if self.unit == 0:
            if self.v is None:
                return f"0 (p={p})"
            return f"O({p}^{self.v})"
        return f"{self.unit}*{p}^{self.v} + O({p}^{self.v + self.rel})"


# ---------------------------------------------------------------------------
# base fields
# ---------------------------------------------------------------------------


def _base_residue(x) -> tuple:
    """Residue of an integral base-field element, as a length-1 tuple."""
    p = x.field.p
    val = x.valuation()
    if val < 0:
        raise UsageError("residue of a non-integral element")
    if val > 0 or x.is_zero():
        return (0,)
    if isinstance(x, ExactElement):
        num, den = x.value.numerator, x.value.denominator
        return ((num * _modinv(den, p)) % p,)
    return (x.unit % p,)


class ExactField:
    """Q_p modelled by exact rationals; valuations are always exact."""

    backend = "exact"

    def __init__(self, p: int):
        if p < 2:
            raise UsageError(f"residue characteristic must be >= 2, got {p}")
        self.p = p

    e = 1
    f_res = 1

    @property
    def base_field(self):
        return self

    def from_rational(self, q) -> ExactElement:
        if isinstance(q, str):
            q = Fraction(q)
        return ExactElement(self, q)

    def zero(self):
        return ExactElement(self, 0)

    def one(self):
        return ExactElement(self, 1)

    def embed(self, x):
        if isinstance(x, ExactElement):
            if x.field is not self and x.field != self:
                raise UsageError("element of a different field")
            return x
        if isinstance(x, (PadicElement, ExtElement)):
            raise UsageError("element of a different field")
        return self.from_rational(x)

    def residue(self, x) -> tuple:
        return _base_residue(self.embed(x))

    def lift_residue(self, r: tuple):
        return self.from_rational(int(r[0]))

    def __eq__(self, other):
        return self is other or (isinstance(other, ExactField)
                                 and other.p == self.p)

    def __hash__(self):
        return hash(("exact", self.p))

    def __repr__(self):
        return f"ExactField(p={self.p})"


class CappedField:
    """Q_p with a relative-precision cap on every element."""

    backend = "capped"

    def __init__(self, p: int, prec: int):
        if p < 2:
            raise UsageError(f"residue characteristic must be >= 2, got {p}")
        if prec < 1:
            raise UsageError("precision cap must be >= 1")
        self.p = p
        self.prec = prec

    e = 1
    f_res = 1

    @property
    def base_field(self):
        return self

    def from_rational(self, q) -> PadicElement:
        if isinstance(q, str):
            q = Fraction(q)
        return PadicElement.from_rational(self, q)

    def zero(self):
        return PadicElement.exact_zero(self)

    def one(self):
        return PadicElement.from_rational(self, 1)

    def embed(self, x):
        if isinstance(x, PadicElement):
            if x.field is not self and x.field != self:
                raise UsageError("element of a different field")
            return x
        if isinstance(x, (ExactElement, ExtElement)):
            raise UsageError("element of a different field")
        return self.from_rational(x)

    def residue(self, x) -> tuple:
        return _base_residue(self.embed(x))

    def lift_residue(self, r: tuple):
        return self.from_rational(int(r[0]))

    def __eq__(self, other):
        return self is other or (isinstance(other, CappedField)
                                 and other.p == self.p
                                 and other.prec == self.prec)

    def __hash__(self):
        return hash(("capped", self.p, self.prec))

    def __repr__(self):
        return f"CappedField(p={self.p}, prec={self.prec})"


def field_for(p: int, backend: str = "exact", prec: int = 24):
    """Convenience constructor used by the CLI."""
    if backend == "exact":
        return ExactField(p)
    if backend == "capped":
        return CappedField(p, prec)
    raise UsageError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# polynomials over a field (coefficient lists, lowest degree first)
# ---------------------------------------------------------------------------


def poly_eval(coeffs, x):
    """Evaluate a coefficient list (lowest first) at x by Horner."""
    ring = x.field
    acc = ring.embed(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * x + ring.embed(c)
    return acc


def poly_derivative(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:]


def _poly_degree(coeffs):
    for i in range(len(coeffs) - 1, -1, -1):
        if not coeffs[i].is_zero():
            return i
    return -1


def _poly_divmod(num, den):
    """Division with remainder over a field; leading zeros are stripped."""
    num = list(num)
    dd = _poly_degree(den)
    if dd < 0:
        raise ZeroDivisionError("polynomial division by zero")
    lead = den[dd]
    quot = [num[0] * 0 for _ in range(max(len(num) - dd, 1))]
    for k in range(_poly_degree(num), dd - 1, -1):
        c = num[k]
        if c.is_exact_zero:
            continue
        q = c / lead
        quot[k - dd] = q
        for i in range(dd + 1):
            num[k - dd + i] = num[k - dd + i] - q * den[i]
    return quot, num[:dd] if dd > 0 else [num[0] * 0]


# ---------------------------------------------------------------------------
# Hensel lifting
# ---------------------------------------------------------------------------

_NEWTON_BUDGET = 64


def hensel_lift(g, x0, target_precision):
    """Refine a simple approximate root of g by Newton iteration.

    ``g`` is a coefficient list (lowest first) over the field of ``x0``.
    Requires the simple-root condition v(g(x0)) > 2 v(g'(x0)); each step
    then doubles the number of correct digits.  Returns x with
    v(g(x)) >= target_precision and x congruent to x0 modulo the initial
    separation.
    """
    gp = poly_derivative(g)
    fx = poly_eval(g, x0)
    fpx = poly_eval(gp, x0)
    vf = fx.valuation()
    vfp = fpx.valuation()
    if vf.is_infinite:
        return x0
    if vfp.is_infinite or not vfp.exact:
        raise DomainError("not a simple root at this precision")
    if not (vf > 2 * vfp.as_fraction()):
        raise DomainError("not a simple root at this precision")
    target = Fraction(target_precision)
    x = x0
    for _ in range(_NEWTON_BUDGET):
        fx = poly_eval(g, x)
        vf = fx.valuation()
        if vf >= target:
            if not vf.exact and vf.as_fraction() < target:
                raise PrecisionError(
                    "target precision exceeds the working precision")
            return x
        if vf.is_infinite:
            return x
        x = x - fx / poly_eval(gp, x)
    raise InternalError("Newton iteration failed to converge")


# ---------------------------------------------------------------------------
# residue fields F_{p^f} (f <= 4), used for conjugate enumeration
# ---------------------------------------------------------------------------


class ResidueField:
    """F_{p^f} presented as F_p[x] modulo a fixed irreducible polynomial.

    Elements are int tuples of length f, lowest degree first.
    """

    def __init__(self, p: int, modulus: list):
        self.p = p
        self.modulus = tuple(m % p for m in modulus)
        self.f = len(modulus) - 1

    def zero(self):
        return (0,) * self.f

    def elements(self):
        return itertools.product(range(self.p), repeat=self.f)

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def scalar(self, k, a):
        return tuple((k * x) % self.p for x in a)

    def mul(self, a, b):
        conv = [0] * (2 * self.f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] = (conv[i + j] + x * y) % self.p
        # reduce modulo the monic modulus
        for k in range(len(conv) - 1, self.f - 1, -1):
            c = conv[k]
            if c:
                for i in range(self.f):
                    conv[k - self.f + i] = (conv[k - self.f + i]
                                            - c * self.modulus[i]) % self.p
                conv[k] = 0
        return tuple(conv[: self.f])

    def poly_eval(self, coeffs, x):
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = self.add(self.mul(acc, x), c)
        return acc

    def is_zero(self, a):
        return not any(a)


def _fp_poly_irreducible(coeffs: list, p: int) -> bool:
    """Brute-force irreducibility over F_p for degree <= 4 monic polys."""
    deg = len(coeffs) - 1
    if deg <= 1:
        return deg == 1
    # linear factors
    for r in range(p):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * r + c) % p
        if acc == 0:
            return False
    if deg <= 3:
        return True
    # degree 4: also exclude irreducible-quadratic * quadratic splits
    for b in range(p):
        for c in range(p):
            # divide by x^2 + b x + c, check remainder
            q = list(coeffs)
            for k in range(deg, 1, -1):
                lead = q[k] % p
                if lead:
                    q[k - 1] = (q[k - 1] - lead * b) % p
                    q[k - 2] = (q[k - 2] - lead * c) % p
                    q[k] = 0
            if q[0] % p == 0 and q[1] % p == 0:
                return False
    return True


# ---------------------------------------------------------------------------
# extensions
# ---------------------------------------------------------------------------


class ExtensionField:
    """One Eisenstein or unramified stage on top of a base field or tower.

    The defining polynomial is monic; ``stage_coeffs`` holds its non-leading
    coefficients in the subfield, lowest degree first.
    """

    backend = property(lambda self: self.base_field.backend)

    def __init__(self, subfield, coeffs, kind: str):
        if kind not in ("eisenstein", "unramified"):
            raise UsageError(f"unknown stage kind {kind!r}")
        self.subfield = subfield
        self.kind = kind
        self.stage_coeffs = tuple(subfield.embed(c) for c in coeffs)
        self.degree = len(self.stage_coeffs)
        if self.degree < 2:
            raise UsageError("stage degree must be >= 2")
        self.tower_degree = self.degree * getattr(subfield, "tower_degree", 1)
        if self.tower_degree > MAX_TOWER_DEGREE:
            raise UsageError(
                f"tower degree {self.tower_degree} exceeds {MAX_TOWER_DEGREE}")
        if kind == "eisenstein":
            self.e = subfield.e * self.degree
            self.f_res = subfield.f_res
            self._validate_eisenstein()
        else:
            self.e = subfield.e
            self.f_res = subfield.f_res * self.degree
            self._validate_unramified()

    @property
    def p(self) -> int:
        return self.base_field.p

    @property
    def base_field(self):
        return self.subfield.base_field

    @property
    def stages(self):
        sub = getattr(self.subfield, "stages", ())
        return sub + ((self.stage_coeffs, self.kind),)

    @classmethod
    def tower(cls, base, stages):
        """Build a tower from (coeffs, kind) pairs, innermost first."""
        field = base
        for coeffs, kind in stages:
            field = cls(field, coeffs, kind)
        return field

    def _validate_eisenstein(self):
        u = Fraction(1, self.subfield.e)
        v0 = self.stage_coeffs[0].valuation()
        if not (v0.exact and not v0.is_infinite and v0.as_fraction() == u):
            raise UsageError(
                "Eisenstein stage needs constant term of uniformizer valuation")
        for c in self.stage_coeffs[1:]:
            if c.valuation() < u:
                raise UsageError(
                    "Eisenstein stage needs positive non-leading valuations")

    def _validate_unramified(self):
        if self.subfield.f_res != 1:
            raise UsageError("unramified stages cannot be nested; "
                             "combine them into a single stage")
        red = []
        for c in self.stage_coeffs:
            if c.valuation() < 0:
                raise UsageError("unramified stage needs integral coefficients")
            red.append(self.subfield.residue(c)[0])
        red.append(1)
        if not _fp_poly_irreducible(red, self.p):
            raise UsageError(
                "unramified stage must reduce to an irreducible polynomial")
        self._reduced_modulus = red

    # -- element factories -------------------------------------------------

    def from_vector(self, entries) -> "ExtElement":
        entries = list(entries)
        if len(entries) != self.degree:
            raise UsageError("coefficient vector has the wrong length")
        return ExtElement(self, tuple(self.subfield.embed(c) for c in entries))

    def zero(self):
        return self.from_vector([0] * self.degree)

    def one(self):
        return self.from_vector([1] + [0] * (self.degree - 1))

    def generator(self):
        return self.from_vector([0, 1] + [0] * (self.degree - 2))

    def from_rational(self, q):
        return self.embed(q)

    def embed(self, x):
        if isinstance(x, ExtElement) and (x.field is self or x.field == self):
            return x
        x = self.subfield.embed(x)
        zero = self.subfield.embed(0)
        return ExtElement(self, (x,) + (zero,) * (self.degree - 1))

    def uniformizer(self):
        """An element of valuation 1/e."""
        if self.e == 1:
            return self.embed(self.p)
        if self.kind == "eisenstein":
            return self.generator()
        return self.embed(self.subfield.uniformizer())

    # -- residues ----------------------------------------------------------

    def residue_field(self) -> ResidueField:
        if self.kind == "unramified":
            return ResidueField(self.p, self._reduced_modulus)
        if isinstance(self.subfield, ExtensionField):
            return self.subfield.residue_field()
        return ResidueField(self.p, [0, 1])

    def residue(self, x) -> tuple:
        """Image of an integral element in the residue field (int tuple)."""
        x = self.embed(x)
        if x.valuation() < 0:
            raise UsageError("residue of a non-integral element")
        if self.kind == "eisenstein":
            return self.subfield.residue(x.vec[0])
        return tuple(self.subfield.residue(c)[0] for c in x.vec)

    def lift_residue(self, r: tuple):
        if self.kind == "unramified":
            return self.from_vector(list(r))
        if isinstance(self.subfield, ExtensionField):
            return self.embed(self.subfield.lift_residue(r))
        return self.embed(int(r[0]))

    def __eq__(self, other):
        return (isinstance(other, ExtensionField)
                and other.kind == self.kind
                and other.subfield == self.subfield
                and all((a - b).is_zero() for a, b in
                        zip(other.stage_coeffs, self.stage_coeffs)))

    def __hash__(self):
        return hash((self.kind, self.degree, self.subfield))

    def __repr__(self):
        return (f"ExtensionField({self.subfield!r}, degree={self.degree}, "
                f"{self.kind})")


class ExtElement:
    """Element of an ExtensionField: a coefficient vector over the subfield."""

    __slots__ = ("field", "vec")

    def __init__(self, field: ExtensionField, vec: tuple):
        self.field = field
        self.vec = vec

    def _coerce(self, other):
        if isinstance(other, ExtElement) and other.field == self.field:
            return other
        if isinstance(other, (int, Fraction, ExactElement, PadicElement)):
            return self.field.embed(other)
        if isinstance(other, ExtElement):
            if other.field == self.field.subfield:
                return self.field.embed(other)
            raise UsageError("operands belong to different fields")
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return ExtElement(self.field,
                          tuple(a + b for a, b in zip(self.vec, other.vec)))

    __radd__ = __add__

    def __neg__(self):
        return ExtElement(self.field, tuple(-a for a in self.vec))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _reduce(self, conv):
        """Reduce a long coefficient list modulo the defining polynomial."""
        n = self.field.degree
        g = self.field.stage_coeffs
        for k in range(len(conv) - 1, n - 1, -1):
            c = conv[k]
            if c.is_exact_zero:
                continue
            for i in range(n):
                conv[k - n + i] = conv[k - n + i] - c * g[i]
        return conv[:n]

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        n = self.field.degree
        zero = self.field.subfield.embed(0)
        conv = [zero] * (2 * n - 1)
        for i, a in enumerate(self.vec):
            if a.is_exact_zero:
                continue
            for j, b in enumerate(other.vec):
                conv[i + j] = conv[i + j] + a * b
        return ExtElement(self.field, tuple(self._reduce(conv)))

    __rmul__ = __mul__

    def inverse(self):
        """Inverse modulo the defining polynomial, by extended Euclid."""
        if self.is_zero():
            raise PrecisionError(
                "insufficient precision: divisor indistinguishable from zero")
        sub = self.field.subfield
        one = sub.embed(1)
        zero = sub.embed(0)
        g = list(self.field.stage_coeffs) + [one]
        r0, r1 = g, list(self.vec)
        t0, t1 = [zero], [one]
        while _poly_degree(r1) > 0:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            t2 = [zero] * max(len(q) + len(t1), len(t0), 1)
            for i, qc in enumerate(q):
                if qc.is_exact_zero:
                    continue
                for j, tc in enumerate(t1):
                    t2[i + j] = t2[i + j] - qc * tc
            for i, tc in enumerate(t0):
                t2[i] = t2[i] + tc
            t0, t1 = t1, t2
        if _poly_degree(r1) < 0:
            raise UsageError("element is a zero divisor (non-field stage?)")
        c = r1[0]
        n = self.field.degree
        scaled = [tc / c for tc in t1]
        scaled += [zero] * max(0, n - len(scaled))
        return ExtElement(self.field, tuple(self._reduce(scaled)[:n]))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return other / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.vec)

    @property
    def is_exact_zero(self) -> bool:
        return all(c.is_exact_zero for c in self.vec)

    def valuation(self) -> Valuation:
        """min over the stage basis; exact for Eisenstein/unramified stages."""
        if self.field.kind == "eisenstein":
            step = Fraction(1, self.field.e)
        else:
            step = Fraction(0)
        exact_vals = []
        floors = []
        for i, c in enumerate(self.vec):
            val = c.valuation()
            if val.is_infinite:
                continue
            shifted = val.as_fraction() + i * step
            (exact_vals if val.exact else floors).append(shifted)
        if not exact_vals and not floors:
            return Valuation.infinite()
        if not exact_vals:
            return Valuation(min(floors), exact=False)
        m = min(exact_vals)
        if floors and min(floors) < m:
            return Valuation(min(floors), exact=False)
        return Valuation(m)

    def apply_root_map(self, root: "ExtElement") -> "ExtElement":
        """Image under the automorphism sending the stage generator to root."""
        coeffs = [self.field.embed(c) for c in self.vec]
        return poly_eval(coeffs, root)

    def __repr__(self):
        return f"ExtElement({list(self.vec)!r})"


# ---------------------------------------------------------------------------
# spec-level operations
# ---------------------------------------------------------------------------


def field_arith(a, b, op: str):
    """Named dispatch over the arithmetic operators."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise UsageError(f"unknown operation {op!r}")


def valuation_of(a) -> Valuation:
    return a.valuation()


def _roots_in_field(coeffs, E: ExtensionField, precision: int):
    """All roots of a monic polynomial in E found by residue lifting.

    ``coeffs`` lives in E (lowest first, monic).  Roots whose residue data
    is not simple cannot be certified and raise DomainError.
    """
    from . import newton  # local import: newton depends on this module

    coeffs = [E.embed(c) for c in coeffs]
    roots = []
    work = list(coeffs)
    while _poly_degree(work) >= 1:
        deg = _poly_degree(work)
        work = work[: deg + 1]
        if deg == 1:
            roots.append(-work[0] / work[1])
            break
        polygon = newton.build_polygon(work)
        found = None
        for seg in polygon.segments:
            s = -seg.slope  # root valuation
            scaled = s * E.e
            if scaled.denominator != 1:
                continue
            t = E.uniformizer() ** int(scaled)
            h = [c * t ** i for i, c in enumerate(work)]
            vals = [c.valuation() for c in h]
            finite = [v.as_fraction() for v in vals
                      if not v.is_infinite and v.exact]
            if not finite:
                raise PrecisionError("cannot normalize root candidates")
            m = min(finite)
            me = m * E.e
            if me.denominator != 1:
                raise DomainError("non-normal extension")
            scale = E.uniformizer() ** int(me)
            h = [c / scale for c in h]
            rf = E.residue_field()
            hbar = [E.residue(c) for c in h]
            hbar_prime = [rf.scalar(i, c) for i, c in enumerate(hbar)][1:]
            for r in rf.elements():
                if not any(r):
                    continue
                if not rf.is_zero(rf.poly_eval(hbar, r)):
                    continue
                if rf.is_zero(rf.poly_eval(hbar_prime, r)):
                    raise DomainError(
                        "non-normal extension: repeated residue root")
                y0 = E.lift_residue(r)
                y = hensel_lift(h, y0, precision)
                found = t * y
                break
            if found is not None:
                break
        if found is None:
            raise DomainError("non-normal extension: no root in the field")
        roots.append(found)
        # deflate by the found root
        quot = [E.embed(0)] * deg
        acc = work[deg]
        for k in range(deg - 1, -1, -1):
            quot[k] = acc
            acc = work[k] + acc * found
        work = quot
    return roots


def conjugates(E: ExtensionField, a, precision: int = 32):
    """Images of ``a`` under all base-fixing automorphisms of E.

    E must be a single-stage extension of degree <= 4 whose defining
    polynomial splits in E; the conjugates are obtained by sending the
    generator to each root.
    """
    if isinstance(E.subfield, ExtensionField):
        raise UsageError("conjugates need a single-stage extension")
    if E.degree > 4:
        raise UsageError("conjugates support degree <= 4 only")
    a = E.embed(a)
    g = list(E.stage_coeffs) + [E.subfield.embed(1)]
    gen = E.generator()
    rem_val = poly_eval([E.embed(c) for c in g], gen)
    if not rem_val.is_zero():
        raise InternalError("generator does not satisfy its polynomial")
    # divide off the generator root, then hunt for the others
    deg = len(g) - 1
    quot = [E.embed(0)] * deg
    acc = E.embed(g[deg])
    for k in range(deg - 1, -1, -1):
        quot[k] = acc
        acc = E.embed(g[k]) + acc * gen
    other_roots = _roots_in_field(quot, E, precision)
    if len(other_roots) != deg - 1:
        raise DomainError("non-normal extension")
    return [a.apply_root_map(r) for r in [gen] + other_roots]
