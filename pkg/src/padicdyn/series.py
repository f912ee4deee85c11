"""Truncated series in w = 1/z over a p-adic coefficient field.

Every series carries an explicit truncation order M ("known modulo w^M"),
and every ring operation computes the tightest sound truncation for its
result: min rule for sums, ord-shifted min rule for products.  n-th roots
of 1-units are taken by Newton iteration in the series ring, reversion by
Newton iteration on the composition identity.  Disk norms and pointwise
evaluation come with rigorous tail bounds.

Values are immutable; evaluating one series at many points concurrently
needs no coordination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, InternalError, PrecisionError, UsageError
from .localfield import ExtElement, Valuation


@dataclass(frozen=True)
class DiskSpec:
    """A disk in the w-coordinate: |w| < p^(-eps).

    ``center`` is "inf" (disk about infinity in z, so w = 1/z) or "zero"
    (disk about 0, evaluated at w directly).
    """

    center: str
    eps: Fraction

    def __post_init__(self):
        if self.center not in ("inf", "zero"):
            raise UsageError("disk center must be 'inf' or 'zero'")
        object.__setattr__(self, "eps", Fraction(self.eps))


class TailSeries:
    """c_ord w^ord + ... + c_{M-1} w^{M-1} + O(w^M).

    The leading stored coefficient is nonzero (the constructor strips
    zeros); an all-zero series has ord == trunc and no coefficients.
    """

    __slots__ = ("field", "ord", "coeffs", "trunc")

    def __init__(self, field, ord: int, coeffs, trunc: int):
        coeffs = [field.embed(c) for c in coeffs]
        if len(coeffs) > max(trunc - ord, 0):
            raise UsageError("more coefficients than the truncation allows")
        coeffs += [field.embed(0)] * (trunc - ord - len(coeffs))
        # only exactly-zero leading terms may be stripped; a capped
        # coefficient indistinguishable from zero stays stored, since
        # raising ord would overclaim precision downstream
        while coeffs and coeffs[0].is_exact_zero:
            coeffs.pop(0)
            ord += 1
        if not coeffs:
            ord = trunc
        self.field = field
        self.ord = ord
        self.coeffs = tuple(coeffs)
        self.trunc = trunc

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, field, trunc: int):
        return cls(field, trunc, [], trunc)

    @classmethod
    def one(cls, field, trunc: int):
        return cls.from_polynomial(field, [1], trunc)

    @classmethod
    def w_power(cls, field, k: int, trunc: int):
        return cls.from_polynomial(field, [0] * k + [1], trunc)

    @classmethod
    def from_polynomial(cls, field, coeffs, trunc: int):
        """A polynomial in w, truncated (or zero-padded) to order trunc."""
        coeffs = list(coeffs)[:trunc]
        coeffs += [0] * (trunc - len(coeffs))
        return cls(field, 0, coeffs, trunc)

    # -- inspection ----------------------------------------------------------

    def is_zero(self) -> bool:
        """True when every stored coefficient is indistinguishable from 0."""
        return all(c.is_zero() for c in self.coeffs)

    @property
    def is_exact_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int):
        """The coefficient of w^k; k must be below the truncation order."""
        if k >= self.trunc:
            raise UsageError(f"coefficient {k} is beyond truncation "
                             f"{self.trunc}")
        if k < self.ord:
            return self.field.embed(0)
        return self.coeffs[k - self.ord]

    def leading_coefficient(self):
        if self.is_exact_zero:
            raise UsageError("zero series has no leading coefficient")
        return self.coeffs[0]

    def replace_coefficient(self, k: int, value) -> "TailSeries":
        """Copy with the coefficient of w^k replaced (test harness hook)."""
        lo = min(self.ord, k)
        coeffs = [self.coefficient(i) for i in range(lo, self.trunc)]
        coeffs[k - lo] = self.field.embed(value)
        return TailSeries(self.field, lo, coeffs, self.trunc)

    def __eq__(self, other):
        if not isinstance(other, TailSeries):
            return NotImplemented
        if self.field != other.field or self.trunc != other.trunc:
            return False
        return agreement_order(self, other) >= self.trunc

    __hash__ = None

    def __repr__(self):
        terms = ", ".join(f"w^{self.ord + i}: {c!r}"
                          for i, c in enumerate(self.coeffs[:6]))
        return f"TailSeries([{terms}, ...] + O(w^{self.trunc}))"

    # -- ring operations -----------------------------------------------------

    def _check_field(self, other):
        if self.field != other.field:
            raise UsageError("series over different coefficient fields")

    def truncate(self, trunc: int) -> "TailSeries":
        if trunc >= self.trunc:
            return self
        coeffs = self.coeffs[: max(trunc - self.ord, 0)]
        return TailSeries(self.field, min(self.ord, trunc), coeffs, trunc)

    def _padded(self, trunc: int) -> "TailSeries":
        """Zero-extend the claimed truncation: iteration state only.

        Newton-style loops refine a candidate whose high terms are not yet
        meaningful, so the inflated claim never escapes those loops.
        """
        if trunc <= self.trunc:
            return self.truncate(trunc)
        return TailSeries(self.field, self.ord, list(self.coeffs), trunc)

    def shifted(self, k: int) -> "TailSeries":
        """Multiplication by the exact monomial w^k."""
        return TailSeries(self.field, self.ord + k, self.coeffs,
                          self.trunc + k)

    def __add__(self, other):
        if not isinstance(other, TailSeries):
            return NotImplemented
        self._check_field(other)
        trunc = min(self.trunc, other.trunc)
        lo = min(self.ord, other.ord, trunc)
        coeffs = []
        for k in range(lo, trunc):
            a = self.coefficient(k) if k >= self.ord else None
            b = other.coefficient(k) if k >= other.ord else None
            if a is None and b is None:
                coeffs.append(0)
            elif a is None:
                coeffs.append(b)
            elif b is None:
                coeffs.append(a)
            else:
                coeffs.append(a + b)
        return TailSeries(self.field, lo, coeffs, trunc)

    def __neg__(self):
        return TailSeries(self.field, self.ord, [-c for c in self.coeffs],
                          self.trunc)

    def __sub__(self, other):
        if not isinstance(other, TailSeries):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, TailSeries):
            self._check_field(other)
            trunc = min(self.trunc + other.ord, other.trunc + self.ord)
            if self.is_exact_zero or other.is_exact_zero:
                return TailSeries.zero(self.field, trunc)
            ord_ = self.ord + other.ord
            out = [self.field.embed(0)] * (trunc - ord_)
            for i, a in enumerate(self.coeffs):
                if a.is_exact_zero:
                    continue
                ia = self.ord + i
                jmax = min(len(other.coeffs), trunc - ia - other.ord)
                for j in range(jmax):
                    b = other.coeffs[j]
                    if b.is_exact_zero:
                        continue
                    out[ia + other.ord + j - ord_] = (
                        out[ia + other.ord + j - ord_] + a * b)
            return TailSeries(self.field, ord_, out, trunc)
        # scalar
        c = self.field.embed(other)
        if c.is_exact_zero:
            return TailSeries.zero(self.field, self.trunc)
        return TailSeries(self.field, self.ord,
                          [a * c for a in self.coeffs], self.trunc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise UsageError("negative series powers are not supported")
        result = TailSeries.one(self.field, self.trunc + self.ord * max(n - 1, 0))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def derivative(self) -> "TailSeries":
        """Formal d/dw."""
        if self.is_exact_zero:
            return TailSeries.zero(self.field, max(self.trunc - 1, 0))
        coeffs = [(self.ord + i) * c for i, c in enumerate(self.coeffs)]
        if self.ord == 0:
            coeffs = coeffs[1:]
        return TailSeries(self.field, max(self.ord - 1, 0), coeffs,
                          self.trunc - 1)

    # -- unit operations -----------------------------------------------------

    def invert_unit(self) -> "TailSeries":
        """Inverse of a series with constant term exactly 1."""
        if self.ord != 0 or not (self.coefficient(0)
                                 - self.field.embed(1)).is_zero():
            raise UsageError("inversion needs constant term 1; "
                             "callers normalize first")
        M = self.trunc
        inv = [self.field.embed(1)] + [self.field.embed(0)] * (M - 1)
        for k in range(1, M):
            acc = self.field.embed(0)
            jmax = min(k, len(self.coeffs) - 1)
            for j in range(1, jmax + 1):
                a = self.coeffs[j]
                if a.is_exact_zero:
                    continue
                acc = acc + a * inv[k - j]
            inv[k] = -acc
        return TailSeries(self.field, 0, inv, M)

    def nth_root(self, n: int) -> "TailSeries":
        """The unique n-th root with constant term 1, by Newton iteration.

        Requires constant term exactly 1 and n not divisible by the
        residue characteristic.
        """
        if n <= 0:
            raise UsageError("root index must be positive")
        if n % self.field.p == 0:
            raise DomainError("root not available: residue characteristic "
                              "divides index")
        if self.ord != 0 or not (self.coefficient(0)
                                 - self.field.embed(1)).is_zero():
            raise UsageError("n-th roots need constant term 1")
        M = self.trunc
        inv_n = Fraction(1, n)
        x = TailSeries.one(self.field, min(2, M))
        t = x.trunc
        # agreement with the root doubles per step, so refine at doubling
        # truncations; cost concentrates in the final full-order step
        while True:
            xpow = (x ** (n - 1)).truncate(t)
            residual = (xpow * x).truncate(t) - self.truncate(t)
            if not residual.is_zero():
                x = (x - residual * xpow.invert_unit() * inv_n).truncate(t)
            if t == M:
                break
            t = min(2 * t, M)
            x = x._padded(t)
        residual = (x ** n).truncate(M) - self
        if residual.is_zero():
            return x
        raise InternalError("series Newton iteration failed to converge")

    def compose(self, inner: "TailSeries") -> "TailSeries":
        """self(inner(w)) for inner with ord >= 1, by Horner."""
        self._check_field(inner)
        if not inner.is_exact_zero and inner.ord < 1:
            raise UsageError("composition needs inner order >= 1")
        target = min(self.trunc * max(inner.ord, 1), inner.trunc
                     + max(self.ord - 1, 0) * max(inner.ord, 1))
        acc = TailSeries.zero(self.field, target)
        for k in range(self.trunc - 1, -1, -1):
            acc = (acc * inner).truncate(target)
            if k >= self.ord:
                c = self.coefficient(k)
                if not c.is_exact_zero:
                    acc = acc + TailSeries.from_polynomial(
                        self.field, [c], target)
        return acc.truncate(target)


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def series_mul(a: TailSeries, b: TailSeries) -> TailSeries:
    return a * b


def series_invert_unit(a: TailSeries) -> TailSeries:
    return a.invert_unit()


def series_nth_root(a: TailSeries, n: int) -> TailSeries:
    return a.nth_root(n)


def lagrange_invert(S: TailSeries) -> TailSeries:
    """Compositional inverse B with S(B) = B(S) = w + O(w^M).

    Needs ord == 1 and linear coefficient exactly 1.  Computed by Newton
    iteration on the identity S(B) - w = 0; if S has integral
    coefficients, so does B (only the linear coefficient 1 is ever
    inverted).
    """
    if S.ord != 1 or not (S.coefficient(1) - S.field.embed(1)).is_zero():
        raise UsageError("reversion needs leading term exactly w")
    M = S.trunc
    if M <= 2:
        return TailSeries.w_power(S.field, 1, M)
    deriv = S.derivative()
    B = TailSeries.w_power(S.field, 1, 2)
    t = 2
    # quadratic convergence: refine at doubling truncations
    while True:
        w_t = TailSeries.w_power(S.field, 1, t)
        residual = S.truncate(t).compose(B).truncate(t) - w_t
        if not residual.is_zero():
            unit = deriv.truncate(t - 1).compose(B).truncate(t - 1)
            B = (B - residual * unit.invert_unit()).truncate(t)
        if t == M:
            break
        t = min(2 * t, M)
        B = B._padded(t)
    residual = S.compose(B).truncate(M) - TailSeries.w_power(S.field, 1, M)
    if residual.is_zero():
        return B
    raise InternalError("series reversion failed to converge")


def gauss_norm(S: TailSeries, D: DiskSpec) -> Valuation:
    """-log_p of the sup of |c_k| r^k on the disk: min_k v(c_k) + k eps.

    Only stored coefficients enter; an infinite result means the series
    is zero to its truncation order.
    """
    exact_vals = []
    floors = []
    for i, c in enumerate(S.coeffs):
        val = c.valuation()
        if val.is_infinite:
            continue
        weighted = val.as_fraction() + (S.ord + i) * D.eps
        (exact_vals if val.exact else floors).append(weighted)
    if not exact_vals and not floors:
        return Valuation.infinite()
    if not exact_vals:
        return Valuation(min(floors), exact=False)
    m = min(exact_vals)
    if floors and min(floors) < m:
        return Valuation(min(floors), exact=False)
    return Valuation(m)


@dataclass(frozen=True)
class PointValue:
    """A field element together with a rigorous error-bound valuation.

    The true value differs from ``value`` by something of valuation at
    least ``err``.
    """

    value: object
    err: Valuation

    def power(self, d: int) -> "PointValue":
        """d-th power with the propagated binomial error bound."""
        vx = self.value.valuation()
        if self.err.is_infinite:
            return PointValue(self.value ** d, self.err)
        e = self.err.as_fraction()
        if vx.is_infinite:
            bound = d * e
        else:
            x = vx.as_fraction()
            bound = min((d - 1) * x + e, d * e)
        return PointValue(self.value ** d, Valuation(bound, self.err.exact))

    def matches(self, other: "PointValue"):
        """Residual valuation of the difference and whether it clears the
        combined error bound."""
        diff = self.value - other.value
        residual = diff.valuation()
        bound = min(self.err, other.err)
        return residual >= bound, residual, bound


def evaluate(S: TailSeries, z, D: DiskSpec) -> PointValue:
    """Sum the stored terms at a point strictly inside the disk.

    For center "inf" the point is z and the series variable is w = 1/z;
    for center "zero" the series is summed at w = z directly.  The tail
    bound assumes the stored-coefficient Gauss bound extends to the
    unstored tail, which holds for series produced by the conjugacy
    constructions (their rescaled coefficients are integral).
    """
    w0 = z.field.embed(1) / z if D.center == "inf" else z
    v0 = w0.valuation()
    if v0.is_infinite or not v0.exact:
        raise DomainError("outside certified domain: point valuation unknown")
    if not v0.as_fraction() > D.eps:
        raise DomainError("outside certified domain")
    g = gauss_norm(S, D)
    if g.is_infinite:
        tail = Valuation(None)
    else:
        if not g.exact:
            raise PrecisionError("Gauss norm is only a lower bound here")
        tail = Valuation(g.as_fraction()
                         + S.trunc * (v0.as_fraction() - D.eps))
    if S.is_exact_zero:
        zero = z - z
        return PointValue(zero, tail)
    acc = None
    for c in reversed(S.coeffs):
        term = w0.field.embed(c) if isinstance(w0, ExtElement) else c
        acc = term if acc is None else acc * w0 + term
    acc = acc * w0 ** S.ord
    return PointValue(acc, tail)


def agreement_order(a: TailSeries, b: TailSeries) -> int:
    """Smallest index with distinguishable coefficients, else min trunc."""
    if a.field != b.field:
        raise UsageError("series over different coefficient fields")
    limit = min(a.trunc, b.trunc)
    for k in range(min(a.ord, b.ord, limit), limit):
        ca = a.coefficient(k)
        cb = b.coefficient(k)
        if not (ca - cb).is_zero():
            return k
    return limit
