"""Conjugating a monic polynomial to z -> z^d near infinity.

For monic f of degree d with p not dividing d, there is a unique series
W(w) = w + O(w^2) in w = 1/z with W(1/f(z)) = W(1/z)^d.  It arises as the
limit of the normalized d^N-th roots of f^N(z)/z^(d^N); successive
approximants agree to order at least d^N, so truncating at order M only
needs the first N with d^N >= M.  The escape-radius constant C_f bounds
the convergence disk, and for good reduction the series has integral
coefficients and satisfies v(W(z)) = -v(z) on |z| > 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import config, newton
from .errors import (BudgetError, DomainError, InternalError, PrecisionError,
                     UsageError)
from .localfield import Valuation, poly_eval
from .series import (DiskSpec, PointValue, TailSeries, agreement_order,
                     evaluate, lagrange_invert)


class MonicPoly:
    """z^d + a_{d-1} z^{d-1} + ... + a_0 over a base field.

    Any degree >= 2 is accepted here; the conjugacy constructions refuse
    degrees divisible by the residue characteristic at call time.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        coeffs = [field.embed(c) for c in coeffs]
        if len(coeffs) < 2:
            raise UsageError("degree must be at least 2")
        self.field = field
        self.coeffs = tuple(coeffs)

    @classmethod
    def from_list(cls, field, all_coeffs):
        """From a full coefficient list a_0..a_d; the leading term must be 1."""
        all_coeffs = list(all_coeffs)
        lead = field.embed(all_coeffs[-1])
        if not (lead - field.embed(1)).is_zero():
            raise UsageError("polynomial must be monic")
        return cls(field, all_coeffs[:-1])

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def full_coeffs(self):
        return list(self.coeffs) + [self.field.embed(1)]

    def evaluate(self, x):
        return poly_eval(self.full_coeffs(), x)

    def iterate(self, N: int) -> "MonicPoly":
        """The N-fold composition f^N as a MonicPoly (exact lists)."""
        if N < 1:
            raise UsageError("iterate needs N >= 1")
        current = self.full_coeffs()
        for _ in range(N - 1):
            # substitute f into the current coefficient list
            acc = [self.field.embed(current[-1])]
            fc = self.full_coeffs()
            for c in reversed(current[:-1]):
                acc = _poly_mul(acc, fc, self.field)
                acc[0] = acc[0] + c
            current = acc
        return MonicPoly.from_list(self.field, current)

    def __repr__(self):
        return f"MonicPoly(d={self.degree}, p={self.field.p})"


def _poly_mul(a, b, field):
    out = [field.embed(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x.is_exact_zero:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


@dataclass(frozen=True)
class BoettcherData:
    """The conjugacy data for one polynomial.

    ``omega`` is the series in w = 1/z with linear coefficient 1;
    ``omega_inverse`` its compositional inverse; both are verified
    against the multiplicative model to ``verified_order``.
    """

    f: MonicPoly
    cf_valuation: Fraction
    good_reduction: bool
    omega: TailSeries
    omega_inverse: TailSeries
    verified_order: int
    domain: DiskSpec

    @property
    def inverse_domain(self) -> DiskSpec:
        return DiskSpec("zero", self.domain.eps)


# ---------------------------------------------------------------------------
# escape radius
# ---------------------------------------------------------------------------


def cf_constant(f: MonicPoly) -> Fraction:
    """v(C_f) = min(0, min_i v(a_i) / (d - i)); C_f = p^(-v)."""
    d = f.degree
    best = Fraction(0)
    for i, a in enumerate(f.coeffs):
        val = a.valuation()
        if val.is_infinite:
            continue
        if not val.exact:
            raise PrecisionError(
                f"coefficient {i} has unknown exact valuation")
        cand = val.as_fraction() / (d - i)
        if cand < best:
            best = cand
    return best


def cf_sup_check(f: MonicPoly, cf_valuation: Fraction | None = None) -> bool:
    """Cross-validate the escape radius against the polygon of f(z)/z^d.

    Viewed in w, the polygon slopes of 1 + a_{d-1} w + ... + a_0 w^d are
    the valuations of the roots of f, so min(0, min slope) must equal
    v(C_f).  Returns False on mismatch (a failed check, not an error).
    """
    if cf_valuation is None:
        cf_valuation = cf_constant(f)
    d = f.degree
    coeffs_w = [f.field.embed(1)] + [f.coeffs[d - j] for j in range(1, d + 1)]
    if all(c.is_zero() for c in coeffs_w[1:]):
        return cf_valuation == 0
    polygon = newton.build_polygon(coeffs_w)
    min_slope = min(seg.slope for seg in polygon.segments)
    return min(Fraction(0), min_slope) == cf_valuation


def good_reduction(f: MonicPoly) -> bool:
    """True iff every coefficient has non-negative valuation."""
    return all(a.valuation() >= 0 for a in f.coeffs)


# ---------------------------------------------------------------------------
# the conjugacy series
# ---------------------------------------------------------------------------


def _beta_step(beta: TailSeries, f: MonicPoly, d_pow: int) -> TailSeries:
    """From f^N(z)/z^(d^N) to f^(N+1)(z)/z^(d^(N+1)), d_pow = d^N.

    Substituting on the series level keeps O(M) terms per step:
    beta' = beta^d + sum_i a_i beta^i w^(d_pow (d - i)).
    """
    M = beta.trunc
    d = f.degree
    power = TailSeries.one(beta.field, M)
    total = TailSeries.zero(beta.field, M)
    for i in range(d + 1):
        if i > 0:
            power = (power * beta).truncate(M)
        if i < d:
            a = f.coeffs[i]
            shift = d_pow * (d - i)
            if a.is_exact_zero or shift >= M:
                continue
            total = total + (power * a).shifted(shift).truncate(M)
        else:
            total = total + power
    return total.truncate(M)


def _xi_series(f: MonicPoly, N: int, M: int) -> list:
    """The normalized root approximants xi_1..xi_N at truncation M.

    xi_N is the d^N-th root of f^N(z)/z^(d^N) with constant term 1,
    taken as N successive d-th roots.
    """
    d = f.degree
    field = f.field
    beta = TailSeries.from_polynomial(
        field, [1] + [f.coeffs[d - j] for j in range(1, d + 1)], M)
    out = []
    d_pow = 1
    for n in range(1, N + 1):
        xi = beta
        for _ in range(n):
            xi = xi.nth_root(d)
        out.append(xi)
        d_pow *= d
        if n < N:
            beta = _beta_step(beta, f, d_pow)
    return out


def boettcher_series(f: MonicPoly, M: int) -> BoettcherData:
    """Construct the conjugacy to prescribed truncation order M.

    Iterates until d^N >= M (the approximants are then the limit modulo
    w^M at least), extracts omega = w / xi_N, inverts it, and verifies
    the functional equation to full order.
    """
    d = f.degree
    p = f.field.p
    if d % p == 0:
        raise DomainError(
            "residue characteristic divides the degree; no conjugacy series")
    if M < 2:
        raise UsageError("truncation order must be at least 2")
    if M > config.max_series_order():
        raise BudgetError(f"truncation order {M} exceeds the budget")
    N = 1
    d_pow = d
    while d_pow < M:
        N += 1
        d_pow *= d
    xi = _xi_series(f, N, M)[-1]
    omega = (xi.invert_unit().shifted(1)).truncate(M)
    omega_inverse = lagrange_invert(omega)
    cf_val = cf_constant(f)
    verified = _equation_order(omega, f, M)
    if verified < M:
        raise InternalError(
            f"functional equation fails at index {verified}")
    return BoettcherData(
        f=f,
        cf_valuation=cf_val,
        good_reduction=good_reduction(f),
        omega=omega,
        omega_inverse=omega_inverse,
        verified_order=verified,
        domain=DiskSpec("inf", -cf_val),
    )


def compose_through_poly(S: TailSeries, f: MonicPoly) -> TailSeries:
    """S(f(z)) expanded as a series in w = 1/z, truncated at S's order.

    Uses 1/f(z) = w^d / (f(z)/z^d): the unit part is a polynomial in w,
    inverted to the working order, so the substitution is exact up to the
    claimed truncation.
    """
    if S.ord < 1:
        raise UsageError("composition through f needs series order >= 1")
    if S.field != f.field:
        raise UsageError("series and polynomial over different fields")
    d = f.degree
    T = S.trunc
    unit = TailSeries.from_polynomial(
        S.field, [1] + [f.coeffs[d - j] for j in range(1, d + 1)], T)
    W = unit.invert_unit().shifted(d)
    return S.compose(W).truncate(T)


def _equation_order(omega: TailSeries, f: MonicPoly, M: int) -> int:
    M = min(M, omega.trunc)
    lhs = compose_through_poly(omega.truncate(M), f)
    rhs = (omega.truncate(M) ** f.degree).truncate(M)
    return agreement_order(lhs, rhs)


def functional_equation_check(B: BoettcherData, M: int | None = None) -> int:
    """Agreement order of omega(f(z)) with omega(z)^d; M means verified."""
    if M is None:
        M = B.omega.trunc
    return _equation_order(B.omega, B.f, M)


def cauchy_rate_check(f: MonicPoly, N_max: int, trunc: int | None = None):
    """Agreement orders of successive root approximants, N = 1..N_max.

    Each entry is at least d^N; it equals d^N exactly when a_{d-1} is a
    unit, and only improves when low coefficients vanish.  The default
    truncation is the smallest that can certify both directions.
    """
    d = f.degree
    if d % f.field.p == 0:
        raise DomainError(
            "residue characteristic divides the degree; no conjugacy series")
    if trunc is None:
        trunc = d ** N_max + 2
    if trunc > config.max_series_order():
        raise BudgetError(f"truncation order {trunc} exceeds the budget")
    xs = _xi_series(f, N_max + 1, trunc)
    return [agreement_order(xs[n], xs[n + 1]) for n in range(N_max)]


# ---------------------------------------------------------------------------
# escape testing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EscapeResult:
    """Outcome of orbit iteration: 'escapes' and 'bounded' are certified;
    'bounded-so-far' is all finite precision can say under bad reduction."""

    status: str
    iterations: int
    reason: str

    @property
    def certified(self) -> bool:
        return self.status in ("escapes", "bounded")


def escape_test(f: MonicPoly, P, max_iter: int = 16) -> EscapeResult:
    """Iterate f on P until the orbit provably escapes, or give up.

    Once v(f^n(P)) < v(C_f) the modulus grows as |f^n(P)|^(d^k), so
    escape is certified.  Under good reduction the answer at n = 0 is
    decisive: negative valuation escapes, everything else stays integral
    forever.
    """
    P = f.field.embed(P)
    vcf = cf_constant(f)
    if good_reduction(f):
        v = P.valuation()
        if v >= 0:
            return EscapeResult("bounded", 0,
                                "good reduction and the orbit stays integral")
        if v.exact:
            return EscapeResult("escapes", 0,
                                "good reduction and v(P) < 0")
        raise PrecisionError("point valuation too uncertain to classify")
    x = P
    for n in range(max_iter + 1):
        v = x.valuation()
        if v.exact and not v.is_infinite and v.as_fraction() < vcf:
            return EscapeResult("escapes", n,
                                f"v(f^{n}(P)) = {v} < v(C_f) = {vcf}")
        if n < max_iter:
            x = f.evaluate(x)
    return EscapeResult("bounded-so-far", max_iter,
                        "no certified escape within the iteration budget")


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------


def omega_at(B: BoettcherData, z) -> PointValue:
    """Evaluate omega at a point strictly inside the certified disk."""
    result = evaluate(B.omega, z, B.domain)
    if B.good_reduction:
        vz = z.valuation()
        vr = result.value.valuation()
        if vz.exact and vr.exact and vr.as_fraction() != -vz.as_fraction():
            raise InternalError(
                "good-reduction evaluation violates v(omega(z)) = -v(z)")
    return result


def point_identity_report(B: BoettcherData, P):
    """Check omega(f(P)) = omega(P)^d within reported error bounds."""
    P = B.f.field.embed(P)
    lhs = omega_at(B, B.f.evaluate(P))
    rhs = omega_at(B, P).power(B.f.degree)
    ok, residual, bound = lhs.matches(rhs)
    return ok, residual, bound


def rescaled_integrality_ok(B: BoettcherData) -> bool:
    """With v(alpha) = v(C_f), alpha * omega(alpha z) must be integral.

    In coefficients: v(c_k) >= (k - 1) v(C_f) for both omega and its
    inverse.  For good reduction this is plain integrality.
    """
    for S in (B.omega, B.omega_inverse):
        for i, c in enumerate(S.coeffs):
            k = S.ord + i
            if not c.valuation() >= Fraction(k - 1) * B.cf_valuation:
                return False
    return True
