"""Tree automorphism groups, degree chains, and equivariance transport.

The expected image of Galois on the tree of iterated d-th roots acts at
level N as (Z/d^N) x| (Z/d^N)^* by (i, j).k = jk + i.  The conjugacy to
z -> z^d transports preimage trees to that model, and Newton-polygon
certificates turn predicted ramification growth into certified field
degrees d^n.  Degrees are certified only through totally-ramified
single-segment polygons; anything else is honestly "uncertified".
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import gcd

from . import config
from .boettcher import BoettcherData, MonicPoly, boettcher_series, omega_at
from .errors import BudgetError, DomainError, UsageError
from .localfield import ExtensionField, conjugates
from .newton import build_polygon, total_ramification_certificate
from .series import PointValue


@dataclass(frozen=True)
class KummerLevel:
    """The group (Z/d^N) x| (Z/d^N)^* with its action on labels Z/d^N."""

    d: int
    N: int

    def __post_init__(self):
        if self.d < 2 or self.N < 1:
            raise UsageError("need d >= 2 and N >= 1")

    @property
    def modulus(self) -> int:
        return self.d ** self.N

    @property
    def order(self) -> int:
        m = self.modulus
        return m * sum(1 for j in range(1, m + 1) if gcd(j, m) == 1)

    def elements(self):
        m = self.modulus
        units = [j for j in range(1, m) if gcd(j, m) == 1] or [1]
        for i in range(m):
            for j in units:
                yield (i, j)

    def identity(self):
        return (0, 1)

    def _check(self, g):
        i, j = g
        if gcd(j, self.modulus) != 1:
            raise UsageError(f"second component {j} is not invertible "
                             f"mod {self.modulus}")
        return i % self.modulus, j % self.modulus

    def compose(self, g2, g1):
        """g2 after g1: (i2 + j2 i1, j2 j1)."""
        i2, j2 = self._check(g2)
        i1, j1 = self._check(g1)
        m = self.modulus
        return ((i2 + j2 * i1) % m, (j2 * j1) % m)

    def inverse(self, g):
        i, j = self._check(g)
        m = self.modulus
        jinv = pow(j, -1, m)
        return ((-jinv * i) % m, jinv)

    def act(self, g, k: int) -> int:
        i, j = self._check(g)
        return (j * k + i) % self.modulus

    def restrict(self, g):
        """Image at level N-1 under reduction mod d^(N-1)."""
        if self.N < 2:
            raise UsageError("no level below N = 1")
        i, j = self._check(g)
        m = self.d ** (self.N - 1)
        return (i % m, j % m)


def kummer_act(g, k: int, L: KummerLevel) -> int:
    return L.act(g, k)


def kummer_restrict(g, L: KummerLevel):
    return L.restrict(g)


def subgroup_orbit_count(generators, L: KummerLevel) -> int:
    """Orbits of the generated subgroup on the labels Z/d^N.

    Exact closure by label BFS (generators have finite order, so their
    forward action alone connects each orbit).
    """
    m = L.modulus
    if m > config.max_orbit_size():
        raise BudgetError(f"label set of size {m} exceeds the budget")
    gens = [L._check(g) for g in generators]
    seen = [False] * m
    orbits = 0
    for start in range(m):
        if seen[start]:
            continue
        orbits += 1
        stack = [start]
        seen[start] = True
        while stack:
            k = stack.pop()
            for g in gens:
                nk = L.act(g, k)
                if not seen[nk]:
                    seen[nk] = True
                    stack.append(nk)
    return orbits


# ---------------------------------------------------------------------------
# degree chains
# ---------------------------------------------------------------------------


def predicted_degree_step(v_q: int, d: int, n: int) -> int:
    """Ramification lower bound e_{n+1}/e_n with e_m = d^m / gcd(d^m, v_q).

    This is the certified growth of the degree chain coming from d^m-th
    roots of an element of valuation v_q; it equals d once d^n absorbs
    the d-part of v_q.
    """
    if v_q == 0:
        raise DomainError("not applicable: the transported point is a unit")
    if d < 2 or n < 0:
        raise UsageError("need d >= 2 and n >= 0")
    q = abs(v_q)

    def e(m: int) -> int:
        dm = d ** m
        return dm // gcd(dm, q)

    return e(n + 1) // e(n)


def certify_degree(f: MonicPoly, P, n: int):
    """Certified value of [K(P_n):K] from the polygon of f^n(x) - P.

    Needs the exact backend.  Returns d^n when the polygon issues a
    total-ramification certificate, else None ("uncertified").
    """
    if f.field.backend != "exact":
        raise UsageError("degree certification needs the exact backend")
    if n < 1:
        raise UsageError("level must be >= 1")
    deg = f.degree ** n
    if deg > config.max_tree_degree():
        raise BudgetError(f"tree degree {deg} exceeds the budget")
    P = f.field.embed(P)
    coeffs = f.iterate(n).full_coeffs()
    coeffs[0] = coeffs[0] - P
    bit_cap = config.max_coeff_bits()
    for c in coeffs:
        if (c.value.numerator.bit_length() > bit_cap
                or c.value.denominator.bit_length() > bit_cap):
            raise BudgetError("coefficient size exceeds the budget")
    cert = total_ramification_certificate(build_polygon(coeffs), coeffs)
    if cert is None:
        return None
    return cert.degree


@dataclass(frozen=True)
class DegreeChain:
    """Predicted and certified degree growth along a preimage chain."""

    f: MonicPoly
    P: object
    v_q: int
    levels: tuple  # records {"n", "predicted_step", "certified_degree"}


def transported_valuation(B: BoettcherData, P) -> int:
    """v of the transported base point, exactly determined or refused.

    For good reduction with v(P) < 0 this is -v(P); otherwise it is read
    off a pointwise evaluation and must be certain at the reported error
    bound.
    """
    P = B.f.field.embed(P)
    vP = P.valuation()
    if B.good_reduction and vP.exact and vP < 0:
        v_q = -vP.as_fraction()
    else:
        pv = omega_at(B, P)
        val = pv.value.valuation()
        if not val.exact or val.is_infinite or not (val < pv.err):
            raise DomainError(
                "transported valuation not exactly determined; chain refused")
        v_q = val.as_fraction()
    if v_q.denominator != 1:
        raise DomainError("transported valuation is not an integer")
    return int(v_q)


def degree_chain(f: MonicPoly, P, levels: int, order: int = 16) -> DegreeChain:
    """Assemble predictions and certificates for n = 1..levels."""
    B = boettcher_series(f, order)
    v_q = transported_valuation(B, P)
    records = []
    for n in range(1, levels + 1):
        step = predicted_degree_step(v_q, f.degree, n - 1)
        try:
            certified = certify_degree(f, P, n)
        except BudgetError:
            certified = None
        records.append({"n": n, "predicted_step": step,
                        "certified_degree": certified})
    return DegreeChain(f=f, P=f.field.embed(P), v_q=v_q,
                       levels=tuple(records))


# ---------------------------------------------------------------------------
# equivariance transport
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransportCheck:
    name: str
    passed: bool
    residual: object  # Valuation
    bound: object     # Valuation


@dataclass(frozen=True)
class TransportReport:
    passed: bool
    checks: tuple


def transport_check(B: BoettcherData, E: ExtensionField, Q, P,
                    precision: int = 32) -> TransportReport:
    """Check the conjugacy respects powers and conjugation at a preimage.

    Given f(Q) = P with Q in a small normal extension E inside the
    certified disk, verifies (a) omega(Q)^d = omega(P) and (b) the
    multiset of omega at the conjugates of Q matches the conjugates of
    omega(Q), all within reported error bounds.
    """
    Q = E.embed(Q)
    P = B.f.field.embed(P)
    fQ = poly_in_ext(B.f, Q)
    if not (fQ - E.embed(P)).is_zero():
        raise UsageError("f(Q) does not equal P at working precision")

    checks = []
    omega_Q = omega_at(B, Q)
    omega_P = omega_at(B, P)
    lhs = omega_Q.power(B.f.degree)
    rhs = PointValue(E.embed(omega_P.value), omega_P.err)
    ok, residual, bound = lhs.matches(rhs)
    checks.append(TransportCheck("power-compatibility", ok, residual, bound))

    q_conj = conjugates(E, Q, precision=precision)
    left = [omega_at(B, qc) for qc in q_conj]
    right_values = conjugates(E, omega_Q.value, precision=precision)
    right = [PointValue(rv, omega_Q.err) for rv in right_values]
    ok2, worst_residual, bound2 = _match_multisets(left, right)
    checks.append(TransportCheck("conjugate-multisets", ok2,
                                 worst_residual, bound2))
    return TransportReport(passed=all(c.passed for c in checks),
                           checks=tuple(checks))


def poly_in_ext(f: MonicPoly, x):
    """Evaluate f at an extension element (coefficients embedded)."""
    E = x.field
    acc = E.embed(1)
    for c in reversed(f.coeffs):
        acc = acc * x + E.embed(c)
    return acc


def _match_multisets(left, right):
    """Best pairing of two PointValue lists within error bounds."""
    n = len(left)
    bound = min(pv.err for pv in left + right)
    best_residual = None
    for perm in permutations(range(n)):
        ok = True
        worst = None
        for i, j in enumerate(perm):
            match, residual, _ = left[i].matches(right[j])
            if worst is None or residual < worst:
                worst = residual
            if not match:
                ok = False
                break
        if ok:
            return True, worst, bound
        if best_residual is None or (worst is not None
                                     and worst > best_residual):
            best_residual = worst
    return False, best_residual, bound
