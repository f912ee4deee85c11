"""Newton polygons over valued fields.

The polygon of a polynomial is the lower convex hull of the points
(i, v(a_i)) over its nonzero coefficients.  Segment slopes give root
valuations; a single segment whose slope has denominator equal to the
degree certifies irreducibility and total ramification.  Valuations must
be exactly known, so the exact-rational backend is the natural home.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import PrecisionError, UsageError


@dataclass(frozen=True)
class Segment:
    slope: Fraction
    length: int


@dataclass(frozen=True)
class RamificationCertificate:
    """Witness that a polynomial is irreducible and totally ramified.

    Holds the degree (= ramification index) and the common valuation of
    the roots.  Never issued unless the polygon is a single segment whose
    slope has exact denominator equal to the degree.
    """

    degree: int
    ramification_index: int
    root_valuation: Fraction


@dataclass(frozen=True)
class NewtonPolygon:
    points: tuple          # (index, valuation) for nonzero coefficients
    hull: tuple            # vertices of the lower convex hull
    segments: tuple        # Segment records, slopes strictly increasing


def build_polygon(coeffs) -> NewtonPolygon:
    """Lower convex hull of (i, v(a_i)) for a coefficient list (lowest first).

    Needs at least two nonzero coefficients and exactly known valuations.
    """
    points = []
    for i, c in enumerate(coeffs):
        val = c.valuation()
        if val.is_infinite:
            continue
        if not val.exact:
            raise PrecisionError(
                "insufficient precision to place polygon point "
                f"at index {i}")
        points.append((i, val.as_fraction()))
    if len(points) < 2:
        raise UsageError("polygon needs at least two nonzero coefficients")

    hull = []
    for pt in points:  # monotone chain, lower hull only
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (pt[1] - y1) <= (pt[0] - x1) * (y2 - y1):
                hull.pop()
            else:
                break
        hull.append(pt)

    segments = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segments.append(Segment(Fraction(y2 - y1, x2 - x1), x2 - x1))
    return NewtonPolygon(tuple(points), tuple(hull), tuple(segments))


def root_valuations(polygon: NewtonPolygon) -> list:
    """Valuations of the roots in an algebraic closure, with multiplicity.

    A segment of slope s and horizontal length L contributes L roots of
    valuation -s.
    """
    out = []
    for seg in polygon.segments:
        out.extend([-seg.slope] * seg.length)
    return sorted(out)


def total_ramification_certificate(polygon: NewtonPolygon, coeffs):
    """Certificate that the polynomial is irreducible and totally ramified.

    Issued only when the polygon is a single segment spanning the full
    degree whose slope, in lowest terms, has denominator equal to the
    degree (so the root valuation has exact denominator n, forcing
    ramification index n and hence irreducibility).  Returns None when
    inconclusive; never a false certificate.
    """
    deg = len(coeffs) - 1
    while deg >= 0 and coeffs[deg].is_zero():
        deg -= 1
    if deg < 1:
        return None
    for i, v in polygon.points:
        if v.denominator != 1:
            return None  # value group must be Z
    if len(polygon.segments) != 1:
        return None
    seg = polygon.segments[0]
    if seg.length != deg or polygon.hull[0][0] != 0:
        return None
    if seg.slope.denominator != deg:
        return None
    return RamificationCertificate(degree=deg, ramification_index=deg,
                                   root_valuation=-seg.slope)
