"""Batch front end: parse a job, dispatch, emit JSON plus a summary line.

Output is deterministic for identical inputs (a --seed flag drives any
randomized sampling), all field constants travel as "num/den" strings or
base-p digit lists, and the exit status separates usage errors (2),
domain/precision errors (3), and failed mathematical checks (4).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from .arboreal import (KummerLevel, certify_degree, kummer_restrict,
                       predicted_degree_step, subgroup_orbit_count,
                       transport_check, transported_valuation)
from .boettcher import (MonicPoly, boettcher_series, cauchy_rate_check,
                        cf_constant, cf_sup_check, escape_test,
                        good_reduction, omega_at, point_identity_report,
                        rescaled_integrality_ok)
from .errors import (BudgetError, DomainError, InternalError, PrecisionError,
                     UsageError)
from .localfield import (ExactElement, ExtensionField, PadicElement,
                         Valuation, field_for)
from .newton import build_polygon, total_ramification_certificate
from .series import TailSeries

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CHECK_FAILED = 4

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for the sizes this tool accepts."""
    if n < 2:
        return False
    for small in _MR_BASES:
        if n == small:
            return True
        if n % small == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON encoding of library values
# ---------------------------------------------------------------------------


def frac_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 \
        else str(q.numerator)


def valuation_json(v: Valuation) -> str:
    if v.is_infinite:
        return "inf"
    text = frac_str(v.value)
    return text if v.exact else ">=" + text


def element_json(x) -> dict:
    if isinstance(x, ExactElement):
        return {"backend": "exact", "p": x.field.p,
                "rational": frac_str(x.value),
                "valuation": valuation_json(x.valuation())}
    if isinstance(x, PadicElement):
        return {"backend": "capped", "p": x.field.p,
                "valuation": valuation_json(x.valuation()),
                "digits": x.digits(),
                "precision": x.rel}
    # extension elements serialize componentwise
    return {"backend": "extension",
            "valuation": valuation_json(x.valuation()),
            "vector": [element_json(c) for c in x.vec]}


def series_json(s: TailSeries) -> dict:
    return {"ord": s.ord, "trunc": s.trunc,
            "coeffs": [element_json(c) for c in s.coeffs]}


def series_latex(s: TailSeries, var: str = "z^{-1}") -> str:
    terms = []
    for i, c in enumerate(s.coeffs):
        if c.is_zero():
            continue
        k = s.ord + i
        q = c.value if isinstance(c, ExactElement) else None
        if q is None:
            coeff = "c_{%d}" % k
        elif q == 1:
            coeff = ""
        elif q.denominator == 1:
            coeff = str(q.numerator)
        else:
            coeff = r"\frac{%d}{%d}" % (q.numerator, q.denominator)
        terms.append(f"{coeff}{var}^{{{k}}}" if k != 1
                     else f"{coeff}{var}")
    body = " + ".join(terms).replace("+ -", "- ")
    return f"{body} + O({var}^{{{s.trunc}}})"


# ---------------------------------------------------------------------------
# job specification
# ---------------------------------------------------------------------------


@dataclass
class JobSpec:
    command: str
    prime: int = 0
    backend: str = "exact"
    precision: int = 24
    order: int = 16
    poly: tuple = ()
    point: str | None = None
    levels: int = 3
    max_iter: int = 16
    d: int = 2
    N: int = 1
    generators: tuple = ()
    ext: tuple = ()
    ext_kind: str = "eisenstein"
    ext_point: tuple = ()
    points: int = 0
    seed: int = 0
    emit_latex: bool = False

    def validate(self):
        if self.command in ("kummer",):
            return
        if self.prime < 2 or self.prime > 2 ** 31 or not is_prime(self.prime):
            raise UsageError(f"--prime must be a prime below 2^31, "
                             f"got {self.prime}")
        if self.order < 2:
            raise UsageError("--order must be at least 2")
        if self.precision < 1:
            raise UsageError("--precision must be at least 1")
        for c in self.poly:
            Fraction(c)  # raises ValueError on malformed input

    def inputs_json(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["poly"] = list(self.poly)
        doc["generators"] = [list(g) for g in self.generators]
        doc["ext"] = list(self.ext)
        doc["ext_point"] = list(self.ext_point)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "JobSpec":
        kwargs = dict(doc)
        kwargs["poly"] = tuple(doc.get("poly", ()))
        kwargs["generators"] = tuple(tuple(g) for g in
                                     doc.get("generators", ()))
        kwargs["ext"] = tuple(doc.get("ext", ()))
        kwargs["ext_point"] = tuple(doc.get("ext_point", ()))
        return cls(**kwargs)


def parse_poly_arg(text: str) -> tuple:
    parts = [part.strip() for part in text.split(",") if part.strip()]
    if len(parts) < 2:
        raise UsageError("--poly needs at least two coefficients a0,..,1")
    return tuple(parts)


def parse_pairs(text: str) -> tuple:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        i, j = chunk.split(",")
        out.append((int(i), int(j)))
    return tuple(out)


def _field(job: JobSpec):
    return field_for(job.prime, job.backend, job.precision)


def _monic(job: JobSpec, field) -> MonicPoly:
    coeffs = [Fraction(c) for c in job.poly]
    if coeffs[-1] != 1:
        raise UsageError("--poly lists a0,...,a_{d-1},1 and must be monic")
    return MonicPoly(field, coeffs[:-1])


def _point(field, text: str):
    try:
        return field.embed(Fraction(text))
    except ValueError as exc:
        raise UsageError(f"malformed point {text!r}") from exc


# ---------------------------------------------------------------------------
# command runners: each returns (results, checks)
# ---------------------------------------------------------------------------


def run_cf(job: JobSpec):
    field = _field(job)
    f = _monic(job, field)
    vcf = cf_constant(f)
    results = {"cf_valuation": frac_str(vcf),
               "good_reduction": good_reduction(f)}
    checks = [{"name": "cf-sup-agreement", "passed": cf_sup_check(f, vcf)}]
    return results, checks


def run_boettcher(job: JobSpec):
    field = _field(job)
    f = _monic(job, field)
    B = boettcher_series(f, job.order)
    results = {
        "cf_valuation": frac_str(B.cf_valuation),
        "good_reduction": B.good_reduction,
        "verified_order": B.verified_order,
        "domain": {"center": B.domain.center, "eps": frac_str(B.domain.eps)},
        "omega": series_json(B.omega),
        "omega_inverse": series_json(B.omega_inverse),
    }
    if job.emit_latex:
        results["omega_latex"] = series_latex(B.omega)
    checks = [
        {"name": "functional-equation", "passed":
            B.verified_order >= job.order, "order": B.verified_order},
        {"name": "rescaled-integrality", "passed":
            rescaled_integrality_ok(B)},
    ]
    if field.backend == "exact":
        checks.append({"name": "cf-sup-agreement",
                       "passed": cf_sup_check(f, B.cf_valuation)})
    return results, checks


def run_verify(job: JobSpec):
    field = _field(job)
    f = _monic(job, field)
    B = boettcher_series(f, job.order)
    results = {"verified_order": B.verified_order}
    checks = [{"name": "functional-equation",
               "passed": B.verified_order >= job.order,
               "order": B.verified_order}]
    if job.points:
        rng = random.Random(job.seed)
        sampled = []
        for _ in range(job.points):
            num = rng.randrange(1, f.field.p)  # a unit numerator
            k = rng.randrange(1, 4)
            shift = int(-B.cf_valuation) + k   # v(point) < v(C_f) strictly
            point = Fraction(num, f.field.p ** shift)
            ok, residual, bound = point_identity_report(B, point)
            sampled.append({"point": frac_str(point), "passed": ok,
                            "residual": valuation_json(residual),
                            "bound": valuation_json(bound)})
        results["sampled_points"] = sampled
        checks.append({"name": "point-identity",
                       "passed": all(s["passed"] for s in sampled)})
    return results, checks


def run_newton_polygon(job: JobSpec):
    field = _field(job)
    coeffs = [field.embed(Fraction(c)) for c in job.poly]
    polygon = build_polygon(coeffs)
    cert = total_ramification_certificate(polygon, coeffs)
    results = {
        "vertices": [[int(i), frac_str(v)] for i, v in polygon.hull],
        "segments": [{"slope": frac_str(s.slope), "length": s.length}
                     for s in polygon.segments],
        "root_valuations": [frac_str(-s.slope)
                            for s in polygon.segments
                            for _ in range(s.length)],
        "certificate": ("inconclusive" if cert is None else
                        {"degree": cert.degree,
                         "ramification_index": cert.ramification_index,
                         "root_valuation": frac_str(cert.root_valuation)}),
    }
    return results, []


def run_escape(job: JobSpec):
    field = _field(job)
    f = _monic(job, field)
    if job.point is None:
        raise UsageError("escape needs --point")
    P = _point(field, job.point)
    res = escape_test(f, P, job.max_iter)
    results = {"status": res.status, "iterations": res.iterations,
               "certified": res.certified, "reason": res.reason,
               "cf_valuation": frac_str(cf_constant(f))}
    return results, []


def run_degrees(job: JobSpec):
    field = _field(job)
    if field.backend != "exact":
        raise UsageError("degrees needs the exact backend")
    f = _monic(job, field)
    if job.point is None:
        raise UsageError("degrees needs --point")
    P = Fraction(job.point)
    B = boettcher_series(f, job.order)
    v_q = transported_valuation(B, P)
    levels = []
    consistent = True
    product = 1
    for n in range(1, job.levels + 1):
        step = predicted_degree_step(v_q, f.degree, n - 1)
        product *= step
        try:
            certified = certify_degree(f, P, n)
        except BudgetError:
            certified = None
        if certified is not None and certified != product:
            consistent = False
        levels.append({"n": n, "predicted_step": step,
                       "certified_degree": ("uncertified" if certified is None
                                            else certified)})
    results = {"v_q": v_q, "levels": levels}
    checks = [{"name": "certified-matches-predicted", "passed": consistent}]
    return results, checks


def run_kummer(job: JobSpec):
    L = KummerLevel(job.d, job.N)
    gens = list(job.generators)
    for _, j in gens:
        from math import gcd
        if gcd(j, L.modulus) != 1:
            raise UsageError(f"generator second component {j} not a unit")
    orbit_count = subgroup_orbit_count(gens, L)
    results = {"d": job.d, "N": job.N, "modulus": L.modulus,
               "group_order": L.order, "orbits": orbit_count}
    checks = []
    if job.N >= 2 and gens:
        L_down = KummerLevel(job.d, job.N - 1)
        m_down = job.d ** (job.N - 1)
        ok = all(
            L.act(g, k) % m_down == L_down.act(kummer_restrict(g, L),
                                               k % m_down)
            for g in gens for k in range(L.modulus))
        checks.append({"name": "restriction-compatibility", "passed": ok})
    return results, checks


def run_transport(job: JobSpec):
    field = _field(job)
    f = _monic(job, field)
    if job.point is None or not job.ext or not job.ext_point:
        raise UsageError("transport needs --point, --ext and --ext-point")
    ext_coeffs = [Fraction(c) for c in job.ext]
    if ext_coeffs[-1] != 1:
        raise UsageError("--ext lists c0,...,1 and must be monic")
    E = ExtensionField(field, ext_coeffs[:-1], job.ext_kind)
    Q = E.from_vector([Fraction(c) for c in job.ext_point])
    B = boettcher_series(f, job.order)
    report = transport_check(B, E, Q, Fraction(job.point),
                             precision=max(job.precision, 16))
    results = {"passed": report.passed,
               "checks": [{"name": c.name, "passed": c.passed,
                           "residual": valuation_json(c.residual),
                           "bound": valuation_json(c.bound)}
                          for c in report.checks]}
    checks = [{"name": c.name, "passed": c.passed} for c in report.checks]
    return results, checks


_RUNNERS = {
    "cf": run_cf,
    "boettcher": run_boettcher,
    "verify": run_verify,
    "newton-polygon": run_newton_polygon,
    "escape": run_escape,
    "degrees": run_degrees,
    "kummer": run_kummer,
    "transport": run_transport,
}


def run(job: JobSpec) -> tuple:
    """Execute a job; returns (document, exit_status)."""
    job.validate()
    runner = _RUNNERS.get(job.command)
    if runner is None:
        raise UsageError(f"unknown command {job.command!r}")
    results, checks = runner(job)
    doc = {"inputs": job.inputs_json(), "results": results,
           "checks": checks, "seed": job.seed}
    status = EXIT_OK if all(c["passed"] for c in checks) else EXIT_CHECK_FAILED
    return doc, status


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padicdyn",
        description="Conjugacy series, Newton polygons, escape tests, and "
                    "preimage-tree degree growth over p-adic fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, poly=True, backend=True):
        sp.add_argument("--prime", type=int, required=True)
        if poly:
            sp.add_argument("--poly", type=str, required=True,
                            help='coefficients "a0,a1,...,1", rationals as '
                                 'num/den, monic')
        if backend:
            sp.add_argument("--backend", choices=["exact", "capped"],
                            default="exact")
            sp.add_argument("--precision", type=int, default=24)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", type=str, default=None)

    sp = sub.add_parser("cf", help="escape-radius constant and reduction type")
    common(sp)

    sp = sub.add_parser("boettcher", help="construct the conjugacy series")
    common(sp)
    sp.add_argument("--order", type=int, default=16)
    sp.add_argument("--emit-latex", action="store_true")

    sp = sub.add_parser("verify", help="functional equation at given order")
    common(sp)
    sp.add_argument("--order", type=int, default=32)
    sp.add_argument("--points", type=int, default=0,
                    help="also sample this many in-disk points")

    sp = sub.add_parser("newton-polygon", help="polygon and certificates")
    common(sp)

    sp = sub.add_parser("escape", help="orbit escape classification")
    common(sp)
    sp.add_argument("--point", type=str, required=True)
    sp.add_argument("--max-iter", type=int, default=16)

    sp = sub.add_parser("degrees", help="preimage-tree degree chain")
    common(sp, backend=False)
    sp.add_argument("--point", type=str, required=True)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--order", type=int, default=16)

    sp = sub.add_parser("kummer", help="tree automorphism group report")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--generators", type=str, default="",
                    help='semicolon-separated pairs "i,j;i,j"')
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", type=str, default=None)

    sp = sub.add_parser("transport", help="equivariance transport check")
    common(sp)
    sp.add_argument("--point", type=str, required=True)
    sp.add_argument("--ext", type=str, required=True,
                    help='defining polynomial "c0,...,1" of the extension')
    sp.add_argument("--ext-kind", choices=["eisenstein", "unramified"],
                    default="eisenstein")
    sp.add_argument("--ext-point", type=str, required=True,
                    help='coordinates of Q over the base, "q0,q1,..."')
    sp.add_argument("--order", type=int, default=16)
    return parser


def job_from_args(args: argparse.Namespace) -> JobSpec:
    kwargs = {"command": args.command, "seed": args.seed}
    if hasattr(args, "prime"):
        kwargs["prime"] = args.prime
    if getattr(args, "backend", None):
        kwargs["backend"] = args.backend
        kwargs["precision"] = args.precision
    if getattr(args, "poly", None):
        kwargs["poly"] = parse_poly_arg(args.poly)
    for name in ("order", "levels", "points", "d", "N", "point"):
        if hasattr(args, name) and getattr(args, name) is not None:
            kwargs[name] = getattr(args, name)
    if hasattr(args, "max_iter"):
        kwargs["max_iter"] = args.max_iter
    if getattr(args, "generators", None):
        kwargs["generators"] = parse_pairs(args.generators)
    if getattr(args, "ext", None):
        kwargs["ext"] = parse_poly_arg(args.ext)
        kwargs["ext_kind"] = args.ext_kind
        kwargs["ext_point"] = tuple(
            part.strip() for part in args.ext_point.split(",") if part.strip())
    if getattr(args, "emit_latex", False):
        kwargs["emit_latex"] = True
    return JobSpec(**kwargs)


def emit(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if output:
        with open(output, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        job = job_from_args(args)
        doc, status = run(job)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (DomainError, PrecisionError, BudgetError) as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return EXIT_DOMAIN
    except InternalError as exc:
        sys.stderr.write(f"check failure: {exc}\n")
        return EXIT_CHECK_FAILED
    emit(doc, getattr(args, "output", None))
    if status == EXIT_CHECK_FAILED:
        sys.stderr.write("one or more checks failed\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
