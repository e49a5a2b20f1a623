"""Broken-line enumeration, basis-function chart expansions, the
multiplication rule, traces, and conversion of chart Laurent expressions
to the basis.

Everything runs in the seed chart.  Endpoints are exact: a primitive
direction nudged by an infinitesimal rotation, handled with first-order
jets, so genericity never depends on numeric epsilons; only the endpoint
direction matters because every wall is a ray from the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .fan import LooijengaFan
from .geometry import TropPoint, trace_line
from .scattering import (
    ClsExp,
    IVec,
    ScatteringDiagram,
    Seed,
    Series,
    cls_deg,
    cls_mul,
    cls_one,
    consistent_diagram,
    poly_add,
    primitive_i,
    seed_data,
    ser_add,
    ser_make,
    ser_mul,
    ser_pow_unit,
    ser_truncate,
    ser_unit,
    wall_cross,
)
from .util import DomainError, Eps, InputError, frac, sign_of


@dataclass(frozen=True)
class Endpoint:
    """A generic endpoint direction: a chart vector nudged infinitesimally
    counterclockwise (side +1) or clockwise (side -1)."""

    base: IVec
    side: int = 0

    def position(self):
        x, y = Fraction(self.base[0]), Fraction(self.base[1])
        if self.side == 0:
            return (Eps(x), Eps(y))
        return (Eps(x, -self.side * y), Eps(y, self.side * x))


@dataclass(frozen=True)
class Bend:
    position: IVec
    z_step: IVec
    cls_step: ClsExp
    coeff: Fraction


@dataclass(frozen=True)
class BrokenLine:
    q_chart: IVec
    endpoint: Endpoint
    bends: tuple[Bend, ...]
    final_n: IVec

    def final_coeff(self) -> Fraction:
        c = Fraction(1)
        for b in self.bends:
            c *= b.coeff
        return c

    def final_cls(self, nvars: int) -> ClsExp:
        e = cls_one(nvars)
        for b in self.bends:
            e = cls_mul(e, b.cls_step)
        return e


class ThetaEngine:
    """Chart expansions of the basis functions over one scattering diagram."""

    def __init__(self, fan: LooijengaFan, order: int):
        self.fan = fan
        self.order = order
        self.seed: Seed = seed_data(fan)
        self.diagram: ScatteringDiagram = consistent_diagram(fan, order, seed_form=True)
        self.nvars = self.diagram.nvars
        # merge crossing events sharing a position: their automorphisms
        # commute, and a single combined function avoids double-counting
        # simultaneous bends
        merged: dict[IVec, Series] = {}
        for pos, wall in self.diagram.crossing_events():
            p = primitive_i(pos)
            if p in merged:
                merged[p] = ser_mul(merged[p], wall.fn, order)
            else:
                merged[p] = ser_truncate(wall.fn, order)
        self.events = sorted(merged.items())
        self._pow_cache: dict = {}
        self._exp_cache: dict = {}

    def _event_power(self, pos: IVec, e: int) -> Series:
        key = (pos, e)
        if key not in self._pow_cache:
            fn = next(f for p, f in self.events if p == pos)
            self._pow_cache[key] = ser_pow_unit(fn, e, self.order, self.nvars)
        return self._pow_cache[key]

    def _roots(self, q_chart: IVec) -> set[IVec]:
        """Candidate final chart exponents: q plus sums of wall-term steps
        within the class-order budget."""
        steps: list[tuple[IVec, int]] = []
        for pos, fn in self.events:
            for z, poly in fn.items():
                if z == (0, 0):
                    continue
                dmin = min(cls_deg(e) for e in poly)
                steps.append((z, dmin))
        frontier = {(q_chart, 0)}
        seen = {q_chart: 0}
        while frontier:
            nxt = set()
            for (n, used) in frontier:
                for (z, d) in steps:
                    u2 = used + d
                    if u2 > self.order:
                        continue
                    n2 = (n[0] + z[0], n[1] + z[1])
                    if seen.get(n2, 10**9) <= u2:
                        continue
                    seen[n2] = u2
                    nxt.add((n2, u2))
            frontier = nxt
        return set(seen)

    def broken_lines(self, q: TropPoint, endpoint: Endpoint) -> list[BrokenLine]:
        """Backward depth-first enumeration from the endpoint.

        Entry points range over candidate final exponents; each backward
        step undoes one bend, locating it on the current segment's
        backward ray.  A branch terminates when the bare initial monomial
        is reached; the remaining unbounded segment is always admissible.
        """
        q_chart = self.seed.to_chart_int(q)
        if q_chart == (0, 0):
            raise InputError("initial direction must be nonzero")
        pos0 = endpoint.position()
        out: list[BrokenLine] = []

        def recurse(pos, n_exp: IVec, used: int, bends: tuple, root: IVec):
            if n_exp == q_chart and used == _cls_total(bends):
                out.append(BrokenLine(q_chart, endpoint, bends, root))
            budget = self.order - used
            if budget <= 0:
                return
            d = (-n_exp[0], -n_exp[1])
            for wpos, fn in self.events:
                den = Fraction(d[0] * wpos[1] - d[1] * wpos[0])
                if den == 0:
                    continue
                s = (pos[0] * wpos[1] - pos[1] * wpos[0]) / den
                if sign_of(s) <= 0:
                    continue
                bx = pos[0] - s * d[0]
                by = pos[1] - s * d[1]
                c = bx / wpos[0] if wpos[0] != 0 else by / wpos[1]
                if sign_of(c) <= 0:
                    continue
                # automorphism exponent; its sign fixes the conormal side,
                # and adding wall-parallel steps cannot change it
                e0 = -wpos[1] * n_exp[0] + wpos[0] * n_exp[1]
                if e0 == 0:
                    continue
                e = abs(e0)
                for zstep, poly in self._event_power(wpos, e).items():
                    if zstep == (0, 0):
                        continue
                    prev_n = (n_exp[0] - zstep[0], n_exp[1] - zstep[1])
                    if prev_n == (0, 0):
                        continue
                    for cstep, ccoeff in poly.items():
                        dcls = cls_deg(cstep)
                        if dcls == 0 or dcls > budget:
                            continue
                        recurse(
                            (bx, by),
                            prev_n,
                            used + dcls,
                            (Bend(wpos, zstep, cstep, ccoeff),) + bends,
                            root,
                        )

        for root in sorted(self._roots(q_chart)):
            recurse(pos0, root, 0, (), root)
        out.sort(key=lambda b: (b.final_n, b.final_cls(self.nvars)))
        return out

    def expand(self, q: TropPoint, endpoint: Endpoint) -> Series:
        """Chart expansion: the sum of final monomials over broken lines."""
        if q.is_origin():
            return ser_unit(self.nvars)
        key = (q, endpoint)
        if key not in self._exp_cache:
            terms = []
            for bl in self.broken_lines(q, endpoint):
                terms.append((bl.final_n, bl.final_cls(self.nvars), bl.final_coeff()))
            self._exp_cache[key] = ser_make(terms)
        return self._exp_cache[key]


def _cls_total(bends) -> int:
    return sum(cls_deg(b.cls_step) for b in bends)


_ENGINE_CACHE: dict = {}


def theta_engine(fan: LooijengaFan, order: int) -> ThetaEngine:
    key = (fan.rays, order)
    if key not in _ENGINE_CACHE:
        _ENGINE_CACHE[key] = ThetaEngine(fan, order)
    return _ENGINE_CACHE[key]


def valuation_oracle(fan: LooijengaFan, q: TropPoint, v: TropPoint, order: int) -> Fraction:
    """The pairing evaluated through chart expansions: the minimum of the
    evaluation line's incoming tangent wedged against the expansion at the
    chamber where that line comes in from infinity."""
    if q.is_origin() or v.is_origin():
        return Fraction(0)
    eng = theta_engine(fan, order)
    qd = q.direction(fan)
    tr = trace_line(fan, v.direction(fan), Fraction(1))
    w = tr.end_backward
    w_chart_i = primitive_i(eng.seed.to_chart_int(w))
    # incoming seed velocity of the line at its backward tail
    frame = tr.frame
    lo, hi = min(tr.k_start, tr.k_end), max(tr.k_start, tr.k_end)

    def seed_point(t):
        p = tr.point_at(frac(t))
        ks = frame.sector_of(p, lo, hi)
        tp = frame.to_trop(p, ks[0])
        return eng.seed.to_chart(tp)

    tmin = min([c.time for c in tr.crossings], default=Fraction(0))
    p1 = seed_point(tmin - 2)
    p2 = seed_point(tmin - 1)
    vel = (p2[0] - p1[0], p2[1] - p1[1])
    exp = eng.expand(qd, Endpoint(w_chart_i, +1))
    if not exp:
        raise DomainError("empty expansion")
    best = None
    for (nx, ny), poly in exp.items():
        val = vel[0] * ny - vel[1] * nx
        best = val if best is None else min(best, val)
    return best * q.index() * v.index()


# ---------------------------------------------------------------------------
# elements of the basis algebra


def _poly_mul_frac(p: dict, c: Fraction) -> dict:
    return {e: v * c for e, v in p.items()} if c else {}


@dataclass(frozen=True)
class ThetaElement:
    """Finite combination of basis functions with truncated class-polynomial
    coefficients."""

    fan: LooijengaFan
    order: int
    terms: tuple  # tuple of (TropPoint, tuple of (ClsExp, Fraction))

    @staticmethod
    def make(fan: LooijengaFan, order: int, mapping) -> "ThetaElement":
        nvars = theta_engine(fan, order).nvars
        items = []
        for q, coeff in mapping.items():
            if isinstance(coeff, (int, Fraction)):
                poly = {cls_one(nvars): frac(coeff)}
            else:
                poly = dict(coeff)
            poly = {e: frac(c) for e, c in poly.items() if c}
            if poly:
                items.append((q, tuple(sorted(poly.items()))))
        items.sort(key=lambda t: t[0])
        return ThetaElement(fan, order, tuple(items))

    def coeff(self, q: TropPoint) -> dict:
        for p, poly in self.terms:
            if p == q:
                return dict(poly)
        return {}

    def support(self) -> list[TropPoint]:
        return [p for p, _ in self.terms]

    def as_dict(self) -> dict:
        return {p: dict(poly) for p, poly in self.terms}

    def theta_coefficient(self) -> dict:
        return self.as_dict()

    def specialize(self, values: Optional[dict] = None) -> tuple[dict, bool]:
        """Substitute numbers for the class variables (default all 1).

        Returns (mapping point -> rational, exact_flag); the flag is False
        when any coefficient carries positive class degree, since terms
        beyond the truncation order could then contribute.
        """
        exact = True
        out = {}
        for p, poly in self.terms:
            tot = Fraction(0)
            for e, c in poly:
                if cls_deg(e) > 0:
                    exact = False
                w = c
                if values:
                    for var, k in enumerate(e):
                        if k:
                            w *= frac(values.get(var, 1)) ** k
                out[p] = out.get(p, Fraction(0)) + w
            if out.get(p) == 0:
                del out[p]
        return out, exact


def theta_monomial(fan: LooijengaFan, order: int, q: TropPoint, coeff=1) -> ThetaElement:
    return ThetaElement.make(fan, order, {q: coeff})


def _scaled_point(fan: LooijengaFan, p: TropPoint, c: Fraction) -> TropPoint:
    return p.scale(fan, c)


def _candidate_products(fan: LooijengaFan, s1: list[TropPoint], s2: list[TropPoint]) -> set[TropPoint]:
    """Candidate support of a product: sums of lift pairs over developed
    windows within the turn cap, plus the origin."""
    from .geometry import develop, TRACE_TURN_CAP
    from .util import vadd, vscale

    out: set[TropPoint] = {TropPoint.origin()}
    for p1 in s1:
        if p1.is_origin():
            for p2 in s2:
                out.add(p2)
            continue
        frame = develop(fan, cut=p1.sector, sheets=TRACE_TURN_CAP + 1)
        w1 = frame.lift_point(p1, 0)
        for p2 in s2:
            if p2.is_origin():
                out.add(p1)
                continue
            for k, w2 in frame.lifts_of_point(p2):
                s = vadd(w1, w2)
                if s == (0, 0):
                    out.add(TropPoint.origin())
                    continue
                for kk in frame.sector_of(s):
                    out.add(frame.to_trop(s, kk))
    return out


def _extraction_data(eng: ThetaEngine, cands: list[TropPoint]):
    """Per-candidate chamber endpoints and chart targets."""
    data = []
    for r in cands:
        if r.is_origin():
            data.append((r, Endpoint((1, 0), -1), (0, 0)))
        else:
            rd = r.direction(eng.fan)
            ep = Endpoint(primitive_i(eng.seed.to_chart_int(rd)), -1)
            data.append((r, ep, eng.seed.to_chart_int(r)))
    return data


def _solve_basis_coefficients(eng: ThetaEngine, order: int, cands: list[TropPoint], rhs):
    """Solve sum_s c_s * expansion(basis_s) = target for the class
    polynomials c_s, reading one chart coefficient per candidate in its own
    chamber.

    `rhs(endpoint, target)` must return the class polynomial attached to
    z^target in the target series at that chamber.  The system is unit
    triangular in the class filtration, so fixed-point iteration converges
    within order+1 passes.
    """
    nv = eng.nvars
    data = _extraction_data(eng, cands)
    E: dict[TropPoint, dict] = {}
    M: dict[tuple, dict] = {}
    for r, ep, target in data:
        E[r] = dict(rhs(ep, target))
        for s in cands:
            exp_s = ser_unit(nv) if s.is_origin() else eng.expand(s, ep)
            cross = dict(exp_s.get(target, {}))
            if s == r:
                cross.pop(cls_one(nv), None)
            if any(cls_deg(e) == 0 for e in cross):
                raise DomainError(
                    f"bare chart monomial of {r} in the expansion of {s}"
                )
            if cross:
                M[(r, s)] = cross
    c: dict[TropPoint, dict] = {r: {} for r in cands}
    for _ in range(order + 2):
        changed = False
        for r in cands:
            acc = dict(E[r])
            for s in cands:
                cross = M.get((r, s))
                if not cross:
                    continue
                for ea, ca in c[s].items():
                    for eb, cb in cross.items():
                        if cls_deg(ea) + cls_deg(eb) > order:
                            continue
                        k = cls_mul(ea, eb)
                        v = acc.get(k, Fraction(0)) - ca * cb
                        if v:
                            acc[k] = v
                        else:
                            acc.pop(k, None)
            acc = {e: v for e, v in acc.items() if v and cls_deg(e) <= order}
            if acc != c[r]:
                c[r] = acc
                changed = True
        if not changed:
            break
    return c


def element_expansion(eng: ThetaEngine, element: ThetaElement, ep: Endpoint) -> Series:
    total: Series = {}
    for q, poly in element.terms:
        base = eng.expand(q, ep) if not q.is_origin() else ser_unit(eng.nvars)
        total = ser_add(total, ser_mul(base, {(0, 0): dict(poly)}, eng.order))
    return total


def multiply(f: ThetaElement, g: ThetaElement, order: Optional[int] = None) -> ThetaElement:
    """Product in the basis, extracted chamber by chamber.

    The z^r chart coefficient just clockwise of r's ray carries the r-basis
    coefficient plus class-positive cross terms from the other basis
    expansions; a unit-triangular solve separates them.
    """
    if f.fan != g.fan:
        raise InputError("elements live on different fans")
    fan = f.fan
    order = order if order is not None else min(f.order, g.order)
    eng = theta_engine(fan, order)
    cands = sorted(_candidate_products(fan, f.support(), g.support()))

    def rhs(ep: Endpoint, target) -> dict:
        prod = ser_mul(element_expansion(eng, f, ep), element_expansion(eng, g, ep), order)
        return prod.get(target, {})

    coeffs = _solve_basis_coefficients(eng, order, cands, rhs)
    return ThetaElement.make(fan, order, {r: p for r, p in coeffs.items() if p})


def _ccw_rank(base, u):
    """Exact angular position of direction u counterclockwise from base:
    (half-turn index, monotone key within the half)."""
    ax, ay = Fraction(base[0]), Fraction(base[1])
    w = ax * u[1] - ay * u[0]
    d = ax * u[0] + ay * u[1]
    if w == 0:
        return (0, Fraction(0)) if d > 0 else (2, Fraction(0))
    if w > 0:
        return (1, -d / w)
    return (3, -d / w)


def events_between(eng: ThetaEngine, frm: Endpoint, to: Endpoint):
    """Merged crossing events on the counterclockwise arc between two
    generic chamber endpoints, in crossing order."""
    if frm.side == 0 or to.side == 0:
        raise InputError("transport endpoints must carry a side")
    rb = _ccw_rank(frm.base, to.base)
    same_ray = rb == (0, Fraction(0))
    picked = []
    for pos, fn in eng.events:
        ru = _ccw_rank(frm.base, pos)
        if ru == (0, Fraction(0)):
            inc = frm.side < 0 and not (same_ray and to.side < 0)
        elif same_ray:
            inc = frm.side > 0 and to.side < 0
        elif ru < rb:
            inc = True
        elif ru == rb:
            inc = to.side > 0
        else:
            inc = False
        if inc:
            picked.append((ru, pos, fn))
    picked.sort(key=lambda t: t[0])
    return [(pos, fn) for _, pos, fn in picked]


def transport_series(eng: ThetaEngine, series: Series, frm: Endpoint, to: Endpoint) -> Series:
    """Apply the wall-crossing automorphisms along the counterclockwise arc
    from one chamber to another."""
    from .scattering import Wall

    out = ser_truncate(series, eng.order)
    for pos, fn in events_between(eng, frm, to):
        wall = Wall(direction=pos, fn=fn, incoming=False)
        out = wall_cross(out, wall, (Fraction(pos[1]), Fraction(-pos[0])), eng.order, eng.nvars)
    return out


def to_theta_basis(fan: LooijengaFan, series: Series, endpoint: Endpoint, order: int) -> ThetaElement:
    """Express a chart Laurent series, given in one chamber, in the basis.

    The series is transported to each candidate chamber with the
    wall-crossing automorphisms before extraction; the reconstruction is
    verified against the input in its own chamber before returning.
    """
    eng = theta_engine(fan, order)
    cands: set[TropPoint] = {TropPoint.origin()}
    for (nx, ny), poly in series.items():
        if (nx, ny) == (0, 0):
            continue
        for n2 in eng._roots((nx, ny)) | {(nx, ny)}:
            if n2 == (0, 0):
                continue
            p = eng.seed.from_chart((Fraction(n2[0]), Fraction(n2[1])))
            if p.is_integral():
                cands.add(p)

    def rhs(ep: Endpoint, target) -> dict:
        return transport_series(eng, series, endpoint, ep).get(target, {})

    coeffs = _solve_basis_coefficients(eng, order, sorted(cands), rhs)
    out = ThetaElement.make(fan, order, {r: p for r, p in coeffs.items() if p})
    recon = element_expansion(eng, out, endpoint)
    if ser_truncate(recon, order) != ser_truncate(series, order):
        raise DomainError("basis conversion failed to reproduce the input")
    return out


def trace_functional(f: ThetaElement, r: Optional[TropPoint] = None) -> dict:
    """Coefficient-extraction functionals on the basis algebra.

    With r omitted (or the origin) this is the unit coefficient.  For
    nonzero r two regimes are supported: r whose positive-distance line
    does not wrap (chart-expansion route), and f supported on r's ray
    (ray-subalgebra route); anything else raises.
    """
    fan = f.fan
    order = f.order
    eng = theta_engine(fan, order)
    if r is None or r.is_origin():
        return f.coeff(TropPoint.origin())
    if not r.is_integral():
        raise InputError("the twist index must be integral")
    tr = trace_line(fan, r.direction(fan), Fraction(1))
    if tr.wraps == 0:
        ep = Endpoint(primitive_i(eng.seed.to_chart_int(r.direction(fan))), -1)
        target = eng.seed.to_chart_int(r)
        return element_expansion(eng, f, ep).get(target, {})
    rd = r.direction(fan)
    on_ray = all(p.is_origin() or p.direction(fan) == rd for p in f.support())
    if not on_ray:
        raise DomainError(
            "unsupported twist: the index line wraps and the element is not "
            "supported on its ray"
        )
    return _ray_route_trace(f, r)


def _ray_route_trace(f: ThetaElement, r: TropPoint) -> dict:
    """Express the element as a polynomial in the primitive ray generator,
    divide by the generator's power matching r, and take the unit part."""
    fan = f.fan
    order = f.order
    eng = theta_engine(fan, order)
    rd = r.direction(fan)
    j = int(r.index())
    top = 0
    for p, _ in f.terms:
        if not p.is_origin():
            top = max(top, int(p.index()))
    gen = theta_monomial(fan, order, rd)
    powers = [theta_monomial(fan, order, TropPoint.origin()), gen]
    while len(powers) <= max(top, j):
        powers.append(multiply(powers[-1], gen, order))
    # triangular change of basis: powers[k] = theta_{k rd} + lower
    basis: dict[int, dict] = {}
    for k in range(max(top, j) + 1):
        basis[k] = powers[k].as_dict()
    # express f in the power basis by peeling from the top index down
    poly: dict[int, dict] = {}
    rem = f.as_dict()

    def sub_scaled(target, source, scale: dict, nv: int):
        for p, pol in source.items():
            cur = target.setdefault(p, {})
            for ea, ca in pol.items():
                for eb, cb in scale.items():
                    if cls_deg(ea) + cls_deg(eb) > order:
                        continue
                    k = cls_mul(ea, eb)
                    v = cur.get(k, Fraction(0)) - ca * cb
                    if v:
                        cur[k] = v
                    else:
                        cur.pop(k, None)
            if not cur:
                target.pop(p, None)

    nv = eng.nvars
    for k in range(max(top, j), -1, -1):
        key = rd.scale(fan, k) if k else TropPoint.origin()
        coeff = dict(rem.get(key, {}))
        if coeff:
            poly[k] = coeff
            sub_scaled(rem, basis[k], coeff, nv)
    if rem:
        raise DomainError("element is not in the ray subalgebra at this order")
    # divide the power-basis polynomial by x^j exactly
    if any(k < j and poly.get(k) for k in poly):
        raise DomainError("twist denominator does not divide the element")
    shifted: dict[int, dict] = {k - j: v for k, v in poly.items() if k >= j}
    out: dict = {}
    for k, coeff in shifted.items():
        base = powers[k].coeff(TropPoint.origin()) if k else {cls_one(nv): Fraction(1)}
        for ea, ca in coeff.items():
            for eb, cb in base.items():
                if cls_deg(ea) + cls_deg(eb) > order:
                    continue
                kk = cls_mul(ea, eb)
                v = out.get(kk, Fraction(0)) + ca * cb
                if v:
                    out[kk] = v
                else:
                    out.pop(kk, None)
    return out


def backward_initials(eng: ThetaEngine, endpoint: Endpoint, root: IVec) -> set:
    """Initial chart exponents of broken lines ending at the endpoint with
    the given final exponent."""
    pos0 = endpoint.position()
    found: set = set()

    def recurse(pos, n_exp: IVec, used: int):
        found.add(n_exp)
        budget = eng.order - used
        if budget <= 0:
            return
        d = (-n_exp[0], -n_exp[1])
        for wpos, fn in eng.events:
            den = Fraction(d[0] * wpos[1] - d[1] * wpos[0])
            if den == 0:
                continue
            s = (pos[0] * wpos[1] - pos[1] * wpos[0]) / den
            if sign_of(s) <= 0:
                continue
            bx = pos[0] - s * d[0]
            by = pos[1] - s * d[1]
            c = bx / wpos[0] if wpos[0] != 0 else by / wpos[1]
            if sign_of(c) <= 0:
                continue
            e0 = -wpos[1] * n_exp[0] + wpos[0] * n_exp[1]
            if e0 == 0:
                continue
            for zstep, poly in self_power(fn, abs(e0)).items():
                if zstep == (0, 0):
                    continue
                prev_n = (n_exp[0] - zstep[0], n_exp[1] - zstep[1])
                if prev_n == (0, 0):
                    continue
                dmin = min(cls_deg(e) for e in poly)
                if dmin == 0 or dmin > budget:
                    continue
                recurse((bx, by), prev_n, used + dmin)

    def self_power(fn, e):
        return ser_pow_unit(fn, e, eng.order, eng.nvars)

    recurse(pos0, root, 0)
    return found
