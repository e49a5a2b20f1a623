"""Generalized polytope calculus: strong hulls, membership, polar and
Newton polytopes, Minkowski sums by three routes, and section counts.

A polytope is carried by its facet inequalities; every facet normal is a
sector-local point whose pairing slice is linear on a stated refinement,
so membership and support queries are exact chart arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Optional

from .fan import (
    LooijengaFan,
    Refinement,
    intersection_matrix,
    locate_in_refinement,
    point_to_original,
    refine_to_contain,
    require_positive,
)
from .geometry import TRACE_TURN_CAP, TropPoint, develop, trace_line
from .pairing import (
    TropicalFunction,
    merge_refinements,
    mirror_fan,
    mirror_point,
    pair_value,
    trop_theta,
)
from .util import (
    DomainError,
    InputError,
    Vec,
    fourier_motzkin,
    frac,
    is_zero,
    primitive,
    solve_in_basis,
    vadd,
    vscale,
    wedge,
)


_SLICE_CACHE: dict = {}


def pairing_slice(fan: LooijengaFan, v: TropPoint) -> Callable[[TropPoint], Fraction]:
    """Fast exact evaluator of x -> <x, v>: the mirrored theta slice."""
    key = (fan.rays, v)
    if key not in _SLICE_CACHE:
        mf = mirror_fan(fan)
        fn = trop_theta(mf, mirror_point(fan, v)).fn

        def ev(x: TropPoint, _fn=fn, _fan=fan) -> Fraction:
            return _fn.at(mirror_point(_fan, x))

        _SLICE_CACHE[key] = ev
    return _SLICE_CACHE[key]


def slice_bend_rays(fan: LooijengaFan, v: TropPoint) -> list[TropPoint]:
    """Rays where x -> <x, v> can bend, as points of the fan."""
    mf = mirror_fan(fan)
    fn = trop_theta(mf, mirror_point(fan, v)).fn
    out = []
    for i in range(fn.fan.n):
        p = fn.ray_point(i)
        out.append(mirror_point(mf, p))
    return out


@dataclass(frozen=True)
class StrongPolytope:
    """Intersection of pairing half-spaces {x : <x, v> >= a}.

    Facets are the source of truth; vertices are a verified cache of
    boundary points (generating extremes, possibly with kink points).
    """

    fan: LooijengaFan
    facets: tuple  # tuple of (TropPoint, Fraction)
    vertices: tuple  # tuple of TropPoint
    bounded: bool
    contains_origin: bool

    def member(self, x: TropPoint) -> bool:
        return all(pairing_slice(self.fan, v)(x) >= a for v, a in self.facets)

    def support(self, v: TropPoint) -> Fraction:
        """min <., v> over the polytope, from the vertex cache."""
        vals = [pair_value(self.fan, p, v) for p in self.vertices]
        if self.contains_origin:
            vals.append(Fraction(0))
        if not vals:
            raise DomainError("empty polytope has no support value")
        return min(vals)

    def integral_points(self) -> list[TropPoint]:
        return enumerate_lattice_points(self.fan, list(self.facets))


def _line_end(fan: LooijengaFan, frame, window: int, pt: Vec, w: Vec, forward: bool) -> Optional[TropPoint]:
    """Asymptotic direction of the line through `pt` with velocity w,
    walking forward or backward from the given window."""
    d = wedge(pt, w)
    if d == 0:
        return None
    travel = w if forward else (-w[0], -w[1])
    # angular motion of the travel: counterclockwise iff dist(travel) > 0
    dist = wedge(pt, travel)
    step = 1 if dist > 0 else -1
    k = window
    for _ in range(TRACE_TURN_CAP * fan.n + 2):
        if not (frame.lo <= k < frame.hi):
            return None
        a, b = solve_in_basis(frame.ray(k), frame.ray(k + 1), travel)
        if a >= 0 and b >= 0:
            return frame.to_trop(primitive(travel), k)
        k += step
    return None


def _candidate_normals(fan: LooijengaFan, pts: list[TropPoint]) -> list[TropPoint]:
    """Directions whose pairing slices can support the hull: ends of lines
    through pairs of developed lifts (self-pairs included) plus the
    zero-slice directions of each point."""
    cands: dict[TropPoint, None] = {}

    def add(p: Optional[TropPoint]):
        if p is not None and not p.is_origin():
            cands.setdefault(p.direction(fan))

    nonzero = [p for p in pts if not p.is_origin()]
    for p in nonzero:
        # directions with <p, v> = 0: the two rays of the degenerate slice
        tr = trace_line(fan, p.direction(fan), Fraction(-1))
        add(tr.end_forward)
        add(tr.end_backward)
        tr2 = trace_line(fan, p.direction(fan), Fraction(1))
        add(tr2.end_forward)
        add(tr2.end_backward)
    for i, p in enumerate(nonzero):
        frame = develop(fan, cut=p.sector, sheets=TRACE_TURN_CAP + 2)
        pv = frame.lift_point(p, 0)
        for j in range(i, len(nonzero)):
            r = nonzero[j]
            for k, rv in frame.lifts_of_point(r):
                w = (rv[0] - pv[0], rv[1] - pv[1])
                if is_zero(w):
                    continue
                ks = frame.sector_of(pv, max(frame.lo, k - fan.n), min(frame.hi - 1, k + fan.n))
                base_window = ks[0] if ks else 0
                add(_line_end(fan, frame, base_window, pv, w, True))
                add(_line_end(fan, frame, base_window, pv, w, False))
    return sorted(cands)


def strong_hull(fan: LooijengaFan, pts: list[TropPoint]) -> StrongPolytope:
    """Hull cut out by every pairing half-space supporting the points."""
    require_positive(fan)
    if not pts:
        raise InputError("hull of an empty set")
    pts = sorted(set(pts))
    normals = _candidate_normals(fan, pts)
    facets = []
    for v in normals:
        ev = pairing_slice(fan, v)
        a = min(ev(p) for p in pts)
        facets.append((v, a))
    contains_origin = all(a <= 0 for _, a in facets)
    # generating extremes among the inputs
    verts: list[TropPoint] = []
    for p in pts:
        if p.is_origin():
            continue
        strict = False
        others = [r for r in pts if r != p]
        for v, a in facets:
            ev = pairing_slice(fan, v)
            if not others or min(ev(r) for r in others) > ev(p):
                strict = True
                break
        if strict or not others:
            verts.append(p)
    if contains_origin and (TropPoint.origin() in pts or any(a == 0 for _, a in facets)):
        verts.append(TropPoint.origin())
    bounded = _is_bounded(fan, facets)
    return StrongPolytope(
        fan=fan,
        facets=tuple(facets),
        vertices=tuple(sorted(set(verts))),
        bounded=bounded,
        contains_origin=contains_origin,
    )


def _common_refinement(fan: LooijengaFan, normals: list[TropPoint]) -> Refinement:
    targets: list[TropPoint] = []
    for v in normals:
        targets.extend(slice_bend_rays(fan, v))
    return merge_refinements(fan, targets)


def _is_bounded(fan: LooijengaFan, facets: list) -> bool:
    """No nonzero direction satisfies every recession inequality."""
    if not facets:
        return False
    ref = _common_refinement(fan, [v for v, _ in facets])
    rfan = ref.fan
    evs = [pairing_slice(fan, v) for v, _ in facets]
    ray_pts = [
        TropPoint.make(fan, *point_to_original(ref, i, Fraction(1), Fraction(0)))
        for i in range(rfan.n)
    ]
    vals = [[ev(p) for p in ray_pts] for ev in evs]
    for s in range(rfan.n):
        # feasibility of a*r_s + b*r_{s+1}, a+b=1, a,b >= 0, all slices >= 0
        rows = []
        for vi in vals:
            rows.append([vi[s], vi[(s + 1) % rfan.n], Fraction(0)])
        rows.append([Fraction(1), Fraction(0), Fraction(0)])
        rows.append([Fraction(0), Fraction(1), Fraction(0)])
        rows.append([Fraction(1), Fraction(1), Fraction(-1)])   # a + b >= 1
        rows.append([Fraction(-1), Fraction(-1), Fraction(1)])  # a + b <= 1
        if fourier_motzkin(rows) is not None:
            return False
    return True


def vertex_candidates(fan: LooijengaFan, facets: list) -> list[TropPoint]:
    """Boundary points where two facet slices meet, or a slice meets a
    refinement ray; verified against all inequalities."""
    ref = _common_refinement(fan, [v for v, _ in facets])
    rfan = ref.fan
    evs = {id(v): pairing_slice(fan, v) for v, _ in facets}
    ray_pts = [
        TropPoint.make(fan, *point_to_original(ref, i, Fraction(1), Fraction(0)))
        for i in range(rfan.n)
    ]
    out: set[TropPoint] = set()

    def check(x: TropPoint):
        if all(evs[id(v)](x) >= a for v, a in facets):
            out.add(x)

    for s in range(rfan.n):
        p1, p2 = ray_pts[s], ray_pts[(s + 1) % rfan.n]
        for (v,  a), (w, b) in itertools.combinations(facets, 2):
            f1, f2 = evs[id(v)], evs[id(w)]
            # solve c1*f(p1) + c2*f(p2) = a for both slices, c1, c2 >= 0
            m = [[f1(p1), f1(p2)], [f2(p1), f2(p2)]]
            det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
            if det == 0:
                continue
            c1 = (a * m[1][1] - b * m[0][1]) / det
            c2 = (-a * m[1][0] + b * m[0][0]) / det
            if c1 < 0 or c2 < 0 or (c1 == 0 and c2 == 0):
                continue
            os_, oa, ob = point_to_original(ref, s, c1, c2)
            check(TropPoint.make(fan, os_, oa, ob))
    for s in range(rfan.n):
        for v, a in facets:
            f1 = evs[id(v)]
            base = f1(ray_pts[s])
            if base == 0:
                continue
            t = a / base
            if t <= 0:
                continue
            check(ray_pts[s].scale(fan, t) if False else TropPoint.make(
                fan, ray_pts[s].sector, t * ray_pts[s].a, t * ray_pts[s].b))
    return sorted(out)


def polytope_from_facets(fan: LooijengaFan, facets: list) -> StrongPolytope:
    facets = [(v.direction(fan) if v.index() != 1 else v, frac(a) / (v.index() or 1))
              for v, a in facets]
    verts = vertex_candidates(fan, facets)
    return StrongPolytope(
        fan=fan,
        facets=tuple(facets),
        vertices=tuple(verts),
        bounded=_is_bounded(fan, facets),
        contains_origin=all(a <= 0 for _, a in facets),
    )


def polar(fan: LooijengaFan, p: "StrongPolytope | list[TropPoint]") -> StrongPolytope:
    """{q : <q, v> >= -1 for every v in the set}."""
    require_positive(fan)
    if isinstance(p, StrongPolytope):
        gens = list(p.vertices)
        if not p.bounded:
            raise DomainError("polar of an unbounded polytope is out of scope")
    else:
        gens = list(p)
    facets = [(g.direction(fan), Fraction(-1) / g.index()) for g in gens if not g.is_origin()]
    merged: dict[TropPoint, Fraction] = {}
    for v, a in facets:
        if v not in merged or merged[v] < a:
            merged[v] = a
    return polytope_from_facets(fan, sorted(merged.items()))


def newton(fan: LooijengaFan, element) -> StrongPolytope:
    """Strong hull of a basis element's support."""
    sup = element.support()
    if not sup:
        raise InputError("zero element has no polytope")
    return strong_hull(fan, sup)


def enumerate_lattice_points(fan: LooijengaFan, facets: list) -> list[TropPoint]:
    """All integral points satisfying the facet inequalities; requires a
    bounded region."""
    if not _is_bounded(fan, facets):
        raise DomainError("region is unbounded; refusing enumeration")
    evs = [(pairing_slice(fan, v), a) for v, a in facets]
    ref = _common_refinement(fan, [v for v, _ in facets])
    rfan = ref.fan
    out: set[TropPoint] = set()
    if all(a <= 0 for _, a in facets):
        out.add(TropPoint.origin())
    for s in range(rfan.n):
        p1 = TropPoint.make(fan, *point_to_original(ref, s, Fraction(1), Fraction(0)))
        p2 = TropPoint.make(fan, *point_to_original(ref, s, Fraction(0), Fraction(1)))
        vals1 = [ev(p1) for ev, _ in evs]
        vals2 = [ev(p2) for ev, _ in evs]
        # radial bound: max t with some a*v1 + b*v2, a+b = t feasible
        bound = Fraction(0)
        for corner in (vals1, vals2):
            worst = None
            for (ev, a), val in zip(evs, corner):
                if val < 0:
                    t = a / val
                    worst = t if worst is None else min(worst, t)
            if worst is None:
                raise DomainError("unbounded sector escaped the bound check")
            bound = max(bound, worst)
        # a, b integral in sector coordinates of the *original* fan point:
        # scan the refined-sector cone up to the bound
        limit = int(bound) + 1
        for a_i in range(0, limit + 1):
            for b_i in range(0, limit + 1):
                if a_i == 0 and b_i == 0:
                    continue
                os_, oa, ob = point_to_original(ref, s, Fraction(a_i), Fraction(b_i))
                x = TropPoint.make(fan, os_, oa, ob)
                if not x.is_integral():
                    continue
                if all(ev(x) >= a for ev, a in evs):
                    out.add(x)
    return sorted(out)


# ---------------------------------------------------------------------------
# Minkowski sums


def _angular_sorted_dirs(fan: LooijengaFan, pts: list[TropPoint]) -> list[TropPoint]:
    dirs = sorted({p.direction(fan) for p in pts if not p.is_origin()},
                  key=lambda p: (p.sector, p.b / (p.a + p.b)))
    return dirs


def _midpoint_rays(fan: LooijengaFan, dirs: list[TropPoint]) -> list[TropPoint]:
    """A ray strictly between each pair of angularly consecutive directions."""
    if not dirs:
        return [TropPoint.ray(fan, 0)]
    out = []
    for i in range(len(dirs)):
        p, r = dirs[i], dirs[(i + 1) % len(dirs)]
        if p == r:
            out.append(_perp_ray(fan, p))
            continue
        frame = develop(fan, cut=p.sector, sheets=2)
        pv = frame.lift_point(p, 0)
        delta = (r.sector - p.sector) % fan.n
        if i + 1 < len(dirs):
            off = delta
        else:
            off = delta if delta else fan.n
        rv = vadd(vscale(r.a, frame.ray(off)), vscale(r.b, frame.ray(off + 1)))
        s = vadd(primitive(pv), primitive(rv))
        if is_zero(s):
            s = frame.ray(off)
        ks = frame.sector_of(s, 0, off)
        out.append(frame.to_trop(s, ks[0]).direction(fan) if ks else p)
    return sorted(set(out))


def _perp_ray(fan: LooijengaFan, p: TropPoint) -> TropPoint:
    frame = develop(fan, cut=p.sector, sheets=2)
    pv = frame.lift_point(p, 0)
    s = (-pv[1], pv[0])
    ks = frame.sector_of(s)
    return frame.to_trop(primitive(s), ks[0]).direction(fan)


def _window_sum(fan: LooijengaFan, frame, lifted: list[list[tuple[int, Vec]]]) -> set[TropPoint]:
    """Sums of one lift per summand whenever all lie in a common convex
    cone of the frame, located back on the surface."""
    out: set[TropPoint] = set()
    for combo in itertools.product(*lifted):
        vecs = [v for _, v in combo]
        lo = max(k for k, _ in combo)
        hi = min(k for k, _ in combo) + fan.n  # windows within one turn
        # minimal closed cone containing all lifts must span < pi:
        total = vecs[0]
        ok = True
        for vv in vecs[1:]:
            if wedge(total, vv) == 0 and (total[0] * vv[0] + total[1] * vv[1]) < 0:
                ok = False
                break
        if not ok:
            continue
        pairwise = all(
            wedge(a, b) != 0 or a[0] * b[0] + a[1] * b[1] > 0
            for a, b in itertools.combinations(vecs, 2)
        )
        span_ok = True
        for a, b in itertools.combinations(vecs, 2):
            if wedge(a, b) == 0 and a[0] * b[0] + a[1] * b[1] < 0:
                span_ok = False
        if not span_ok:
            continue
        s = (sum(v[0] for v in vecs), sum(v[1] for v in vecs))
        if is_zero(s):
            out.add(TropPoint.origin())
            continue
        ks = frame.sector_of(s)
        for k in ks:
            if all(_vec_in_closed_span(frame, k, v) for v in vecs):
                out.add(frame.to_trop(s, k))
                break
    return out


def _vec_in_closed_span(frame, k: int, v: Vec) -> bool:
    """Is v within half a turn of window k (a convex-cone certificate)?"""
    lo = max(frame.lo, k - frame.fan.n)
    hi = min(frame.hi - 1, k + frame.fan.n)
    return bool(frame.sector_of(v, lo, hi))


def minkowski(
    fan: LooijengaFan,
    polys: list[StrongPolytope],
    method: str = "separating-rays",
) -> StrongPolytope:
    """Minkowski sum of origin-containing polytopes.

    Methods: "separating-rays" sums vertex tuples in cut complements
    chosen between the vertex directions; "universal-cover" sums lifts in
    a developed frame whenever they share a convex cone; "per-seed" takes
    classical sums in every seed chart (finite type only).  All agree
    where applicable.
    """
    require_positive(fan)
    if not polys:
        raise InputError("empty sum")
    for p in polys:
        if not p.contains_origin:
            raise DomainError("every summand must contain the origin")
    gens = [list(p.vertices) + [TropPoint.origin()] for p in polys]
    if method == "universal-cover":
        pts = _minkowski_cover(fan, gens)
    elif method == "separating-rays":
        pts = _minkowski_separating(fan, gens)
    elif method == "per-seed":
        pts = _minkowski_per_seed(fan, gens)
    else:
        raise InputError(f"unknown method {method!r}")
    return strong_hull(fan, sorted(pts))


def _minkowski_cover(fan: LooijengaFan, gens: list[list[TropPoint]]) -> set[TropPoint]:
    frame = develop(fan, 0, TRACE_TURN_CAP + 2)
    lifted = []
    for g in gens:
        lifts: list[tuple[int, Vec]] = []
        for p in g:
            if p.is_origin():
                lifts.append((0, (Fraction(0), Fraction(0))))
            else:
                lifts.extend(frame.lifts_of_point(p))
        lifted.append(lifts)
    out = _window_sum(fan, frame, lifted)
    for g in gens:
        if all(TropPoint.origin() in gg for gg in gens if gg is not g):
            out.update(g)
    out.add(TropPoint.origin())
    return out


def _minkowski_separating(fan: LooijengaFan, gens: list[list[TropPoint]]) -> set[TropPoint]:
    alldirs = _angular_sorted_dirs(fan, [p for g in gens for p in g])
    cuts = _midpoint_rays(fan, alldirs)
    out: set[TropPoint] = {TropPoint.origin()}
    for cut in cuts:
        frame = develop(fan, cut=cut.sector, sheets=TRACE_TURN_CAP + 2)
        base = (cut.sector, cut.a, cut.b)
        lifted = []
        for g in gens:
            lifts: list[tuple[int, Vec]] = []
            for p in g:
                if p.is_origin():
                    lifts.append((0, (Fraction(0), Fraction(0))))
                    continue
                # unique lift in the one-turn window starting at the cut
                k = (p.sector - cut.sector) % fan.n
                lifts.append((k, frame.lift_point(p, k)))
            lifted.append(lifts)
        out.update(_window_sum(fan, frame, lifted))
    for i, g in enumerate(gens):
        if all(TropPoint.origin() in gg for j, gg in enumerate(gens) if j != i):
            out.update(g)
    return out


def is_finite_type(fan: LooijengaFan) -> bool:
    """No traced fan-ray line wraps (sampling characterization)."""
    try:
        for i in range(fan.n):
            for d in (Fraction(1), Fraction(-1)):
                if trace_line(fan, TropPoint.ray(fan, i), d).wraps > 0:
                    return False
    except DomainError:
        return False
    return True


def _seed_chart_maps(fan: LooijengaFan, depth: int = 3):
    """PL chart identifications for the finitely many seeds: the base
    chart composed with shears across the stable walls.

    A shear across the wall through u with multiplicity b fixes the
    half-plane <n, y> >= 0 and sends y to y + b <n, y> u on the other
    side; its conormal kills u, so it is its own branch-inverse with the
    opposite coefficient.
    """
    from .theta import theta_engine

    eng = theta_engine(fan, 2)
    shears = []
    for pos, fn in eng.events:
        u = (Fraction(pos[0]), Fraction(pos[1]))
        n = (-u[1], u[0])
        deg = 0
        for z, poly in fn.items():
            if z == (0, 0):
                continue
            j = abs(z[0] // pos[0]) if pos[0] else abs(z[1] // pos[1])
            deg = max(deg, j)
        if deg:
            shears.append((u, n, Fraction(deg)))

    def mk(seq):
        def fwd(y, seq=seq):
            for u, n, b in seq:
                t = n[0] * y[0] + n[1] * y[1]
                if t < 0:
                    y = (y[0] + b * t * u[0], y[1] + b * t * u[1])
            return y

        def bwd(y, seq=seq):
            for u, n, b in reversed(seq):
                t = n[0] * y[0] + n[1] * y[1]
                if t < 0:
                    y = (y[0] - b * t * u[0], y[1] - b * t * u[1])
            return y

        return fwd, bwd

    probe = [(Fraction(3), Fraction(1)), (Fraction(-2), Fraction(5)),
             (Fraction(-1), Fraction(-3)), (Fraction(2), Fraction(-5))]
    seen = set()
    out = []
    frontier = [()]
    for _ in range(depth + 1):
        nxt = []
        for seq in frontier:
            fwd, bwd = mk(list(seq))
            key = tuple(fwd(p) for p in probe)
            if key in seen:
                continue
            seen.add(key)
            out.append((fwd, bwd))
            for sh in shears:
                nxt.append(seq + (sh,))
        frontier = nxt
    return out


def _minkowski_per_seed(fan: LooijengaFan, gens: list[list[TropPoint]]) -> set[TropPoint]:
    if not is_finite_type(fan):
        raise DomainError("per-seed summation requires finite type")
    from .scattering import seed_data

    seed = seed_data(fan)
    out: set[TropPoint] = {TropPoint.origin()}
    for fwd, bwd in _seed_chart_maps(fan):
        for combo in itertools.product(*gens):
            ys = [fwd(seed.to_chart(p)) for p in combo]
            s = (sum(y[0] for y in ys), sum(y[1] for y in ys))
            p = seed.from_chart(bwd(s))
            if p.a.denominator == 1 and p.b.denominator == 1:
                out.add(p)
    return out


# ---------------------------------------------------------------------------
# boundary divisors and section counts


@dataclass(frozen=True)
class BoundaryDivisor:
    """Formal combination sum a_i * D_{v_i} over primitive directions."""

    fan: LooijengaFan
    terms: tuple  # tuple of (TropPoint primitive, Fraction)

    @staticmethod
    def make(fan: LooijengaFan, terms) -> "BoundaryDivisor":
        seen = {}
        for v, a in terms:
            d = v.direction(fan)
            if d in seen:
                raise InputError("duplicate divisor direction")
            seen[d] = frac(a) * v.index()
        return BoundaryDivisor(fan, tuple(sorted(seen.items())))


@dataclass(frozen=True)
class SectionReport:
    polytope: StrongPolytope
    lattice_points: tuple
    dimension: int
    edge_counts: tuple          # d_i per divisor term
    intersection_numbers: tuple  # (H W)_i per divisor term
    equality_flags: tuple        # d_i == W.D_i, or None when inapplicable
    self_intersection: Fraction
    ample: bool


def sections(fan: LooijengaFan, w: BoundaryDivisor) -> SectionReport:
    """Lattice points of the dual polytope of a boundary divisor, with the
    edge-count and intersection-number comparison per direction."""
    require_positive(fan)
    facets = [(v, -a) for v, a in w.terms]
    poly = polytope_from_facets(fan, facets)
    pts = enumerate_lattice_points(fan, list(poly.facets))
    # intersection numbers from the bending dictionary on a refinement
    ref = merge_refinements(fan, [v for v, _ in w.terms])
    rfan = ref.fan
    values = []
    for i in range(rfan.n):
        values.append(None)
    idx_of = {}
    for v, a in w.terms:
        s, ra, rb = locate_in_refinement(ref, v.sector, v.a, v.b)
        if rb != 0:
            raise DomainError("refinement failed to expose a divisor ray")
        idx_of[v] = s % rfan.n
    # the divisor's PL function: values a_i at the stated rays, zero bend
    # elsewhere determines values at the remaining refined rays
    vals = _interpolate_divisor_values(fan, ref, {idx_of[v]: a for v, a in w.terms})
    fn = TropicalFunction(ref, tuple(vals))
    h = intersection_matrix(rfan)
    bend = [sum(h[i][j] * vals[j] for j in range(rfan.n)) for i in range(rfan.n)]
    inter = []
    edge = []
    flags = []
    for v, a in w.terms:
        i = idx_of[v]
        inter.append(bend[i])
        ev = pairing_slice(fan, v)
        face_pts = [p for p in pts if ev(p) == -a]
        d_i = len(face_pts) - 1
        edge.append(d_i)
        if d_i < 1:
            flags.append(None)
        else:
            flags.append(bend[i] == d_i)
    total = sum(a * b for (_, a), b in zip(w.terms, inter))
    ample = all(b > 0 for b in inter)
    return SectionReport(
        polytope=poly,
        lattice_points=tuple(pts),
        dimension=len(pts),
        edge_counts=tuple(edge),
        intersection_numbers=tuple(inter),
        equality_flags=tuple(flags),
        self_intersection=total,
        ample=ample,
    )


def _interpolate_divisor_values(fan, ref: Refinement, anchor: dict) -> list[Fraction]:
    """Values of the function bending only at the anchor rays: linear
    interpolation across the other refined rays."""
    rfan = ref.fan
    n = rfan.n
    if not anchor:
        return [Fraction(0)] * n
    idxs = sorted(anchor)
    vals: list[Optional[Fraction]] = [None] * n
    for i, a in anchor.items():
        vals[i] = frac(a)
    for pos in range(len(idxs)):
        i = idxs[pos]
        j = idxs[(pos + 1) % len(idxs)]
        # fill rays strictly between i and j by straightness: across each
        # intermediate ray k, v_{k-1} + d_k v_k + v_{k+1} = 0 pins values
        span = (j - i) % n
        if span <= 1:
            continue
        # linear recursion with unknown initial slope: values x_t at rays
        # i..j with x_0 = vals[i], x_span = vals[j], and
        # x_{t+1} = -x_{t-1} - d * x_t at inner rays
        # solve by expressing x_t = alpha_t + beta_t * slope
        alpha = [vals[i], Fraction(0)]
        beta = [Fraction(0), Fraction(1)]
        for t in range(1, span):
            d = rfan.d(i + t)
            alpha.append(-alpha[t - 1] - d * alpha[t])
            beta.append(-beta[t - 1] - d * beta[t])
        if beta[span] == 0:
            raise DomainError("degenerate interpolation span")
        slope = (vals[j] - alpha[span]) / beta[span]
        for t in range(1, span):
            vals[(i + t) % n] = alpha[t] + beta[t] * slope
    return [v if v is not None else Fraction(0) for v in vals]
