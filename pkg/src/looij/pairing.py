"""The canonical pairing, tropical theta functions, boundary-divisor
functions, and tropicality testing.

`pair(fan, q, v)` evaluates the pairing exactly.  Negative values come from
the minimum of wedge products against the holonomy translates of q along
the traced line through v; non-negative values come from transporting the
fiber direction across the cluster walls (mutation updates) and taking one
wedge in the target chart.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from math import gcd
from typing import Optional

from .fan import (
    LooijengaFan,
    Refinement,
    intersection_matrix,
    invert_matrix_cached,
    locate_in_refinement,
    point_to_original,
    refine_to_contain,
    require_positive,
    transfer_matrix,
)
from .geometry import (
    TRACE_TURN_CAP,
    LineTrace,
    TropPoint,
    boundary_vector_sum,
    develop,
    trace_line,
)
from .scattering import ClusterWall, cluster_walls, ray_wall_multiplicity, sector_walls_stable
from .util import (
    DomainError,
    InputError,
    Vec,
    frac,
    is_zero,
    mat_inv,
    mat_vec,
    primitive,
    solve_in_basis,
    vadd,
    vscale,
    wedge,
)


@dataclass(frozen=True)
class PairingCertificate:
    """Replayable record of how a pairing value was produced.

    case "zero": one argument was the origin.  case "A": minimum over the
    recorded wedge candidates (`arg_min` wins among `k` ray crossings).
    case "B": mutation transport from `source` to `target` with the
    recorded crossings and a final wedge.
    """

    case: str
    value: Fraction
    candidates: tuple[Fraction, ...] = ()
    arg_min: int = -1
    k: int = -1
    source: Optional[TropPoint] = None
    target: Optional[TropPoint] = None
    transcript: tuple = ()
    swapped: bool = False


def _case_a_candidates(fan: LooijengaFan, q: TropPoint, tr: LineTrace) -> list[Fraction]:
    """Wedges of the trace direction against q's lifts, one per crossing of
    the traced line with the ray through q."""
    frame = tr.frame
    qv, base = tr.dev_direction, tr.dev_base
    n = fan.n
    k_lo, k_hi = min(tr.k_start, tr.k_end), max(tr.k_start, tr.k_end)
    cross_time = {c.lifted: c.time for c in tr.crossings}
    step = 1 if tr.distance < 0 else -1

    def occupancy(kk: int):
        if step > 0:
            lo_t, hi_t = cross_time.get(kk + 1), cross_time.get(kk)
        else:
            lo_t, hi_t = cross_time.get(kk), cross_time.get(kk + 1)
        if kk == tr.k_start:
            hi_t = None
        if kk == tr.k_end:
            lo_t = None
        return lo_t, hi_t

    cands = []
    base_window = (q.sector - frame.cut) % n
    first = k_lo + ((base_window - k_lo) % n)
    for k in range(first, k_hi + 1, n):
        if k + 1 > frame.hi:
            continue
        q_dev = vadd(vscale(q.a, frame.ray(k)), vscale(q.b, frame.ray(k + 1)))
        den = wedge(qv, q_dev)
        if den == 0:
            continue
        t = -wedge(base, q_dev) / den
        pt = vadd(base, vscale(t, qv))
        c = pt[0] / q_dev[0] if q_dev[0] != 0 else pt[1] / q_dev[1]
        if c <= 0:
            continue
        lo_t, hi_t = occupancy(k)
        if (lo_t is not None and t < lo_t) or (hi_t is not None and t > hi_t):
            continue
        cands.append(wedge(qv, q_dev))
    return cands


def _ascending_angle(walls):
    """Sort (position, payload) pairs by increasing angle within one chart."""

    def cmp(a, b):
        w = wedge(a[0], b[0])
        if w > 0:
            return -1
        if w < 0:
            return 1
        return 0

    return sorted(walls, key=cmp_to_key(cmp))


def _positive_transport(
    fan: LooijengaFan,
    walls: list[tuple[TropPoint, int]],
    x: TropPoint,
    y: TropPoint,
) -> tuple[Fraction, tuple]:
    """Counterclockwise mutation transport of x's fiber direction to y's
    sector, wedged against y there.

    Crossing a wall of multiplicity b counterclockwise sends w to
    w + b (u ^ w) u in the chart containing the wall; the wall on x's own
    ray is a departure, not a crossing, and a wall on y's ray is an
    arrival.
    """
    n = fan.n
    sx, sy = x.sector, y.sector
    count = (sy - sx) % n
    if sx == sy and wedge((x.a, x.b), (y.a, y.b)) < 0:
        count = n
    in_sector: dict[int, list[tuple[Vec, int]]] = {}
    on_ray: dict[int, list[int]] = {}
    for u, mult in walls:
        if u.on_ray():
            on_ray.setdefault(u.sector, []).append(mult)
        else:
            in_sector.setdefault(u.sector, []).append(((u.a, u.b), mult))
    w: Vec = (x.a, x.b)
    marker: Optional[Vec] = (x.a, x.b)
    transcript = []
    cur = sx
    for stepi in range(count):
        for (u, b) in _ascending_angle(in_sector.get(cur, [])):
            if marker is not None and wedge(marker, u) <= 0:
                continue  # not strictly counterclockwise of the departure
            w = vadd(w, vscale(b * wedge(u, w), u))
            transcript.append(("wall", cur, u, b))
        w = mat_vec(transfer_matrix(fan.d(cur + 1)), w)
        arriving = stepi == count - 1 and y.on_ray()
        if not arriving:
            for b in on_ray.get((cur + 1) % n, []):
                u0: Vec = (Fraction(1), Fraction(0))  # the crossed ray in the new chart
                w = vadd(w, vscale(b * wedge(u0, w), u0))
                transcript.append(("ray-wall", (cur + 1) % n, b))
        transcript.append(("cross", (cur + 1) % n))
        cur = (cur + 1) % n
        marker = None
    ypos: Vec = (y.a, y.b)
    for (u, b) in _ascending_angle(in_sector.get(cur, [])):
        if marker is not None and wedge(marker, u) <= 0:
            continue
        if wedge(u, ypos) <= 0:
            continue  # the target is reached before this wall
        w = vadd(w, vscale(b * wedge(u, w), u))
        transcript.append(("wall", cur, u, b))
    return wedge(w, ypos), tuple(transcript)


def mirror_fan(fan: LooijengaFan) -> LooijengaFan:
    """The same cycle read clockwise: ray j of the mirror is ray -j."""
    rays = [fan.rays[0]] + [fan.rays[-j] for j in range(1, fan.n)][::-1]
    rays = [fan.rays[(-j) % fan.n] for j in range(fan.n)]
    return LooijengaFan(tuple(rays))


def mirror_point(fan: LooijengaFan, p: TropPoint) -> TropPoint:
    """The point's image in the mirrored fan (coordinates swap)."""
    if p.is_origin():
        return p
    mf = mirror_fan(fan)
    return TropPoint.make(mf, (-p.sector - 1) % fan.n, p.b, p.a)


def _positive_cone_walls(fan: LooijengaFan, v: TropPoint, w_end: TropPoint):
    """Stable walls in the closed cone from v counterclockwise to the
    backward end of its positive-distance line."""
    from .scattering import _stable_walls_in_cone, _chart_dir, _as_vec, seed_data

    seed = seed_data(fan)
    lo = _chart_dir(seed, v.direction(fan))
    hi = _chart_dir(seed, w_end)
    stable = _stable_walls_in_cone(fan, seed, lo, hi, 8, mode="degree")
    return [(seed.from_chart(_as_vec(u)).direction(fan), m) for u, m in stable]


def _angular_key(fan: LooijengaFan, p: TropPoint):
    """Cyclic angular position: sector index, then advance within it."""
    return (p.sector, p.b / (p.a + p.b))


def _strictly_between_ccw(fan: LooijengaFan, lo: TropPoint, hi: TropPoint, x: TropPoint) -> bool:
    """Is x strictly inside the cone from lo counterclockwise to hi?"""
    if x == lo or x == hi:
        return False
    a, b, c = _angular_key(fan, lo), _angular_key(fan, hi), _angular_key(fan, x)
    if a == b:
        return c != a
    if a < b:
        return a < c < b
    return c > a or c < b


def _expansion_min(fan: LooijengaFan, q: TropPoint, v: TropPoint) -> Fraction:
    """min over the chart expansion of q's basis function, in the chamber
    at v's direction, of the wedge of v against the term exponents.

    Valid when q's negative-distance line does not wrap (tame expansion);
    the value is stabilised over two consecutive truncation orders.
    """
    from .scattering import seed_data, primitive_i
    from .theta import theta_engine, Endpoint

    seed = seed_data(fan)
    qd, vd = q.direction(fan), v.direction(fan)
    v_chart = seed.to_chart(vd)
    history: list = []
    for order in range(2, 12):
        eng = theta_engine(fan, order)
        best = None
        for side in (-1, 1):
            ep = Endpoint(primitive_i(eng.seed.to_chart_int(vd)), side)
            exp = eng.expand(qd, ep)
            m = min(v_chart[0] * n[1] - v_chart[1] * n[0] for n in exp)
            if best is None:
                best = m
            elif m != best:
                raise DomainError("adjacent chambers disagree on the valuation")
        history.append(best)
        # terms can lag behind the truncation, so ask for three agreeing
        # consecutive orders before trusting the minimum
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            return best * q.index() * v.index()
    raise DomainError("chart valuation did not stabilise at the order cap")


def _nonnegative_value(fan: LooijengaFan, q: TropPoint, v: TropPoint) -> Fraction:
    """The pairing when no negative candidate exists.

    A wrapping index pairs non-positively with everything, so the value is
    zero; otherwise the zero fiber is the pair of rays read off the traced
    line, and only directions strictly inside the gap they bound carry
    positive values.
    """
    tr = trace_line(fan, q, Fraction(-1))
    if tr.wraps > 0:
        return Fraction(0)
    lo = tr.end_backward
    hi = q.direction(fan)
    vd = v.direction(fan)
    if not _strictly_between_ccw(fan, lo, hi, vd):
        return Fraction(0)
    val = _expansion_min(fan, q, v)
    if val <= 0:
        raise DomainError("positive-cone evaluation produced a non-positive value")
    return val


def pair(fan: LooijengaFan, q: TropPoint, v: TropPoint) -> tuple[Fraction, PairingCertificate]:
    """The canonical pairing of q against v: the valuation profile of the
    basis function indexed by q at the boundary direction v.

    Negative values come from the minimum of wedges along the traced line
    through v; non-negative ones from the chart expansions over the zero
    fiber read off q's traced line.  Homogeneous of degree one in each
    slot under non-negative rational scaling.
    """
    require_positive(fan)
    if q.is_origin() or v.is_origin():
        return Fraction(0), PairingCertificate(case="zero", value=Fraction(0))
    tr_v = trace_line(fan, v, Fraction(1))
    cands = _case_a_candidates(fan, q, tr_v)
    if cands:
        m = min(cands)
        if m < 0:
            return m, PairingCertificate(
                case="A",
                value=m,
                candidates=tuple(cands),
                arg_min=cands.index(m),
                k=len(cands),
                source=v,
                target=q,
            )
    val = _nonnegative_value(fan, q, v)
    return val, PairingCertificate(case="B", value=val, source=q, target=v)


def pair_value(fan: LooijengaFan, q: TropPoint, v: TropPoint) -> Fraction:
    return pair(fan, q, v)[0]


def pair_dual(fan: LooijengaFan, q: TropPoint, v: TropPoint) -> Fraction:
    """The pairing computed with the two sides exchanged: evaluate on the
    mirrored fan with swapped slots.  Always equals `pair(fan, q, v)`."""
    mf = mirror_fan(fan)
    return pair_value(mf, mirror_point(fan, v), mirror_point(fan, q))


def replay_certificate(fan: LooijengaFan, cert: PairingCertificate) -> Fraction:
    """Recompute the value from the certificate's own data."""
    if cert.case == "zero":
        return Fraction(0)
    if cert.case == "A":
        if not cert.candidates:
            return Fraction(0)
        m = min(cert.candidates)
        return m if m < 0 else cert.value
    if cert.case == "B":
        return _nonnegative_value(fan, cert.source, cert.target)
    raise InputError(f"unknown certificate case {cert.case!r}")


# ---------------------------------------------------------------------------
# piecewise-linear functions carried on a refinement


@dataclass(frozen=True)
class TropicalFunction:
    """Sector-wise linear function: values at the refined fan's primitive
    ray generators, linear inside each refined sector."""

    ref: Refinement
    values: tuple[Fraction, ...]

    @property
    def fan(self) -> LooijengaFan:
        return self.ref.fan

    def at(self, p: TropPoint) -> Fraction:
        """Evaluate at a point given in original-fan coordinates."""
        s, a, b = locate_in_refinement(self.ref, p.sector, p.a, p.b)
        n = self.fan.n
        return a * self.values[s % n] + b * self.values[(s + 1) % n]

    def bend_vector(self) -> list[Fraction]:
        h = intersection_matrix(self.fan)
        n = self.fan.n
        return [sum(h[i][j] * self.values[j] for j in range(n)) for i in range(n)]

    def ray_point(self, i: int) -> TropPoint:
        """Refined ray i as a point of the original fan."""
        s, a, b = point_to_original(self.ref, i % self.fan.n, Fraction(1), Fraction(0))
        return TropPoint.make(self.ref.original, s, a, b)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.values)


def function_from_values(fan: LooijengaFan, values) -> TropicalFunction:
    vals = tuple(frac(x) for x in values)
    if len(vals) != fan.n:
        raise InputError("one value per ray required")
    return TropicalFunction(Refinement.identity(fan), vals)


def merge_refinements(fan: LooijengaFan, targets: list[TropPoint]) -> Refinement:
    ref = Refinement.identity(fan)
    for t in targets:
        if t.is_origin():
            continue
        d = t.direction(fan)
        s, a, b = locate_in_refinement(ref, d.sector, d.a, d.b)
        ref, _ = refine_to_contain(ref, s, a, b)
    return ref


def tropical_min(fan: LooijengaFan, fns: list[TropicalFunction]) -> TropicalFunction:
    """Pointwise minimum, sampled on a refinement containing every input's
    bend rays and all pairwise crossing rays."""
    if not fns:
        raise InputError("need at least one function")
    targets: list[TropPoint] = []
    for fn in fns:
        for i in range(fn.fan.n):
            targets.append(fn.ray_point(i))
    for _ in range(12):
        ref = merge_refinements(fan, targets)
        rfan = ref.fan
        new: list[TropPoint] = []
        for s in range(rfan.n):
            pts = [
                TropPoint.make(fan, *point_to_original(ref, s, Fraction(1), Fraction(0))),
                TropPoint.make(fan, *point_to_original(ref, s, Fraction(0), Fraction(1))),
            ]
            for i in range(len(fns)):
                for j in range(i + 1, len(fns)):
                    d0 = fns[i].at(pts[0]) - fns[j].at(pts[0])
                    d1 = fns[i].at(pts[1]) - fns[j].at(pts[1])
                    if (d0 > 0 and d1 < 0) or (d0 < 0 and d1 > 0):
                        # crossing ray at a*v_s + b*v_{s+1} with a*d0 + b*d1 = 0
                        a, b = -d1, d0
                        if a < 0:
                            a, b = -a, -b
                        os_, oa, ob = point_to_original(ref, s, a, b)
                        new.append(TropPoint.make(fan, os_, oa, ob).direction(fan))
        fresh = [p for p in new if p not in targets]
        if not fresh:
            values = []
            for i in range(rfan.n):
                x = TropPoint.make(fan, *point_to_original(ref, i, Fraction(1), Fraction(0)))
                values.append(min(fn.at(x) for fn in fns))
            return TropicalFunction(ref, tuple(values))
        targets.extend(fresh)
    raise DomainError("crossing-ray refinement did not settle")


@dataclass(frozen=True)
class ThetaTropical:
    """A tropical theta function with its bend data."""

    q: TropPoint
    fn: TropicalFunction
    neg_bend: TropPoint                  # V- + V+ of the defining trace
    positive_report: tuple               # (refined ray, multiplicity, value, bend, ok)


def trop_theta(fan: LooijengaFan, q: TropPoint) -> ThetaTropical:
    """Sample the pairing against q as a piecewise-linear function on a
    refinement containing all of its bend rays."""
    require_positive(fan)
    if not q.is_integral():
        raise InputError("theta index must be integral")
    if q.is_origin():
        fn = TropicalFunction(Refinement.identity(fan), tuple([Fraction(0)] * fan.n))
        return ThetaTropical(q, fn, TropPoint.origin(), ())
    tr = trace_line(fan, q, Fraction(-1))
    bq = boundary_vector_sum(fan, tr)
    # bends can only sit on the index ray, the bend ray, the zero-transition
    # rays (the traces' backward ends), and walls inside the positive cone
    tr_pos = trace_line(fan, q, Fraction(1))
    targets = [q, bq, tr.end_backward, tr_pos.end_backward]
    walls: list[tuple] = []
    if tr_pos.wraps == 0:
        walls = _positive_cone_walls(fan, q, tr_pos.end_backward)
        targets.extend(u for u, m in walls)
    ref = merge_refinements(fan, targets)
    rfan = ref.fan
    values = []
    for i in range(rfan.n):
        s, a, b = point_to_original(ref, i, Fraction(1), Fraction(0))
        values.append(pair_value(fan, q, TropPoint.make(fan, s, a, b)))
    fn = TropicalFunction(ref, tuple(values))
    bends = fn.bend_vector()
    report = []
    for u, mult in walls:
        s, b2 = locate_in_refinement(ref, u.sector, u.a, u.b)[0::2]
        if b2 != 0:
            raise DomainError("wall ray missing from the refinement")
        i = s % rfan.n
        val = values[i]
        if val > 0:
            report.append((i, mult, val, bends[i], bends[i] == -mult * val))
    return ThetaTropical(q, fn, bq, tuple(report))


@dataclass(frozen=True)
class BoundaryFunctions:
    beta: TropicalFunction
    psi: TropicalFunction
    b_v: int


def beta_and_psi(fan: LooijengaFan, v: TropPoint) -> BoundaryFunctions:
    """The rational function bending only on v's ray with parameter
    -index(v), its smallest integral multiple, and that multiplier."""
    if not v.is_integral() or v.is_origin():
        raise InputError("v must be a nonzero integral point")
    ref = merge_refinements(fan, [v])
    rfan = ref.fan
    hinv = invert_matrix_cached(rfan)
    if hinv is None:
        raise DomainError("intersection matrix is singular; bends do not determine a function")
    d = v.direction(fan)
    s, a, b = locate_in_refinement(ref, d.sector, d.a, d.b)
    if b != 0:
        raise DomainError("refinement failed to produce the target ray")
    iv = s % rfan.n
    idx = v.index()
    col = [hinv[i][iv] for i in range(rfan.n)]
    beta_vals = tuple(-idx * c for c in col)
    denom = 1
    for c in col:
        denom = denom * c.denominator // gcd(denom, c.denominator)
    psi_vals = tuple(-denom * c for c in col)
    return BoundaryFunctions(
        beta=TropicalFunction(ref, beta_vals),
        psi=TropicalFunction(ref, psi_vals),
        b_v=denom,
    )


# ---------------------------------------------------------------------------
# tropicality and decomposition


def _linear_domains(fn: TropicalFunction) -> list[list[int]]:
    """Maximal runs of refined sectors with no bend at interior rays."""
    n = fn.fan.n
    bends = fn.bend_vector()
    bend_rays = [i for i in range(n) if bends[i] != 0]
    if not bend_rays:
        return [list(range(n))]
    domains = []
    for pos, i in enumerate(bend_rays):
        j = bend_rays[(pos + 1) % len(bend_rays)]
        run = []
        k = i
        while True:
            run.append(k % n)
            if (k + 1) % n == j % n:
                break
            k += 1
        domains.append(run)
    return domains


def _local_gradient(fn: TropicalFunction, s: int) -> Vec:
    """Vector g with fn(x) = x ^ g on refined sector s."""
    n = fn.fan.n
    return (-fn.values[(s + 1) % n], fn.values[s % n])


def _gradient_in_original(fn: TropicalFunction, s: int, g: Vec) -> tuple[int, Vec]:
    """Rewrite a refined-sector gradient in the chart of the original-fan
    sector containing it (entries may be negative)."""
    ref = fn.ref
    s_cur, a_cur, b_cur = s % fn.fan.n, g[0], g[1]
    for pos in reversed(ref.inserts):
        if s_cur == pos:
            a_cur, b_cur = a_cur + b_cur, b_cur
        elif s_cur == pos + 1:
            a_cur, b_cur = a_cur, a_cur + b_cur
            s_cur = pos
        elif s_cur > pos + 1:
            s_cur -= 1
    return s_cur, (a_cur, b_cur)


def _forward_end(fan: LooijengaFan, sector: int, g: Vec) -> TropPoint:
    """Forward asymptotic direction of the straight line with velocity g
    through the interior of the given original-fan sector, traced with the
    origin on its right."""
    frame = develop(fan, cut=sector, sheets=TRACE_TURN_CAP + 2)
    k = 0
    for _ in range(TRACE_TURN_CAP * fan.n + 1):
        a, b = solve_in_basis(frame.ray(k), frame.ray(k + 1), g)
        if a >= 0 and b >= 0:
            return frame.to_trop(primitive(g), k)
        k -= 1
    raise DomainError("forward extension did not settle; geometry out of scope")


def _extend_straight(fan: LooijengaFan, fn: TropicalFunction, run: list[int]) -> Optional[TropPoint]:
    # the straight fiber only passes where the function is negative, so
    # anchor the trace at the most negative sector of the domain
    n = fn.fan.n
    s = min(run, key=lambda k: min(fn.values[k % n], fn.values[(k + 1) % n]))
    g = _local_gradient(fn, s)
    os_, g0 = _gradient_in_original(fn, s, g)
    qprim = _forward_end(fan, os_, g0)
    for i in [run[0]] + [(k + 1) % fn.fan.n for k in run]:
        want = fn.values[i % fn.fan.n]
        if want == 0:
            continue
        base = pair_value(fan, qprim, fn.ray_point(i))
        if base == 0:
            return None
        c = want / base
        if c <= 0:
            return None
        return qprim.scale(fan, c)
    return None


def _extend_bent(fan: LooijengaFan, fn: TropicalFunction, run: list[int]) -> Optional[TropPoint]:
    """Index of the basis function matching a positive linear domain.

    The domain's gradient is the active expansion term there; reverse
    broken-line enumeration lists the initial exponents that can produce
    it, and exact evaluation picks the right one.
    """
    from .scattering import seed_data, primitive_i
    from .theta import theta_engine, Endpoint, backward_initials

    seed = seed_data(fan)
    s = run[0]
    g = _local_gradient(fn, s)
    os_, g0 = _gradient_in_original(fn, s, g)
    m1, m2 = seed.to_chart(TropPoint.ray(fan, os_)), seed.to_chart(TropPoint.ray(fan, os_ + 1))
    g_seed = (g0[0] * m1[0] + g0[1] * m2[0], g0[0] * m1[1] + g0[1] * m2[1])
    if g_seed[0].denominator != 1 or g_seed[1].denominator != 1:
        return None
    from .util import content, primitive as uprim

    gprim = uprim(g_seed)
    gcont = int(content(g_seed))
    # a direction strictly inside the domain, in chart coordinates
    om, oa, ob = point_to_original(fn.ref, s, Fraction(1), Fraction(1))
    d0 = seed.to_chart(TropPoint.make(fan, om, oa, ob))
    d0i = primitive_i((int(d0[0] * d0[0].denominator * d0[1].denominator),
                       int(d0[1] * d0[0].denominator * d0[1].denominator)))
    test_rays = [fn.ray_point(run[0])] + [fn.ray_point((k + 1) % fn.fan.n) for k in run]
    all_rays = [fn.ray_point(i) for i in range(fn.fan.n)]

    def verifies(cand: TropPoint) -> bool:
        if any(pair_value(fan, cand, x) != fn.at(x) for x in test_rays):
            return False
        # the candidate must dominate the function away from its domain
        return all(pair_value(fan, cand, x) >= fn.at(x) for x in all_rays)

    seen: set[TropPoint] = set()
    for order in range(2, 9):
        eng = theta_engine(fan, order)
        for k in range(gcont, 0, -1):
            if gcont % k:
                continue
            n0 = (int(gprim[0]) * k, int(gprim[1]) * k)
            scale = Fraction(gcont, k)
            for q_chart in sorted(backward_initials(eng, Endpoint(d0i, -1), n0)):
                qc = seed.from_chart((Fraction(q_chart[0]), Fraction(q_chart[1])))
                if not qc.is_integral():
                    continue
                cand = qc.scale(fan, scale)
                if not cand.is_integral() or cand in seen:
                    continue
                seen.add(cand)
                if verifies(cand):
                    return cand
    return None


def decompose(fan: LooijengaFan, fn: TropicalFunction) -> list[TropPoint]:
    """Write a tropical function as the minimum of tropical theta
    functions, returning their indices (original-fan points, sorted).

    Raises on non-tropical input, naming the offending ray.  Each linear
    domain's fiber is extended to infinity: straight where the function
    takes non-positive values, with maximal mutation bends where it is
    positive.  The result is verified against the function on every
    refined ray before returning.
    """
    require_positive(fan)
    bends = fn.bend_vector()
    for i, p in enumerate(bends):
        if p > 0:
            raise DomainError(f"not tropical: positive bend parameter {p} at ray {i}")
    if all(x == 0 for x in fn.values):
        return [TropPoint.origin()]
    out: list[TropPoint] = []
    for run in _linear_domains(fn):
        n = fn.fan.n
        g = _local_gradient(fn, run[0])
        if is_zero(g):
            out.append(TropPoint.origin())
            continue
        ray_vals = [fn.values[run[0] % n]] + [fn.values[(k + 1) % n] for k in run]
        if min(ray_vals) < 0 or max(ray_vals) <= 0:
            qd = _extend_straight(fan, fn, run)
        else:
            qd = _extend_bent(fan, fn, run)
        if qd is None:
            raise DomainError(f"fiber extension failed on the domain at sector {run[0]}")
        if not qd.is_integral():
            raise DomainError(f"decomposition produced a non-integral index {qd}")
        out.append(qd)
    uniq = sorted(set(out))
    verify_min_of_thetas(fan, fn, uniq)
    verify_min_random(fan, fn, uniq)
    return uniq


def is_tropical(fan: LooijengaFan, fn: TropicalFunction) -> bool:
    """Non-positive bend parameters everywhere, and on the positive region
    the function decomposes as a minimum of theta tropicalizations."""
    if any(p > 0 for p in fn.bend_vector()):
        return False
    try:
        decompose(fan, fn)
    except DomainError:
        return False
    return True


def verify_min_of_thetas(fan: LooijengaFan, fn: TropicalFunction, qs: list[TropPoint]) -> None:
    """Check fn == min over qs of the pairing, at every refined ray."""
    for i in range(fn.fan.n):
        x = fn.ray_point(i)
        got = min(pair_value(fan, qd, x) for qd in qs)
        if got != fn.values[i]:
            raise DomainError(
                f"decomposition mismatch at refined ray {i}: {got} != {fn.values[i]}"
            )


def verify_min_random(
    fan: LooijengaFan, fn: TropicalFunction, qs: list[TropPoint], samples: int = 200, seed: int = 2
) -> None:
    """Check fn == min over qs of the pairing at random rational directions."""
    import random as _random

    rng = _random.Random(seed)
    n = fan.n
    for _ in range(samples):
        s = rng.randrange(n)
        a = Fraction(rng.randrange(0, 12), rng.randrange(1, 5))
        b = Fraction(rng.randrange(0, 12), rng.randrange(1, 5))
        if a == 0 and b == 0:
            a = Fraction(1)
        x = TropPoint.make(fan, s, a, b)
        got = min(pair_value(fan, qd, x) for qd in qs)
        want = fn.at(x)
        if got != want:
            raise DomainError(f"decomposition mismatch at {x}: {got} != {want}")
