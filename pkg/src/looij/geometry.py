"""Developing maps, geodesic tracing, and cone-local addition.

Points live in sector-local coordinates (`TropPoint`), never in a global
chart: the holonomy around the origin makes global coordinates meaningless.
All global questions go through a `DevelopedFrame` with an explicit branch
cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .fan import LooijengaFan, require_positive
from .util import (
    DomainError,
    InputError,
    Vec,
    columns,
    content,
    dot,
    frac,
    is_zero,
    mat_inv,
    mat_vec,
    primitive,
    solve_in_basis,
    vadd,
    vneg,
    vscale,
    vsub,
    wedge,
)

TRACE_TURN_CAP = 4  # full turns before tracing aborts with a diagnostic


@dataclass(frozen=True, order=True)
class TropPoint:
    """A point a*v_sector + b*v_{sector+1} with a, b >= 0.

    Normal form: the origin is (sector 0, 0, 0); a point on a ray is stored
    in the sector having that ray as its clockwise edge (b = 0).
    """

    sector: int
    a: Fraction
    b: Fraction

    @staticmethod
    def make(fan: LooijengaFan, sector: int, a, b) -> "TropPoint":
        a, b = frac(a), frac(b)
        if a < 0 or b < 0:
            raise InputError("sector coordinates must be non-negative")
        n = fan.n
        sector %= n
        if a == 0 and b == 0:
            return TropPoint(0, Fraction(0), Fraction(0))
        if a == 0:
            sector, a, b = (sector + 1) % n, b, Fraction(0)
        return TropPoint(sector, a, b)

    @staticmethod
    def ray(fan: LooijengaFan, i: int, scale=1) -> "TropPoint":
        return TropPoint.make(fan, i, scale, 0)

    @staticmethod
    def origin() -> "TropPoint":
        return TropPoint(0, Fraction(0), Fraction(0))

    def is_origin(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def on_ray(self) -> bool:
        return self.b == 0

    def index(self) -> Fraction:
        """gcd-content of the coordinates; zero for the origin."""
        return content((self.a, self.b))

    def direction(self, fan: LooijengaFan) -> "TropPoint":
        p = primitive((self.a, self.b))
        return TropPoint.make(fan, self.sector, p[0], p[1])

    def scale(self, fan: LooijengaFan, c) -> "TropPoint":
        c = frac(c)
        if c < 0:
            raise InputError("scaling is only defined for non-negative factors")
        return TropPoint.make(fan, self.sector, c * self.a, c * self.b)

    def __repr__(self):
        return f"T({self.sector};{self.a},{self.b})"


class DevelopedFrame:
    """Rays of the universal cover laid out in one rational plane.

    Lifted index k corresponds to the fan ray (cut + k) mod n; index 0 is
    the cut ray at (1, 0) and index 1 its counterclockwise neighbour at
    (0, 1).  Consecutive lifted rays always form an oriented lattice basis,
    so lifted sector k (between rays k and k+1) carries exact chart
    coordinates.
    """

    def __init__(self, fan: LooijengaFan, cut: int = 0, sheets: int = 2):
        if sheets < 1:
            raise InputError("sheets must be >= 1")
        self.fan = fan
        self.cut = cut % fan.n
        self.sheets = sheets
        n = fan.n
        lo, hi = -sheets * n, sheets * n
        rays: dict[int, Vec] = {
            0: (Fraction(1), Fraction(0)),
            1: (Fraction(0), Fraction(1)),
        }
        for k in range(1, hi):
            # bend at lifted ray k: r_{k+1} = -r_{k-1} - d_k * r_k
            d = fan.d(self.cut + k)
            rays[k + 1] = vsub(vneg(rays[k - 1]), vscale(d, rays[k]))
        for k in range(0, lo, -1):
            d = fan.d(self.cut + k)
            rays[k - 1] = vsub(vneg(rays[k + 1]), vscale(d, rays[k]))
        self._rays = rays
        self.lo, self.hi = lo, hi
        for k in range(lo, hi):
            assert wedge(rays[k], rays[k + 1]) == 1

    def ray(self, k: int) -> Vec:
        return self._rays[k]

    def ray_index(self, k: int) -> int:
        """Actual fan ray index of lifted ray k."""
        return (self.cut + k) % self.fan.n

    def lifts_of_ray(self, i: int) -> list[int]:
        base = (i - self.cut) % self.fan.n
        return list(range(self.lo + base, self.hi + 1, self.fan.n))

    def lift_point(self, p: TropPoint, k: int) -> Vec:
        """Developed image of p via lifted sector k (requires matching sector)."""
        if self.ray_index(k) != p.sector % self.fan.n:
            raise ValueError("lifted sector does not match the point's sector")
        return vadd(vscale(p.a, self.ray(k)), vscale(p.b, self.ray(k + 1)))

    def lifts_of_point(self, p: TropPoint) -> list[tuple[int, Vec]]:
        base = (p.sector - self.cut) % self.fan.n
        return [
            (k, self.lift_point(p, k))
            for k in range(self.lo + base, self.hi, self.fan.n)
        ]

    def sector_of(self, v: Vec, k_lo: Optional[int] = None, k_hi: Optional[int] = None) -> list[int]:
        """Lifted sectors whose half-open cone contains direction v
        (a direction on a ray belongs to the sector ccw of that ray)."""
        if is_zero(v):
            raise ValueError("zero vector has no sector")
        k_lo = self.lo if k_lo is None else max(k_lo, self.lo)
        k_hi = self.hi - 1 if k_hi is None else min(k_hi, self.hi - 1)
        out = []
        for k in range(k_lo, k_hi + 1):
            if wedge(self.ray(k), v) >= 0 and wedge(v, self.ray(k + 1)) > 0:
                out.append(k)
        return out

    def to_trop(self, v: Vec, k: int) -> TropPoint:
        """Interpret a frame vector as a point via lifted sector k."""
        a, b = solve_in_basis(self.ray(k), self.ray(k + 1), v)
        if a < 0 or b < 0:
            raise ValueError("vector outside the stated lifted sector")
        return TropPoint.make(self.fan, self.ray_index(k), a, b)

    def deck(self):
        """Matrix whose columns are the one-turn-counterclockwise lifts of
        the base rays: sends window-k coordinates of a point to the
        window-(k+n) coordinates of the same point."""
        n = self.fan.n
        return columns(self.ray(n), self.ray(n + 1))


def develop(fan: LooijengaFan, cut: int = 0, sheets: int = 2) -> DevelopedFrame:
    """Developing map anchored at `cut`: that ray goes to (1,0), the next to (0,1)."""
    return DevelopedFrame(fan, cut, sheets)


def monodromy_from_frame(frame: DevelopedFrame):
    """Counterclockwise holonomy read off the developed rays (chart at the cut)."""
    return mat_inv(frame.deck())


@dataclass(frozen=True)
class Crossing:
    time: Fraction
    lifted: int          # lifted ray index in the trace frame
    ray: int             # actual fan ray index
    point: TropPoint     # crossing point, sector-local
    tangent_local: Vec   # trace velocity in the basis (previous lifted ray, crossed ray)


@dataclass(frozen=True)
class LineTrace:
    """A fully traced geodesic; see `trace_line`.

    `zero_boundary` lists the chain bounding the component of the
    complement containing the origin: asymptotic directions at the ends for
    an unbounded boundary, the self-intersection vertex (twice) for a
    bounded one, with the ray-crossing points in between.
    """

    fan: LooijengaFan
    direction: TropPoint
    distance: Fraction
    frame: DevelopedFrame
    dev_direction: Vec
    dev_base: Vec
    k_start: int
    k_end: int
    crossings: tuple[Crossing, ...]
    wraps: int
    end_forward: TropPoint
    end_backward: TropPoint
    self_parallel: bool
    self_intersects: bool
    vertex: Optional[TropPoint]
    vertex_times: Optional[tuple[Fraction, Fraction]]
    vertex_window: Optional[int]
    zero_boundary: tuple[TropPoint, ...]
    boundary_plus: TropPoint
    boundary_minus: TropPoint
    is_zero_line: bool = False

    def point_at(self, t) -> Vec:
        return vadd(self.dev_base, vscale(t, self.dev_direction))


def _count_wraps(fan: LooijengaFan, q: TropPoint, crossings) -> int:
    counts = [0] * fan.n
    for c in crossings:
        counts[c.ray] += 1
    qray = q.sector if q.on_ray() else None
    best = None
    for i in range(fan.n):
        c = counts[i] + (1 if i == qray else 0)
        best = c if best is None else min(best, c)
    return best or 0


def trace_line(fan: LooijengaFan, q: TropPoint, d) -> LineTrace:
    """Trace the geodesic going to infinity parallel to q at lattice
    distance d from the origin (d > 0: origin on the left of travel).

    d = 0 returns the limit object: the two rays bounding the degenerate
    zero-distance line.  Requires a positive fan; aborts with a diagnostic
    after TRACE_TURN_CAP full turns.
    """
    if q.is_origin():
        raise InputError("direction must be nonzero")
    require_positive(fan)
    d = frac(d)
    if d == 0:
        inner = trace_line(fan, q, Fraction(-1))
        zb = (inner.end_backward, inner.end_forward)
        return LineTrace(
            fan=fan, direction=q.direction(fan), distance=Fraction(0),
            frame=inner.frame, dev_direction=inner.dev_direction,
            dev_base=(Fraction(0), Fraction(0)),
            k_start=inner.k_start, k_end=inner.k_end,
            crossings=(), wraps=inner.wraps,
            end_forward=inner.end_forward, end_backward=inner.end_backward,
            self_parallel=inner.self_parallel, self_intersects=False,
            vertex=None, vertex_times=None, vertex_window=None,
            zero_boundary=zb,
            boundary_plus=inner.boundary_plus, boundary_minus=inner.boundary_minus,
            is_zero_line=True,
        )

    n = fan.n
    frame = develop(fan, cut=q.sector, sheets=TRACE_TURN_CAP + 2)
    qv = frame.lift_point(q, 0)
    norm = qv[0] * qv[0] + qv[1] * qv[1]
    base = vscale(-d / norm, (-qv[1], qv[0]))
    assert wedge(base, qv) == d

    # lifted sector at t -> +infinity
    k = (0 if d < 0 else -1) if q.on_ray() else 0
    step = 1 if d < 0 else -1  # angular direction walking backward in time
    crossings: list[Crossing] = []
    cap = TRACE_TURN_CAP * n
    k_start = k
    while True:
        rk, rk1 = frame.ray(k), frame.ray(k + 1)
        a, b = solve_in_basis(rk, rk1, vneg(qv))
        if a >= 0 and b >= 0:
            break  # recedes to infinity inside lifted sector k
        j = k + 1 if step > 0 else k
        rj = frame.ray(j)
        den = wedge(qv, rj)
        if den == 0:
            raise DomainError("trace stalled against a parallel ray")
        t = -wedge(base, rj) / den
        pt = vadd(base, vscale(t, qv))
        mult = pt[0] / rj[0] if rj[0] != 0 else pt[1] / rj[1]
        if mult <= 0:
            raise DomainError("trace crossed a ray at a non-positive point")
        ray_i = frame.ray_index(j)
        crossings.append(
            Crossing(
                time=t,
                lifted=j,
                ray=ray_i,
                point=TropPoint.ray(fan, ray_i, mult),
                tangent_local=solve_in_basis(frame.ray(j - 1), rj, qv),
            )
        )
        k += step
        if len(crossings) > cap:
            raise DomainError(
                f"trace exceeded {TRACE_TURN_CAP} full turns; geometry out of scope"
            )
    k_end = k

    end_fwd = q.direction(fan)
    end_bwd = frame.to_trop(primitive(vneg(qv)), k_end)
    self_parallel = end_fwd == end_bwd

    cross_time = {c.lifted: c.time for c in crossings}

    def occupancy(kk: int) -> tuple[Optional[Fraction], Optional[Fraction]]:
        """Forward-time interval during which the trace is in lifted sector kk."""
        if step > 0:
            lo_t, hi_t = cross_time.get(kk + 1), cross_time.get(kk)
        else:
            lo_t, hi_t = cross_time.get(kk), cross_time.get(kk + 1)
        if kk == k_start:
            hi_t = None
        if kk == k_end:
            lo_t = None
        return lo_t, hi_t

    # Self-intersections: equal sector coordinates one full turn apart.
    deck = frame.deck()
    ddir = mat_vec(deck, qv)
    sec_lo, sec_hi = (k_start, k_end) if k_start < k_end else (k_end, k_start)
    candidates = []
    det = wedge(qv, vneg(ddir))
    if det != 0:
        rhs = vsub(mat_vec(deck, base), base)
        for kk in range(sec_lo, sec_hi - n + 1):
            t_hi = wedge(rhs, vneg(ddir)) / det   # time in window kk + n
            t_lo = wedge(qv, rhs) / det           # time in window kk
            lo1, hi1 = occupancy(kk + n)
            lo2, hi2 = occupancy(kk)
            ok1 = (lo1 is None or t_hi >= lo1) and (hi1 is None or t_hi <= hi1)
            ok2 = (lo2 is None or t_lo >= lo2) and (hi2 is None or t_lo <= hi2)
            if ok1 and ok2:
                candidates.append((kk, t_hi, t_lo))
    self_intersects = bool(candidates)

    vertex = None
    vertex_times = None
    vertex_window = None
    if candidates:
        # innermost loop: the self-crossing nearest the origin in the frame
        def vpos(cand):
            return vadd(base, vscale(cand[2], qv))

        kk, t_other, t_in_kk = min(candidates, key=lambda c: dot(vpos(c), vpos(c)))
        pt_v = vadd(base, vscale(t_in_kk, qv))
        secs = frame.sector_of(pt_v, kk - 1, kk + 1)
        vsec = secs[0] if secs else kk
        vertex = frame.to_trop(pt_v, vsec)
        vertex_times = (min(t_other, t_in_kk), max(t_other, t_in_kk))
        # window of the *later* visit (where V+ lives)
        vertex_window = kk if step > 0 else kk + n

    if vertex is None:
        bplus, bminus = end_fwd, end_bwd
        chain = [c.point for c in sorted(crossings, key=lambda c: c.time)]
        zero_boundary = tuple([end_bwd] + chain + [end_fwd])
    else:
        mu = mat_inv(deck)
        if step > 0:
            vplus_dev, vminus_dev = qv, vneg(mat_vec(mu, qv))
        else:
            vplus_dev, vminus_dev = qv, vneg(mat_vec(deck, qv))
        bplus = _locate_near(frame, vplus_dev, vertex_window)
        bminus = _locate_near(frame, vminus_dev, vertex_window)
        inner = sorted(
            (c for c in crossings if vertex_times[0] <= c.time <= vertex_times[1]),
            key=lambda c: c.time,
        )
        zero_boundary = tuple([vertex] + [c.point for c in inner] + [vertex])

    return LineTrace(
        fan=fan,
        direction=q.direction(fan),
        distance=d,
        frame=frame,
        dev_direction=qv,
        dev_base=base,
        k_start=k_start,
        k_end=k_end,
        crossings=tuple(sorted(crossings, key=lambda c: c.time)),
        wraps=_count_wraps(fan, q, crossings),
        end_forward=end_fwd,
        end_backward=end_bwd,
        self_parallel=self_parallel,
        self_intersects=self_intersects,
        vertex=vertex,
        vertex_times=vertex_times,
        vertex_window=vertex_window,
        zero_boundary=zero_boundary,
        boundary_plus=bplus,
        boundary_minus=bminus,
    )


def _locate_near(frame: DevelopedFrame, v: Vec, around: int) -> TropPoint:
    """Read a frame direction as a point, preferring the lift nearest a window."""
    ks = frame.sector_of(v)
    if not ks:
        raise DomainError("direction not locatable in frame")
    k = min(ks, key=lambda kk: (abs(kk - around), kk))
    return frame.to_trop(v, k)


def boundary_vector_sum(fan: LooijengaFan, trace: LineTrace) -> TropPoint:
    """The bend direction V- + V+ attached to a traced line's zero-side.

    Added in the tangent chart at the self-intersection vertex when the
    zero-side is bounded; otherwise in the angular gap the chain does not
    sweep, which runs counterclockwise from V- to V+ for a negative
    distance and the other way around for a positive one.
    """
    frame = trace.frame
    if trace.vertex is not None:
        deck = frame.deck()
        other = mat_inv(deck) if trace.distance < 0 else deck
        s = vadd(trace.dev_direction, vneg(mat_vec(other, trace.dev_direction)))
        if is_zero(s):
            return TropPoint.origin()
        return _locate_near(frame, s, trace.vertex_window)
    if trace.distance < 0:
        return add_points_local(fan, trace.boundary_minus, trace.boundary_plus)
    return add_points_local(fan, trace.boundary_plus, trace.boundary_minus)


def add_points_local(fan: LooijengaFan, p: TropPoint, r: TropPoint) -> TropPoint:
    """Add two points lying in a common or adjacent sector chart."""
    n = fan.n
    if p.is_origin():
        return r
    if r.is_origin():
        return p
    delta = (r.sector - p.sector) % n
    frame = develop(fan, cut=p.sector, sheets=2)
    pv = frame.lift_point(p, 0)
    for off in (delta, delta - n):
        rv = vadd(vscale(r.a, frame.ray(off)), vscale(r.b, frame.ray(off + 1)))
        s = vadd(pv, rv)
        if is_zero(s):
            return TropPoint.origin()
        lo, hi = min(0, off), max(0, off)
        ks = frame.sector_of(s, lo, hi)
        if ks:
            return frame.to_trop(s, ks[0])
    raise DomainError("points do not share a chart; use add_in_cone with an explicit cone")


def add_in_cone(
    fan: LooijengaFan,
    points: list[TropPoint],
    cone: tuple[int, int],
) -> Optional[TropPoint]:
    """Sum points inside the closed cone from ray cone[0] counterclockwise
    to ray cone[1]; the cone must develop to an angle < pi.

    Returns None when the sum's developed image leaves the developed cone
    (unreachable for a genuinely convex cone, kept as an explicit sentinel);
    raises when a point lies outside the cone or the cone is not convex.
    """
    lo_ray, hi_ray = cone
    n = fan.n
    span = (hi_ray - lo_ray) % n
    if span == 0 and lo_ray % n != hi_ray % n:
        span = n
    frame = develop(fan, cut=lo_ray, sheets=2)
    r_lo, r_hi = frame.ray(0), frame.ray(span)
    if span > 0 and wedge(r_lo, r_hi) <= 0:
        raise DomainError("cone is not convex in the developed chart")
    total: Vec = (Fraction(0), Fraction(0))
    for p in points:
        if p.is_origin():
            continue
        k = (p.sector - lo_ray) % n
        if k < span:
            total = vadd(total, frame.lift_point(p, k))
        elif k == span and p.on_ray():
            total = vadd(total, vscale(p.a, frame.ray(span)))
        elif span == 0 and k == 0 and p.on_ray():
            total = vadd(total, vscale(p.a, frame.ray(0)))
        else:
            raise DomainError(f"point {p} lies outside the stated cone")
    if is_zero(total):
        return TropPoint.origin()
    if span > 0 and wedge(frame.ray(span), total) == 0 and dot(frame.ray(span), total) > 0:
        return TropPoint.ray(fan, hi_ray, content(total))
    ks = frame.sector_of(total, 0, max(span - 1, 0))
    if not ks:
        return None
    return frame.to_trop(total, ks[0])
