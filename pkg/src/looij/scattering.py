"""Walls, wall-crossing, consistency completion, and seed charts.

Series live in the seed chart: Laurent monomials z^(a,b) with coefficients
in a polynomial ring with one formal variable per individual blowup
(never aggregated).  Truncation is by total degree in these class
variables; every operation takes the truncation order explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Optional

from .fan import LooijengaFan, Refinement, locate_in_refinement, point_to_original
from .geometry import TropPoint, trace_line
from .util import (
    DomainError,
    InputError,
    Vec,
    frac,
    is_zero,
    primitive,
    solve_in_basis,
    vneg,
    vscale,
    wedge,
)

IVec = tuple[int, int]

# ---------------------------------------------------------------------------
# truncated series over the class-variable polynomial ring


ClsExp = tuple[int, ...]
ClsPoly = dict[ClsExp, Fraction]
Series = dict[IVec, ClsPoly]


def cls_one(nvars: int) -> ClsExp:
    return (0,) * nvars


def cls_deg(e: ClsExp) -> int:
    return sum(e)


def cls_mul(a: ClsExp, b: ClsExp) -> ClsExp:
    return tuple(x + y for x, y in zip(a, b))


def poly_add(a: ClsPoly, b: ClsPoly) -> ClsPoly:
    out = dict(a)
    for e, c in b.items():
        c2 = out.get(e, Fraction(0)) + c
        if c2:
            out[e] = c2
        else:
            out.pop(e, None)
    return out


def poly_scale(a: ClsPoly, c: Fraction) -> ClsPoly:
    if not c:
        return {}
    return {e: c * v for e, v in a.items()}


def poly_mul(a: ClsPoly, b: ClsPoly, order: int) -> ClsPoly:
    out: ClsPoly = {}
    for ea, ca in a.items():
        da = cls_deg(ea)
        for eb, cb in b.items():
            if da + cls_deg(eb) > order:
                continue
            e = cls_mul(ea, eb)
            c = out.get(e, Fraction(0)) + ca * cb
            if c:
                out[e] = c
            else:
                out.pop(e, None)
    return out


def ser_make(terms) -> Series:
    out: Series = {}
    for n, e, c in terms:
        c = frac(c)
        if not c:
            continue
        p = out.setdefault((int(n[0]), int(n[1])), {})
        c2 = p.get(e, Fraction(0)) + c
        if c2:
            p[e] = c2
        else:
            p.pop(e, None)
    return {n: p for n, p in out.items() if p}


def ser_add(a: Series, b: Series) -> Series:
    out = {n: dict(p) for n, p in a.items()}
    for n, p in b.items():
        q = poly_add(out.get(n, {}), p)
        if q:
            out[n] = q
        else:
            out.pop(n, None)
    return out


def ser_scale(a: Series, c: Fraction) -> Series:
    if not c:
        return {}
    return {n: poly_scale(p, c) for n, p in a.items()}


def ser_mul(a: Series, b: Series, order: int) -> Series:
    out: Series = {}
    for na, pa in a.items():
        for nb, pb in b.items():
            p = poly_mul(pa, pb, order)
            if not p:
                continue
            n = (na[0] + nb[0], na[1] + nb[1])
            q = poly_add(out.get(n, {}), p)
            if q:
                out[n] = q
            else:
                out.pop(n, None)
    return out


def ser_truncate(a: Series, order: int) -> Series:
    out: Series = {}
    for n, p in a.items():
        q = {e: c for e, c in p.items() if cls_deg(e) <= order}
        if q:
            out[n] = q
    return out


def ser_unit(nvars: int, n: IVec = (0, 0), coeff=1) -> Series:
    return {n: {cls_one(nvars): frac(coeff)}}


def ser_pow_unit(f: Series, e: int, order: int, nvars: int) -> Series:
    """f**e for a unit series f = 1 + g with g of positive class order.

    Binomial expansion in g; exact for any integer e because g is
    nilpotent modulo the truncation order.
    """
    one = cls_one(nvars)
    g = {n: dict(p) for n, p in f.items()}
    head = g.get((0, 0), {}).get(one)
    if head != 1:
        raise ValueError("series is not a unit with constant term 1")
    q = poly_add(g.get((0, 0), {}), {one: Fraction(-1)})
    if q:
        g[(0, 0)] = q
    else:
        g.pop((0, 0), None)
    out = ser_unit(nvars)
    gp = ser_unit(nvars)
    binom = Fraction(1)
    for j in range(1, order + 1):
        gp = ser_mul(gp, g, order)
        if not gp:
            break
        binom = binom * Fraction(e - j + 1, j)
        out = ser_add(out, ser_scale(gp, binom))
    return ser_truncate(out, order)


def ser_sorted_items(a: Series):
    for n in sorted(a):
        for e in sorted(a[n]):
            yield n, e, a[n][e]


# ---------------------------------------------------------------------------
# seed data: a toric-closing refinement with chart positions for every ray


@dataclass(frozen=True)
class Seed:
    """Global integral chart for the fan: positions of all (refined) rays.

    `positions[i]` is the chart vector of refined ray i; consecutive
    positions are oriented lattice bases and the cycle closes around the
    origin exactly once.  `cls_vars` lists (ray index, copy index) per
    class variable; `weights[v]` is the chart z-weight carried by class
    variable v.
    """

    refinement: Refinement
    positions: tuple[IVec, ...]
    cls_vars: tuple[tuple[int, int], ...]
    var_index: dict
    weights: tuple[IVec, ...]

    @property
    def fan(self) -> LooijengaFan:
        return self.refinement.fan

    @property
    def nvars(self) -> int:
        return len(self.cls_vars)

    def to_chart(self, p: TropPoint) -> tuple[Fraction, Fraction]:
        """Chart coordinates of a point given in original-fan sectors."""
        s, a, b = locate_in_refinement(self.refinement, p.sector, p.a, p.b)
        n = self.fan.n
        m1, m2 = self.positions[s % n], self.positions[(s + 1) % n]
        return (a * m1[0] + b * m2[0], a * m1[1] + b * m2[1])

    def to_chart_int(self, p: TropPoint) -> IVec:
        x, y = self.to_chart(p)
        if x.denominator != 1 or y.denominator != 1:
            raise InputError("point is not integral in the seed chart")
        return (int(x), int(y))

    def from_chart(self, v: Vec) -> TropPoint:
        """Back from chart coordinates to a sector-local point (original fan)."""
        if is_zero(v):
            return TropPoint.origin()
        n = self.fan.n
        for s in range(n):
            m1 = _as_vec(self.positions[s])
            m2 = _as_vec(self.positions[(s + 1) % n])
            if wedge(m1, v) >= 0 and wedge(v, m2) > 0:
                a, b = solve_in_basis(m1, m2, v)
                os_, oa, ob = point_to_original(self.refinement, s, a, b)
                return TropPoint.make(self.refinement.original, os_, oa, ob)
        raise DomainError("chart vector not located in any seed sector")


def _as_vec(p: IVec) -> Vec:
    return (Fraction(p[0]), Fraction(p[1]))


def _develops_toric(dbar: list[int]) -> Optional[list[IVec]]:
    """Chart positions for a self-intersection cycle that closes exactly
    once around the origin, or None."""
    n = len(dbar)
    m: list[Vec] = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
    for k in range(1, n + 1):
        d = dbar[k % n]
        m.append(vsub_(vneg(m[k - 1]), vscale(d, m[k])))
    if m[n] != m[0] or m[n + 1] != m[1]:
        return None
    # winding: the half-open sectors must cover each direction exactly once
    probe = (Fraction(1), Fraction(0))
    hits = 0
    for k in range(n):
        if wedge(m[k], probe) >= 0 and wedge(probe, m[k + 1]) > 0:
            hits += 1
    probe2 = (Fraction(0), Fraction(1))
    hits2 = 0
    for k in range(n):
        if wedge(m[k], probe2) >= 0 and wedge(probe2, m[k + 1]) > 0:
            hits2 += 1
    if hits != 1 or hits2 != 1:
        return None
    out = []
    for k in range(n):
        x, y = m[k]
        assert x.denominator == 1 and y.denominator == 1
        out.append((int(x), int(y)))
    return out


def vsub_(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


_SEED_SEARCH_CAP = 8


def seed_data(fan: LooijengaFan) -> Seed:
    """Build the global seed chart, refining corners when necessary.

    The chart exists when the cycle of (self-intersection + blowup count)
    numbers develops to a complete unimodular fan; corner subdivisions
    preserve the obstruction invariant, which is checked up front.
    """
    inv = sum(r.self_int + r.blowups for r in fan.rays) + 3 * fan.n
    if inv != 12:
        raise DomainError(
            f"fan admits no toric chart: invariant {inv} != 12"
        )
    base = Refinement.identity(fan)
    seen = set()
    queue = [base]
    depth = {(): 0}
    while queue:
        ref = queue.pop(0)
        dbar = [ref.fan.d(i) + ref.fan.b(i) for i in range(ref.fan.n)]
        key = tuple(dbar)
        pos = _develops_toric(dbar)
        if pos is not None:
            return _finish_seed(ref, pos)
        if key in seen:
            continue
        seen.add(key)
        if len(ref.inserts) >= _SEED_SEARCH_CAP:
            continue
        from .fan import _insert_in_refinement

        for sector in range(ref.fan.n):
            queue.append(_insert_in_refinement(ref, sector))
    raise DomainError("no toric chart found within the refinement search cap")


def _finish_seed(ref: Refinement, positions: list[IVec]) -> Seed:
    fan = ref.fan
    cls_vars = []
    for i in range(fan.n):
        for j in range(fan.b(i)):
            cls_vars.append((i, j))
    var_index = {v: k for k, v in enumerate(cls_vars)}
    weights = tuple(
        (-positions[i][0], -positions[i][1]) for (i, j) in cls_vars
    )
    return Seed(ref, tuple(positions), tuple(cls_vars), var_index, weights)


# ---------------------------------------------------------------------------
# walls and diagrams


@dataclass(frozen=True)
class Wall:
    """A wall with primitive chart direction and unit function.

    Outgoing walls live on the ray through `direction`; incoming walls are
    full lines crossed at both `direction` and its negative, with the same
    function.  Function terms all have z-exponent a negative multiple of
    `direction`.
    """

    direction: IVec
    fn: Series
    incoming: bool


@dataclass
class ScatteringDiagram:
    seed: Seed
    order: int
    walls: list[Wall] = field(default_factory=list)
    consistent: bool = False
    seed_form: bool = False

    @property
    def nvars(self) -> int:
        return self.seed.nvars

    def crossing_events(self) -> list[tuple[IVec, Wall]]:
        """(angular position, wall) pairs; incoming walls appear twice."""
        ev = []
        for w in self.walls:
            ev.append((w.direction, w))
            if w.incoming:
                ev.append(((-w.direction[0], -w.direction[1]), w))
        return ev

    def wall_at(self, direction: IVec) -> Optional[Wall]:
        for w in self.walls:
            if w.direction == direction and not w.incoming:
                return w
        return None


def initial_diagram(
    fan: LooijengaFan, order: int = 4, seed: Optional[Seed] = None, seed_form: bool = False
) -> ScatteringDiagram:
    """One full-line wall per blowup-carrying ray: the product of
    (1 + t_ij z^{-m_i}) over that ray's blowups.

    With seed_form=True the exponents are +m_i instead: the presentation in
    which broken lines are straight chart segments and may bend toward the
    origin across the rays themselves.  The two presentations differ by
    negating the exponents on the forward half-lines.  Functions are full
    polynomials (never pre-truncated), so the same diagram can seed
    completions at any order.
    """
    if order < 0:
        raise InputError("order must be non-negative")
    seed = seed or seed_data(fan)
    nv = seed.nvars
    sgn = 1 if seed_form else -1
    walls = []
    for i in range(seed.fan.n):
        bi = seed.fan.b(i)
        if bi == 0:
            continue
        m = seed.positions[i]
        fn = ser_unit(nv)
        for j in range(bi):
            e = [0] * nv
            e[seed.var_index[(i, j)]] = 1
            term = ser_add(ser_unit(nv), ser_make([((sgn * m[0], sgn * m[1]), tuple(e), 1)]))
            fn = ser_mul(fn, term, nv + 1)
        walls.append(Wall(direction=m, fn=fn, incoming=True))
    walls.sort(key=lambda w: w.direction)
    return ScatteringDiagram(seed=seed, order=order, walls=walls, seed_form=seed_form)


def conormal(direction: IVec, positive_on: Vec) -> IVec:
    """Primitive conormal of a wall, positive on the given side."""
    n = (-direction[1], direction[0])
    s = n[0] * positive_on[0] + n[1] * positive_on[1]
    if s == 0:
        raise ValueError("side vector lies on the wall")
    return n if s > 0 else (-n[0], -n[1])


def wall_cross(series: Series, wall: Wall, from_side: Vec, order: int, nvars: int) -> Series:
    """Apply the wall automorphism z^u -> z^u f^(n . u) to a series.

    `from_side` is any vector pointing from the wall into the region the
    path came from.  Negative exponents expand as unit-series inverses.
    """
    n = conormal(wall.direction, from_side)
    out: Series = {}
    pow_cache: dict[int, Series] = {}
    for zexp, poly in series.items():
        e = n[0] * zexp[0] + n[1] * zexp[1]
        if e == 0:
            out = ser_add(out, {zexp: dict(poly)})
            continue
        if e not in pow_cache:
            pow_cache[e] = ser_pow_unit(wall.fn, e, order, nvars)
        out = ser_add(out, ser_mul({zexp: dict(poly)}, pow_cache[e], order))
    return ser_truncate(out, order)


def _angle_cmp(base: IVec):
    """Total order on nonzero integer directions: counterclockwise from
    `base`, with `base` itself first."""

    def half(u: IVec) -> int:
        w = base[0] * u[1] - base[1] * u[0]
        d = base[0] * u[0] + base[1] * u[1]
        if w == 0:
            return 0 if d > 0 else 2
        return 1 if w > 0 else 3

    def cmp(u: IVec, v: IVec) -> int:
        hu, hv = half(u), half(v)
        if hu != hv:
            return -1 if hu < hv else 1
        w = u[0] * v[1] - u[1] * v[0]
        if w > 0:
            return -1
        if w < 0:
            return 1
        return 0

    return cmp_to_key(cmp)


def _pick_base_direction(events) -> IVec:
    cands = [(1, 0), (0, 1), (1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2), (1, 5)]
    dirs = {primitive_i(p) for p, _ in events}
    for c in cands:
        if primitive_i(c) not in dirs and primitive_i((-c[0], -c[1])) not in dirs:
            return c
    k = 1
    while True:
        c = (1, 7 + k)
        if primitive_i(c) not in dirs and primitive_i((-c[0], -c[1])) not in dirs:
            return c
        k += 1


def primitive_i(u: IVec) -> IVec:
    from math import gcd

    g = gcd(abs(u[0]), abs(u[1]))
    return (u[0] // g, u[1] // g)


def path_ordered_product(diagram: ScatteringDiagram, series: Series, order: Optional[int] = None) -> Series:
    """Transport a series once counterclockwise around the origin.

    The loop starts just counterclockwise of a base direction chosen off
    every wall, so each crossing event is applied exactly once.
    """
    order = diagram.order if order is None else order
    events = diagram.crossing_events()
    if not events:
        return ser_truncate(series, order)
    base = _pick_base_direction(events)
    key = _angle_cmp(base)
    events.sort(key=lambda pw: (key(pw[0]), pw[1].direction))
    out = ser_truncate(series, order)
    for pos, wall in events:
        # entering the wall counterclockwise: came from the clockwise side
        from_side = (Fraction(pos[1]), Fraction(-pos[0]))
        out = wall_cross(out, wall, from_side, order, diagram.nvars)
    return out


def _zweight(seed: Seed, e: ClsExp, sgn: int = 1) -> IVec:
    x = sgn * sum(seed.weights[v][0] * k for v, k in enumerate(e))
    y = sgn * sum(seed.weights[v][1] * k for v, k in enumerate(e))
    return (x, y)


def make_consistent(diagram: ScatteringDiagram, order: Optional[int] = None) -> ScatteringDiagram:
    """Complete a diagram so the full counterclockwise loop acts as the
    identity modulo class order `order`+1, adding only outgoing rays.

    Corrections are found order by order from the loop's action on the
    chart monomials z^(1,0) and z^(0,1); each residual term's class
    monomial dictates the direction and coefficient of the wall that
    cancels it, and all corrections of one order are installed together.
    """
    if order is None:
        order = diagram.order
    if order < 1:
        raise InputError("order must be >= 1")
    seed = diagram.seed
    nv = seed.nvars
    sgn = -1 if diagram.seed_form else 1
    walls = list(diagram.walls)
    tests = [(1, 0), (0, 1)]
    for ell in range(1, order + 1):
        for _ in range(order + 2):
            work = ScatteringDiagram(seed=seed, order=ell, walls=walls)
            residue: dict[tuple[IVec, ClsExp], list] = {}
            done = True
            for m in tests:
                got = path_ordered_product(work, ser_unit(nv, m), ell)
                got = ser_add(got, ser_scale(ser_unit(nv, m), Fraction(-1)))
                for zexp, poly in got.items():
                    for e, c in poly.items():
                        if cls_deg(e) != ell or not c:
                            continue
                        done = False
                        w = (zexp[0] - m[0], zexp[1] - m[1])
                        if w != _zweight(seed, e, sgn):
                            raise DomainError("graded residual with mismatched weight")
                        residue.setdefault((w, e), [None, None])[tests.index(m)] = c
            if done:
                break
            new_terms = []
            for (w, e), (cx, cy) in sorted(residue.items()):
                if w == (0, 0):
                    if cx or cy:
                        raise DomainError("weight-zero inconsistency cannot be cancelled")
                    continue
                u = primitive_i((-w[0], -w[1]))
                n = (u[1], -u[0])  # conormal used when looping counterclockwise
                # residual on z^m must be beta * <n, m>
                beta = None
                if n[0] != 0:
                    beta = (cx or Fraction(0)) / n[0]
                if n[1] != 0:
                    beta_y = (cy or Fraction(0)) / n[1]
                    if beta is None:
                        beta = beta_y
                    elif beta != beta_y:
                        raise DomainError("residual is not a wall cocycle")
                if (cx or Fraction(0)) != beta * n[0] or (cy or Fraction(0)) != beta * n[1]:
                    raise DomainError("residual is not a wall cocycle")
                if beta:
                    new_terms.append((u, e, -beta))
            by_dir: dict[IVec, list] = {}
            for u, e, a in new_terms:
                by_dir.setdefault(u, []).append((e, a))
            for u in sorted(by_dir):
                w_exist = next(
                    (w for w in walls if not w.incoming and w.direction == u), None
                )
                add = ser_make([(_zweight(seed, e, sgn), e, a) for e, a in by_dir[u]])
                if w_exist is None:
                    walls.append(Wall(direction=u, fn=ser_add(ser_unit(nv), add), incoming=False))
                else:
                    walls[walls.index(w_exist)] = Wall(
                        direction=u, fn=ser_add(w_exist.fn, add), incoming=False
                    )
        else:
            raise DomainError(f"consistency completion did not settle at order {ell}")
    walls.sort(key=lambda w: (w.direction, not w.incoming))
    return ScatteringDiagram(
        seed=seed, order=order, walls=walls, consistent=True, seed_form=diagram.seed_form
    )


def is_consistent(diagram: ScatteringDiagram, order: Optional[int] = None, extra_tests=()) -> bool:
    order = diagram.order if order is None else order
    nv = diagram.nvars
    for m in [(1, 0), (0, 1), (1, 1), (-1, 2), *extra_tests]:
        got = path_ordered_product(diagram, ser_unit(nv, m), order)
        if got != ser_unit(nv, m):
            return False
    return True


# ---------------------------------------------------------------------------
# cluster walls and the chart bridge


@dataclass(frozen=True)
class ClusterWall:
    direction: TropPoint   # primitive, sector-local
    chart_direction: IVec  # primitive, seed chart
    multiplicity: int


_DIAGRAM_CACHE: dict = {}


def consistent_diagram(fan: LooijengaFan, order: int, seed_form: bool = False) -> ScatteringDiagram:
    key = (fan.rays, order, seed_form)
    if key not in _DIAGRAM_CACHE:
        _DIAGRAM_CACHE[key] = make_consistent(
            initial_diagram(fan, order, seed_form=seed_form), order
        )
    return _DIAGRAM_CACHE[key]


def _binomial_multiplicity(wall: Wall, order: int, nvars: int) -> Optional[int]:
    """Number of binomial factors when fn is exactly a product of
    (1 + c T z^-u) factors modulo the order; None otherwise."""
    u = wall.direction
    lin = wall.fn.get((-u[0], -u[1]), {})
    factors = [(e, c) for e, c in lin.items() if cls_deg(e) >= 1]
    prod = ser_unit(nvars)
    for e, c in sorted(factors):
        prod = ser_mul(prod, ser_add(ser_unit(nvars), ser_make([((-u[0], -u[1]), e, c)])), order)
    return len(factors) if prod == wall.fn else None


def cluster_walls(fan: LooijengaFan, q: TropPoint, max_order: int = 8) -> list[ClusterWall]:
    """Finitely many walls inside the sector swept out by the non-wrapping
    line through q, with their binomial multiplicities.

    Completion runs at increasing order until the wall set inside the
    sector is stable for two consecutive orders.
    """
    tr = trace_line(fan, q, Fraction(-1))
    if tr.wraps > 0:
        raise DomainError("line wraps: sector is not in the cluster complex")
    seed = seed_data(fan)
    qm = _chart_dir(seed, tr.end_forward)
    qminus = _chart_dir(seed, tr.end_backward)
    stable = _stable_walls_in_cone(fan, seed, qminus, qm, max_order)
    return [
        ClusterWall(
            direction=seed.from_chart(_as_vec(u)).direction(fan),
            chart_direction=u,
            multiplicity=m,
        )
        for u, m in stable
    ]


def _wall_degree(wall: Wall) -> int:
    """Largest power of z^-direction appearing in the wall function."""
    u = wall.direction
    best = 0
    for (nx, ny), poly in wall.fn.items():
        if (nx, ny) == (0, 0) or not poly:
            continue
        j = -nx // u[0] if u[0] != 0 else -ny // u[1]
        best = max(best, j)
    return best


def _stable_walls_in_cone(
    fan: LooijengaFan, seed: Seed, lo: IVec, hi: IVec, max_order: int, mode: str = "binomial"
) -> list[tuple[IVec, int]]:
    """Wall directions and multiplicities inside the closed cone from lo
    counterclockwise to hi, stabilised over two consecutive orders.

    Mode "binomial" insists every function is a product of binomials and
    counts the factors; mode "degree" takes the top power of the function,
    which is what governs maximal bends.  Mutation data sits on the wall
    rays themselves, never on the backward halves of the initial lines:
    the chart already agrees with the sector-local structure across those.
    """
    history: list[list] = []
    for k in range(1, max_order + 1):
        diag = consistent_diagram(fan, k)
        merged: dict[IVec, int] = {}
        # both halves of an initial line are walls of the sector-local
        # picture, with the same multiplicity
        for pos, wall in diag.crossing_events():
            if not _in_closed_cone(lo, hi, pos):
                continue
            if mode == "binomial":
                mult = _binomial_multiplicity(wall, k, diag.nvars)
                if mult is None:
                    raise DomainError("non-binomial wall inside the requested cone")
            else:
                mult = _wall_degree(wall)
            if mult:
                merged[pos] = merged.get(pos, 0) + mult
        history.append(sorted(merged.items()))
        # walls can hide behind the truncation for one extra order, so ask
        # for three consecutive agreeing orders before trusting the set
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            return history[-1]
    raise DomainError(
        "wall set did not stabilise (accumulating walls outside the cluster region?)"
    )


_SECTOR_WALLS_CACHE: dict = {}


def sector_walls_stable(fan: LooijengaFan, sector: int, max_order: int = 8) -> list[tuple[TropPoint, int]]:
    """Walls whose canonical position lies in the half-open sector
    [ray sector, ray sector+1), with binomial multiplicities."""
    key = (fan.rays, sector % fan.n)
    if key in _SECTOR_WALLS_CACHE:
        return _SECTOR_WALLS_CACHE[key]
    seed = seed_data(fan)
    lo = _chart_dir(seed, TropPoint.ray(fan, sector))
    hi = _chart_dir(seed, TropPoint.ray(fan, sector + 1))
    stable = _stable_walls_in_cone(fan, seed, lo, hi, max_order)
    out = []
    for u, m in stable:
        if primitive_i(u) == primitive_i(hi):
            continue  # belongs to the next sector
        out.append((seed.from_chart(_as_vec(u)).direction(fan), m))
    _SECTOR_WALLS_CACHE[key] = out
    return out


def ray_wall_multiplicity(fan: LooijengaFan, i: int, max_order: int = 8) -> int:
    """Total binomial multiplicity of walls sitting exactly on fan ray i."""
    target = TropPoint.ray(fan, i)
    return sum(m for p, m in sector_walls_stable(fan, i, max_order) if p == target)


def _in_closed_cone(lo: IVec, hi: IVec, v: IVec) -> bool:
    """Membership in the closed cone from lo counterclockwise to hi,
    assuming the cone is salient or a half-plane."""
    wl = lo[0] * v[1] - lo[1] * v[0]
    wh = v[0] * hi[1] - v[1] * hi[0]
    span = lo[0] * hi[1] - lo[1] * hi[0]
    if span > 0:
        return wl >= 0 and wh >= 0
    if span < 0:
        return wl >= 0 or wh >= 0
    # lo, hi parallel
    d = lo[0] * hi[0] + lo[1] * hi[1]
    if d > 0:
        return wl == 0 and lo[0] * v[0] + lo[1] * v[1] > 0
    return wl >= 0 or wh >= 0


def _chart_dir(seed: Seed, p: TropPoint) -> IVec:
    v = seed.to_chart(p)
    pv = primitive(v)
    if pv[0].denominator != 1 or pv[1].denominator != 1:
        raise DomainError("direction is not integral in the chart")
    return (int(pv[0]), int(pv[1]))


def seed_bridge(fan: LooijengaFan, value, to: str = "seed", seed: Optional[Seed] = None):
    """Piecewise-linear bridge between sector-local points and the seed
    chart; identity on the base sector, bending only at blowup rays."""
    seed = seed or seed_data(fan)
    if to == "seed":
        if not isinstance(value, TropPoint):
            raise InputError("to='seed' expects a sector-local point")
        return seed.to_chart(value)
    if to == "canonical":
        x, y = frac(value[0]), frac(value[1])
        return seed.from_chart((x, y))
    raise InputError("to must be 'seed' or 'canonical'")
