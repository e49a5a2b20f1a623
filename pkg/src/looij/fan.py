"""Boundary-cycle fans: the input data for every other module.

A fan records a counterclockwise cycle of boundary rays, each carrying a
self-intersection number and a count of interior exceptional curves meeting
it.  All derived structure (charts, intersection matrix, monodromy,
positivity) is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .util import (
    DomainError,
    InputError,
    Mat2,
    MAT2_ID,
    fourier_motzkin,
    frac,
    invert_matrix,
    mat2,
    mat_det,
    mat_mul,
)


@dataclass(frozen=True)
class RaySpec:
    """One boundary ray: self-intersection and number of blowups on it."""

    self_int: int
    blowups: int = 0
    label: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.self_int, int):
            raise InputError("self_int must be an integer")
        if not isinstance(self.blowups, int) or self.blowups < 0:
            raise InputError("blowups must be a non-negative integer")


@dataclass(frozen=True)
class LooijengaFan:
    """Counterclockwise cycle of rays; always has n >= 3 once built.

    Use :func:`build_fan` rather than the constructor: the builder inserts
    corner subdivisions until the cycle has at least three rays, which the
    chart construction requires.
    """

    rays: tuple[RaySpec, ...]

    def __post_init__(self):
        if len(self.rays) < 3:
            raise InputError("fan needs at least 3 rays; use build_fan")
        labels = [r.label for r in self.rays if r.label is not None]
        if len(labels) != len(set(labels)):
            raise InputError("ray labels must be unique")

    @property
    def n(self) -> int:
        return len(self.rays)

    def d(self, i: int) -> int:
        """Self-intersection at ray i (cyclic index)."""
        return self.rays[i % self.n].self_int

    def b(self, i: int) -> int:
        """Blowup count at ray i (cyclic index)."""
        return self.rays[i % self.n].blowups

    def is_toric(self) -> bool:
        return all(r.blowups == 0 for r in self.rays)

    def __repr__(self):
        parts = ",".join(f"({r.self_int},{r.blowups})" for r in self.rays)
        return f"LooijengaFan[{parts}]"


def _corner_insert(rays: list[RaySpec], pos: int) -> list[RaySpec]:
    """Subdivide the corner between ray pos and ray pos+1 (cyclic).

    The new ray has self-intersection -1 and no blowups; both neighbours
    drop by 1.  A 1-cycle counts as its own neighbour on both sides, so its
    self-intersection drops by 2.
    """
    n = len(rays)
    j = pos % n
    jn = (pos + 1) % n
    out = [RaySpec(r.self_int, r.blowups, r.label) for r in rays]
    if n == 1:
        out[0] = RaySpec(out[0].self_int - 2, out[0].blowups, out[0].label)
    else:
        out[j] = RaySpec(out[j].self_int - 1, out[j].blowups, out[j].label)
        out[jn] = RaySpec(out[jn].self_int - 1, out[jn].blowups, out[jn].label)
    new = RaySpec(-1, 0, None)
    return out[: j + 1] + [new] + out[j + 1 :]


def build_fan(rays: Sequence[RaySpec]) -> LooijengaFan:
    """Build a fan, subdividing the last corner until n >= 3.

    Insertions always happen between the current last ray and the first,
    so the result is deterministic.
    """
    if not rays:
        raise InputError("empty ray list")
    lst = list(rays)
    while len(lst) < 3:
        lst = _corner_insert(lst, len(lst) - 1)
    return LooijengaFan(tuple(lst))


def intersection_matrix(fan: LooijengaFan) -> list[list[Fraction]]:
    """Symmetric matrix H: diagonal = self-intersections, cyclic neighbours 1.

    For n = 3 every off-diagonal entry is 1 (each pair of boundary curves
    meets once).
    """
    n = fan.n
    h = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        h[i][i] = Fraction(fan.d(i))
        h[i][(i + 1) % n] += 1
        h[i][(i - 1) % n] += 1
    return h


def transfer_matrix(d: int) -> Mat2:
    """Chart change across a ray of self-intersection d.

    Sends coordinates in the basis (previous ray, this ray) to coordinates
    in (this ray, next ray); unimodular by construction.
    """
    return mat2(-d, 1, -1, 0)


def monodromy(fan: LooijengaFan, base: int = 0) -> Mat2:
    """Counterclockwise holonomy around the origin, in the chart at `base`.

    The product of the transfer matrices once around the cycle, starting
    with the ray at index `base`.
    """
    m = MAT2_ID
    for i in range(fan.n):
        m = mat_mul(transfer_matrix(fan.d(base + i)), m)
    assert mat_det(m) == 1
    return m


def is_positive(fan: LooijengaFan) -> tuple[bool, Optional[list[Fraction]]]:
    """Decide existence of w >= 0 with H w >= 1 componentwise.

    Exact Fourier-Motzkin elimination; returns a rational witness when
    feasible, None otherwise.
    """
    n = fan.n
    h = intersection_matrix(fan)
    rows: list[list[Fraction]] = []
    for i in range(n):
        rows.append([Fraction(1 if j == i else 0) for j in range(n)] + [Fraction(0)])  # w_i >= 0
    for i in range(n):
        rows.append([h[i][j] for j in range(n)] + [Fraction(-1)])  # (Hw)_i - 1 >= 0
    w = fourier_motzkin(rows)
    if w is None:
        return False, None
    return True, w


_POSITIVITY_CACHE: dict = {}
_HINV_CACHE: dict = {}


def require_positive(fan: LooijengaFan) -> None:
    key = fan.rays
    if key not in _POSITIVITY_CACHE:
        _POSITIVITY_CACHE[key] = is_positive(fan)[0]
    if not _POSITIVITY_CACHE[key]:
        raise DomainError("fan is not positive (no effective ample boundary divisor)")


def invert_matrix_cached(fan: LooijengaFan):
    """Inverse of the intersection matrix, or None when singular."""
    key = fan.rays
    if key not in _HINV_CACHE:
        _HINV_CACHE[key] = invert_matrix(intersection_matrix(fan))
    return _HINV_CACHE[key]


@dataclass(frozen=True)
class Refinement:
    """A fan together with the elementary subdivisions that produced it.

    `inserts` lists (sector index in the fan current at that step) for each
    insertion, oldest first; `ray_of_original` maps original ray indices to
    indices in the refined fan.
    """

    original: LooijengaFan
    fan: LooijengaFan
    inserts: tuple[int, ...] = field(default_factory=tuple)
    ray_of_original: tuple[int, ...] = ()

    @staticmethod
    def identity(fan: LooijengaFan) -> "Refinement":
        return Refinement(fan, fan, (), tuple(range(fan.n)))


def _insert_in_refinement(ref: Refinement, sector: int) -> Refinement:
    new_fan = LooijengaFan(tuple(_corner_insert(list(ref.fan.rays), sector)))
    remap = tuple(i if i <= sector else i + 1 for i in ref.ray_of_original)
    return Refinement(ref.original, new_fan, ref.inserts + (sector,), remap)


def refine_to_contain(fan_or_ref, sector: int, a, b) -> tuple[Refinement, int]:
    """Refine until the direction a*v_sector + b*v_{sector+1} is a ray.

    Repeatedly subdivides the sector containing the target by inserting the
    sum of its boundary rays.  Returns the refinement and the ray index of
    the direction in the refined fan.  The target must be a nonzero
    integral primitive direction given in sector-local coordinates.
    """
    ref = fan_or_ref if isinstance(fan_or_ref, Refinement) else Refinement.identity(fan_or_ref)
    a, b = frac(a), frac(b)
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise InputError("direction must be a nonzero point of the closed sector")
    if a.denominator != 1 or b.denominator != 1:
        raise InputError("direction must be integral")
    from math import gcd

    g = gcd(int(a), int(b))
    a, b = a / g, b / g
    # track the target in local coordinates of the working sector
    s = sector % ref.fan.n
    while True:
        if b == 0:
            return ref, s
        if a == 0:
            return ref, (s + 1) % ref.fan.n
        ref = _insert_in_refinement(ref, s)
        # new ray v_s + v_{s+1} sits at local coords (1, 1); re-express
        if a >= b:
            # target lies in the clockwise half (v_s, v_s + v_{s+1})
            a, b = a - b, b
            s = s
        else:
            a, b = a, b - a
            s = (s + 1) % ref.fan.n


def locate_in_refinement(ref: Refinement, sector: int, a, b) -> tuple[int, Fraction, Fraction]:
    """Express a point of an original-fan sector in refined-fan coordinates."""
    a, b = frac(a), frac(b)
    if not ref.inserts:
        return sector % ref.fan.n, a, b
    # replay insertions, updating (sector, a, b) through each subdivision
    n = ref.original.n
    s = sector % n
    for pos in ref.inserts:
        if s == pos:
            if a >= b:
                a, b = a - b, b
            else:
                s = s + 1
                a, b = a, b - a
        elif s > pos:
            s += 1
        n += 1
        s %= n
    if a == 0 and b > 0:
        s, a, b = (s + 1) % n, b, frac(0)
    return s, a, b


def point_to_original(ref: Refinement, s: int, a: Fraction, b: Fraction) -> tuple[int, Fraction, Fraction]:
    """Rewrite refined-fan sector coordinates in original-fan sectors."""
    if not ref.inserts:
        return s % ref.fan.n, a, b
    sizes = [ref.original.n + i for i in range(len(ref.inserts))]
    s_cur, a_cur, b_cur = s % ref.fan.n, a, b
    for pos, _n_before in zip(reversed(ref.inserts), reversed(sizes)):
        if s_cur == pos:
            a_cur, b_cur = a_cur + b_cur, b_cur
        elif s_cur == pos + 1:
            a_cur, b_cur = a_cur, a_cur + b_cur
            s_cur = pos
        elif s_cur > pos + 1:
            s_cur -= 1
    return s_cur, a_cur, b_cur
