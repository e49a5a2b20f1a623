"""Exact-arithmetic helpers: rational parsing, 2x2 integer/rational linear
algebra, small dense linear solves, and Fourier-Motzkin elimination.

Everything in this package computes over `fractions.Fraction`; floats are
never introduced by these helpers.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence


class LooijError(Exception):
    """Base class for all library errors."""


class InputError(LooijError):
    """Malformed input: schema violations, bad literals, wrong shapes."""


class DomainError(LooijError):
    """Structurally valid input outside an operation's domain."""


Vec = tuple[Fraction, Fraction]
Mat2 = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)

V_ZERO: Vec = (ZERO, ZERO)


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational literal: {x!r}") from exc
    raise InputError(f"rationals must be integers or 'p/q' strings, got {type(x).__name__}")


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def vec(x, y) -> Vec:
    return (frac(x), frac(y))


def vadd(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def vsub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def vneg(a: Vec) -> Vec:
    return (-a[0], -a[1])


def vscale(c, a: Vec) -> Vec:
    c = frac(c)
    return (c * a[0], c * a[1])


def wedge(a: Vec, b: Vec) -> Fraction:
    """Oriented area form a_x b_y - a_y b_x."""
    return a[0] * b[1] - a[1] * b[0]


def dot(a: Vec, b: Vec) -> Fraction:
    return a[0] * b[0] + a[1] * b[1]


def is_zero(a: Vec) -> bool:
    return a[0] == 0 and a[1] == 0


def primitive(a: Vec) -> Vec:
    """Primitive integral vector on the ray through `a` (requires a != 0).

    Works for rational input: clears denominators first.
    """
    if is_zero(a):
        raise ValueError("zero vector has no direction")
    d = a[0].denominator * a[1].denominator // gcd(a[0].denominator, a[1].denominator)
    x, y = a[0] * d, a[1] * d
    g = gcd(int(x.numerator), int(y.numerator))
    return (x / g, y / g)


def content(a: Vec) -> Fraction:
    """Multiplier c >= 0 with a = c * primitive(a); 0 for the zero vector."""
    if is_zero(a):
        return ZERO
    p = primitive(a)
    return a[0] / p[0] if p[0] != 0 else a[1] / p[1]


def is_integral_vec(a: Vec) -> bool:
    return a[0].denominator == 1 and a[1].denominator == 1


def mat2(a, b, c, d) -> Mat2:
    return ((frac(a), frac(b)), (frac(c), frac(d)))


MAT2_ID: Mat2 = ((ONE, ZERO), (ZERO, ONE))


def mat_mul(m: Mat2, n: Mat2) -> Mat2:
    return (
        (m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
        (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]),
    )


def mat_vec(m: Mat2, v: Vec) -> Vec:
    return (m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1])


def mat_det(m: Mat2) -> Fraction:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def mat_inv(m: Mat2) -> Mat2:
    d = mat_det(m)
    if d == 0:
        raise ValueError("singular 2x2 matrix")
    return ((m[1][1] / d, -m[0][1] / d), (-m[1][0] / d, m[0][0] / d))


def mat_pow(m: Mat2, k: int) -> Mat2:
    if k < 0:
        return mat_pow(mat_inv(m), -k)
    out = MAT2_ID
    for _ in range(k):
        out = mat_mul(m, out)
    return out


def columns(v1: Vec, v2: Vec) -> Mat2:
    return ((v1[0], v2[0]), (v1[1], v2[1]))


def solve_in_basis(v1: Vec, v2: Vec, x: Vec) -> Vec:
    """Coordinates (a, b) with x = a*v1 + b*v2; requires det(v1, v2) != 0."""
    d = wedge(v1, v2)
    if d == 0:
        raise ValueError("degenerate basis")
    return (wedge(x, v2) / d, wedge(v1, x) / d)


def solve_linear(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[list[Fraction]]:
    """Solve a square rational system by Gaussian elimination.

    Returns None when the matrix is singular.
    """
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def invert_matrix(a: Sequence[Sequence[Fraction]]) -> Optional[list[list[Fraction]]]:
    n = len(a)
    cols = []
    for j in range(n):
        e = [Fraction(1 if i == j else 0) for i in range(n)]
        sol = solve_linear(a, e)
        if sol is None:
            return None
        cols.append(sol)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def fourier_motzkin(rows: list[list[Fraction]]) -> Optional[list[Fraction]]:
    """Exact feasibility for a system of inequalities sum_j c_j x_j + c_n >= 0.

    Each row is (c_0, ..., c_{n-1}, c_n).  Returns a witness x when the
    system is feasible and None when it is not.  Variables are eliminated
    left to right; a witness is rebuilt by back-substitution, picking the
    midpoint of each variable's feasible interval (or a finite endpoint).
    """
    nvars = len(rows[0]) - 1 if rows else 0
    stages: list[list[list[Fraction]]] = []
    cur = [list(map(Fraction, r)) for r in rows]
    for v in range(nvars):
        stages.append(cur)
        lower = [r for r in cur if r[v] > 0]   # x_v >= -(rest)/c
        upper = [r for r in cur if r[v] < 0]   # x_v <= -(rest)/c
        rest = [r for r in cur if r[v] == 0]
        nxt = [r[:] for r in rest]
        for lo in lower:
            for hi in upper:
                # combine to eliminate x_v: c_lo > 0, c_hi < 0
                comb = [lo[j] * (-hi[v]) + hi[j] * lo[v] for j in range(len(lo))]
                comb[v] = ZERO
                nxt.append(comb)
        cur = nxt
    for r in cur:
        if r[-1] < 0:
            return None
    # back-substitute
    x = [ZERO] * nvars
    for v in reversed(range(nvars)):
        rows_v = stages[v]
        lo_bound: Optional[Fraction] = None
        hi_bound: Optional[Fraction] = None
        for r in rows_v:
            if r[v] == 0:
                continue
            rest = r[-1] + sum(r[j] * x[j] for j in range(v + 1, nvars))
            bound = -rest / r[v]
            if r[v] > 0:
                lo_bound = bound if lo_bound is None else max(lo_bound, bound)
            else:
                hi_bound = bound if hi_bound is None else min(hi_bound, bound)
        if lo_bound is None and hi_bound is None:
            x[v] = ZERO
        elif lo_bound is None:
            x[v] = hi_bound
        elif hi_bound is None:
            x[v] = lo_bound
        else:
            x[v] = (lo_bound + hi_bound) / 2
    return x


class Eps:
    """Linear jet a + b*eps over the rationals, eps an infinitesimal.

    Supports exactly the operations needed for symbolically perturbed
    endpoint geometry: addition, subtraction, scaling by exact rationals,
    and lexicographic sign/comparison.  Products of two jets are not
    defined; the geometry here never needs eps^2.
    """

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = frac(a)
        self.b = frac(b)

    def __add__(self, other):
        other = _as_eps(other)
        return Eps(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_eps(other)
        return Eps(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return _as_eps(other) - self

    def __neg__(self):
        return Eps(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, Eps):
            if other.b == 0:
                other = other.a
            elif self.b == 0:
                self, other = Eps(other.a, other.b), self.a
            else:
                raise TypeError("eps^2 is not representable")
        return Eps(self.a * frac(other), self.b * frac(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Eps):
            if other.b != 0:
                raise TypeError("division by a non-constant jet")
            other = other.a
        return Eps(self.a / frac(other), self.b / frac(other))

    def sign(self) -> int:
        if self.a != 0:
            return 1 if self.a > 0 else -1
        if self.b != 0:
            return 1 if self.b > 0 else -1
        return 0

    def __eq__(self, other):
        other = _as_eps(other)
        return self.a == other.a and self.b == other.b

    def __lt__(self, other):
        return (self - _as_eps(other)).sign() < 0

    def __le__(self, other):
        return (self - _as_eps(other)).sign() <= 0

    def __gt__(self, other):
        return (self - _as_eps(other)).sign() > 0

    def __ge__(self, other):
        return (self - _as_eps(other)).sign() >= 0

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"Eps({self.a!r}, {self.b!r})"


def _as_eps(x) -> Eps:
    return x if isinstance(x, Eps) else Eps(x)


EVec = tuple  # (Eps|Fraction, Eps|Fraction)


def ewedge(a, b):
    """Wedge for vectors whose entries may be Eps jets (at most one factor)."""
    return a[0] * b[1] - a[1] * b[0]


def esub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def eadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def escale(c, a):
    return (a[0] * c, a[1] * c)


def sign_of(x) -> int:
    if isinstance(x, Eps):
        return x.sign()
    return 0 if x == 0 else (1 if x > 0 else -1)
