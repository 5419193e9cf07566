"""Directed-rounding scalar arithmetic.

The contract: a DOWN-directed value is <= the exact real it stands for, an
UP-directed value is >= it, and every operation preserves that side. The
mechanism is ULP nudging: IEEE double arithmetic rounds to nearest, so the
rounded result differs from the exact one by less than one ULP, and a single
nextafter step in the target direction lands provably on the safe side.

Two layers live here. The `up_*` / `dn_*` float kernels nudge unconditionally
(one ULP of slack even when the operation happened to be exact) and are what
the hot loops use. The public DirScalar operations additionally detect exact
results and skip the nudge, so identities like x*1 stay bit-identical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from .errors import DirectionError, InvalidParameterError, SignUncertainError

_INF = math.inf
_nextafter = math.nextafter

# Smallest certified upper bound on e that a double can carry: math.e is the
# nearest double to e, so one step up is provably above.
_E_UP = _nextafter(math.e, _INF)

_FACT9 = 362880.0  # 9!


# ---------------------------------------------------------------------------
# raw float kernels (always nudge)
# ---------------------------------------------------------------------------

def next_up(x: float) -> float:
    return _nextafter(x, _INF)


def next_down(x: float) -> float:
    return _nextafter(x, -_INF)


def up_add(x: float, y: float) -> float:
    return _nextafter(x + y, _INF)


def dn_add(x: float, y: float) -> float:
    return _nextafter(x + y, -_INF)


def up_sub(x: float, y: float) -> float:
    return _nextafter(x - y, _INF)


def dn_sub(x: float, y: float) -> float:
    return _nextafter(x - y, -_INF)


def up_mul(x: float, y: float) -> float:
    return _nextafter(x * y, _INF)


def dn_mul(x: float, y: float) -> float:
    return _nextafter(x * y, -_INF)


def up_div(x: float, y: float) -> float:
    return _nextafter(x / y, _INF)


def dn_div(x: float, y: float) -> float:
    return _nextafter(x / y, -_INF)


def pow_up(x: float, r: int) -> float:
    """x**r for x >= 0, r >= 0, every multiply nudged UP."""
    result = 1.0
    base = x
    e = r
    while e:
        if e & 1:
            result = _nextafter(result * base, _INF)
        e >>= 1
        if e:
            base = _nextafter(base * base, _INF)
    return result


def pow_dn(x: float, r: int) -> float:
    result = 1.0
    base = x
    e = r
    while e:
        if e & 1:
            result = _nextafter(result * base, -_INF)
        e >>= 1
        if e:
            base = _nextafter(base * base, -_INF)
    return result


def flt_up(n: int) -> float:
    """Smallest double >= n (int-to-float conversions round to nearest)."""
    f = float(n)
    return f if f >= n else _nextafter(f, _INF)


def flt_dn(n: int) -> float:
    f = float(n)
    return f if f <= n else _nextafter(f, -_INF)


def ratio_up(num: int, den: int) -> float:
    """Double >= num/den for nonnegative num, positive den."""
    try:
        f = num / den
    except OverflowError:
        return _INF
    if math.isinf(f):
        return f
    nf, df = f.as_integer_ratio()
    return f if nf * den == num * df else _nextafter(f, _INF)


def ratio_dn(num: int, den: int) -> float:
    try:
        f = num / den
    except OverflowError:
        return _nextafter(_INF, 0.0)
    if math.isinf(f):
        return _nextafter(f, 0.0)
    nf, df = f.as_integer_ratio()
    return f if nf * den == num * df else _nextafter(f, -_INF)


# ---------------------------------------------------------------------------
# exactness detection for the public operations
# ---------------------------------------------------------------------------

def _sum_exact(a: float, b: float, s: float) -> bool:
    # TwoSum error term; exact in IEEE double absent overflow.
    if math.isinf(s):
        return False
    bb = s - a
    return (a - (s - bb)) + (b - bb) == 0.0


def _mul_exact(a: float, b: float, z: float) -> bool:
    if math.isinf(z) or math.isinf(a) or math.isinf(b):
        return False
    na, da = a.as_integer_ratio()
    nb, db = b.as_integer_ratio()
    nz, dz = z.as_integer_ratio()
    return na * nb * dz == nz * da * db


def _div_exact(a: float, b: float, z: float) -> bool:
    if math.isinf(z) or math.isinf(a) or math.isinf(b):
        return False
    na, da = a.as_integer_ratio()
    nb, db = b.as_integer_ratio()
    nz, dz = z.as_integer_ratio()
    return na * db * dz == nz * da * nb


# ---------------------------------------------------------------------------
# DirScalar and its operations
# ---------------------------------------------------------------------------

class Direction(Enum):
    DOWN = -1
    UP = 1

    def flip(self) -> "Direction":
        return Direction.UP if self is Direction.DOWN else Direction.DOWN


DOWN = Direction.DOWN
UP = Direction.UP


@dataclass(frozen=True)
class DirScalar:
    """A double paired with the side of the exact value it is certified on."""

    value: float
    direction: Direction

    @property
    def saturated(self) -> bool:
        """True when the value overflowed; a saturated UP bound is unusable."""
        return math.isinf(self.value)

    def __repr__(self) -> str:
        arrow = "<=" if self.direction is DOWN else ">="
        return f"DirScalar({self.value!r} {arrow} exact)"


Operand = Union[DirScalar, int, float, Fraction]


def _operand_value(x: Operand, required: Direction) -> float:
    """Extract the float for an operand slot that must be `required`-directed."""
    if isinstance(x, DirScalar):
        if x.direction is not required:
            raise DirectionError(
                f"operand is {x.direction.name}-directed but this slot needs "
                f"{required.name}"
            )
        return x.value
    if isinstance(x, bool):
        raise InvalidParameterError("bool is not a numeric operand")
    if isinstance(x, int):
        return flt_up(x) if required is UP else flt_dn(x)
    if isinstance(x, float):
        return x  # a bare float is taken as exact
    if isinstance(x, Fraction):
        return rational_to_dir(x, required).value
    raise InvalidParameterError(f"unsupported operand type {type(x)!r}")


def _nudge(z: float, direction: Direction) -> float:
    return _nextafter(z, _INF if direction is UP else -_INF)


def dir_add(x: Operand, y: Operand, direction: Direction) -> DirScalar:
    a = _operand_value(x, direction)
    b = _operand_value(y, direction)
    z = a + b
    if not _sum_exact(a, b, z):
        z = _nudge(z, direction)
    return DirScalar(z, direction)


def dir_sub(x: Operand, y: Operand, direction: Direction) -> DirScalar:
    """x - y; the subtrahend must carry the opposite direction."""
    a = _operand_value(x, direction)
    b = _operand_value(y, direction.flip())
    z = a - b
    if not _sum_exact(a, -b, z):
        z = _nudge(z, direction)
    return DirScalar(z, direction)


def dir_mul(x: Operand, y: Operand, direction: Direction) -> DirScalar:
    a = _operand_value(x, direction)
    b = _operand_value(y, direction)
    if a < 0.0 or b < 0.0:
        raise SignUncertainError("directed multiply requires nonnegative operands")
    z = a * b
    if not _mul_exact(a, b, z):
        z = _nudge(z, direction)
    return DirScalar(z, direction)


def dir_div(x: Operand, y: Operand, direction: Direction) -> DirScalar:
    """x / y for a denominator the caller knows to be positive.

    The denominator slot carries the flipped direction. For an UP quotient the
    denominator is DOWN-directed; if that bound has decayed to <= 0 the true
    quotient cannot be bounded above and the result saturates to +inf. For a
    DOWN quotient a nonpositive UP-directed denominator certifies the
    denominator itself is <= 0, which this layer refuses to divide by.
    """
    a = _operand_value(x, direction)
    b = _operand_value(y, direction.flip())
    if a < 0.0:
        raise SignUncertainError("directed divide requires a nonnegative numerator")
    if b <= 0.0:
        if direction is UP:
            return DirScalar(_INF, UP)
        raise SignUncertainError("denominator is not certifiably positive")
    z = a / b
    if not _div_exact(a, b, z):
        z = _nudge(z, direction)
    return DirScalar(z, direction)


def dir_pow(x: DirScalar, r: int) -> DirScalar:
    """x**r by repeated squaring, each step directed like x.

    Overflow saturates on the safe side: +inf for UP (an unusable sentinel),
    the largest finite double for DOWN.
    """
    if not isinstance(r, int) or r < 1:
        raise InvalidParameterError(f"exponent must be a positive integer, got {r}")
    if x.value < 0.0:
        raise SignUncertainError("directed power requires a nonnegative base")
    d = x.direction
    result = DirScalar(1.0, d)
    base = x
    e = r
    while True:
        if e & 1:
            result = dir_mul(result, base, d)
        e >>= 1
        if not e:
            return result
        base = dir_mul(base, base, d)


def rational_to_dir(q: Union[Fraction, int], direction: Direction) -> DirScalar:
    """Nearest double on the `direction` side of an exact nonnegative rational."""
    q = Fraction(q)
    if q < 0:
        raise InvalidParameterError(f"expected a nonnegative rational, got {q}")
    f = ratio_up(q.numerator, q.denominator) if direction is UP else ratio_dn(
        q.numerator, q.denominator
    )
    return DirScalar(f, direction)


# ---------------------------------------------------------------------------
# certified exp and log
# ---------------------------------------------------------------------------

def _exp_up_core(v: float) -> float:
    """Upper bound on e^v for 0 <= v <= 1: degree-8 Taylor sum plus the
    remainder bound e*v^9/9! (valid since the tail is <= v^9/9! * e^v)."""
    s = up_div(v, 8.0)
    for k in (7.0, 6.0, 5.0, 4.0, 3.0, 2.0):
        s = up_mul(up_add(s, 1.0), up_div(v, k))
    s = up_add(up_mul(up_add(s, 1.0), v), 1.0)
    v3 = up_mul(up_mul(v, v), v)
    v9 = up_mul(up_mul(v3, v3), v3)
    return up_add(s, up_div(up_mul(_E_UP, v9), _FACT9))


def dir_exp_upper(x: Union[float, DirScalar]) -> DirScalar:
    """Certified upper bound on e^x for x in [0, 1]."""
    v = x.value if isinstance(x, DirScalar) else float(x)
    if isinstance(x, DirScalar) and x.direction is not UP:
        raise DirectionError("exp is increasing; its argument must be UP-directed")
    if not 0.0 <= v <= 1.0:
        raise InvalidParameterError(f"dir_exp_upper domain is [0, 1], got {v}")
    if v == 0.0:
        return DirScalar(1.0, UP)
    return DirScalar(_exp_up_core(v), UP)


def exp_up_wide(v: float) -> float:
    """Upper bound on e^v for any v >= 0; halve into [0, 1/16], then square."""
    if v < 0.0:
        raise InvalidParameterError(f"exp_up_wide needs v >= 0, got {v}")
    if math.isinf(v):
        return _INF
    k = 0
    while v > 0.0625:
        v *= 0.5  # exact: halving a normal double
        k += 1
    s = _exp_up_core(v)
    for _ in range(k):
        s = up_mul(s, s)
    return s


# ln 2 to 30 decimal places, truncated and bumped.
_LN2_LO = Fraction("0.693147180559945309417232121458")
_LN2_HI = Fraction("0.693147180559945309417232121459")
_LN2_UP = None  # filled below


def log_up(v: float) -> float:
    """Upper bound on ln v for finite v >= 1.

    Range-reduce with frexp to m in [1, 2), then the atanh series
    ln m = 2 * sum t^(2k+1)/(2k+1) with t = (m-1)/(m+1) <= 1/3, summed UP
    with an explicit geometric tail bound.
    """
    if v < 1.0 or math.isinf(v):
        raise InvalidParameterError(f"log_up domain is finite v >= 1, got {v}")
    if v == 1.0:
        return 0.0
    m, e = math.frexp(v)  # v = m * 2^e with m in [0.5, 1)
    m *= 2.0  # exact
    e -= 1
    num = m - 1.0  # exact by Sterbenz (m in [1, 2))
    t = up_div(num, dn_add(m, 1.0))
    t2 = up_mul(t, t)
    s = t
    tp = t
    for k in range(1, 19):
        tp = up_mul(tp, t2)
        s = up_add(s, up_div(tp, float(2 * k + 1)))
    # tail: sum_{j>=K} t^(2j+1)/(2j+1) <= t^39 / (39 * (1 - t^2))
    tail = up_div(up_mul(tp, t2), dn_mul(39.0, dn_sub(1.0, t2)))
    s = up_add(s, tail)
    total = up_mul(2.0, s)
    if e:
        total = up_add(total, up_mul(float(e), _LN2_UP))
    return total


# ---------------------------------------------------------------------------
# bracketed constants
# ---------------------------------------------------------------------------

# zeta(2) = pi^2/6 to 30 decimal places, truncated and bumped.
_ZETA2_LO = Fraction("1.644934066848226436472415166646")
_ZETA2_HI = Fraction("1.644934066848226436472415166647")


@dataclass(frozen=True)
class ConstantBounds:
    """Certified bracket for zeta(2), the only transcendental constant used."""

    zeta2_lo: DirScalar
    zeta2_hi: DirScalar


def zeta2_bounds() -> ConstantBounds:
    return ConstantBounds(
        zeta2_lo=rational_to_dir(_ZETA2_LO, DOWN),
        zeta2_hi=rational_to_dir(_ZETA2_HI, UP),
    )


_LN2_UP = rational_to_dir(_LN2_HI, UP).value
