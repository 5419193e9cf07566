"""Upper bounds on the mean of (sigma(n)/n)^r over totatives of the primorial.

For moment order r the engine needs a certified upper bound on the asymptotic
mean value of the r-th power of the abundancy along arithmetic progressions
coprime to all primes <= y. For r = 1 there is a closed form built from
zeta(2); for r >= 2 we evaluate a finite Euler-type product over the primes
strictly between y and 65536, times a fixed exponential correction covering
the discarded tail. Both the 65536 ceiling and the correction constant
1.6623114e-6 are inputs of the method and are not re-derived here, which is
why y must stay below the ceiling.

Every evaluation is UP-directed so the tabulated numbers are certificates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import PrimeTable, sieve_primes
from .dirround import (
    UP,
    DirScalar,
    dir_exp_upper,
    dn_mul,
    exp_up_wide,
    flt_dn,
    log_up,
    next_up,
    pow_dn,
    pow_up,
    ratio_dn,
    ratio_up,
    up_add,
    up_div,
    up_mul,
    up_sub,
    zeta2_bounds,
)
from .errors import InvalidParameterError, UnsupportedParameterError

PRIME_CEILING = 65536

# Tail correction per unit moment order, exp(_TAIL_RATE * r).
_TAIL_RATE = Fraction(16623114, 10**13)  # 1.6623114e-6


@dataclass(frozen=True)
class MomentTable:
    """Per-r certified upper bounds, indexed 1..r_max (index 0 unused).

    values[r] bounds the moment-mean constant itself, roots[r] bounds its
    r-th root; a non-finite value marks an order whose bound overflowed and
    must not be used (the engine then falls back to trivial cell bounds).
    """

    y: int
    r_max: int
    values: tuple  # DirScalar, UP
    roots: tuple  # DirScalar, UP

    def value_floats(self) -> list[float]:
        return [math.nan] + [v.value for v in self.values[1:]]

    def root_floats(self) -> list[float]:
        return [math.nan] + [v.value for v in self.roots[1:]]

    def usable(self, r: int) -> bool:
        return 1 <= r <= self.r_max and math.isfinite(self.values[r].value)


def _check_y(y: int) -> None:
    if y < 2:
        raise InvalidParameterError(f"smoothness bound must be >= 2, got {y}")
    if y >= PRIME_CEILING:
        raise UnsupportedParameterError(
            f"smoothness bound must stay below {PRIME_CEILING}, got {y}"
        )


def _mid_primes(y: int) -> tuple[int, ...]:
    """Primes strictly between y and the ceiling."""
    return tuple(p for p in sieve_primes(PRIME_CEILING - 1).primes if p > y)


def moment_r1_exact(primes: PrimeTable) -> DirScalar:
    """Upper bound for order 1: zeta(2) times prod_{p <= y} (1 - 1/p^2).

    Each factor is below 1, so the factor itself is rounded UP to keep the
    running product an upper bound.
    """
    acc = zeta2_bounds().zeta2_hi.value
    for p in primes.primes:
        acc = up_mul(acc, ratio_up(p * p - 1, p * p))
    return DirScalar(acc, UP)


def moment_upper(y: int, r: int, mids: tuple[int, ...] | None = None) -> DirScalar:
    """Upper bound for order r via the finite product over y < p < 65536.

    Factor at p: 1 + ((1+1/p)^r - 1)/p + r / ((p^4 - p^2) (1 - 1/p)^(r-1)),
    everything UP-directed (the denominator pieces DOWN-directed). Valid for
    r >= 1; note the table builder routes r = 1 to the tighter closed form.
    """
    _check_y(y)
    if r < 1:
        raise InvalidParameterError(f"moment order must be >= 1, got {r}")
    if mids is None:
        mids = _mid_primes(y)
    acc = 1.0
    for p in mids:
        u = pow_up(ratio_up(p + 1, p), r)
        t1 = up_div(up_sub(u, 1.0), float(p))
        w = pow_dn(ratio_dn(p - 1, p), r - 1)
        den = dn_mul(flt_dn(p**4 - p**2), w)
        if den <= 0.0:
            acc = math.inf
            break
        t2 = up_div(float(r), den)
        acc = up_mul(acc, up_add(1.0, up_add(t1, t2)))
    return DirScalar(up_mul(acc, _tail_factor(r)), UP)


def _tail_factor(r: int) -> float:
    arg = up_mul(ratio_up(_TAIL_RATE.numerator, _TAIL_RATE.denominator), float(r))
    if arg <= 1.0:
        return dir_exp_upper(arg).value
    return exp_up_wide(arg)


def _bulk_values(y: int, r_max: int, mids: tuple[int, ...]) -> list[float]:
    """Vectorized product over the mid primes for every r in 2..r_max.

    The per-element factor construction nudges after each operation exactly
    like the scalar path. The reduction across primes uses round-to-nearest
    multiplies, so the result is inflated by (1+u)^(m-1) <= 1 + 2(m-1)u
    (u = 2^-53, m*u << 1), with a doubled margin for safety.
    """
    out = [math.nan] * (r_max + 1)
    if not mids:
        for r in range(2, r_max + 1):
            out[r] = _tail_factor(r)
        return out
    inf = np.inf
    p = np.array(mids, dtype=np.float64)  # mid primes are exact in a double
    inv_up = np.nextafter(1.0 / p, inf)
    base_up = np.nextafter(1.0 + inv_up, inf)  # >= 1 + 1/p
    base_dn = np.nextafter(1.0 - inv_up, -inf)  # <= 1 - 1/p
    p2 = p * p  # exact, p < 2^16
    p4_dn = np.nextafter(p2 * p2, -inf)
    pden_dn = np.nextafter(p4_dn - p2, -inf)  # <= p^4 - p^2
    slack = 1.0 + 4.0 * len(mids) * 2.0**-53
    u = base_up.copy()  # (1+1/p)^r, UP, currently r = 1
    w = np.ones_like(p)  # (1-1/p)^(r-1), DOWN, currently r = 1
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for r in range(2, r_max + 1):
            u = np.nextafter(u * base_up, inf)
            w = np.nextafter(w * base_dn, -inf)
            t1 = np.nextafter(np.nextafter(u - 1.0, inf) / p, inf)
            den = np.nextafter(pden_dn * w, -inf)
            t2 = np.where(den > 0.0, np.nextafter(float(r) / den, inf), inf)
            f = np.nextafter(1.0 + np.nextafter(t1 + t2, inf), inf)
            prod = float(np.multiply.reduce(f))
            if math.isfinite(prod):
                out[r] = up_mul(up_mul(prod, slack), _tail_factor(r))
            else:
                out[r] = math.inf
    return out


def build_moment_table(y: int, r_max: int) -> MomentTable:
    """Tabulate orders 1..r_max once; the table is immutable afterwards."""
    _check_y(y)
    if r_max < 1:
        raise InvalidParameterError(f"r_max must be >= 1, got {r_max}")
    mids = _mid_primes(y)
    values: list = [None] * (r_max + 1)
    values[1] = moment_r1_exact(sieve_primes(y))
    if r_max >= 2:
        bulk = _bulk_values(y, r_max, mids)
        for r in range(2, r_max + 1):
            values[r] = DirScalar(bulk[r], UP)

    roots: list = [None] * (r_max + 1)
    roots[1] = values[1]
    for r in range(2, r_max + 1):
        v = values[r].value
        if not math.isfinite(v):
            roots[r] = DirScalar(math.inf, UP)
            continue
        v = max(v, 1.0)
        root = exp_up_wide(up_div(log_up(v), float(r)))
        # certify root^r >= value by DOWN-powering; bump if rounding fell short
        while pow_dn(root, r) < v:
            root = next_up(root)
        roots[r] = DirScalar(root, UP)

    return MomentTable(y=y, r_max=r_max, values=tuple(values), roots=tuple(roots))
