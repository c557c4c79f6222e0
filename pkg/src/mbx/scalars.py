"""Precision context and the special-function layer.

Arbitrary-precision arithmetic is delegated to mpmath. Every operation
takes a PrecisionCtx and evaluates under ``ctx.digits + GUARD`` decimal
digits, so results are faithfully rounded at the requested precision.
Functions are pure; the only process-global state is mpmath's working
precision, which each call sets and restores locally.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath import mp

from .errors import DomainError, PoleError

GUARD = 10


def _pow10(e: int):
    with mp.workdps(25):
        return mp.mpf(10) ** e


@dataclass(frozen=True)
class PrecisionCtx:
    """Working precision plus derived tolerances.

    digits: decimal working precision (>= 15).
    quad_tol: relative tolerance for quadratures, default 10^-(digits-12).
    series_tol: relative tail tolerance for convergent series,
        default 10^-(digits-10).
    """

    digits: int = 60
    quad_tol: object = None
    series_tol: object = None

    def __post_init__(self):
        if self.digits < 15:
            raise ValueError(f"digits must be >= 15, got {self.digits}")
        if self.quad_tol is None:
            object.__setattr__(self, "quad_tol", _pow10(-(self.digits - 12)))
        if self.series_tol is None:
            object.__setattr__(self, "series_tol", _pow10(-(self.digits - 10)))
        one = _pow10(0)
        for name in ("quad_tol", "series_tol"):
            tol = getattr(self, name)
            if not (0 < tol < one):
                raise ValueError(f"{name} must lie in (0, 1), got {tol}")

    @property
    def dps(self) -> int:
        return self.digits

    def work(self, extra: int = GUARD):
        """Context manager setting mpmath precision to digits + extra."""
        return mp.workdps(self.digits + extra)

    def eps(self, lost_digits: int = 10):
        """10^-(digits - lost_digits), a convenient comparison tolerance."""
        return _pow10(-(self.digits - lost_digits))


DEFAULT_CTX = PrecisionCtx()


def to_mp(x, ctx: PrecisionCtx):
    """Convert int/Fraction/str/float/mpf/mpc to an mp number at ctx precision."""
    with ctx.work():
        if isinstance(x, Fraction):
            return mp.mpf(x.numerator) / x.denominator
        return mp.mpmathify(x)


@dataclass(frozen=True)
class Constants:
    """Fundamental constants at a given precision."""

    euler_gamma: object
    stieltjes1: object
    pi: object


def constants(ctx: PrecisionCtx) -> Constants:
    """Euler-Mascheroni gamma0, first Stieltjes constant gamma1, and pi."""
    with ctx.work():
        g0 = +mp.euler
        g1 = mp.stieltjes(1)
        pi = +mp.pi
    # Guard against a misconfigured backend: check the leading digits.
    with mp.workdps(15):
        if mp.nstr(mp.mpf(g0), 7) != "0.5772157":
            raise ArithmeticError("euler_gamma failed its digit check")
        if mp.nstr(mp.mpf(g1), 6) != "-0.0728158":
            raise ArithmeticError("stieltjes1 failed its digit check")
    return Constants(euler_gamma=g0, stieltjes1=g1, pi=pi)


def _is_nonpositive_integer(x) -> bool:
    if isinstance(x, int):
        return x <= 0
    if isinstance(x, Fraction):
        return x.denominator == 1 and x <= 0
    try:
        xm = mp.mpmathify(x)
    except TypeError:
        return False
    if mp.im(xm) != 0:
        return False
    xr = mp.re(xm)
    return xr <= 0 and xr == mp.floor(xr)


def gamma_fn(x, ctx: PrecisionCtx = DEFAULT_CTX):
    """Gamma function; PoleError at non-positive integers."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma pole at x={x}")
    with ctx.work():
        return mp.gamma(to_mp(x, ctx))


def digamma(x, ctx: PrecisionCtx = DEFAULT_CTX):
    """psi(x), logarithmic derivative of gamma."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma pole at x={x}")
    with ctx.work():
        return mp.digamma(to_mp(x, ctx))


def trigamma(x, ctx: PrecisionCtx = DEFAULT_CTX):
    """psi'(x)."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"trigamma pole at x={x}")
    with ctx.work():
        return mp.psi(1, to_mp(x, ctx))


def pochhammer(alpha, r: int, ctx: PrecisionCtx = DEFAULT_CTX):
    """Rising factorial (alpha)_r as a finite product, r >= 0."""
    if r < 0:
        raise DomainError(f"pochhammer needs r >= 0, got {r}")
    if isinstance(alpha, (int, Fraction)):
        acc = Fraction(1)
        for j in range(r):
            acc *= Fraction(alpha) + j
        return to_mp(acc, ctx)
    with ctx.work():
        a = to_mp(alpha, ctx)
        acc = mp.mpf(1)
        for j in range(r):
            acc = acc * (a + j)
        return acc


@lru_cache(maxsize=4096)
def _zeta_cached(num: int, den: int, dps: int, derivative: int):
    with mp.workdps(dps):
        s = mp.mpf(num) / den
        if derivative:
            return mp.zeta(s, 1, derivative)
        return mp.zeta(s)


def zeta(s, ctx: PrecisionCtx = DEFAULT_CTX):
    """Riemann zeta at real s; PoleError at s=1."""
    if isinstance(s, (int, Fraction)):
        q = Fraction(s)
        if q == 1:
            raise PoleError("zeta pole at s=1")
        return _zeta_cached(q.numerator, q.denominator, ctx.digits + GUARD, 0)
    with ctx.work():
        sm = to_mp(s, ctx)
        if sm == 1:
            raise PoleError("zeta pole at s=1")
        return mp.zeta(sm)


def zeta_deriv(s, ctx: PrecisionCtx = DEFAULT_CTX):
    """zeta'(s) at real s; PoleError at s=1."""
    if isinstance(s, (int, Fraction)):
        q = Fraction(s)
        if q == 1:
            raise PoleError("zeta pole at s=1")
        return _zeta_cached(q.numerator, q.denominator, ctx.digits + GUARD, 1)
    with ctx.work():
        sm = to_mp(s, ctx)
        if sm == 1:
            raise PoleError("zeta pole at s=1")
        return mp.zeta(sm, 1, 1)


def bessel_j(nu, x, ctx: PrecisionCtx = DEFAULT_CTX):
    """Bessel J_nu(x) for x > 0."""
    with ctx.work():
        xm = to_mp(x, ctx)
        if xm <= 0:
            raise DomainError(f"bessel_j needs x > 0, got {x}")
        return mp.besselj(to_mp(nu, ctx), xm)


def bessel_y0(x, ctx: PrecisionCtx = DEFAULT_CTX):
    """Bessel Y_0(x) for x > 0."""
    with ctx.work():
        xm = to_mp(x, ctx)
        if xm <= 0:
            raise DomainError(f"bessel_y0 needs x > 0, got {x}")
        return mp.bessely(0, xm)


def bessel_k(nu, z, ctx: PrecisionCtx = DEFAULT_CTX):
    """Modified Bessel K_nu(z) for Re z > 0 (real or complex z)."""
    with ctx.work():
        zm = to_mp(z, ctx)
        if mp.re(zm) <= 0:
            raise DomainError(f"bessel_k needs Re z > 0, got {z}")
        return mp.besselk(to_mp(nu, ctx), zm)
