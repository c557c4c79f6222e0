"""Series parameters and evaluation points.

Parameters are exact rationals so that regime boundaries (for example
gamma+nu equal to a negative odd integer) are decided exactly, never by
floating comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from .errors import DomainError
from .scalars import PrecisionCtx, DEFAULT_CTX

Q = Fraction


def _to_fraction(x, name: str) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Q(x)
    if isinstance(x, str):
        try:
            return Q(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"{name}: cannot parse {x!r} as a rational") from exc
    raise DomainError(
        f"{name} must be an exact rational (int, Fraction, or string like '2/3'); "
        f"got {type(x).__name__}"
    )


@dataclass(frozen=True)
class SeriesParams:
    """Defining parameters of the series sum_n n^gamma K_nu(n b/a) / (n^2+a^2)^mu.

    mu > 0, nu >= 0, b > 0, all exact rationals; chi = b^2/4.
    """

    mu: Fraction
    nu: Fraction
    gamma_exp: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "mu", _to_fraction(self.mu, "mu"))
        object.__setattr__(self, "nu", _to_fraction(self.nu, "nu"))
        object.__setattr__(self, "gamma_exp", _to_fraction(self.gamma_exp, "gamma"))
        object.__setattr__(self, "b", _to_fraction(self.b, "b"))
        if self.mu <= 0:
            raise DomainError(f"mu must be positive, got {self.mu}")
        if self.nu < 0:
            raise DomainError(f"nu must be nonnegative, got {self.nu}")
        if self.b <= 0:
            raise DomainError(f"b must be positive, got {self.b}")

    @property
    def chi(self) -> Fraction:
        return self.b * self.b / 4

    def chi_mp(self, ctx: PrecisionCtx = DEFAULT_CTX):
        with ctx.work():
            c = self.chi
            return mp.mpf(c.numerator) / c.denominator

    def b_mp(self, ctx: PrecisionCtx = DEFAULT_CTX):
        with ctx.work():
            return mp.mpf(self.b.numerator) / self.b.denominator

    def with_nu(self, nu) -> "SeriesParams":
        return SeriesParams(self.mu, nu, self.gamma_exp, self.b)

    def with_gamma(self, gamma_exp) -> "SeriesParams":
        return SeriesParams(self.mu, self.nu, gamma_exp, self.b)

    def with_mu(self, mu) -> "SeriesParams":
        return SeriesParams(mu, self.nu, self.gamma_exp, self.b)

    def label(self) -> str:
        return (f"mu={self.mu}, nu={self.nu}, gamma={self.gamma_exp}, b={self.b}")


@dataclass(frozen=True)
class EvalPoint:
    """A complex evaluation point a with |arg a| < pi/2 strictly."""

    a: object

    def __post_init__(self):
        a = self.a
        if mp.im(a) == 0 and mp.re(a) > 0:
            return
        if a == 0 or abs(mp.arg(mp.mpc(a))) >= mp.pi / 2:
            raise DomainError(f"a={a} violates |arg a| < pi/2")


def as_eval_point(a, ctx: PrecisionCtx = DEFAULT_CTX):
    """Validate and convert a to an mp number inside the half-plane."""
    with ctx.work():
        if isinstance(a, Fraction):
            am = mp.mpf(a.numerator) / a.denominator
        else:
            am = mp.mpmathify(a)
        if mp.im(am) == 0:
            am = mp.re(am)
            if am <= 0:
                raise DomainError(f"a={a} violates |arg a| < pi/2")
            return am
        if am == 0 or abs(mp.arg(am)) >= mp.pi / 2:
            raise DomainError(f"a={a} violates |arg a| < pi/2")
        return am
