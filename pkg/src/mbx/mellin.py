"""The Mellin kernel H(s) of x^gamma K_nu(b x) / (1+x^2)^mu.

Closed forms::

    H(s)  = H1(s, nu) + H2(s, nu) + H2(s, -nu)
    H1    = pi^2 chi^(mu - gamma/2 - s/2)
            / (4 sin pi(l(nu)-mu) sin pi(l(-nu)-mu))
            * reg1F2(mu; 1+mu-l(nu), 1+mu-l(-nu); -chi)
    H2(s, nu) = pi^2 chi^(nu/2) Gamma(l(nu))
            / (4 Gamma(mu) sin pi*nu sin pi(l(nu)-mu))
            * reg1F2(l(nu); 1-mu+l(nu), 1+nu; -chi)

with l(nu) = (gamma + s + nu)/2 and chi = b^2/4, valid for non-integer
nu. The hypergeometrics are regularized (each term divided by the gamma
of its lower parameters), so they are entire in s.

H1 and H2 individually have poles where a sin factor vanishes, but the
sum is regular there (the residues cancel); ``q_check`` verifies that
cancellation numerically. An adaptive quadrature of the defining
integral provides the independent cross-check for the closed forms.
"""

from __future__ import annotations

from fractions import Fraction

from mpmath import mp

from .errors import NearPole, StripViolation, UnsupportedRegime
from .hyp import reg_hyp1f2, hyp1f2
from .params import SeriesParams
from .scalars import GUARD, PrecisionCtx, DEFAULT_CTX, to_mp

Q = Fraction


def _dist_to_int(z) -> float:
    zr = mp.re(z)
    return float(abs(z - mp.nint(zr)))


class MellinKernel:
    """Evaluator for H1, H2, H, and Q at fixed series parameters."""

    def __init__(self, params: SeriesParams, ctx: PrecisionCtx = DEFAULT_CTX):
        self.params = params
        self.ctx = ctx
        with ctx.work():
            self._chi = params.chi_mp(ctx)
            self._near = mp.mpf(10) ** (-(ctx.digits // 4))

    def lam(self, s, nu_signed: Fraction):
        """l(nu) = (gamma + s + nu)/2."""
        g = self.params.gamma_exp
        with self.ctx.work():
            return (to_mp(g, self.ctx) + s + to_mp(nu_signed, self.ctx)) / 2

    # raw evaluators, no pole guards (q_check needs points near the poles)

    def _h1_raw(self, s):
        p = self.params
        ctx = self.ctx
        with ctx.work():
            lp = self.lam(s, p.nu)
            lm = self.lam(s, -p.nu)
            mu = to_mp(p.mu, ctx)
            pref = mp.pi ** 2 * mp.power(self._chi, mu - to_mp(p.gamma_exp, ctx) / 2 - s / 2)
            pref /= 4 * mp.sinpi(lp - mu) * mp.sinpi(lm - mu)
            return pref * reg_hyp1f2(mu, 1 + mu - lp, 1 + mu - lm, -self._chi, ctx)

    def _h2_raw(self, s, nu_signed: Fraction):
        p = self.params
        ctx = self.ctx
        with ctx.work():
            lam = self.lam(s, nu_signed)
            mu = to_mp(p.mu, ctx)
            nus = to_mp(nu_signed, ctx)
            pref = mp.pi ** 2 * mp.power(self._chi, nus / 2) * mp.gamma(lam)
            pref /= 4 * mp.gamma(mu) * mp.sinpi(nus) * mp.sinpi(lam - mu)
            return pref * reg_hyp1f2(lam, 1 - mu + lam, 1 + nus, -self._chi, ctx)

    def _guard(self, s, need_h2: Fraction | None = None):
        p = self.params
        if p.nu.denominator == 1:
            raise NearPole(f"closed forms need non-integer nu, got nu={p.nu}")
        for nus in (p.nu, -p.nu):
            d = _dist_to_int(self.lam(s, nus) - to_mp(p.mu, self.ctx))
            if d < self._near:
                raise NearPole(
                    f"s={s} is within {mp.nstr(self._near, 3)} of an apparent "
                    f"singularity (lambda({nus}) - mu near an integer)"
                )
        if need_h2 is not None:
            lam = self.lam(s, need_h2)
            if mp.re(lam) < 0.5 and _dist_to_int(lam) < self._near:
                raise NearPole(f"Gamma(lambda) pole near s={s} on branch nu={need_h2}")

    def h1(self, s):
        self._guard(s)
        return self._h1_raw(s)

    def h2(self, s, nu_signed):
        nu_signed = Q(nu_signed)
        self._guard(s, need_h2=nu_signed)
        return self._h2_raw(s, nu_signed)

    def h(self, s):
        """H(s) = H1 + H2(nu) + H2(-nu)."""
        p = self.params
        self._guard(s, need_h2=p.nu)
        self._guard(s, need_h2=-p.nu)
        return self._h1_raw(s) + self._h2_raw(s, p.nu) + self._h2_raw(s, -p.nu)

    def hhat_double_pole(self, s, sign: int):
        """H1 + H2 on the branch regular at s=1 when gamma + sign*nu is odd negative."""
        p = self.params
        return self._h1_raw(s) + self._h2_raw(s, -sign * p.nu)

    def q(self, s, sign: int):
        """Q(s) = (4/pi^2) sin pi(l(sign*nu) - mu) (H1 + H2(sign*nu))."""
        p = self.params
        ctx = self.ctx
        with ctx.work():
            nus = sign * p.nu
            mu = to_mp(p.mu, ctx)
            factor = 4 / mp.pi ** 2 * mp.sinpi(self.lam(s, nus) - mu)
            return factor * (self._h1_raw(s) + self._h2_raw(s, nus))

    def apparent_point(self, k: int, sign: int) -> Fraction:
        """s_k = 2 mu - gamma - sign*nu + 2k, an apparent singularity."""
        p = self.params
        return 2 * p.mu - p.gamma_exp - sign * p.nu + 2 * k


def q_check(params: SeriesParams, k: int, sign: int,
            ctx: PrecisionCtx = DEFAULT_CTX):
    """|Q(s_k)| by two-sided evaluation and Richardson extrapolation.

    Q is analytic at s_k with Q(s_k) = 0 when the kernel is regular
    there. Averaging Q(s_k + e) and Q(s_k - e) cancels the odd orders;
    combining step sizes e and e/2 removes the e^2 term as well, so the
    returned magnitude reflects the true value down to O(e^4).
    """
    boosted = PrecisionCtx(digits=2 * ctx.digits + 20,
                           quad_tol=ctx.quad_tol, series_tol=None)
    kern = MellinKernel(params, boosted)
    sk = kern.apparent_point(k, sign)
    with boosted.work():
        s0 = to_mp(sk, boosted)
        e0 = mp.mpf(10) ** (-(ctx.digits // 3))
        means = []
        for e in (e0, e0 / 2):
            means.append((kern.q(s0 + e, sign) + kern.q(s0 - e, sign)) / 2)
        extrap = (4 * means[1] - means[0]) / 3
        return abs(extrap)


def _mellin_integrand(mu, nu, gamma_exp, b, s, ctx):
    with ctx.work():
        mum = to_mp(mu, ctx)
        num = to_mp(nu, ctx)
        gm = to_mp(gamma_exp, ctx)
        bm = to_mp(b, ctx)
        expo = gm + s - 1

        def f(x):
            return mp.power(x, expo) * mp.besselk(num, bm * x) / (1 + x * x) ** mum

        return f


def mellin_integral(s, mu, nu, gamma_exp, b, ctx: PrecisionCtx = DEFAULT_CTX):
    """Adaptive quadrature of int_0^inf x^(gamma+s-1) K_nu(bx) (1+x^2)^(-mu) dx.

    Valid for Re(gamma + s) > nu; tanh-sinh on (0, 1] handles the
    algebraic endpoint, the exponential decay of K_nu handles infinity.
    """
    with ctx.work():
        sm = mp.mpmathify(s)
        if mp.re(to_mp(gamma_exp, ctx) + sm) <= to_mp(nu, ctx):
            raise StripViolation(
                f"Re(gamma + s) = {mp.nstr(mp.re(to_mp(gamma_exp, ctx) + sm), 8)} "
                f"is not > nu = {nu}"
            )
    quad_ctx = PrecisionCtx(digits=ctx.digits + 15)
    with quad_ctx.work():
        f = _mellin_integrand(mu, nu, gamma_exp, b, mp.mpmathify(s), quad_ctx)
        val, err = mp.quad(f, [0, 1, mp.inf], error=True, maxdegree=10)
        if err > abs(val) * to_mp(ctx.quad_tol, ctx):
            raise ArithmeticError(
                f"quadrature error estimate {mp.nstr(err, 3)} exceeds tolerance"
            )
    with ctx.work():
        return +val


def mellin_quadrature(s, params: SeriesParams, ctx: PrecisionCtx = DEFAULT_CTX):
    """Quadrature oracle for H(s); StripViolation outside Re(gamma+s) > nu."""
    return mellin_integral(s, params.mu, params.nu, params.gamma_exp, params.b, ctx)


_H1_CACHE: dict = {}


def h_at_one(params: SeriesParams, regime, ctx: PrecisionCtx = DEFAULT_CTX):
    """The constant-term kernel value used by each expansion regime.

    thm1            H(1), closed form.
    thm2*/thm3*     H(1) by quadrature (needs gamma > nu - 1).
    thm4            the regular part H1(1) + H2(1, -sign*nu).
    thm5            H2(1, -nu) = -(pi / (2 sin pi nu))^2 J_(-nu)(b).
    thm6            raises; its residue is assembled in the engine.
    """
    key = (params, regime.kind, getattr(regime, "sign", None), ctx.digits)
    if key in _H1_CACHE:
        return _H1_CACHE[key]
    kern = MellinKernel(params, ctx)
    with ctx.work():
        one = mp.mpf(1)
        if regime.kind == "thm1":
            val = kern.h(one)
        elif regime.kind in ("thm2", "thm2_even", "thm3", "thm3_odd"):
            if not (params.gamma_exp > params.nu - 1):
                raise UnsupportedRegime(
                    f"H(1) for integer nu={params.nu} needs gamma > nu - 1 "
                    f"(gamma={params.gamma_exp}); no limit formula implemented"
                )
            val = mellin_quadrature(one, params, ctx)
        elif regime.kind == "thm4":
            val = kern.hhat_double_pole(one, regime.sign)
        elif regime.kind == "thm5":
            nu = to_mp(params.nu, ctx)
            val = -(mp.pi / (2 * mp.sinpi(nu))) ** 2 * mp.besselj(-nu, params.b_mp(ctx))
        else:
            raise UnsupportedRegime(
                f"h_at_one has no formula for regime {regime.kind}"
            )
    _H1_CACHE[key] = val
    return val


def hhat_coincident(s, params: SeriesParams, ctx: PrecisionCtx = DEFAULT_CTX):
    """H1(s,nu) + H2(s,nu) for mu=1, gamma+nu=-1 in its compact closed form.

    Equals (1/4) chi^((3-s+nu)/2) Gamma((s-3)/2) Gamma((s-3)/2 - nu)
    * 1F2(1; 5/2-s/2, 5/2-s/2+nu; -chi)
    - (pi^2 / (4 sin pi nu)) J_nu(b) / sin(pi (s-1)/2).
    """
    if params.mu != 1 or params.gamma_exp + params.nu != -1:
        raise UnsupportedRegime("compact form requires mu=1, gamma+nu=-1")
    with ctx.work():
        chi = params.chi_mp(ctx)
        nu = to_mp(params.nu, ctx)
        sm = mp.mpmathify(s)
        term1 = (mp.power(chi, (3 - sm + nu) / 2) / 4
                 * mp.gamma((sm - 3) / 2) * mp.gamma((sm - 3) / 2 - nu)
                 * hyp1f2(1, mp.mpf(5) / 2 - sm / 2, mp.mpf(5) / 2 - sm / 2 + nu,
                          -chi, ctx))
        term2 = (mp.pi ** 2 / (4 * mp.sinpi(nu))
                 * mp.besselj(nu, params.b_mp(ctx)) / mp.sinpi((sm - 1) / 2))
        return term1 - term2
