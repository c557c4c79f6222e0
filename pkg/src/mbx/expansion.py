"""Regime classification and the large-|a| expansion engines.

Writing S(a) for the series and l(nu) = (gamma + s + nu)/2, the Mellin
representation S = a^(gamma-2mu)/(2 pi i) * Int H(s) zeta(s) a^s ds is
evaluated by collecting residues left of the integration path. The pole
structure of H(s) zeta(s) at s = 1 and on the lattices
s = -gamma -+ nu - 2k decides which engine applies:

kind        hypotheses                                  pole at s=1
thm1        nu > 0 non-integer, gamma+-nu not odd<0     simple
thm2(_even) nu = 0, gamma not odd<0                     simple
thm3(_odd)  nu = 1, gamma not in {0,-2,-4,...}          simple
thm4        gamma+-nu = -(2m+1), nu non-int, mu non-int double
thm5        gamma+nu = -1, nu non-integer, mu = 1       double
thm6        nu = 0, gamma = -1, mu = 1                  treble
remark41    gamma+nu = -1, nu non-integer, mu = 2       lifted from thm5
recurrence  nu in {2, 3, ...}                           reduced termwise

Everything else is Unsupported (reported, never guessed). All engines
share the optimal-truncation rule: stop the asymptotic sum just before
its smallest combined term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp

from .errors import (DomainError, NearPole, RegimeMismatch, UnsupportedRegime,
                     ZetaPoleHit)
from . import hyp
from . import mellin
from . import scalars
from .params import SeriesParams, as_eval_point
from .scalars import PrecisionCtx, DEFAULT_CTX, to_mp

Q = Fraction

K_MAX = 120
ARG_WARN_BAND = 0.2


@dataclass(frozen=True)
class Regime:
    """Classification of (mu, nu, gamma) into an expansion engine."""

    kind: str
    m: int | None = None
    sign: int | None = None
    reason: str | None = None

    def describe(self) -> str:
        d = {
            "thm1": "simple poles only (nu non-integer, gamma+-nu not odd negative)",
            "thm2": "nu=0: double poles on the lattice, simple pole at s=1",
            "thm2_even": "nu=0, gamma=2m: trivial-zero shortcut",
            "thm3": "nu=1: double poles on the shifted lattice",
            "thm3_odd": "nu=1, gamma=2m+1: trivial-zero shortcut",
            "thm4": "double pole at s=1 (gamma{s}nu odd negative, mu non-integer)",
            "thm5": "double pole at s=1 (gamma+nu=-1, mu=1, nu non-integer)",
            "thm6": "treble pole at s=1 (nu=0, gamma=-1, mu=1)",
            "remark41": "mu=2 lift of the gamma+nu=-1, mu=1 expansion",
            "recurrence": "integer nu >= 2, reduced by the K recurrence",
            "unsupported": "unsupported",
        }[self.kind]
        if self.kind == "thm4":
            d = d.format(s="+" if self.sign > 0 else "-")
        out = f"regime {self.kind}"
        if self.m is not None:
            out += f" (m={self.m})"
        out += f": {d}"
        if self.reason:
            out += f" [{self.reason}]"
        return out


def _odd_negative(q: Fraction) -> int | None:
    """m >= 0 with q == -(2m+1), else None."""
    if q.denominator == 1 and q < 0 and int(q) % 2 != 0:
        return (-int(q) - 1) // 2
    return None


def classify(params: SeriesParams) -> Regime:
    """The unique applicable regime, decided in exact rational arithmetic."""
    mu, nu, g = params.mu, params.nu, params.gamma_exp
    if nu.denominator == 1:
        n = int(nu)
        if n == 0:
            if _odd_negative(g) is not None:
                if mu == 1 and g == -1:
                    return Regime("thm6")
                return Regime("unsupported", reason=(
                    f"nu=0 with gamma={g} odd negative needs mu=1, gamma=-1 "
                    f"(treble pole at s=1 otherwise untreated); got mu={mu}"))
            if g.denominator == 1 and g >= 0 and int(g) % 2 == 0:
                return Regime("thm2_even", m=int(g) // 2)
            return Regime("thm2")
        if n == 1:
            if g.denominator == 1 and g <= 0 and int(g) % 2 == 0:
                return Regime("unsupported", reason=(
                    f"nu=1 with gamma={g} in {{0,-2,-4,...}} puts a double "
                    f"pole at s=1 (untreated)"))
            if g.denominator == 1 and g >= 1 and int(g) % 2 == 1:
                return Regime("thm3_odd", m=(int(g) - 1) // 2)
            return Regime("thm3")
        return Regime("recurrence")
    m = _odd_negative(g + nu)
    if m is not None:
        if mu == 1:
            if m == 0:
                return Regime("thm5")
            return Regime("unsupported", reason=(
                f"mu=1 with gamma+nu={g + nu} < -1: coincident poles beyond "
                f"the implemented gamma+nu=-1 case"))
        if mu == 2:
            if m == 0:
                return Regime("remark41")
            return Regime("unsupported", reason=(
                f"mu=2 lift implemented only for gamma+nu=-1, "
                f"got gamma+nu={g + nu}"))
        if mu.denominator == 1:
            return Regime("unsupported", reason=(
                f"integer mu={mu} >= 3 with gamma+nu odd negative: "
                f"coincident apparent singularities untreated"))
        return Regime("thm4", m=m, sign=+1)
    m = _odd_negative(g - nu)
    if m is not None:
        if mu.denominator == 1:
            return Regime("unsupported", reason=(
                f"integer mu={mu} with gamma-nu={g - nu} odd negative "
                f"untreated"))
        return Regime("thm4", m=m, sign=-1)
    return Regime("thm1")


@dataclass
class ExpansionResult:
    """Value of one expansion together with its truncation diagnostics.

    value = constant + sum of terms[:n_kept]; est_error is the magnitude
    of the first omitted combined term.
    """

    value: object
    k_o: int
    terms: list
    regime: Regime
    est_error: object
    constant: object = 0
    n_kept: int = 0
    no_minimum: bool = False
    warning: str | None = None

    @property
    def series_value(self):
        return self.value - self.constant


@dataclass(frozen=True)
class TruncationChoice:
    k_o: int
    n_kept: int
    est_index: int
    no_minimum: bool = False


def optimal_truncation(mags) -> TruncationChoice:
    """Truncate just before the global minimum of the term magnitudes.

    Returns the index of the last kept term (k_o); when the magnitudes
    are still decreasing at the end of the window the full window is
    kept and ``no_minimum`` is set.
    """
    if len(mags) < 2:
        raise ValueError("optimal_truncation needs at least 2 magnitudes")
    k_min = 0
    for i, v in enumerate(mags):
        if v < mags[k_min]:
            k_min = i
    if k_min == len(mags) - 1:
        return TruncationChoice(k_o=k_min, n_kept=len(mags),
                                est_index=k_min, no_minimum=True)
    return TruncationChoice(k_o=max(k_min - 1, 0), n_kept=k_min,
                            est_index=k_min)


def _collect_stages(stage_fn, K, k_start: int = 0):
    """Evaluate stages either to a fixed K or over the adaptive window."""
    stages = []
    if K != "auto":
        for k in range(k_start, K + 2):
            stages.append(stage_fn(k))
        return stages, False
    increases = 0
    prev = None
    k = k_start
    while k <= K_MAX:
        t = stage_fn(k)
        stages.append(t)
        m = abs(t)
        if prev is not None:
            if m > prev > 0:
                increases += 1
                if increases >= 3:
                    return stages, True
            else:
                increases = 0
        prev = m
        k += 1
    return stages, False


def _truncate(stages, K, ctx, windowed):
    mags = [abs(t) for t in stages]
    if K == "auto":
        choice = optimal_truncation(mags)
        no_min = choice.no_minimum
        n_kept = choice.n_kept
        k_o = choice.k_o
        est = mags[choice.est_index] if not no_min else mags[-1]
    else:
        n_kept = min(K + 1, len(stages))
        k_o = n_kept - 1
        est = mags[n_kept] if n_kept < len(stages) else mags[-1]
        no_min = False
    with ctx.work():
        total = mp.fsum(stages[:n_kept]) if n_kept else mp.mpf(0)
    return total, k_o, n_kept, est, no_min


def _check_regime(params, expected, ctx):
    regime = classify(params)
    kinds = expected if isinstance(expected, tuple) else (expected,)
    if regime.kind not in kinds:
        raise RegimeMismatch(
            f"params ({params.label()}) classify to {regime.kind}"
            + (f" [{regime.reason}]" if regime.reason else "")
            + f", engine needs {' or '.join(kinds)}"
        )
    return regime


def _arg_warning(a, ctx):
    with ctx.work():
        if mp.im(a) == 0:
            return None
        delta = mp.pi / 2 - abs(mp.arg(a))
        if delta < ARG_WARN_BAND:
            return (f"arg a is within {float(delta):.3f} of pi/2; "
                    f"expect degraded accuracy")
    return None


def _apow(a, e, ctx):
    """Principal-branch power a^e."""
    with ctx.work():
        em = to_mp(e, ctx) if isinstance(e, (int, Fraction)) else e
        if mp.im(a) == 0 and mp.re(a) > 0:
            return mp.power(mp.re(a), em)
        return mp.exp(em * mp.log(a))


def r_series(a, nu_signed, params: SeriesParams, K: int,
             ctx: PrecisionCtx = DEFAULT_CTX):
    """First K+1 terms of the branch sum R(a; nu_signed).

    term_k = (1/2) a^(-nu-2mu-2k) chi^(nu/2) Gamma(-nu) (-1)^k/k!
             (mu)_k zeta(-gamma-nu-2k) F_k(mu; nu; chi)
    with nu standing for nu_signed throughout.
    """
    nu_s = Q(nu_signed)
    if nu_s.denominator == 1:
        raise DomainError(f"r_series needs non-integer nu, got {nu_s}")
    fn = _r_stage_fn(a, nu_s, params, ctx)
    return [fn(k) for k in range(K + 1)]


def _r_stage_fn(a, nu_s: Fraction, params: SeriesParams, ctx,
                alternating: bool = False):
    mu, g = params.mu, params.gamma_exp
    for k in range(K_MAX + 2):
        if -g - nu_s - 2 * k == 1:
            raise ZetaPoleHit(
                f"zeta(1) hit at k={k} on branch nu={nu_s}; wrong regime")
    with ctx.work():
        chi = params.chi_mp(ctx)
        pref = mp.power(chi, to_mp(nu_s, ctx) / 2) * mp.gamma(to_mp(-nu_s, ctx)) / 2
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))

    def stage(k):
        with ctx.work():
            coef = to_mp(hyp.poch_exact(mu, k) / hyp._factorial(k), ctx)
            z = scalars.zeta(-g - nu_s - 2 * k, ctx)
            fk = hyp.f_poly(k, mu, nu_s, params.chi_mp(ctx), ctx)
            expo = to_mp(-nu_s - 2 * mu - 2 * k, ctx)
            term = pref * (-1) ** k * coef * z * fk * mp.exp(expo * la)
            if alternating:
                om = g + nu_s + 2 * k
                term *= 1 - mp.power(mp.mpf(2), to_mp(1 + om, ctx))
            return term

    return stage


def _finish(params, a, ctx, regime, constant, stage_fn, K, k_start=0):
    stages, windowed = _collect_stages(stage_fn, K, k_start)
    total, k_o, n_kept, est, no_min = _truncate(stages, K, ctx, windowed)
    with ctx.work():
        value = constant + total
    return ExpansionResult(
        value=value, k_o=k_o + k_start, terms=stages, regime=regime,
        est_error=est, constant=constant, n_kept=n_kept,
        no_minimum=no_min, warning=_arg_warning(a, ctx),
    )


def expand_thm1(params: SeriesParams, a, K="auto",
                ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """Simple-pole expansion: constant a^(gamma-2mu+1) H(1) plus R(a;+-nu)."""
    regime = _check_regime(params, "thm1", ctx)
    a = as_eval_point(a, ctx)
    with ctx.work():
        constant = (_apow(a, params.gamma_exp - 2 * params.mu + 1, ctx)
                    * mellin.h_at_one(params, regime, ctx))
    plus = _r_stage_fn(a, params.nu, params, ctx)
    minus = _r_stage_fn(a, -params.nu, params, ctx)

    def stage(k):
        with ctx.work():
            return plus(k) + minus(k)

    return _finish(params, a, ctx, regime, constant, stage, K)


def _log_2a_over_b(a, params, ctx):
    with ctx.work():
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))
        return la + mp.log(mp.mpf(2)) - mp.log(params.b_mp(ctx))


def expand_thm2(params: SeriesParams, a, K="auto",
                ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """nu = 0 expansion; the double-pole bracket is multiplied through so
    trivial zeros of zeta leave only the zeta' part of each term."""
    regime = _check_regime(params, ("thm2", "thm2_even"), ctx)
    a = as_eval_point(a, ctx)
    mu, g = params.mu, params.gamma_exp
    with ctx.work():
        constant = (_apow(a, g - 2 * mu + 1, ctx)
                    * mellin.h_at_one(params, regime, ctx))
        chi = params.chi_mp(ctx)
        ell = _log_2a_over_b(a, params, ctx) - mp.euler
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))

    def stage(k):
        with ctx.work():
            coef = to_mp(hyp.poch_exact(mu, k) / hyp._factorial(k), ctx) * (-1) ** k
            fk = hyp.f_poly(k, mu, Q(0), chi, ctx)
            z = scalars.zeta(-g - 2 * k, ctx)
            zd = scalars.zeta_deriv(-g - 2 * k, ctx)
            fa = hyp.fstar_site("a", k=k, mu=mu, chi=chi, ctx=ctx).value
            bracket = z * (ell + fa) + zd
            return coef * fk * bracket * mp.exp(to_mp(-2 * mu - 2 * k, ctx) * la)

    return _finish(params, a, ctx, regime, constant, stage, K)


def expand_thm3(params: SeriesParams, a, K="auto",
                ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """nu = 1 expansion: a simple-pole sum plus a double-pole sum, grouped
    by total power of a (the j-th stage carries a^(1-2mu-2j))."""
    regime = _check_regime(params, ("thm3", "thm3_odd"), ctx)
    a = as_eval_point(a, ctx)
    mu, g = params.mu, params.gamma_exp
    with ctx.work():
        constant = (_apow(a, g - 2 * mu + 1, ctx)
                    * mellin.h_at_one(params, regime, ctx))
        chi = params.chi_mp(ctx)
        sqchi = mp.sqrt(chi)
        ell = _log_2a_over_b(a, params, ctx) - mp.euler + mp.mpf(1) / 2
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))

    def sum_a(k):
        coef = to_mp(hyp.poch_exact(mu, k) / hyp._factorial(k), ctx) * (-1) ** k
        z = scalars.zeta(1 - g - 2 * k, ctx)
        return coef * z / (2 * sqchi) * mp.exp(to_mp(1 - 2 * mu - 2 * k, ctx) * la)

    def sum_b(k):
        coef = to_mp(hyp.poch_exact(mu, k) / hyp._factorial(k), ctx) * (-1) ** (k + 1)
        fk = hyp.f_poly(k, mu, Q(1), chi, ctx)
        z = scalars.zeta(-g - 1 - 2 * k, ctx)
        zd = scalars.zeta_deriv(-g - 1 - 2 * k, ctx)
        fb = hyp.fstar_site("b", k=k, mu=mu, chi=chi, ctx=ctx).value
        bracket = z * (ell + fb) + zd
        return (coef * sqchi * fk * bracket
                * mp.exp(to_mp(-1 - 2 * mu - 2 * k, ctx) * la))

    def stage(j):
        with ctx.work():
            t = sum_a(j)
            if j >= 1:
                t += sum_b(j - 1)
            return t

    return _finish(params, a, ctx, regime, constant, stage, K)


def expand_thm4(params: SeriesParams, a, K="auto",
                ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """Double pole at s=1 with gamma + sign*nu = -(2m+1), mu non-integer.

    The k=m term of the singular branch moves into the residue constant;
    the remaining terms of both branches are summed as usual.
    """
    regime = _check_regime(params, "thm4", ctx)
    a = as_eval_point(a, ctx)
    mu = params.mu
    m, sign = regime.m, regime.sign
    near = float(abs(mu - round(mu)))
    if near < 10.0 ** (-(ctx.digits // 4)):
        raise NearPole(
            f"mu={mu} is within 1e-{ctx.digits // 4} of an integer; "
            f"the residue formula loses all accuracy there")
    nu_s = sign * params.nu
    with ctx.work():
        chi = params.chi_mp(ctx)
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))
        fc = hyp.fstar_site("c", m=m, mu=mu, nu=nu_s, chi=chi, ctx=ctx).value
        fm = hyp.f_poly(m, mu, nu_s, chi, ctx)
        bracket = (2 * la + 2 * mp.euler + mp.digamma(m + 1)
                   - mp.digamma(to_mp(m + mu, ctx)) + fc)
        res_pole = ((-1) ** m * mp.power(chi, to_mp(nu_s, ctx) / 2)
                    * mp.gamma(to_mp(-nu_s, ctx))
                    / (4 * mp.gamma(to_mp(mu, ctx)) * hyp._factorial(m))
                    * fm * bracket)
        hhat = mellin.h_at_one(params, regime, ctx)
        constant = _apow(a, params.gamma_exp - 2 * mu + 1, ctx) * (hhat + res_pole)
    sing = _r_stage_fn(a, nu_s, params, ctx)
    reg = _r_stage_fn(a, -nu_s, params, ctx)

    def stage(k):
        with ctx.work():
            t = reg(k)
            if k != m:
                t += sing(k)
            return t

    return _finish(params, a, ctx, regime, constant, stage, K)


def expand_thm5(params: SeriesParams, a, K="auto",
                ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """gamma + nu = -1 with mu = 1: double pole at s=1, modified branch sum."""
    regime = _check_regime(params, "thm5", ctx)
    a = as_eval_point(a, ctx)
    nu = params.nu
    constant = _thm5_residue(params, a, ctx)
    rhat = _thm5_rhat_stage_fn(a, params, ctx)
    reg = _r_stage_fn(a, -nu, params, ctx)

    def stage(k):
        with ctx.work():
            t = reg(k)
            if k >= 1:
                t += rhat(k)
            return t

    return _finish(params, a, ctx, regime, constant, stage, K)


def _thm5_residue(params, a, ctx):
    """Res(1) = a^(gamma-1) { H2(1,-nu) + (chi^(nu/2) Gamma(-nu)/2)
    (log a + gamma0 - F(chi){psi(2)+psi(-1-nu)-log chi+F*}/2) }."""
    nu = params.nu
    regime = Regime("thm5")
    with ctx.work():
        chi = params.chi_mp(ctx)
        num = to_mp(nu, ctx)
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))
        h2m = mellin.h_at_one(params, regime, ctx)
        fchi = hyp.thm5_f_chi(nu, chi, ctx)
        fd = hyp.fstar_site("d", nu=nu, chi=chi, ctx=ctx).value
        inner = (la + mp.euler
                 - fchi / 2 * (mp.digamma(mp.mpf(2)) + mp.digamma(-1 - num)
                               - mp.log(chi) + fd))
        return (_apow(a, params.gamma_exp - 1, ctx)
                * (h2m + mp.power(chi, num / 2) * mp.gamma(-num) / 2 * inner))


def _thm5_rhat_stage_fn(a, params, ctx, derivative: bool = False):
    """Stages of Rhat(a; nu) (k >= 1), or of its a-derivative divided by
    the leading power, when ``derivative`` is set."""
    nu, g = params.nu, params.gamma_exp
    with ctx.work():
        chi = params.chi_mp(ctx)
        num = to_mp(nu, ctx)
        pref = mp.power(chi, num / 2) * mp.gamma(-num) / 2
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))

    def stage(k):
        if k == 0:
            return mp.mpf(0)
        with ctx.work():
            z = scalars.zeta(1 - 2 * k, ctx)
            fk = hyp.f_poly(k, Q(1), nu, chi, ctx)
            if derivative:
                factor = (-1) ** (k + 1) * to_mp(2 * k + 1 - g, ctx)
                expo = to_mp(g - 2 - 2 * k, ctx)
            else:
                factor = mp.mpf((-1) ** k)
                expo = to_mp(g - 1 - 2 * k, ctx)
            return pref * factor * z * fk * mp.exp(expo * la)

    return stage


def expand_thm6(params: SeriesParams, a, K="auto",
                ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """nu=0, gamma=-1, mu=1: treble pole at s=1."""
    regime = _check_regime(params, "thm6", ctx)
    a = as_eval_point(a, ctx)
    with ctx.work():
        chi = params.chi_mp(ctx)
        b = params.b_mp(ctx)
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))
        g0 = +mp.euler
        g1 = mp.stieltjes(1)
        j0 = mp.besselj(0, b)
        y0 = mp.bessely(0, b)
        lchi = mp.log(chi)
        a1 = 1 - g0 - lchi / 2
        a2 = (mp.mpf(3) / 4 - g0 + g0 * g0 / 2 + mp.pi ** 2 / 24
              + lchi / 2 * (g0 - 1 + lchi / 4))
        b1 = la + g0
        b2 = la * la / 2 + g0 * la - g1
        f1 = hyp.fstar_site("f", chi=chi, order=1, ctx=ctx).value
        f2 = hyp.fstar_site("f", chi=chi, order=2, ctx=ctx).value
        res = (b2 + (1 - j0) * ((a1 + f1) * b1 + (a2 + a1 * f1 + f2))
               - mp.pi ** 2 / 24 * j0 - mp.pi / 2 * b1 * y0)
        constant = mp.exp(-2 * la) * res
        ell = _log_2a_over_b(a, params, ctx) - g0

    def stage(k):
        if k == 0:
            return mp.mpf(0)
        with ctx.work():
            z = scalars.zeta(1 - 2 * k, ctx)
            zd = scalars.zeta_deriv(1 - 2 * k, ctx)
            fk = hyp.f_poly(k, Q(1), Q(0), chi, ctx)
            fe = hyp.fstar_site("e", k=k, chi=chi, ctx=ctx).value
            bracket = z * (ell + fe) + zd
            return ((-1) ** k * fk * bracket * mp.exp(to_mp(-2 - 2 * k, ctx) * la))

    return _finish(params, a, ctx, regime, constant, stage, K)


def expand_recurrence(params: SeriesParams, a, K="auto",
                      ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """Integer nu >= 2 reduced termwise by
    K_(n+2)(x) = K_n(x) + (2(n+1)/x) K_(n+1)(x), so that
    S(nu) = S(nu-2, gamma) + (2(nu-1) a / b) S(nu-1, gamma-1)."""
    regime = _check_regime(params, "recurrence", ctx)
    a = as_eval_point(a, ctx)
    n = int(params.nu) - 2
    base = params.with_nu(n)
    mid = SeriesParams(params.mu, n + 1, params.gamma_exp - 1, params.b)
    for sub in (base, mid):
        sub_regime = classify(sub)
        if sub_regime.kind == "unsupported":
            raise RegimeMismatch(
                f"recurrence reduction of ({params.label()}) needs "
                f"({sub.label()}), which is unsupported: {sub_regime.reason}")
    e1 = expand(base, a, K, ctx)
    e2 = expand(mid, a, K, ctx)
    with ctx.work():
        factor = 2 * (n + 1) * a / params.b_mp(ctx)
        value = e1.value + factor * e2.value
        est = e1.est_error + abs(factor) * e2.est_error
        constant = e1.constant + factor * e2.constant
    return ExpansionResult(
        value=value, k_o=max(e1.k_o, e2.k_o), terms=[], regime=regime,
        est_error=est, constant=constant, n_kept=max(e1.n_kept, e2.n_kept),
        no_minimum=e1.no_minimum or e2.no_minimum,
        warning=_arg_warning(a, ctx),
    )


def expand_alternating(params: SeriesParams, a, K="auto",
                       ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """Alternating-sign variant.

    In the simple-pole regime each branch term acquires the factor
    (1 - 2^(1+omega_k)) with omega_k = gamma + nu + 2k and the constant
    term cancels; in the other regimes the identity
    alt(a) = S(a) - 2^(1+gamma-2mu) S(a/2) combines two expansions.
    """
    regime = classify(params)
    a = as_eval_point(a, ctx)
    if regime.kind == "thm1":
        plus = _r_stage_fn(a, params.nu, params, ctx, alternating=True)
        minus = _r_stage_fn(a, -params.nu, params, ctx, alternating=True)

        def stage(k):
            with ctx.work():
                return plus(k) + minus(k)

        return _finish(params, a, ctx, regime, mp.mpf(0), stage, K)
    e1 = expand(params, a, K, ctx)
    with ctx.work():
        e2 = expand(params, a / 2, K, ctx)
        scale = mp.power(mp.mpf(2), to_mp(1 + params.gamma_exp - 2 * params.mu, ctx))
        value = e1.value - scale * e2.value
        est = e1.est_error + scale * e2.est_error
    return ExpansionResult(
        value=value, k_o=max(e1.k_o, e2.k_o), terms=[], regime=regime,
        est_error=est, constant=e1.constant - scale * e2.constant,
        n_kept=max(e1.n_kept, e2.n_kept),
        no_minimum=e1.no_minimum or e2.no_minimum,
        warning=_arg_warning(a, ctx),
    )


def expand_derivative(params: SeriesParams, a, K="auto",
                      ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """Expansion of the K'-kernel series, -{S(nu-1) + S(nu+1)}/2.

    Uses |nu - 1| for the down-shifted order (K is even in its order).
    """
    lo = params.with_nu(abs(params.nu - 1))
    hi = params.with_nu(params.nu + 1)
    a = as_eval_point(a, ctx)
    e1 = expand(lo, a, K, ctx)
    e2 = expand(hi, a, K, ctx)
    with ctx.work():
        value = -(e1.value + e2.value) / 2
        est = (e1.est_error + e2.est_error) / 2
        constant = -(e1.constant + e2.constant) / 2
    return ExpansionResult(
        value=value, k_o=max(e1.k_o, e2.k_o), terms=[],
        regime=Regime("thm1", reason=f"derivative combo of nu={lo.nu}, {hi.nu}"),
        est_error=est, constant=constant, n_kept=max(e1.n_kept, e2.n_kept),
        no_minimum=e1.no_minimum or e2.no_minimum,
        warning=_arg_warning(a, ctx),
    )


def expand_remark41(params: SeriesParams, a, K="auto",
                    ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """mu = 2, gamma + nu = -1, nu non-integer, assembled from mu = 1 parts:

    S2 = (1/(2a^2)) { (b/a) S1(nu+1, gamma+1) - nu S1(nu, gamma)
                      - a dS1(nu, gamma)/da }

    where dS1/da differentiates the mu=1 expansion termwise.
    """
    regime = _check_regime(params, "remark41", ctx)
    a = as_eval_point(a, ctx)
    nu, g = params.nu, params.gamma_exp
    p_one = SeriesParams(1, nu, g, params.b)
    p_shift = SeriesParams(1, nu + 1, g + 1, params.b)
    e_shift = expand_thm1(p_shift, a, K, ctx)
    e_base = expand_thm5(p_one, a, K, ctx)
    with ctx.work():
        chi = params.chi_mp(ctx)
        num = to_mp(nu, ctx)
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))
        d_res = ((to_mp(g - 1, ctx) / a) * e_base.constant
                 + mp.exp(to_mp(g - 2, ctx) * la)
                 * mp.power(chi, num / 2) * mp.gamma(-num) / 2)
    d_rhat = _thm5_rhat_stage_fn(a, p_one, ctx, derivative=True)
    d_reg = _r_deriv_stage_fn(a, -nu, p_one, ctx)

    def d_stage(k):
        with ctx.work():
            return d_rhat(k) + d_reg(k)

    d_stages, windowed = _collect_stages(d_stage, K)
    d_total, d_ko, d_kept, d_est, d_nomin = _truncate(d_stages, K, ctx, windowed)
    with ctx.work():
        b = params.b_mp(ctx)
        d_sum = d_res + d_total
        value = ((b / a) * e_shift.value - num * e_base.value - a * d_sum) \
            / (2 * a * a)
        est = ((b / abs(a)) * e_shift.est_error + abs(num) * e_base.est_error
               + abs(a) * d_est) / (2 * abs(a) ** 2)
        constant = ((b / a) * e_shift.constant - num * e_base.constant
                    - a * d_res) / (2 * a * a)
    return ExpansionResult(
        value=value, k_o=max(e_shift.k_o, e_base.k_o, d_ko), terms=[],
        regime=regime, est_error=est, constant=constant,
        n_kept=max(e_shift.n_kept, e_base.n_kept, d_kept),
        no_minimum=e_shift.no_minimum or e_base.no_minimum or d_nomin,
        warning=_arg_warning(a, ctx),
    )


def _r_deriv_stage_fn(a, nu_s: Fraction, params: SeriesParams, ctx):
    """Termwise a-derivative of R(a; nu_s) for mu=1:
    (chi^(nu/2) Gamma(-nu)/2) sum_k (-1)^(k+1) (2k + 2mu + nu - ... ) --
    computed directly as d/da of each term of R."""
    mu, g = params.mu, params.gamma_exp
    with ctx.work():
        chi = params.chi_mp(ctx)
        pref = mp.power(chi, to_mp(nu_s, ctx) / 2) * mp.gamma(to_mp(-nu_s, ctx)) / 2
        la = mp.log(a) if mp.im(a) != 0 else mp.log(mp.re(a))

    def stage(k):
        with ctx.work():
            coef = to_mp(hyp.poch_exact(mu, k) / hyp._factorial(k), ctx)
            z = scalars.zeta(-g - nu_s - 2 * k, ctx)
            fk = hyp.f_poly(k, mu, nu_s, params.chi_mp(ctx), ctx)
            expo = -nu_s - 2 * mu - 2 * k
            term = (pref * (-1) ** k * coef * z * fk
                    * to_mp(expo, ctx) * mp.exp(to_mp(expo - 1, ctx) * la))
            return term

    return stage


_ENGINES = {
    "thm1": expand_thm1,
    "thm2": expand_thm2,
    "thm2_even": expand_thm2,
    "thm3": expand_thm3,
    "thm3_odd": expand_thm3,
    "thm4": expand_thm4,
    "thm5": expand_thm5,
    "thm6": expand_thm6,
    "recurrence": expand_recurrence,
    "remark41": expand_remark41,
}


def expand(params: SeriesParams, a, K="auto",
           ctx: PrecisionCtx = DEFAULT_CTX) -> ExpansionResult:
    """Classify and run the applicable engine."""
    regime = classify(params)
    if regime.kind == "unsupported":
        raise UnsupportedRegime(regime.reason)
    return _ENGINES[regime.kind](params, a, K, ctx)
