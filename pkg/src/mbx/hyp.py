"""Terminating 1F2 polynomials, perturbation coefficients, and series.

The expansion engines consume three kinds of objects from here:

* ``f_poly(k, mu, nu, chi)``, the degree-k polynomial in chi

      F_k(mu; nu; chi) = sum_{r=0}^{k} (-k)_r (-chi)^r
                         / ((1+nu)_r (1-mu-k)_r r!),

  whose coefficients are carried as exact rationals so that parameter
  cancellations (for example integer mu) are exact, never floating.

* ``fstar_site(...)``, the first and second order coefficients that
  appear when a lower parameter of a 1F2 value is shifted by a small
  amount. Each enumerated site is one specific formula; all psi
  differences reduce to rational harmonic-type sums and are computed
  exactly.

* generic convergent 1F2 / 2F3 series (entire in z), plus a regularized
  1F2 (terms divided by gamma factors) used by the Mellin kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath import mp

from .errors import HypothesisViolation, ParameterCollision
from .scalars import GUARD, PrecisionCtx, DEFAULT_CTX, to_mp

Q = Fraction


def poch_exact(alpha: Fraction, r: int) -> Fraction:
    """(alpha)_r as an exact rational."""
    acc = Q(1)
    a = Q(alpha)
    for j in range(r):
        acc *= a + j
    return acc


@lru_cache(maxsize=1024)
def harmonic(r: int) -> Fraction:
    """H_r = 1 + 1/2 + ... + 1/r; equals psi(1+r) - psi(1)."""
    if r == 0:
        return Q(0)
    return harmonic(r - 1) + Q(1, r)


def delta_psi_up(base: Fraction, r: int) -> Fraction:
    """psi(base + r) - psi(base) = sum_{j=0}^{r-1} 1/(base + j), exact."""
    acc = Q(0)
    b = Q(base)
    for j in range(r):
        d = b + j
        if d == 0:
            raise ParameterCollision(f"psi difference hits a pole at {base}+{j}")
        acc += Q(1, 1) / d
    return acc


def delta_psi_down(base: Fraction, r: int) -> Fraction:
    """psi(base - r) - psi(base) = -sum_{i=1}^{r} 1/(base - i), exact."""
    acc = Q(0)
    b = Q(base)
    for i in range(1, r + 1):
        d = b - i
        if d == 0:
            raise ParameterCollision(f"psi difference hits a pole at {base}-{i}")
        acc -= Q(1, 1) / d
    return acc


def _f_poly_coeffs(k: int, mu: Fraction, nu: Fraction) -> list[Fraction]:
    """Exact coefficients c_r with F = sum_r c_r * (-chi)^r."""
    mu = Q(mu)
    nu = Q(nu)
    coeffs = []
    num = Q(1)   # (-k)_r
    d1 = Q(1)    # (1+nu)_r
    d2 = Q(1)    # (1-mu-k)_r
    fact = 1
    for r in range(k + 1):
        if r > 0:
            num *= Q(-k) + (r - 1)
            f1 = 1 + nu + (r - 1)
            f2 = 1 - mu - k + (r - 1)
            if f1 == 0 or f2 == 0:
                if num != 0:
                    raise ParameterCollision(
                        f"denominator Pochhammer vanishes at r={r} "
                        f"(mu={mu}, nu={nu}, k={k})"
                    )
                coeffs.append(Q(0))
                continue
            d1 *= f1
            d2 *= f2
            fact *= r
        coeffs.append(num / (d1 * d2 * fact))
    return coeffs


def f_poly(k: int, mu, nu, chi, ctx: PrecisionCtx = DEFAULT_CTX):
    """The degree-k terminating 1F2(-k; 1-mu-k, 1+nu; -chi)."""
    coeffs = _f_poly_coeffs(k, Q(mu), Q(nu))
    with ctx.work():
        chim = to_mp(chi, ctx)
        acc = mp.mpf(0)
        p = mp.mpf(1)
        for c in coeffs:
            if c != 0:
                acc += mp.mpf(c.numerator) / c.denominator * p
            p = p * (-chim)
        return acc


@dataclass(frozen=True)
class FPoly:
    """A computed F_k(mu; nu; chi) value together with its inputs."""

    k: int
    mu: Fraction
    nu: Fraction
    chi: object
    value: object

    @classmethod
    def compute(cls, k, mu, nu, chi, ctx: PrecisionCtx = DEFAULT_CTX):
        return cls(k, Q(mu), Q(nu), chi, f_poly(k, mu, nu, chi, ctx))


def sigma_k(k: int, mu, chi, ctx: PrecisionCtx = DEFAULT_CTX):
    """sum_{r=0}^{k} (-k)_r (-chi)^r / (r! (1-mu-k)_r (2)_r)."""
    mu = Q(mu)
    with ctx.work():
        chim = to_mp(chi, ctx)
        acc = mp.mpf(0)
        p = mp.mpf(1)
        for r in range(k + 1):
            num = poch_exact(Q(-k), r)
            den2 = poch_exact(1 - mu - k, r)
            if den2 == 0:
                if num != 0:
                    raise ParameterCollision(
                        f"sigma_k denominator vanishes at r={r} (mu={mu}, k={k})"
                    )
                continue
            c = num / (Q(_factorial(r)) * den2 * poch_exact(Q(2), r))
            acc += mp.mpf(c.numerator) / c.denominator * p
            p = p * (-chim)
        return acc


@lru_cache(maxsize=512)
def _factorial(r: int) -> int:
    out = 1
    for j in range(2, r + 1):
        out *= j
    return out


def _as_param(x, ctx):
    """Keep exact rationals exact; otherwise go through mpmath."""
    if isinstance(x, (int, Fraction)):
        return Q(x)
    return to_mp(x, ctx)


def _nonpos_int(x) -> int | None:
    """Return n >= 0 with x == -n when x is a non-positive integer."""
    if isinstance(x, Fraction) and x.denominator == 1 and x <= 0:
        return -int(x)
    if isinstance(x, int) and x <= 0:
        return -x
    return None


def _hyper_series(nums, dens, z, ctx, max_terms=100_000):
    """Generic pFq series with termination and collision handling.

    Terminates when some numerator parameter is a non-positive integer;
    raises ParameterCollision when a denominator parameter hits a
    non-positive integer strictly before termination.
    """
    stop = None
    for a in nums:
        n = _nonpos_int(a)
        if n is not None and (stop is None or n < stop):
            stop = n
    for b in dens:
        n = _nonpos_int(b)
        if n is not None and (stop is None or n < stop):
            raise ParameterCollision(
                f"lower parameter {b} is a non-positive integer hit before "
                f"numerator termination"
            )
    with ctx.work():
        zm = to_mp(z, ctx)
        tol = +ctx.series_tol
        nums_m = [to_mp(a, ctx) for a in nums]
        dens_m = [to_mp(b, ctx) for b in dens]
        term = mp.mpf(1)
        acc = mp.mpf(1)
        small = 0
        n = 0
        while True:
            if stop is not None and n >= stop:
                break
            ratio = zm / (n + 1)
            for a in nums_m:
                ratio *= a + n
            for b in dens_m:
                ratio /= b + n
            term = term * ratio
            acc += term
            n += 1
            if stop is None:
                if abs(term) < tol * (abs(acc) + tol):
                    small += 1
                    if small >= 3:
                        break
                else:
                    small = 0
                if n >= max_terms:
                    raise ArithmeticError("hypergeometric series did not settle")
        return acc


def hyp1f2(alpha, beta, gamma_p, z, ctx: PrecisionCtx = DEFAULT_CTX):
    """1F2(alpha; beta, gamma_p; z), entire in z."""
    return _hyper_series(
        [_as_param(alpha, ctx)],
        [_as_param(beta, ctx), _as_param(gamma_p, ctx)],
        z,
        ctx,
    )


def hyp2f3(a1, a2, b1, b2, b3, z, ctx: PrecisionCtx = DEFAULT_CTX):
    """2F3(a1, a2; b1, b2, b3; z), entire in z."""
    return _hyper_series(
        [_as_param(a1, ctx), _as_param(a2, ctx)],
        [_as_param(b1, ctx), _as_param(b2, ctx), _as_param(b3, ctx)],
        z,
        ctx,
    )


def reg_hyp1f2(alpha, beta, gamma_p, z, ctx: PrecisionCtx = DEFAULT_CTX):
    """Regularized 1F2: sum_n (alpha)_n z^n / (Gamma(beta+n) Gamma(gamma+n) n!).

    Finite for every parameter value (1/Gamma vanishes at the poles), so
    this is safe at points where the plain series would collide.
    """
    with ctx.work():
        am = to_mp(alpha, ctx)
        bm = to_mp(beta, ctx)
        gm = to_mp(gamma_p, ctx)
        zm = to_mp(z, ctx)
        tol = +ctx.series_tol
        acc = mp.mpf(0)
        poch = mp.mpf(1)
        zp = mp.mpf(1)
        fact = mp.mpf(1)
        small = 0
        n = 0
        while True:
            term = poch * zp / fact * mp.rgamma(bm + n) * mp.rgamma(gm + n)
            acc += term
            scale = abs(acc) + abs(term)
            if scale > 0 and abs(term) < tol * scale:
                small += 1
                if small >= 3 and n > abs(zm):
                    break
            else:
                small = 0
            poch = poch * (am + n)
            zp = zp * zm
            n += 1
            fact = fact * n
            if n > 100_000:
                raise ArithmeticError("regularized 1F2 did not settle")
        return acc


def lemma1_first_order(alpha, beta, gamma_p, eps1, eps2, eps3, z,
                       ctx: PrecisionCtx = DEFAULT_CTX):
    """First-order parameter perturbation of 1F2.

    Returns sum_{r>=1} (alpha)_r z^r / ((beta)_r (gamma)_r r!) * d_r with

        d_r = eps1*(psi(alpha+r)-psi(alpha)) - eps2*(psi(beta+r)-psi(beta))
              - eps3*(psi(gamma+r)-psi(gamma)),

    the O(eps) correction to 1F2(alpha+eps1; beta+eps2, gamma+eps3; z).
    """
    a_stop = _nonpos_int(_as_param(alpha, ctx))
    if a_stop is not None and not _is_zero(eps1):
        raise HypothesisViolation(
            f"alpha={alpha} is a non-positive integer with eps1 != 0"
        )
    with ctx.work():
        am = to_mp(alpha, ctx)
        bm = to_mp(beta, ctx)
        gm = to_mp(gamma_p, ctx)
        zm = to_mp(z, ctx)
        e1 = to_mp(eps1, ctx)
        e2 = to_mp(eps2, ctx)
        e3 = to_mp(eps3, ctx)
        tol = +ctx.series_tol
        psi_a = mp.digamma(am) if e1 != 0 else mp.mpf(0)
        psi_b = mp.digamma(bm)
        psi_g = mp.digamma(gm)
        acc = mp.mpf(0)
        coef = mp.mpf(1)
        small = 0
        r = 0
        while True:
            coef = coef * (am + r) * zm / ((bm + r) * (gm + r) * (r + 1))
            r += 1
            d_r = -e2 * (mp.digamma(bm + r) - psi_b) \
                  - e3 * (mp.digamma(gm + r) - psi_g)
            if e1 != 0:
                d_r += e1 * (mp.digamma(am + r) - psi_a)
            acc += coef * d_r
            if a_stop is not None and r >= a_stop:
                break
            if abs(coef) < tol * (abs(acc) + abs(coef) + tol):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
            if r > 100_000:
                raise ArithmeticError("lemma1 series did not settle")
        return acc


def _is_zero(x) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return mp.mpmathify(x) == 0


@dataclass(frozen=True)
class PerturbCoeff:
    """A site-specific first or second order perturbation coefficient."""

    site: str
    order: int
    value: object


SITES = ("a", "b", "c", "d", "e", "f")


def fstar_site(site: str, *, k: int | None = None, m: int | None = None,
               mu=None, nu=None, chi=None, order: int = 1,
               ctx: PrecisionCtx = DEFAULT_CTX) -> PerturbCoeff:
    """Evaluate one enumerated perturbation-coefficient site.

    a: nu=0 family, index k, parameter mu; normalized by F_k(mu; 0; chi).
    b: nu=1 family, index k, parameter mu; normalized by F_k(mu; 1; chi).
    c: double-pole residue site, index m, parameters mu (non-integer)
       and nu; normalized by F_m(mu; nu; chi). Includes the 2F3 tail.
    d: mu=1, gamma+nu=-1 site, parameter nu; normalized by
       F(chi) = 1 - chi^(-nu/2) Gamma(1+nu) J_nu(b).
    e: circumflexed variant of site (a) at mu=1, index k.
    f: nu=0, gamma=-1, mu=1 site; ``order`` selects the first or second
       order coefficient, both normalized by F(chi) = (1 - J_0(b))/chi.

    Values are returned normalized: multiplying back by the site's
    normalizing F value restores the defining sum.
    """
    if site not in SITES:
        raise ValueError(f"unknown site {site!r}")
    if order == 2 and site != "f":
        raise ValueError("order-2 coefficients only exist at site 'f'")
    fn = {
        "a": _site_a, "b": _site_b, "c": _site_c,
        "d": _site_d, "e": _site_e, "f": _site_f,
    }[site]
    kwargs = dict(k=k, m=m, mu=mu, nu=nu, chi=chi, ctx=ctx)
    if site == "f":
        kwargs["order"] = order
    value = fn(**kwargs)
    return PerturbCoeff(site=site, order=order, value=value)


def _rational_weighted_sum(pairs, chi, ctx):
    """sum of c_r * (-chi)^r for exact rational coefficients c_r."""
    with ctx.work():
        chim = to_mp(chi, ctx)
        acc = mp.mpf(0)
        p = mp.mpf(1)
        last_r = 0
        for r, c in pairs:
            while last_r < r:
                p = p * (-chim)
                last_r += 1
            if c != 0:
                acc += mp.mpf(c.numerator) / c.denominator * p
        return acc


def _site_a(*, k, mu, chi, ctx, **_):
    """(1/F_k(mu;0;chi)) sum_{r=1}^{k} (-k)_r (-chi)^r H_r / ((1-k-mu)_r (r!)^2)."""
    mu = Q(mu)
    pairs = []
    for r in range(1, k + 1):
        den = poch_exact(1 - mu - k, r)
        if den == 0:
            raise ParameterCollision(f"site a: (1-mu-k)_{r} = 0 for mu={mu}")
        c = poch_exact(Q(-k), r) / (den * Q(_factorial(r)) ** 2) * harmonic(r)
        pairs.append((r, c))
    with ctx.work():
        s = _rational_weighted_sum(pairs, chi, ctx)
        return s / f_poly(k, mu, Q(0), chi, ctx)


def _site_b(*, k, mu, chi, ctx, **_):
    """nu=1 variant: weight H_r - r/(2(1+r)), denominators (2)_r (1-k-mu)_r r!."""
    mu = Q(mu)
    pairs = []
    for r in range(1, k + 1):
        den = poch_exact(1 - mu - k, r)
        if den == 0:
            raise ParameterCollision(f"site b: (1-mu-k)_{r} = 0 for mu={mu}")
        w = harmonic(r) - Q(r, 2 * (1 + r))
        c = poch_exact(Q(-k), r) / (poch_exact(Q(2), r) * den * Q(_factorial(r))) * w
        pairs.append((r, c))
    with ctx.work():
        s = _rational_weighted_sum(pairs, chi, ctx)
        return s / f_poly(k, mu, Q(1), chi, ctx)


def _site_c(*, m, mu, nu, chi, ctx, **_):
    """Double-pole residue coefficient with the 2F3 tail, mu non-integer."""
    mu = Q(mu)
    nu = Q(nu)
    if mu.denominator == 1 and mu >= 1:
        raise ParameterCollision(f"site c requires mu not in {{1,2,...}}, got {mu}")
    pairs = []
    for r in range(m + 1):
        den = poch_exact(1 - mu - m, r) * poch_exact(1 + nu, r)
        if den == 0:
            raise ParameterCollision(f"site c: denominator vanishes at r={r}")
        # psi(m+1-r)-psi(m+1) - (psi(m+mu-r)-psi(m+mu)), both exact
        w = delta_psi_down(Q(m + 1), r) - delta_psi_down(m + mu, r)
        c = poch_exact(Q(-m), r) / (den * Q(_factorial(r))) * w
        pairs.append((r, c))
    with ctx.work():
        head = _rational_weighted_sum(pairs, chi, ctx)
        chim = to_mp(chi, ctx)
        tail_coef = Q(1, m + 1) / (poch_exact(1 + nu, m + 1) * poch_exact(mu - 1, m + 1))
        tail = (mp.mpf(tail_coef.numerator) / tail_coef.denominator
                * (-chim) ** (m + 1)
                * hyp2f3(Q(1), Q(1), Q(m + 2), m + 2 + nu, 2 - mu, -chim, ctx))
        return (head - tail) / f_poly(m, mu, nu, chi, ctx)


def _site_d(*, nu, chi, ctx, **_):
    """-(1/F(chi)) sum_{r>=1} (-chi)^r/((1+nu)_r r!) *
    (H_r + sum_j 1/(nu+j) - (2+nu)/(1+nu))."""
    nu = Q(nu)
    if nu.denominator == 1:
        raise ParameterCollision(f"site d requires non-integer nu, got {nu}")
    with ctx.work():
        chim = to_mp(chi, ctx)
        tol = +ctx.series_tol
        acc = mp.mpf(0)
        base = mp.mpf(1)  # (-chi)^r / ((1+nu)_r r!)
        shift = Q(0)      # psi(1+nu+r) - psi(1+nu)
        small = 0
        r = 0
        while True:
            r += 1
            base = base * (-chim) / ((_fracmp(1 + nu) + (r - 1)) * r)
            shift += Q(1, 1) / (nu + r)
            w = harmonic(r) + shift - (2 + nu) / (1 + nu)
            term = base * _fracmp(w)
            acc += term
            if abs(term) < tol * (abs(acc) + abs(term) + tol):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
            if r > 100_000:
                raise ArithmeticError("site d series did not settle")
        fchi = thm5_f_chi(nu, chi, ctx)
        return -acc / fchi


def _site_e(*, k, chi, ctx, **_):
    """(1/F_k(1;0;chi)) sum_{r=1}^{k} (-chi)^r H_r / (r!)^2."""
    pairs = [(r, harmonic(r) / Q(_factorial(r)) ** 2) for r in range(1, k + 1)]
    with ctx.work():
        s = _rational_weighted_sum(pairs, chi, ctx)
        return s / f_poly(k, Q(1), Q(0), chi, ctx)


def _site_f(*, chi, order, ctx, **_):
    """First/second order coefficients of 1F2(1; 2-e/2, 2-e/2; -chi).

    With D_r = psi(2+r)-psi(2) and P_r = psi'(2+r)-psi'(2), the expansion
    in the shift e reads F(chi) * (1 + e*F1 + e^2*F2 + ...) where

        F1 = (1/F) sum_{r>=1} (-chi)^r/((r+1)!)^2 * D_r
        F2 = (1/F) sum_{r>=1} (-chi)^r/((r+1)!)^2 * (2 D_r^2 - P_r) / 4

    and F(chi) = sum_{r>=0} (-chi)^r/((r+1)!)^2 = (1 - J_0(2 sqrt(chi)))/chi.
    """
    with ctx.work():
        chim = to_mp(chi, ctx)
        acc = mp.mpf(0)
        facc = mp.mpf(1)  # r = 0 term of F(chi)
        p = mp.mpf(1)
        tol = +ctx.series_tol
        small = 0
        r = 0
        while True:
            r += 1
            p = p * (-chim)
            w_f = Q(1) / Q(_factorial(r + 1)) ** 2
            d_r = harmonic(r + 1) - 1
            if order == 1:
                w = w_f * d_r
            else:
                p_r = -sum(Q(1, j * j) for j in range(2, r + 2))
                w = w_f * (2 * d_r * d_r - p_r) / 4
            term = p * _fracmp(w)
            acc += term
            facc += p * _fracmp(w_f)
            if abs(term) < tol * (abs(acc) + abs(term) + tol):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
            if r > 100_000:
                raise ArithmeticError("site f series did not settle")
        return acc / facc


def _fracmp(q: Fraction):
    q = Q(q)
    return mp.mpf(q.numerator) / q.denominator


def thm5_f_chi(nu, chi, ctx: PrecisionCtx = DEFAULT_CTX):
    """F(chi) = (chi/(1+nu)) 1F2(1; 2+nu, 2; -chi), the site-d normalizer.

    Equals 1 - chi^(-nu/2) Gamma(1+nu) J_nu(2 sqrt(chi)); the series form
    avoids cancellation for small chi.
    """
    nu = Q(nu)
    with ctx.work():
        chim = to_mp(chi, ctx)
        series = hyp1f2(Q(1), 2 + nu, Q(2), -chim, ctx)
        return chim / _fracmp(1 + nu) * series


def thm6_f_chi(chi, ctx: PrecisionCtx = DEFAULT_CTX):
    """F(chi) = 1F2(1; 2, 2; -chi) = (1 - J_0(2 sqrt(chi)))/chi."""
    with ctx.work():
        chim = to_mp(chi, ctx)
        return hyp1f2(Q(1), Q(2), Q(2), -chim, ctx)
