"""The universal carrier of the spectrum's mode dependence,

    phi_n(x) = int_0^pi exp(-2 x sin eta) exp(2 i n eta) d eta   (real part),

together with its derivatives, second-order ODE residual, the exact rational
recursion Psi_k feeding the large-n expansion, and the bound suites.

Evaluation routes:

* x <= 1.5 -- Taylor series in x with exact moment coefficients
  c_k = int_0^pi sin^k(eta) cos(2 n eta) d eta obtained from the recurrence
  c_k = k(k-1)/(k^2-4n^2) c_{k-2} (odd chain seeded at c_1 = -2/(4n^2-1),
  even chain seeded at c_{2n} = pi (-1)^n 4^{-n}).  This keeps phi accurate in
  a *relative* sense near 0, which the stiff 1/x^2 coefficient of the ODE
  residual demands.
* 1.5 < x <= 1000 -- Gauss-Legendre panels split at the sign changes of
  cos(2 n eta), geometrically refined toward eta in {0, pi} when the decay
  scale 1/(2x) is finer than the oscillation panels.
* x > 1000 -- the integrand underflows; the three-term rescaled expansion is
  returned with its next-term size attached as the error estimate.

Derivatives always come from differentiated integrands (weights -2 sin eta
and 4 sin^2 eta) or from the differentiated series, never from finite
differences.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .rational import Polynomial, RationalFn
from .specfun.gammafn import gammaln
from .specfun.quadrature import gauss_legendre

_SERIES_XMAX = 1.5
_QUAD_XMAX = 1000.0


@dataclass(frozen=True)
class PhiEval:
    """One evaluation of phi_n with its diagnostics."""

    n: int
    x: float
    value: float
    imag_residual: float
    quad_error: float


def _series_coeff_chains(n, kmax):
    """Moment coefficients c_k for k = 0..kmax (zeros where the moment
    vanishes)."""
    c = np.zeros(kmax + 1)
    if kmax >= 1:
        c[1] = -2.0 / (4.0 * n * n - 1.0)
    k = 3
    while k <= kmax:
        c[k] = c[k - 2] * k * (k - 1) / (k * k - 4.0 * n * n)
        k += 2
    # even chain is identically zero below k = 2n
    if 2 * n <= kmax:
        c[2 * n] = math.pi * (-1.0) ** n / 4.0**n
        k = 2 * n + 2
        while k <= kmax:
            c[k] = c[k - 2] * k * (k - 1) / (k * k - 4.0 * n * n)
            k += 2
    return c


def _series_eval(n, xs):
    """(phi, phi', phi'') by the Taylor series; xs <= _SERIES_XMAX assumed."""
    xmax = float(np.max(xs)) if xs.size else 0.0
    # odd terms die like (2x)^k/k!; the even chain only matters if its seed
    # at k = 2n is representable
    kmax = 40
    while (2 * xmax) ** kmax / math.factorial(kmax) > 1e-22 and kmax < 160:
        kmax += 10
    if 2 * n <= kmax + 30:
        even_log = 2 * n * math.log(max(2 * xmax, 1e-300)) - gammaln(2 * n + 1)
        if even_log > -740.0:
            kmax = max(kmax, 2 * n + 40)
    c = _series_coeff_chains(n, kmax)
    ks = np.nonzero(c)[0]
    v0 = np.zeros_like(xs)
    v1 = np.zeros_like(xs)
    v2 = np.zeros_like(xs)
    t = -2.0 * xs
    logfact = np.array([gammaln(k + 1) for k in range(kmax + 1)])
    for k in ks:
        # plain powers are safe here: |2x|^k <= 3^160 ~ 1e76 for x <= 1.5
        pk = t**k / math.exp(logfact[k])
        v0 += c[k] * pk
        if k >= 1:
            v1 += c[k] * (-2.0) * t ** (k - 1) / math.exp(logfact[k - 1])
        if k >= 2:
            v2 += c[k] * 4.0 * t ** (k - 2) / math.exp(logfact[k - 2])
    return v0, v1, v2


@lru_cache(maxsize=256)
def _panel_nodes(n, x_scale_exp):
    """Panel quadrature nodes/weights for order n, refined for decay scale
    2**x_scale_exp (an integer binning of max x).  Returns (eta, w16, w8mask)
    arrays: nodes, GL16 weights and an embedded GL8 weight vector for error
    estimation."""
    breaks = [0.0] + [(2 * j + 1) * math.pi / (4 * n) for j in range(2 * n)] + [math.pi]
    xmax = 2.0**x_scale_exp
    if xmax > 2.0:
        s = 1.0 / (2.0 * xmax)
        first = math.pi / (4 * n)
        while s < first:
            breaks.append(s)
            breaks.append(math.pi - s)
            s *= 2.0
    breaks = np.array(sorted(set(breaks)))
    x16, w16 = gauss_legendre(16)
    x8, w8 = gauss_legendre(8)
    mids = 0.5 * (breaks[1:] + breaks[:-1])
    halfs = 0.5 * (breaks[1:] - breaks[:-1])
    eta16 = (mids[:, None] + halfs[:, None] * x16[None, :]).ravel()
    wt16 = (halfs[:, None] * w16[None, :]).ravel()
    eta8 = (mids[:, None] + halfs[:, None] * x8[None, :]).ravel()
    wt8 = (halfs[:, None] * w8[None, :]).ravel()
    for arr in (eta16, wt16, eta8, wt8):
        arr.setflags(write=False)
    return eta16, wt16, eta8, wt8


def _quad_eval(n, xs, want_err=True):
    """(phi, phi', phi'', imag, err) on an array of x by panel quadrature."""
    xmax = float(np.max(xs))
    scale_exp = max(1, int(math.ceil(math.log2(max(xmax, 2.0)))))
    eta16, wt16, eta8, wt8 = _panel_nodes(n, scale_exp)
    sin16 = np.sin(eta16)
    cosw = np.cos(2 * n * eta16) * wt16
    sinw = np.sin(2 * n * eta16) * wt16
    with np.errstate(under="ignore"):
        e = np.exp(-2.0 * np.outer(xs, sin16))
    v0 = e @ cosw
    vi = e @ sinw
    v1 = (e * (-2.0 * sin16)) @ cosw
    v2 = (e * (4.0 * sin16 * sin16)) @ cosw
    if want_err:
        sin8 = np.sin(eta8)
        cosw8 = np.cos(2 * n * eta8) * wt8
        with np.errstate(under="ignore"):
            e8 = np.exp(-2.0 * np.outer(xs, sin8))
        err = np.abs(e8 @ cosw8 - v0) + 1e-16 * math.pi
    else:
        err = np.full_like(v0, np.nan)
    return v0, v1, v2, vi, err


def _asymptotic_eval(n, xs):
    """Three-term rescaled expansion for x beyond the quadrature range."""
    v = np.zeros_like(xs)
    for k in range(3):
        v += psi(k)(xs / n) / n ** (2 * k + 1)
    err = np.abs(psi(3)(xs / n)) / n**7 + 1e-18
    return v, err


def phi_values(n: int, x) -> np.ndarray:
    """phi_n on an array of nonnegative x (value only, route-dispatched)."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise DomainError("x must be nonnegative")
    out = np.empty_like(xs)
    small = xs <= _SERIES_XMAX
    mid = (~small) & (xs <= _QUAD_XMAX)
    big = xs > _QUAD_XMAX
    if np.any(small):
        out[small] = _series_eval(n, xs[small])[0]
    if np.any(mid):
        out[mid] = _quad_eval(n, xs[mid], want_err=False)[0]
    if np.any(big):
        out[big] = _asymptotic_eval(n, xs[big])[0]
    return out if np.ndim(x) else float(out[0])


def phi(n: int, x: float) -> PhiEval:
    """Evaluate phi_n(x) with diagnostics (imaginary-part residual and a
    quadrature error estimate)."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    x = float(x)
    if x < 0:
        raise DomainError("x must be nonnegative")
    if x == 0.0:
        return PhiEval(n=n, x=x, value=0.0, imag_residual=0.0, quad_error=0.0)
    xs = np.array([x])
    if x <= _SERIES_XMAX:
        v0, _, _ = _series_eval(n, xs)
        return PhiEval(n=n, x=x, value=float(v0[0]), imag_residual=0.0,
                       quad_error=1e-15 * abs(float(v0[0])) + 1e-18)
    if x <= _QUAD_XMAX:
        v0, _, _, vi, err = _quad_eval(n, xs)
        return PhiEval(n=n, x=x, value=float(v0[0]),
                       imag_residual=float(vi[0]), quad_error=float(err[0]))
    v, err = _asymptotic_eval(n, xs)
    return PhiEval(n=n, x=x, value=float(v[0]), imag_residual=0.0,
                   quad_error=float(err[0]))


def phi_derivatives(n: int, x):
    """(phi_n, phi_n', phi_n'') at scalar or array x, derivatives taken under
    the integral sign (or term by term in the series)."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise DomainError("derivative evaluation requires x > 0")
    v0 = np.empty_like(xs)
    v1 = np.empty_like(xs)
    v2 = np.empty_like(xs)
    small = xs <= _SERIES_XMAX
    mid = (~small) & (xs <= _QUAD_XMAX)
    big = xs > _QUAD_XMAX
    if np.any(small):
        v0[small], v1[small], v2[small] = _series_eval(n, xs[small])
    if np.any(mid):
        a, b, c, _, _ = _quad_eval(n, xs[mid], want_err=False)
        v0[mid], v1[mid], v2[mid] = a, b, c
    if np.any(big):
        xb = xs[big]
        v0[big] = _asymptotic_eval(n, xb)[0]
        h = 1e-3
        vp, _ = _asymptotic_eval(n, xb + h)
        vm, _ = _asymptotic_eval(n, xb - h)
        v1[big] = (vp - vm) / (2 * h)
        v2[big] = (vp - 2 * v0[big] + vm) / (h * h)
    if np.ndim(x):
        return v0, v1, v2
    return float(v0[0]), float(v1[0]), float(v2[0])


def phi_ode_residual(n: int, x: float) -> float:
    """Residual of phi'' + phi'/x - 4(1 + n^2/x^2) phi = -4/x at x > 0."""
    if x <= 0:
        raise DomainError("residual defined for x > 0")
    v0, v1, v2 = phi_derivatives(n, float(x))
    return v2 + v1 / x - 4.0 * (1.0 + (n / x) ** 2) * v0 + 4.0 / x


def phi_second_difference_residual(n: int, x: float) -> float:
    """Residual of phi_n'' = -phi_{n+1} + 2 phi_n - phi_{n-1} (n >= 2)."""
    if n < 2:
        raise DomainError("second-difference identity needs n >= 2")
    _, _, v2 = phi_derivatives(n, float(x))
    s = (-phi_values(n + 1, x) + 2.0 * phi_values(n, x)
         - phi_values(n - 1, x))
    return float(v2 - s)


@lru_cache(maxsize=32)
def psi(k: int) -> RationalFn:
    """k-th expansion function: psi_0 = x/(1+x^2),
    psi_{k+1} = x^2/(4(1+x^2)) (psi_k'' + psi_k'/x), exact over rationals."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k > 12:
        raise DomainError("recursion capped at k = 12 (coefficient growth)")
    if k == 0:
        return RationalFn(Polynomial([0, 1]), Polynomial([1, 0, 1]))
    prev = psi(k - 1)
    lap = prev.derivative().derivative() + RationalFn(
        prev.derivative().num, prev.derivative().den * Polynomial([0, 1]))
    factor = RationalFn(Polynomial([0, 0, 1]), Polynomial([4, 0, 4]))
    return factor * lap


def phi_asymptotic(n: int, x, N: int):
    """Partial sum sum_{k<=N} psi_k(x/n) / n^(2k+1) (remainder excluded)."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    if not (0 <= N <= 12):
        raise DomainError("N must lie in 0..12")
    xs = np.asarray(x, dtype=float)
    out = np.zeros_like(xs, dtype=float)
    for k in range(N + 1):
        out = out + psi(k)(xs / n) / float(n) ** (2 * k + 1)
    return out if np.ndim(x) else float(out)


def phi_lower_bound(n: int, x):
    xs = np.asarray(x, dtype=float)
    return (4.0 * n * n / (4.0 * n * n + 1.0)) * xs / (n * n + xs * xs)


def phi_upper_bound(n: int, x):
    xs = np.asarray(x, dtype=float)
    return (4.0 * n * n / (4.0 * n * n - 1.0)) * xs / (n * n + xs * xs)


def chi_lower_bound(n: int, x):
    xs = np.asarray(x, dtype=float)
    return 0.5 * (2 * n + 1.0) * xs / ((n * n + xs**2) * ((n + 1.0) ** 2 + xs**2))


def chi_upper_bound(n: int, x):
    xs = np.asarray(x, dtype=float)
    return 4.0 * (2 * n + 1.0) * xs / ((n * n + xs**2) * ((n + 1.0) ** 2 + xs**2))


@dataclass(frozen=True)
class BoundsReport:
    """Signed violation maxima for a two-sided pointwise bound check
    (nonpositive values mean the bound holds)."""

    n: int
    max_lower_violation: float
    max_upper_violation: float
    points: int

    @property
    def ok(self) -> bool:
        tol = 1e-10
        return (self.max_lower_violation <= tol
                and self.max_upper_violation <= tol)


def phi_bounds_check(n: int, x_grid) -> BoundsReport:
    """Check lower/upper envelope of phi_n on the given positive grid."""
    xs = np.asarray(x_grid, dtype=float)
    vals = phi_values(n, xs)
    lo = phi_lower_bound(n, xs)
    hi = phi_upper_bound(n, xs)
    return BoundsReport(n=n,
                        max_lower_violation=float(np.max(lo - vals)),
                        max_upper_violation=float(np.max(vals - hi)),
                        points=len(xs))


def chi_bounds_check(n: int, x_grid) -> BoundsReport:
    """Check the two-sided envelope of phi_n - phi_{n+1} on a positive grid."""
    xs = np.asarray(x_grid, dtype=float)
    chi = phi_values(n, xs) - phi_values(n + 1, xs)
    lo = chi_lower_bound(n, xs)
    hi = chi_upper_bound(n, xs)
    return BoundsReport(n=n,
                        max_lower_violation=float(np.max(lo - chi)),
                        max_upper_violation=float(np.max(chi - hi)),
                        points=len(xs))
