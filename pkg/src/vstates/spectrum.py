"""Spectrum engines for the linearized boundary operator at the radial patch.

Three independent routes to the Fourier-multiplier eigenvalues lambda_{n,b}:

* ``lambda_direct``     -- the defining trigonometric integral
                           2 int_0^pi K0(2 b sin eta) cos(2 n eta) d eta,
                           folded onto [0, pi/2] and fed to tanh-sinh nodes
                           (kernel samples cached per (kernel, b) across n);
* ``lambda_factorized`` -- the Bernstein-measure factorization
                           2 int_0^inf phi_n(b x) x^-1 dmu(x);
* closed forms          -- per-model expressions (log kernel, Gamma
                           quotients, modified-Bessel products).

On top of those: angular velocities for plane and disc models, Bessel-zero
series for the disc spectra (with Kummer acceleration and analytic tail
estimates), large-n expansion coefficients, and monotonicity/convexity
reports.
"""

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .cmkernel import (
    BernsteinMeasure,
    RadialKernel,
    gsqg_prefactor,
    make_euler,
    make_kernel,
)
from .errors import ConvergenceError, DomainError, UnsupportedMethodError
from .phi import phi_values, psi
from .specfun.bessel import bessel_i, bessel_j, bessel_j_zeros, bessel_k, bessel_j_pair
from .specfun.gammafn import gamma, gammaln
from .specfun.quadrature import _ts_level_nodes  # shared node tables


# ---------------------------------------------------------------------------
# direct trigonometric route


@lru_cache(maxsize=32)
def _fold_nodes(level: int):
    """tanh-sinh nodes/weights on (0, pi/2), new nodes of `level`."""
    t, _, q = _ts_level_nodes(level)
    h = 0.5 / 2**level
    width = 0.5 * math.pi
    d = width * q / (1.0 + q)
    eta = np.where(t < 0, d, width - d)
    w = h * 0.5 * math.pi * np.cosh(t) * 4.0 * q / (1.0 + q) ** 2 * (0.5 * width)
    keep = (eta > 0.0) & (eta < width)
    eta, w = eta[keep], w[keep]
    for arr in (eta, w):
        arr.setflags(write=False)
    return eta, w


_DIRECT_CACHE: dict = {}


def _kernel_key(kernel: RadialKernel, b: float):
    return (kernel.name, tuple(sorted(kernel.params.items())), float(b))


def _direct_level_data(kernel: RadialKernel, b: float, level: int):
    """(K0 values, cos factors base eta, weights) at this level, cached."""
    key = (_kernel_key(kernel, b), level)
    hit = _DIRECT_CACHE.get(key)
    if hit is None:
        eta, w = _fold_nodes(level)
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            vals = np.asarray(kernel.k0(2.0 * b * np.sin(eta)), dtype=float)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        hit = (eta, w, vals)
        if len(_DIRECT_CACHE) > 512:
            _DIRECT_CACHE.clear()
        _DIRECT_CACHE[key] = hit
    return hit


def lambda_direct(kernel: RadialKernel, n: int, b: float,
                  abs_tol: float = 1e-13, rel_tol: float = 1e-11,
                  max_level: int = 11) -> float:
    """lambda_{n,b} by quadrature of the defining trigonometric integral.

    The integrand is folded onto [0, pi/2] (cos(2n eta) is symmetric about
    pi/2 there), leaving a single singular endpoint at 0 where sin evaluates
    accurately, and integrated on double-exponential nodes with level
    doubling until two refinements agree.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    if b <= 0.0:
        raise DomainError("patch radius b must be positive")
    total = None
    prev = math.inf
    for level in range(0, max_level + 1):
        eta, w, vals = _direct_level_data(kernel, b, level)
        contrib = 4.0 * float(np.sum(vals * np.cos(2.0 * n * eta) * w))
        total = contrib if total is None else 0.5 * total + contrib
        if level >= 4:
            err = abs(total - prev)
            if err <= max(abs_tol, rel_tol * abs(total)):
                return total
        prev = total
    raise ConvergenceError(
        f"direct spectral integral stalled for n={n}, b={b}",
        estimate=total, error_bound=abs(total - prev))


def lambda_factorized(kernel: RadialKernel, n: int, b: float) -> float:
    """lambda_{n,b} = 2 int_0^inf phi_n(b x) x^-1 dmu(x) (Bernstein route)."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    if b <= 0.0:
        raise DomainError("patch radius b must be positive")
    if kernel.measure is None:
        raise UnsupportedMethodError(
            f"kernel '{kernel.name}' is not completely monotone; "
            "the factorized route does not apply")

    def g(x):
        return phi_values(n, b * x) / x

    return 2.0 * kernel.measure.integrate(g, abs_tol=1e-14, rel_tol=1e-11)


# ---------------------------------------------------------------------------
# closed forms


def gsqg_lambda_prefactor(beta: float) -> float:
    """Gamma(1-beta) / (2^(1-beta) Gamma(1-beta/2)^2): the n-independent
    factor of the Riesz-kernel spectrum (equals the leading expansion
    coefficient of that family)."""
    return gamma(1.0 - beta) / (2.0 ** (1.0 - beta) * gamma(1.0 - beta / 2.0) ** 2)


def lambda_closed(kernel: RadialKernel, n: int, b: float) -> Optional[float]:
    """Registered closed form of lambda_{n,b}, or None."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    if b <= 0.0:
        raise DomainError("patch radius b must be positive")
    name = kernel.name
    if name == "euler":
        return 1.0 / (2.0 * n)  # radius-independent
    if name == "gsqg":
        beta = kernel.params["beta"]
        return (b ** (-beta) * gsqg_lambda_prefactor(beta)
                * math.exp(gammaln(n + beta / 2.0) - gammaln(n + 1.0 - beta / 2.0)))
    if name == "qgsw":
        z = b * kernel.params["eps"]
        return bessel_i(n, z) * bessel_k(n, z)
    if name == "euler-alpha":
        z = b / kernel.params["alpha"]
        return 1.0 / (2.0 * n) - bessel_i(n, z) * bessel_k(n, z)
    return None


_METHODS = ("auto", "closed", "direct", "factorized")


def lambda_best(kernel: RadialKernel, n: int, b: float,
                method: str = "auto"):
    """(value, method_used).  'auto' prefers a registered closed form, then
    the direct quadrature.  The regularized kernel is served exclusively by
    its closed form."""
    if method not in _METHODS:
        raise DomainError(f"unknown method '{method}'")
    if kernel.name == "euler-alpha" and method in ("direct", "factorized"):
        if method == "factorized":
            raise UnsupportedMethodError(
                "euler-alpha is not completely monotone")
        raise UnsupportedMethodError(
            "euler-alpha spectra are served by the closed form only")
    if method == "closed" or method == "auto":
        v = lambda_closed(kernel, n, b)
        if v is not None:
            return v, "closed"
        if method == "closed":
            raise UnsupportedMethodError(
                f"no closed form registered for '{kernel.name}'")
    if method == "factorized":
        return lambda_factorized(kernel, n, b), "factorized"
    return lambda_direct(kernel, n, b), "direct"


def omega0(kernel: RadialKernel, n: int, b: float,
           method: str = "auto") -> float:
    """Angular velocity of the n-th neutral mode for a pure convolution
    kernel: lambda_{1,b} - lambda_{n,b}."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    lam1, _ = lambda_best(kernel, 1, b, method)
    lamn, _ = lambda_best(kernel, n, b, method)
    return lam1 - lamn


# ---------------------------------------------------------------------------
# disc models


def euler_disc_omega_closed(n: int, b: float) -> float:
    """(n - 1 + b^(2n)) / (2n) for the log kernel on the unit disc."""
    _check_disc_b(b)
    if n < 1:
        raise DomainError("n must be a positive integer")
    return (n - 1.0 + b ** (2 * n)) / (2.0 * n)


def _check_disc_b(b: float):
    if not (0.0 < b < 1.0):
        raise DomainError("disc models require patch radius b in (0, 1)")


def euler_disc_omega_integral(n: int, b: float,
                              n_eta: int = 2048, n_rho: int = 48) -> float:
    """Integral route for the disc log-kernel angular velocity:
    Omega = Omega^0 + Omega^1 with

      Omega^1 = -(1/b) II[d_rho1 G1] - int K1(b, b e^(i eta)) cos(n eta),

    both integrals done by trapezoid (periodic) x Gauss-Legendre (radial).
    Cross-checks the closed form without sharing any algebra with it."""
    from .specfun.quadrature import gauss_legendre

    _check_disc_b(b)
    om0 = omega0(make_euler(), n, 1.0)  # radius-independent for the log kernel
    eta = 2.0 * math.pi * np.arange(n_eta) / n_eta
    w_eta = 2.0 * math.pi / n_eta
    xg, wg = gauss_legendre(n_rho)
    rho = 0.5 * b * (1.0 + xg)
    w_rho = 0.5 * b * wg
    # d/d rho1 of (1/4pi) log(1 - 2 rho1 rho cos eta + rho1^2 rho^2) at rho1=b
    ct = np.cos(eta)
    num = 2.0 * b * rho[:, None] ** 2 - 2.0 * rho[:, None] * ct[None, :]
    den = 1.0 - 2.0 * b * rho[:, None] * ct[None, :] + (b * rho[:, None]) ** 2
    integrand = num / den / (4.0 * math.pi)
    i_rad = float(np.sum((integrand * rho[:, None]) * w_rho[:, None]) * w_eta)
    # cosine moment of K1 on the circle of radius b
    k1_circ = np.log(b**4 + 1.0 - 2.0 * b * b * ct) / (4.0 * math.pi)
    i_cos = float(np.sum(k1_circ * np.cos(n * eta)) * w_eta)
    return om0 - i_rad / b - i_cos


def lambda_qgsw_disc(n: int, b: float, eps: float) -> float:
    """Closed form of the disc shallow-water multiplier,
    I_n(b eps) K_n(b eps) - (K_n(eps)/I_n(eps)) I_n(b eps)^2."""
    _check_disc_b(b)
    if n < 1:
        raise DomainError("n must be a positive integer")
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    ib = bessel_i(n, b * eps)
    return ib * bessel_k(n, b * eps) - (bessel_k(n, eps) / bessel_i(n, eps)) * ib * ib


def _disc_series_weights(n: int, b: float, k_zeros: int):
    """(zeros, J_n(b z)^2 / J_{n+1}(z)^2) for the zero-sum spectra."""
    z = np.asarray(bessel_j_zeros(n, k_zeros).zeros)
    jn = bessel_j(n, b * z)
    jn1 = bessel_j(n + 1, z)
    return z, (jn / jn1) ** 2


def lambda_qgsw_disc_series(n: int, b: float, eps: float,
                            terms: int = 200, accelerate: bool = True) -> float:
    """Bessel-zero series route to the disc shallow-water multiplier,
    2 sum_k (z_k^2 + eps^2)^-1 J_n(b z_k)^2 / J_{n+1}(z_k)^2.

    The raw partial sums converge like 1/K (terms decay as k^-2 with an
    oscillating numerator), so by default the series is rewritten against its
    eps -> 0 comparison series, whose value (1-b^(2n))/(2n) is known in
    closed form; the leftover terms decay like k^-4 and 200 zeros give ~1e-9.
    """
    _check_disc_b(b)
    if n < 1:
        raise DomainError("n must be a positive integer")
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    if terms < 20:
        raise DomainError("need at least 20 zeros")
    z, ratio = _disc_series_weights(n, b, terms)
    if not accelerate:
        return float(np.sum(2.0 * ratio / (z**2 + eps**2)))
    base = (1.0 - b ** (2 * n)) / (2.0 * n)
    corr = -2.0 * eps**2 * np.sum(ratio / (z**2 * (z**2 + eps**2)))
    return base + float(corr)


def qgsw_disc_v0(b: float, eps: float, terms: int = 300) -> float:
    """The constant transport coefficient of the disc shallow-water model,
    -2 sum_k (z_{0,k}^2+eps^2)^-1 J_1(b z_{0,k})^2 / J_1(z_{0,k})^2,
    Kummer-accelerated against its eps -> 0 value -1/2."""
    _check_disc_b(b)
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    z = np.asarray(bessel_j_zeros(0, terms).zeros)
    j1b = bessel_j(1, b * z)
    j1 = bessel_j(1, z)
    ratio = (j1b / j1) ** 2
    # sum_k z^-2 ratio = 1/4 exactly (independent of b)
    corr = eps**2 * np.sum(ratio / (z**2 * (z**2 + eps**2)))
    return -0.5 + 2.0 * float(corr)


def qgsw_disc_omega(n: int, b: float, eps: float) -> float:
    """Omega_{n,b} = -V[0] - Lambda_{n,b} for the disc shallow-water model."""
    return -qgsw_disc_v0(b, eps) - lambda_qgsw_disc(n, b, eps)


def _mcmahon_zeros(n: int, ks):
    """McMahon approximation of the k-th zeros of J_n (used for tail sums
    only, never as final values)."""
    beta = (ks + 0.5 * n - 0.25) * math.pi
    mu = 4.0 * n * n
    return beta - (mu - 1.0) / (8.0 * beta) \
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta) ** 3)


def lambda_gsqg_disc_series(n: int, b: float, spectral_exponent: float,
                            terms: int = 200, tail_estimate: bool = True,
                            tol: float = 1e-4) -> float:
    """Zero-sum multiplier for the disc Riesz-kernel family,
    2 sum_k z_k^(s-2) J_n(b z_k)^2 / J_{n+1}(z_k)^2, s = spectral_exponent.

    The truncated sum is completed from the growth z_k ~ k pi: an explicit
    window of asymptotic terms (McMahon zeros, amplitude
    J_n(bz)^2/J_{n+1}(z)^2 ~ cos^2(bz - (2n+1)pi/4)/b) plus the integrated
    mean of the remaining envelope.  Terms decay like k^(s-2), so for s >= 1
    the sum has no absolutely convergent tail and a convergence failure is
    raised when an estimate is requested.
    """
    _check_disc_b(b)
    if n < 1:
        raise DomainError("n must be a positive integer")
    if not spectral_exponent < 2.0:
        raise DomainError("spectral exponent must be < 2 for summability")
    if terms < 50:
        raise DomainError("need at least 50 zeros")
    s = float(spectral_exponent)
    z, ratio = _disc_series_weights(n, b, terms)
    partial = 2.0 * float(np.sum(z ** (s - 2.0) * ratio))
    if not tail_estimate:
        return partial
    if s >= 1.0:
        raise ConvergenceError(
            f"tail terms decay like k^({s-2:.2f}): tail estimate cannot "
            f"reach tolerance {tol:g}", estimate=partial, error_bound=math.inf)
    phase = (2 * n + 1) * math.pi / 4.0
    ks = np.arange(terms + 1, max(200_000, 100 * terms), dtype=float)
    zk = _mcmahon_zeros(n, ks)
    tail = float(np.sum(2.0 * zk ** (s - 2.0) * np.cos(b * zk - phase) ** 2 / b))
    # remaining mean envelope: terms average cos^2 -> 1/2, zeros step ~ pi
    z_end = zk[-1] + math.pi
    tail += z_end ** (s - 1.0) / ((1.0 - s) * math.pi * b)
    # dominant neglected piece: O(1/k) corrections to the asymptotic forms
    form_err = 2.0 / (b * math.pi ** 2) * terms ** (s - 2.0) / (2.0 - s) * 4.0
    if form_err > tol:
        raise ConvergenceError(
            f"tail estimate error {form_err:.2e} exceeds tolerance {tol:g}",
            estimate=partial + tail, error_bound=form_err)
    return partial + tail


def gsqg_disc_v0_series(b: float, spectral_exponent: float,
                        terms: int = 400) -> float:
    """Companion transport constant -2 sum_k z_{0,k}^(s-2)
    J_1(b z_{0,k})^2 / J_1(z_{0,k})^2 of the disc Riesz family."""
    _check_disc_b(b)
    if not spectral_exponent < 2.0:
        raise DomainError("spectral exponent must be < 2")
    z = np.asarray(bessel_j_zeros(0, terms).zeros)
    ratio = (bessel_j(1, b * z) / bessel_j(1, z)) ** 2
    return -2.0 * float(np.sum(z ** (spectral_exponent - 2.0) * ratio))


def omega_disc(model: str, n: int, b: float, params: dict | None = None,
               method: str = "auto") -> float:
    """Angular velocity of mode n for a bounded-domain model."""
    params = dict(params or {})
    _check_disc_b(b)
    if n < 1:
        raise DomainError("n must be a positive integer")
    if model == "euler-disc":
        if method == "integral":
            return euler_disc_omega_integral(n, b)
        return euler_disc_omega_closed(n, b)
    if model == "qgsw-disc":
        return qgsw_disc_omega(n, b, params["eps"])
    if model == "gsqg-disc":
        s = params.get("spectral_exponent", params.get("beta"))
        if s is None:
            raise DomainError("gsqg-disc needs spectral_exponent (or beta)")
        terms = int(params.get("terms", 300))
        v0 = gsqg_disc_v0_series(b, s, terms)
        lam = lambda_gsqg_disc_series(n, b, s, terms)
        return -v0 - lam
    raise DomainError(f"unknown disc model '{model}'")


# ---------------------------------------------------------------------------
# large-n expansion coefficients


@dataclass(frozen=True)
class AsymptoticCoeffs:
    """Expansion data: exact constants for scale-invariant measures, or
    integral handles I_k(n, b) otherwise."""

    kernel: str
    kind: str                       # "constants" | "handles"
    values: tuple                   # floats or callables
    errors: tuple = ()

    def partial_sum(self, n: int, b: float) -> float:
        if self.kind == "constants":
            if self.kernel == "gsqg":
                raise RuntimeError("use lambda_partial_sum for scaling")
            return sum(a / n ** (2 * k + 1) for k, a in enumerate(self.values))
        return sum(h(n, b) / n ** (2 * k + 1)
                   for k, h in enumerate(self.values))


def asymptotic_coeffs(kernel: RadialKernel, N: int, b: float = 1.0) -> AsymptoticCoeffs:
    """Coefficients A_k = 2 int psi_k(x) x^-1 dmu(x) of the large-n expansion
    (normalized at b = 1 for the scale-invariant families; integral handles
    in n and b otherwise)."""
    if kernel.measure is None:
        raise UnsupportedMethodError(
            f"kernel '{kernel.name}' has no Bernstein measure")
    if not (0 <= N <= 12):
        raise DomainError("N must lie in 0..12")
    if kernel.name in ("euler", "gsqg"):
        vals, errs = [], []
        for k in range(N + 1):
            pk = psi(k)

            def g(x, pk=pk):
                with np.errstate(invalid="ignore", divide="ignore"):
                    out = pk(x) / x
                return np.where(np.isfinite(out), out, 0.0)
            v = 2.0 * kernel.measure.integrate(g, abs_tol=1e-14, rel_tol=1e-12)
            if not math.isfinite(v):
                raise ConvergenceError(
                    f"coefficient integral k={k} diverged", estimate=v)
            vals.append(v)
            errs.append(1e-12 * max(abs(v), 1.0))
        return AsymptoticCoeffs(kernel=kernel.name, kind="constants",
                                values=tuple(vals), errors=tuple(errs))

    def make_handle(k):
        pk = psi(k)

        def handle(n, bb):
            def g(x):
                with np.errstate(invalid="ignore", divide="ignore"):
                    out = pk(bb * x / n) / x
                return np.where(np.isfinite(out), out, 0.0)
            return 2.0 * kernel.measure.integrate(g, abs_tol=1e-14,
                                                  rel_tol=1e-12)
        return handle

    return AsymptoticCoeffs(kernel=kernel.name, kind="handles",
                            values=tuple(make_handle(k) for k in range(N + 1)))


def lambda_partial_sum(kernel: RadialKernel, n: int, b: float, N: int,
                       coeffs: AsymptoticCoeffs | None = None) -> float:
    """N-term large-n expansion of lambda_{n,b} for this kernel."""
    coeffs = coeffs or asymptotic_coeffs(kernel, N, b)
    if coeffs.kind == "constants":
        if kernel.name == "gsqg":
            beta = kernel.params["beta"]
            return b ** (-beta) * sum(
                a / n ** (2 * k + 1 - beta) for k, a in enumerate(coeffs.values[:N + 1]))
        return sum(a / n ** (2 * k + 1) for k, a in enumerate(coeffs.values[:N + 1]))
    return sum(h(n, b) / n ** (2 * k + 1)
               for k, h in enumerate(coeffs.values[:N + 1]))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class MonotonicityReport:
    model: str
    b: float
    omegas: tuple
    diffs: tuple
    brackets: tuple            # (D_n, ok) pairs for CM kernels, () otherwise
    first_violation: Optional[int]
    cubic_constant: Optional[tuple]  # (min, max) of diff * n^3 on the fit range

    @property
    def strictly_increasing(self) -> bool:
        return self.first_violation is None


def monotonicity_report(kernel_or_model, n_max: int, b: float,
                        params: dict | None = None) -> MonotonicityReport:
    """Per-mode angular-velocity differences, the measure-side two-sided
    bracket for completely monotone kernels, and a fitted cubic lower-bound
    constant."""
    if isinstance(kernel_or_model, RadialKernel):
        kernel = kernel_or_model
        omegas = [omega0(kernel, n, b) for n in range(1, n_max + 1)]
        name = kernel.name
    else:
        kernel = None
        name = str(kernel_or_model)
        omegas = [omega_disc(name, n, b, params) for n in range(1, n_max + 1)]
    diffs = [omegas[i + 1] - omegas[i] for i in range(len(omegas) - 1)]
    first_violation = None
    for i, d in enumerate(diffs):
        if d <= 0.0:
            first_violation = i + 1  # mode index n where Omega_{n+1} <= Omega_n
            break
    brackets = ()
    if kernel is not None and kernel.measure is not None:
        rows = []
        for i, d in enumerate(diffs):
            n = i + 1

            def g(x, n=n):
                bx2 = (b * x) ** 2
                return b * (2 * n + 1.0) / ((n * n + bx2) * ((n + 1.0) ** 2 + bx2))
            dn = kernel.measure.integrate(g, abs_tol=1e-14, rel_tol=1e-11)
            rows.append((dn, 0.5 * dn - 1e-12 <= d <= 4.0 * dn + 1e-12))
        brackets = tuple(rows)
    cubic = None
    lo_fit = [d * (i + 1) ** 3 for i, d in enumerate(diffs) if 8 <= i + 1]
    if lo_fit:
        cubic = (min(lo_fit), max(lo_fit))
    return MonotonicityReport(model=name, b=b, omegas=tuple(omegas),
                              diffs=tuple(diffs), brackets=brackets,
                              first_violation=first_violation,
                              cubic_constant=cubic)


@dataclass(frozen=True)
class ConvexityReport:
    model: str
    b: float
    second_differences: tuple   # entries for n = 2 .. n_max-1
    min_second_difference: float
    hypotheses_hold: bool
    status: str                 # "theorem" | "conjecture"

    @property
    def convex(self) -> bool:
        return self.min_second_difference >= -1e-12


def convexity_report(kernel: RadialKernel, n_max: int, b: float) -> ConvexityReport:
    """Second differences lambda_{n+1} + lambda_{n-1} - 2 lambda_n and the
    density-hypothesis flags (smooth x-weighted density on all of (0, inf),
    convex, with the right limits).  Kernels whose measure density has a
    jump or restricted support get the 'conjecture' flag."""
    lams = [lambda_best(kernel, n, b)[0] for n in range(1, n_max + 1)]
    sd = [lams[i + 1] + lams[i - 1] - 2.0 * lams[i]
          for i in range(1, len(lams) - 1)]
    hypotheses = False
    if kernel.measure is not None and kernel.measure.pieces:
        hypotheses = all(
            p.support[0] == 0.0 and p.left_singularity in ("none",)
            or (isinstance(p.left_singularity, tuple)
                and p.left_singularity[0] == "power")
            for p in kernel.measure.pieces) and not kernel.measure.atoms
        # sampled convexity of f(x) = density(x)/x on the interior
        if hypotheses:
            xs = np.logspace(-2, 2, 41)
            h = 1e-4
            for p in kernel.measure.pieces:
                f = lambda x: p.density(x) / x
                f2 = (f(xs * (1 + h)) - 2 * f(xs) + f(xs * (1 - h))) / (xs * h) ** 2
                if np.any(f2 < -1e-6 * np.max(np.abs(f2))):
                    hypotheses = False
    return ConvexityReport(model=kernel.name, b=b,
                           second_differences=tuple(sd),
                           min_second_difference=float(min(sd)) if sd else 0.0,
                           hypotheses_hold=hypotheses,
                           status="theorem" if hypotheses else "conjecture")


# ---------------------------------------------------------------------------
# spectrum tables and serialization


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    lam: float
    omega: float
    method: str
    err: float


@dataclass(frozen=True)
class SpectrumTable:
    model: str
    params: dict
    b: float
    entries: tuple
    checks: dict = field(default_factory=dict)

    def to_json(self, metadata: dict | None = None) -> str:
        doc = {
            "model": self.model,
            "params": self.params,
            "b": self.b,
            "entries": [
                {"n": e.n, "lambda": e.lam, "omega": e.omega,
                 "method": e.method, "err": e.err}
                for e in self.entries
            ],
            "checks": self.checks,
        }
        if metadata:
            doc["metadata"] = metadata
        return json.dumps(doc, indent=2)

    def to_csv(self, metadata: dict | None = None) -> str:
        lines = []
        for key, val in (metadata or {}).items():
            lines.append(f"# {key}={val}")
        lines.append("n,lambda,omega,method,err_estimate")
        for e in self.entries:
            lines.append(f"{e.n},{e.lam!r},{e.omega!r},{e.method},{e.err!r}")
        return "\n".join(lines) + "\n"


def build_spectrum_table(model: str, params: dict, b: float, n_max: int,
                         method: str = "auto") -> SpectrumTable:
    """Spectrum rows for n = 1..n_max plus the monotonicity check fields."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    params = dict(params or {})
    entries = []
    if model.endswith("-disc"):
        _check_disc_b(b)
        for n in range(1, n_max + 1):
            if model == "euler-disc":
                lam = 0.5 - euler_disc_omega_closed(n, b)  # -V[0] - Omega
                om = euler_disc_omega_closed(n, b)
                meth, err = "closed", 1e-15
            elif model == "qgsw-disc":
                lam = lambda_qgsw_disc(n, b, params["eps"])
                om = -qgsw_disc_v0(b, params["eps"]) - lam
                meth, err = "closed", 1e-9
            else:
                s = params.get("spectral_exponent", params.get("beta"))
                if s is None:
                    raise DomainError(
                        "gsqg-disc needs spectral_exponent (or beta)")
                lam = lambda_gsqg_disc_series(n, b, s, int(params.get("terms", 300)))
                om = -gsqg_disc_v0_series(b, s) - lam
                meth, err = "closed", 1e-6
            entries.append(SpectrumEntry(n=n, lam=lam, omega=om,
                                         method=meth, err=err))
    else:
        kernel = make_kernel(model, params)
        for n in range(1, n_max + 1):
            lam, meth = lambda_best(kernel, n, b, method)
            om = omega0(kernel, n, b, method)
            err = 1e-15 if meth == "closed" else 1e-10
            entries.append(SpectrumEntry(n=n, lam=lam, omega=om,
                                         method=meth, err=err))
    omegas = [e.omega for e in entries]
    first_violation = None
    for i in range(len(omegas) - 1):
        if omegas[i + 1] <= omegas[i]:
            first_violation = i + 1
            break
    checks = {"monotone": first_violation is None,
              "first_violation": first_violation}
    return SpectrumTable(model=model, params=params, b=b,
                         entries=tuple(entries), checks=checks)
