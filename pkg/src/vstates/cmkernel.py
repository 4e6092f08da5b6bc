"""Model catalog: radial kernels with their Bernstein measures, plus the
smooth bounded-domain corrections.

Every kernel K0 carries two independent representations that downstream code
cross-checks against each other:

* closed-form evaluators ``k0`` / ``k0_prime``;
* the nonnegative measure mu with -K0'(t) = int exp(-t x) dmu(x) (absent for
  the regularized model whose radial derivative is not completely monotone).

For the boundary functional the kernel also exposes the splitting

    K0(t) = L(t) log t + c t^(-beta) + A(t)

with L and A analytic, so periodic quadrature can treat the log part by
product weights, the power part by its exact Fourier coefficients, and the
rest by the plain trapezoid rule at spectral accuracy.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, DomainError
from .specfun.bessel import bessel_i, bessel_k
from .specfun.gammafn import gamma
from .specfun.quadrature import tanh_sinh

EULER_GAMMA = 0.5772156649015328606

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Bernstein measures


@dataclass(frozen=True)
class DensityPiece:
    """One absolutely continuous piece of a Bernstein measure.

    ``desingularized`` is required for the inverse-square-root class: it is
    sigma(x) = density(x) * sqrt(x^2 - a^2), smooth up to the left endpoint,
    so the x = a cosh(u) substitution can be applied without evaluating the
    0 * inf product.
    """

    support: tuple
    density: Callable
    left_singularity: object = "none"
    desingularized: Optional[Callable] = None

    def __post_init__(self):
        a, b = self.support
        if not (a >= 0.0 and b > a):
            raise DomainError("piece support must satisfy 0 <= a < b")
        if self.left_singularity == "inv_sqrt" and self.desingularized is None:
            raise DomainError("inv_sqrt piece needs its desingularized factor")


@dataclass(frozen=True)
class BernsteinMeasure:
    """Atoms plus density pieces of the nonnegative measure mu."""

    atoms: tuple = ()
    pieces: tuple = ()

    def __post_init__(self):
        for x, w in self.atoms:
            if x < 0.0 or w <= 0.0:
                raise DomainError("atoms need location >= 0 and weight > 0")

    def integrate(self, g, abs_tol=1e-13, rel_tol=1e-11) -> float:
        """int g(x) dmu(x) with piece-appropriate substitutions; g must be
        vectorized."""
        total = 0.0
        for x, w in self.atoms:
            total += w * float(g(np.asarray([x]))[0])
        for piece in self.pieces:
            a, b = piece.support
            if piece.left_singularity == "inv_sqrt":
                sigma = piece.desingularized
                if math.isinf(b):
                    def h(u, a=a, sigma=sigma):
                        x = a * np.cosh(u)
                        return g(x) * sigma(x)
                    val, _ = tanh_sinh(h, 0.0, math.inf, abs_tol, rel_tol,
                                       infinite=True)
                else:
                    umax = math.acosh(b / a)

                    def h(u, a=a, sigma=sigma):
                        x = a * np.cosh(u)
                        return g(x) * sigma(x)
                    val, _ = tanh_sinh(h, 0.0, umax, abs_tol, rel_tol)
            else:
                def h(x, piece=piece):
                    return g(x) * piece.density(x)
                if math.isinf(b):
                    val, _ = tanh_sinh(h, a, math.inf, abs_tol, rel_tol,
                                       infinite=True)
                else:
                    val, _ = tanh_sinh(h, a, b, abs_tol, rel_tol)
            total += val
        return total

    def laplace(self, t: float) -> float:
        """int exp(-t x) dmu(x); finite for every t > 0 by construction."""
        if t <= 0.0:
            raise DomainError("Laplace transform needs t > 0")
        return self.integrate(lambda x: np.exp(-t * x))

    def moment_laplace(self, order: int, t: float) -> float:
        """int x^order exp(-t x) dmu(x) (derivatives of -K0' by the measure)."""
        if t <= 0.0:
            raise DomainError("needs t > 0")
        with np.errstate(over="ignore", under="ignore"):
            return self.integrate(lambda x: x**order * np.exp(-t * x))


# ---------------------------------------------------------------------------
# Radial kernels


@dataclass(frozen=True)
class AlphaRange:
    """Admissible Hoelder exponents for the integrability assumption."""

    lo: float
    hi: float
    hi_inclusive: bool

    def contains(self, alpha: float) -> bool:
        if not (self.lo < alpha):
            return False
        return alpha <= self.hi if self.hi_inclusive else alpha < self.hi


@dataclass(frozen=True)
class RadialKernel:
    """A model kernel: evaluators, Bernstein measure (or None when the radial
    derivative is not completely monotone) and the log/power/analytic
    splitting used by the boundary quadrature."""

    name: str
    params: dict
    k0: Callable
    k0_prime: Callable
    measure: Optional[BernsteinMeasure]
    alpha_admissible: AlphaRange
    log_factor: Optional[Callable] = None     # L(t); None means L == const at0
    log_factor_at0: float = 0.0
    power_part: Optional[tuple] = None        # (coeff, exponent beta)
    analytic_part: Optional[Callable] = None  # A(t); None means A == const at0
    analytic_at0: float = 0.0

    @property
    def completely_monotone(self) -> bool:
        return self.measure is not None

    def k0_split(self, t):
        """Evaluate (L(t), A(t)) with the t == 0 diagonal replaced by the
        analytic limits; the log and power singular factors stay with the
        caller."""
        t = np.asarray(t, dtype=float)
        L = np.full_like(t, self.log_factor_at0)
        A = np.full_like(t, self.analytic_at0)
        pos = t > 0.0
        if self.log_factor is not None and np.any(pos):
            L[pos] = self.log_factor(t[pos])
        if self.analytic_part is not None and np.any(pos):
            A[pos] = self.analytic_part(t[pos])
        return L, A


def _check_kernel_consistency(kernel: RadialKernel):
    """Factory-time invariants: Laplace transform of mu reproduces -K0', and
    the measure is finite at sampled Laplace points."""
    if kernel.measure is None:
        return
    for t in (0.1, 1.0, 5.0):
        lap = kernel.measure.laplace(t)
        ref = -float(np.asarray(kernel.k0_prime(np.asarray([t])))[0])
        if not math.isfinite(lap):
            raise DomainError(f"measure Laplace transform infinite at t={t}")
        if abs(lap - ref) > 1e-7 * abs(ref):
            raise DomainError(
                f"{kernel.name}: measure/-K0' mismatch at t={t}: "
                f"{lap!r} vs {ref!r}")
    for t in (0.01, 100.0):
        if not math.isfinite(kernel.measure.laplace(t)):
            raise DomainError(f"measure Laplace transform infinite at t={t}")


def gsqg_prefactor(beta: float) -> float:
    """Constant multiplying |x-y|^(-beta) in the surface quasi-geostrophic
    family."""
    return gamma(beta / 2.0) / (math.pi * 2.0 ** (2.0 - beta)
                                * gamma(1.0 - beta / 2.0))


@lru_cache(maxsize=None)
def make_euler() -> RadialKernel:
    """Planar Newtonian kernel -(1/2pi) log t; measure density 1/(2pi) dx."""
    density = lambda x: np.full_like(np.asarray(x, dtype=float), 1.0 / _TWO_PI)
    measure = BernsteinMeasure(pieces=(
        DensityPiece(support=(0.0, math.inf), density=density),))
    kernel = RadialKernel(
        name="euler",
        params={},
        k0=lambda t: -np.log(t) / _TWO_PI,
        k0_prime=lambda t: -1.0 / (_TWO_PI * np.asarray(t, dtype=float)),
        measure=measure,
        alpha_admissible=AlphaRange(0.0, 1.0, False),
        log_factor=None,
        log_factor_at0=-1.0 / _TWO_PI,
    )
    _check_kernel_consistency(kernel)
    return kernel


@lru_cache(maxsize=None)
def make_gsqg(beta: float) -> RadialKernel:
    """Riesz-type kernel c_beta t^(-beta), beta in (0,1); measure density
    (c_beta / Gamma(beta)) x^beta dx."""
    beta = float(beta)
    if not (0.0 < beta < 1.0):
        raise DomainError("beta must lie in (0, 1)")
    c_beta = gsqg_prefactor(beta)
    dens_c = c_beta / gamma(beta)
    density = lambda x: dens_c * np.asarray(x, dtype=float) ** beta
    measure = BernsteinMeasure(pieces=(
        DensityPiece(support=(0.0, math.inf), density=density,
                     left_singularity=("power", beta)),))
    kernel = RadialKernel(
        name="gsqg",
        params={"beta": beta},
        k0=lambda t: c_beta * np.asarray(t, dtype=float) ** (-beta),
        k0_prime=lambda t: -beta * c_beta
        * np.asarray(t, dtype=float) ** (-beta - 1.0),
        measure=measure,
        alpha_admissible=AlphaRange(0.0, 1.0 - beta, True),
        power_part=(c_beta, beta),
    )
    _check_kernel_consistency(kernel)
    return kernel


def _k0_harmonic_series(z):
    """sum_{k>=1} H_k (z^2/4)^k / (k!)^2 (the regular companion of the
    order-zero Macdonald function); vectorized, intended for z <= ~12."""
    z = np.asarray(z, dtype=float)
    q = 0.25 * z * z
    term = np.ones_like(z)
    hk = 0.0
    acc = np.zeros_like(z)
    for k in range(1, 120):
        term = term * q / (k * k)
        hk += 1.0 / k
        acc += term * hk
        if np.max(term) * 2.0 < 1e-17 * max(float(np.max(np.abs(acc))), 1e-30):
            break
    return acc


def _qgsw_log_factor(eps):
    def L(t):
        return -bessel_i(0, eps * np.asarray(t, dtype=float)) / _TWO_PI
    return L


def _qgsw_analytic(eps):
    c = math.log(eps / 2.0) + EULER_GAMMA

    def A(t):
        t = np.asarray(t, dtype=float)
        z = eps * t
        out = np.empty_like(z)
        small = z <= 12.0
        if np.any(small):
            zs = z[small]
            out[small] = (-bessel_i(0, zs) * c
                          + _k0_harmonic_series(zs)) / _TWO_PI
        if np.any(~small):
            # A = K0(z)/2pi + I0(z) log(t)/2pi; no cancellation out here
            zl = z[~small]
            out[~small] = (bessel_k(0, zl)
                           + bessel_i(0, zl) * np.log(t[~small])) / _TWO_PI
        return out
    return A


@lru_cache(maxsize=None)
def make_qgsw(eps: float) -> RadialKernel:
    """Shallow-water kernel (1/2pi) K_0(eps t); measure density
    (1/2pi) x / sqrt(x^2 - eps^2) on (eps, inf)."""
    eps = float(eps)
    if eps <= 0.0:
        raise DomainError("eps must be positive")

    def density(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > eps,
                            x / (_TWO_PI * np.sqrt(np.maximum(x * x - eps * eps,
                                                              1e-300))),
                            0.0)

    sigma = lambda x: np.asarray(x, dtype=float) / _TWO_PI
    measure = BernsteinMeasure(pieces=(
        DensityPiece(support=(eps, math.inf), density=density,
                     left_singularity="inv_sqrt", desingularized=sigma),))
    kernel = RadialKernel(
        name="qgsw",
        params={"eps": eps},
        k0=lambda t: bessel_k(0, eps * np.asarray(t, dtype=float)) / _TWO_PI,
        k0_prime=lambda t: -eps * bessel_k(1, eps * np.asarray(t, dtype=float))
        / _TWO_PI,
        measure=measure,
        alpha_admissible=AlphaRange(0.0, 1.0, False),
        log_factor=_qgsw_log_factor(eps),
        log_factor_at0=-1.0 / _TWO_PI,
        analytic_part=_qgsw_analytic(eps),
        analytic_at0=-(math.log(eps / 2.0) + EULER_GAMMA) / _TWO_PI,
    )
    _check_kernel_consistency(kernel)
    return kernel


@lru_cache(maxsize=None)
def make_euler_alpha(alpha_param: float) -> RadialKernel:
    """Regularized planar kernel -(1/2pi) log t - (1/2pi) K_0(t/alpha).

    Its radial derivative is not completely monotone (the formal density
    changes sign past x = 1/alpha), so no Bernstein measure is attached and
    the factorized spectrum route refuses the model."""
    alpha_param = float(alpha_param)
    if alpha_param <= 0.0:
        raise DomainError("alpha must be positive")
    inv = 1.0 / alpha_param
    qg_log = _qgsw_log_factor(inv)
    qg_an = _qgsw_analytic(inv)

    def k0(t):
        t = np.asarray(t, dtype=float)
        return -np.log(t) / _TWO_PI - bessel_k(0, inv * t) / _TWO_PI

    def k0_prime(t):
        t = np.asarray(t, dtype=float)
        return -1.0 / (_TWO_PI * t) + inv * bessel_k(1, inv * t) / _TWO_PI

    kernel = RadialKernel(
        name="euler-alpha",
        params={"alpha": alpha_param},
        k0=k0,
        k0_prime=k0_prime,
        measure=None,
        alpha_admissible=AlphaRange(0.0, 1.0, False),
        log_factor=lambda t: -1.0 / _TWO_PI - qg_log(t),
        log_factor_at0=0.0,
        analytic_part=lambda t: -qg_an(t),
        analytic_at0=(math.log(inv / 2.0) + EULER_GAMMA) / _TWO_PI,
    )
    return kernel


def euler_alpha_formal_density(alpha_param: float):
    """The signed integrand whose failure of nonnegativity witnesses the loss
    of complete monotonicity: (1/2pi)(1 - x alpha / sqrt(x^2 alpha^2 - 1))
    past x = 1/alpha."""
    a = float(alpha_param)

    def rho(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(x * a > 1.0,
                            x * a / np.sqrt(np.maximum(x * a * x * a - 1.0,
                                                       1e-300)),
                            0.0)
        return (1.0 - tail) / _TWO_PI
    return rho


_KERNEL_FACTORIES = {
    "euler": (make_euler, ()),
    "gsqg": (make_gsqg, ("beta",)),
    "qgsw": (make_qgsw, ("eps",)),
    "euler-alpha": (make_euler_alpha, ("alpha",)),
}

PLANE_MODELS = ("euler", "gsqg", "qgsw", "euler-alpha")
DISC_MODELS = ("euler-disc", "gsqg-disc", "qgsw-disc")
ALL_MODELS = PLANE_MODELS + DISC_MODELS

MODEL_PARAMETERS = {
    "euler": (),
    "gsqg": ("beta",),
    "qgsw": ("eps",),
    "euler-alpha": ("alpha",),
    "euler-disc": (),
    "gsqg-disc": ("beta", "spectral_exponent"),
    "qgsw-disc": ("eps",),
}


def make_kernel(name: str, params: dict | None = None) -> RadialKernel:
    """Free-space kernel factory keyed by the CLI model identifiers (disc
    models map to their free-space part)."""
    params = dict(params or {})
    base = name[:-5] if name.endswith("-disc") else name
    if base not in _KERNEL_FACTORIES:
        raise DomainError(f"unknown kernel '{name}'")
    factory, keys = _KERNEL_FACTORIES[base]
    try:
        args = [params[k] for k in keys]
    except KeyError as exc:
        raise DomainError(f"model '{name}' needs parameter {exc}") from exc
    return factory(*args)


# ---------------------------------------------------------------------------
# Disc perturbations


@dataclass(frozen=True)
class DiscPerturbation:
    """Smooth correction K1(x,y) for a bounded-domain model; closed form or
    an eigenfunction series over Bessel zeros."""

    kind: str                       # "closed_form" | "eigenseries"
    evaluator: Callable             # (x, y complex arrays) -> real array
    series_terms: Optional[tuple] = None

    def __call__(self, x, y):
        return self.evaluator(x, y)


def make_disc_euler() -> DiscPerturbation:
    """K1(x,y) = (1/2pi) log |1 - x conj(y)| on the open unit disc."""

    def ev(x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        if np.any(np.abs(x) >= 1.0) or np.any(np.abs(y) >= 1.0):
            raise DomainError("disc kernel arguments must lie inside the disc")
        return np.log(np.abs(1.0 - x * np.conj(y))) / _TWO_PI

    return DiscPerturbation(kind="closed_form", evaluator=ev)


def make_disc_qgsw(eps: float, terms: tuple = (64, 200)) -> DiscPerturbation:
    """Eigenseries correction for the shallow-water kernel on the unit disc:
    the (zeros-of-J) expansion of the full Green function minus the
    free-space part (1/2pi) K_0(eps |x-y|).

    Arguments may touch the boundary |y| = 1 (where the full series
    telescopes to zero by construction); coincident points are rejected
    because the free-space subtraction diverges there.
    """
    from .specfun.bessel import bessel_j, bessel_j_zeros  # local: heavy setup

    eps = float(eps)
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    n_orders, k_zeros = int(terms[0]), int(terms[1])
    if n_orders < 4 or k_zeros < 20:
        raise ConvergenceError(
            "eigenseries truncation below the minimum (4 orders, 20 zeros)")
    tables = []
    for n in range(n_orders):
        z = np.asarray(bessel_j_zeros(n, k_zeros).zeros)
        jnp1 = bessel_j(n + 1, z)
        if n == 0:
            a2 = 1.0 / (math.pi * jnp1**2)
        else:
            a2 = 2.0 / (math.pi * jnp1**2)
        w = a2 / (z**2 + eps**2)
        tables.append((z, w))

    def ev(x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        if np.any(np.abs(x) > 1.0) or np.any(np.abs(y) > 1.0):
            raise DomainError("arguments must lie in the closed unit disc")
        if np.any(x == y):
            raise DomainError("eigenseries correction needs x != y")
        shape = np.broadcast_shapes(x.shape, y.shape)
        xb = np.broadcast_to(x, shape).ravel()
        yb = np.broadcast_to(y, shape).ravel()
        r1, r2 = np.abs(xb), np.abs(yb)
        dth = np.angle(xb) - np.angle(yb)
        total = np.zeros(len(xb))
        for n, (z, w) in enumerate(tables):
            j1 = bessel_j(n, np.outer(z, r1))
            j2 = bessel_j(n, np.outer(z, r2))
            radial = np.einsum("k,kp,kp->p", w, j1, j2)
            total += radial * np.cos(n * dth)
        free = bessel_k(0, eps * np.abs(xb - yb)) / _TWO_PI
        return (total - free).reshape(shape)

    return DiscPerturbation(kind="eigenseries", evaluator=ev,
                            series_terms=(n_orders, k_zeros))


# ---------------------------------------------------------------------------
# Completely-monotone-function estimate checks


@dataclass(frozen=True)
class CmfReport:
    """Margins of the pointwise derivative estimate
    t^n |f^(n)(t)| <= (n/(1-alpha))^n f(alpha t) for f = -K0'."""

    kernel: str
    n: int
    alpha: float
    max_violation: float
    margins: tuple

    @property
    def ok(self) -> bool:
        return self.max_violation <= 1e-9


def cmf_estimate_check(kernel: RadialKernel, n: int, alpha: float,
                       t_grid) -> CmfReport:
    """Evaluate the derivative estimate over a grid, with every derivative
    taken on the measure side (t^n f^(n) = (-1)^n int (tx)^n e^(-tx) dmu)."""
    if kernel.measure is None:
        raise DomainError("estimate check needs a Bernstein measure")
    if not (1 <= n <= 4):
        raise DomainError("n must lie in 1..4")
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0,1)")
    margins = []
    for t in np.asarray(t_grid, dtype=float):
        lhs = t**n * abs(kernel.measure.moment_laplace(n, t))
        rhs = (n / (1.0 - alpha)) ** n * kernel.measure.laplace(alpha * t)
        margins.append(lhs - rhs)
    return CmfReport(kernel=kernel.name, n=n, alpha=alpha,
                     max_violation=float(np.max(margins)),
                     margins=tuple(margins))


def cm_difference_check(kernel: RadialKernel, pairs):
    """Margins of 0 <= f(t1) - f(t2) <= (t2 - t1) |f'(t1)| for f = K0 with
    -f' completely monotone.  Returns the worst signed violation."""
    worst = -math.inf
    for t1, t2 in pairs:
        if not (0.0 < t1 <= t2):
            raise DomainError("need 0 < t1 <= t2")
        f1 = float(np.asarray(kernel.k0(np.asarray([t1])))[0])
        f2 = float(np.asarray(kernel.k0(np.asarray([t2])))[0])
        fp1 = float(np.asarray(kernel.k0_prime(np.asarray([t1])))[0])
        diff = f1 - f2
        worst = max(worst, -diff, diff - (t2 - t1) * abs(fp1))
    return worst


def integrability_check(kernel: RadialKernel, alpha: float,
                        a0: float = 1.0) -> tuple:
    """Value of int_0^a0 |K0(t)| t^(alpha^2 - alpha) dt and its relative
    change under refinement (both must be finite/small for the admissible
    exponents)."""
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0,1)")
    expo = -alpha + alpha * alpha

    def f(t):
        return np.abs(kernel.k0(t)) * t**expo

    coarse, _ = tanh_sinh(f, 0.0, a0, 1e-12, 1e-10, max_level=7)
    fine, _ = tanh_sinh(f, 0.0, a0, 1e-13, 1e-11, max_level=10)
    rel_change = abs(fine - coarse) / max(abs(fine), 1e-300)
    return fine, rel_change
