"""Nonlinear boundary functional of rotating patches, its linearization at
the radial state, bifurcation points, and amplitude continuation of m-fold
branches.

The boundary is parametrized as sqrt(b^2 + 2 r(theta)) e^(i theta) with r in
the m-fold cosine space; the rotating-state condition is

    F(Omega, r) = Omega r'(theta) + d/dtheta int_patch K(z(theta), y) dy = 0.

The area integral's gradient is pushed to the boundary by the divergence
theorem, leaving one periodic integral with the kernel's radial singularity
on the diagonal.  Quadrature splits the kernel as
L(t) log t + c t^(-beta) + A(t) (see cmkernel): the log part goes through
spectral product weights built from the Fourier series of log|2 sin(u/2)|,
the power part through product weights built from the exact Fourier
coefficients of |2 sin(u/2)|^(-beta), and everything analytic through the
plain trapezoid rule.  For the disc model the smooth image-kernel correction
is integrated by a tensor rule (trapezoid in angle, Gauss-Legendre radially).
"""

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .cmkernel import RadialKernel, make_kernel
from .errors import ConvergenceError, DomainError, UnsupportedMethodError
from .spectrum import (
    euler_disc_omega_closed,
    monotonicity_report,
    omega0,
    omega_disc,
)
from .specfun.gammafn import gammaln, gamma
from .specfun.quadrature import gauss_legendre

CONTOUR_MODELS = ("euler", "gsqg", "qgsw", "euler-alpha", "euler-disc")


# ---------------------------------------------------------------------------
# boundary representation


@dataclass(frozen=True)
class PatchBoundary:
    """m-fold symmetric boundary r(theta) = sum_j coeffs[j-1] cos(j m theta).

    The radius sqrt(b^2 + 2r) must stay real and positive; membership in the
    m-fold cosine space holds by construction.
    """

    fold: int
    base_radius: float
    coeffs: tuple
    grid_size: int

    def __post_init__(self):
        if self.fold < 1:
            raise DomainError("fold must be a positive integer")
        if self.base_radius <= 0.0:
            raise DomainError("base radius must be positive")
        if self.grid_size < 8 or self.grid_size % 2:
            raise DomainError("grid_size must be an even integer >= 8")
        th = np.linspace(0.0, 2.0 * math.pi / self.fold, 512, endpoint=False)
        if np.min(self.base_radius**2 + 2.0 * self._r_on(th)) <= 0.0:
            raise DomainError("boundary radius collapses: b^2 + 2 r <= 0")

    def _r_on(self, theta):
        r = np.zeros_like(theta)
        for j, c in enumerate(self.coeffs, start=1):
            r += c * np.cos(j * self.fold * theta)
        return r

    def theta_grid(self):
        return 2.0 * math.pi * np.arange(self.grid_size) / self.grid_size

    def r(self, theta=None):
        theta = self.theta_grid() if theta is None else np.asarray(theta)
        return self._r_on(theta)

    def r_prime(self, theta=None):
        theta = self.theta_grid() if theta is None else np.asarray(theta)
        rp = np.zeros_like(theta)
        for j, c in enumerate(self.coeffs, start=1):
            rp -= c * j * self.fold * np.sin(j * self.fold * theta)
        return rp

    def radius(self, theta=None):
        return np.sqrt(self.base_radius**2 + 2.0 * self.r(theta))

    def max_radius(self) -> float:
        th = np.linspace(0.0, 2.0 * math.pi / self.fold, 1024, endpoint=False)
        return float(np.max(np.sqrt(self.base_radius**2 + 2.0 * self._r_on(th))))


# ---------------------------------------------------------------------------
# contour models


@dataclass(frozen=True)
class ContourModel:
    """Pointwise-evaluable model: free-space kernel plus, on the disc, the
    closed-form image correction."""

    name: str
    kernel: RadialKernel
    params: dict
    disc: bool


def contour_model(name: str, params: dict | None = None) -> ContourModel:
    params = dict(params or {})
    if name in ("gsqg-disc", "qgsw-disc"):
        raise UnsupportedMethodError(
            f"model '{name}' has no pointwise kernel at spectral accuracy; "
            "spectra are available, boundary evaluation is not")
    if name not in CONTOUR_MODELS:
        raise DomainError(f"unknown contour model '{name}'")
    return ContourModel(name=name, kernel=make_kernel(name, params),
                        params=params, disc=(name == "euler-disc"))


# ---------------------------------------------------------------------------
# product-quadrature weights for the diagonal singularities


@lru_cache(maxsize=16)
def _log_weight_row(n_grid: int):
    """Row of the circulant product rule for int log|2 sin((eta-theta)/2)|
    g(eta) d eta on a uniform n_grid-point grid (Fourier coefficients of the
    log kernel are -1/(2|k|))."""
    k = np.arange(1, n_grid // 2)
    dth = 2.0 * math.pi * np.arange(n_grid) / n_grid
    row = -(2.0 * math.pi / n_grid) * (
        (np.cos(np.outer(dth, k)) / k).sum(axis=1)
        + np.cos(0.5 * n_grid * dth) / n_grid)
    row.setflags(write=False)
    return row


@lru_cache(maxsize=16)
def _power_weight_row(n_grid: int, beta: float):
    """Circulant product rule for int |2 sin((eta-theta)/2)|^(-beta) g(eta):
    built from the exact Fourier coefficients
    s_k = (Gamma(1-beta) sin(pi beta/2)/pi) Gamma(k+beta/2)/Gamma(k+1-beta/2).
    """
    pref = gamma(1.0 - beta) * math.sin(0.5 * math.pi * beta) / math.pi
    ks = np.arange(0, n_grid // 2 + 1)
    sk = pref * np.exp(np.array(
        [gammaln(k + 0.5 * beta) - gammaln(k + 1.0 - 0.5 * beta) for k in ks]))
    dth = 2.0 * math.pi * np.arange(n_grid) / n_grid
    row = np.full(n_grid, sk[0])
    for k in ks[1:-1]:
        row += 2.0 * sk[k] * np.cos(k * dth)
    row += sk[-1] * np.cos(0.5 * n_grid * dth)
    row *= 2.0 * math.pi / n_grid
    row.setflags(write=False)
    return row


@lru_cache(maxsize=16)
def _circulant(n_grid: int, kind: str, beta: float = 0.0):
    row = _log_weight_row(n_grid) if kind == "log" else _power_weight_row(n_grid, beta)
    idx = (np.arange(n_grid)[None, :] - np.arange(n_grid)[:, None]) % n_grid
    mat = row[idx]
    mat.setflags(write=False)
    return mat


# ---------------------------------------------------------------------------
# the functional


def _boundary_arrays(boundary: PatchBoundary):
    th = boundary.theta_grid()
    r = boundary.r()
    rp = boundary.r_prime()
    rad2 = boundary.base_radius**2 + 2.0 * r
    if np.min(rad2) <= 0.0:
        raise DomainError("boundary radius collapses on the grid")
    rad = np.sqrt(rad2)
    eix = np.exp(1j * th)
    z = rad * eix
    zp = (rp / rad + 1j * rad) * eix
    return th, r, rp, rad, z, zp


def _disc_image_term(z_pts, boundary: PatchBoundary, n_rho: int = 24):
    """Tensor quadrature of the image-kernel gradient over the patch:
    -(1/2pi) int int rho^2 e^(i eta) / (1 - conj(x) rho e^(i eta)) drho deta
    at each evaluation point x."""
    th = boundary.theta_grid()
    rad = boundary.radius()
    n = boundary.grid_size
    xg, wg = gauss_legendre(n_rho)
    rho = 0.5 * rad[None, :] * (1.0 + xg[:, None])     # (n_rho, n)
    wr = 0.5 * rad[None, :] * wg[:, None]
    eie = np.exp(1j * th)[None, :]
    out = np.empty(len(z_pts), dtype=complex)
    base = rho * eie
    w2 = rho * rho * wr * (2.0 * math.pi / n)
    for i, x in enumerate(np.conj(z_pts)):
        out[i] = -np.sum(w2 * eie / (1.0 - x * base)) / (2.0 * math.pi)
    return out


def evaluate_F(model: ContourModel, omega: float,
               boundary: PatchBoundary) -> np.ndarray:
    """The rotating-patch residual on the collocation grid.

    Output lies (numerically) in the odd m-fold sine space; see
    :func:`fourier_mode_split` for the membership diagnostic.
    """
    if model.disc and boundary.max_radius() >= 1.0:
        raise DomainError("patch leaves the unit disc")
    th, r, rp, rad, z, zp = _boundary_arrays(boundary)
    n = boundary.grid_size
    kernel = model.kernel
    dist = np.abs(z[:, None] - z[None, :])
    s2 = np.abs(2.0 * np.sin(0.5 * (th[None, :] - th[:, None])))
    np.fill_diagonal(s2, 1.0)
    cmat = dist / s2
    np.fill_diagonal(cmat, np.abs(zp))
    L, A = kernel.k0_split(dist)
    # boundary integral of K0 against the tangent: singular log part by
    # product weights, power part likewise, analytic rest by trapezoid
    g_log = L * zp[None, :]
    f00 = (_circulant(n, "log") * g_log).sum(axis=1)
    f00 += ((L * np.log(cmat) + A) * zp[None, :]).sum(axis=1) * (2.0 * math.pi / n)
    if kernel.power_part is not None:
        coeff, beta = kernel.power_part
        with np.errstate(divide="ignore"):
            g_pow = coeff * cmat ** (-beta) * zp[None, :]
        f00 += (_circulant(n, "power", beta) * g_pow).sum(axis=1)
    f0vec = 1j * f00
    if model.disc:
        f0vec = f0vec + _disc_image_term(z, boundary)
    return omega * rp + np.real(f0vec * np.conj(zp))


def fourier_mode_split(values: np.ndarray, fold: int):
    """(sin coefficients on the j*fold lattice, max stray amplitude).

    The stray amplitude collects every cosine mode and every frequency off
    the fold lattice; it is the numerical membership test for the odd m-fold
    space."""
    n = len(values)
    spec = np.fft.rfft(values) / n
    sin_coeffs = {}
    stray = abs(spec[0].real)
    for k in range(1, len(spec)):
        c = 2.0 * spec[k]
        if k % fold == 0:
            sin_coeffs[k // fold] = -c.imag
            stray = max(stray, abs(c.real))
        else:
            stray = max(stray, abs(c))
    return sin_coeffs, stray


def sin_projection(values: np.ndarray, fold: int, modes: int) -> np.ndarray:
    coeffs, _ = fourier_mode_split(values, fold)
    return np.array([coeffs.get(j, 0.0) for j in range(1, modes + 1)])


# ---------------------------------------------------------------------------
# linearization and bifurcation points


def bifurcation_point(model_name: str, m: int, b: float,
                      params: dict | None = None) -> float:
    """Angular velocity at which the m-fold mode crosses, Omega_{m,b}."""
    params = dict(params or {})
    if m < 1:
        raise DomainError("fold m must be a positive integer")
    if model_name.endswith("-disc"):
        value = omega_disc(model_name, m, b, params)
        report = monotonicity_report(model_name, max(m + 1, 6), b, params)
        if report.first_violation is not None and m <= report.first_violation:
            warnings.warn(
                f"fold m={m} is at or below the empirical monotone threshold "
                f"(first violation at n={report.first_violation}); the "
                "crossing may not be simple", RuntimeWarning, stacklevel=2)
        return value
    kernel = make_kernel(model_name, params)
    return omega0(kernel, m, b)


def multiplier_omegas(model: ContourModel, m: int, b: float,
                      n_max: int) -> list:
    """Omega_{n m, b} for n = 1..n_max (the linearized multiplier of the
    cos(n m theta) direction is -(Omega - Omega_{nm,b}) n m)."""
    out = []
    for n in range(1, n_max + 1):
        if model.disc:
            out.append(euler_disc_omega_closed(n * m, b))
        else:
            out.append(omega0(model.kernel, n * m, b))
    return out


def linearized_multiplier(model: ContourModel, omega: float, m: int,
                          b: float, n_max: int) -> list:
    """Coefficients of sin(n m theta) in the linearization applied to
    cos(n m theta), n = 1..n_max."""
    return [-(omega - om) * n * m
            for n, om in enumerate(multiplier_omegas(model, m, b, n_max), 1)]


def fd_jacobian_mode(model: ContourModel, omega: float, m: int, b: float,
                     n: int, t: float = 1e-6, modes: int = 8,
                     grid_size: int = 256) -> float:
    """Finite-difference directional derivative of F at r = 0 along
    cos(n m theta), projected on sin(n m theta) -- the independent check of
    the multiplier formula."""
    coeffs = [0.0] * n
    coeffs[n - 1] = t
    pert = PatchBoundary(fold=m, base_radius=b, coeffs=tuple(coeffs),
                         grid_size=grid_size)
    flat = PatchBoundary(fold=m, base_radius=b, coeffs=(),
                         grid_size=grid_size)
    df = (evaluate_F(model, omega, pert) - evaluate_F(model, omega, flat)) / t
    return float(sin_projection(df, m, n)[n - 1])


# ---------------------------------------------------------------------------
# continuation


@dataclass(frozen=True)
class BranchPoint:
    amplitude: float
    omega: float
    boundary: PatchBoundary
    residual_norm: float
    newton_iters: int


@dataclass(frozen=True)
class Branch:
    model: str
    params: dict
    m: int
    b: float
    points: tuple
    failure: Optional[str] = None

    def to_json(self, metadata: dict | None = None) -> str:
        doc = {
            "model": self.model,
            "params": self.params,
            "m": self.m,
            "b": self.b,
            "points": [
                {"xi": p.amplitude, "omega": p.omega,
                 "coeffs": list(p.boundary.coeffs),
                 "residual": p.residual_norm}
                for p in self.points
            ],
        }
        if self.failure:
            doc["failure"] = self.failure
        if metadata:
            doc["metadata"] = metadata
        return json.dumps(doc, indent=2)


def boundary_csv(point: BranchPoint, metadata: dict | None = None) -> str:
    """theta,R rows at grid resolution for plotting one branch point."""
    lines = [f"# {k}={v}" for k, v in (metadata or {}).items()]
    lines.append("theta,R")
    th = point.boundary.theta_grid()
    rad = point.boundary.radius()
    for t, rr in zip(th, rad):
        lines.append(f"{t!r},{rr!r}")
    return "\n".join(lines) + "\n"


def _residual(model, omega, m, b, xi, free_coeffs, modes, grid_size):
    boundary = PatchBoundary(fold=m, base_radius=b,
                             coeffs=(xi, *free_coeffs), grid_size=grid_size)
    f = evaluate_F(model, omega, boundary)
    return sin_projection(f, m, modes), boundary


def _newton_solve(model, m, b, xi, u0, modes, grid_size, tol, max_iter=12):
    """Newton on u = (Omega, b_2..b_M) at fixed amplitude xi.  The Jacobian
    is rebuilt per iteration from forward differences."""
    u = np.asarray(u0, dtype=float).copy()
    res, boundary = _residual(model, u[0], m, b, xi, u[1:], modes, grid_size)
    for it in range(1, max_iter + 1):
        if np.max(np.abs(res)) <= tol:
            return u, res, boundary, it - 1
        jac = np.empty((modes, len(u)))
        for k in range(len(u)):
            step = 1e-7 * (1.0 + abs(u[k]))
            up = u.copy()
            up[k] += step
            rp, _ = _residual(model, up[0], m, b, xi, up[1:], modes, grid_size)
            jac[:, k] = (rp - res) / step
        try:
            delta = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian at xi={xi}") from exc
        lam = 1.0
        for _ in range(6):  # damped update if the full step overshoots
            try:
                res_new, boundary_new = _residual(
                    model, u[0] + lam * delta[0], m, b, xi,
                    u[1:] + lam * delta[1:], modes, grid_size)
            except DomainError:
                lam *= 0.5
                continue
            if np.max(np.abs(res_new)) < np.max(np.abs(res)) or lam < 0.2:
                u = u + lam * delta
                res, boundary = res_new, boundary_new
                break
            lam *= 0.5
        else:
            raise ConvergenceError(f"line search stalled at xi={xi}")
    if np.max(np.abs(res)) <= tol:
        return u, res, boundary, max_iter
    raise ConvergenceError(
        f"Newton did not reach {tol:g} at xi={xi}",
        estimate=float(np.max(np.abs(res))))


class _FoldDetected(Exception):
    pass


def _arclength_step(model, m, b, v_from, tangent, ds, modes, grid_size, tol):
    """One pseudo-arclength correction: unknowns v = (Omega, b_1..b_M),
    equations = M sine projections plus <v - v_pred, tangent> = 0."""
    v_pred = v_from + ds * tangent
    v = v_pred.copy()

    def full_residual(vv):
        res, boundary = _residual(model, vv[0], m, b, vv[1], vv[2:],
                                  modes, grid_size)
        return np.append(res, np.dot(vv - v_pred, tangent)), boundary

    res, boundary = full_residual(v)
    for it in range(1, 13):
        if np.max(np.abs(res)) <= tol:
            return v, res[:-1], boundary, it - 1
        jac = np.empty((modes + 1, len(v)))
        for k in range(len(v)):
            step = 1e-7 * (1.0 + abs(v[k]))
            vp = v.copy()
            vp[k] += step
            rp, _ = full_residual(vp)
            jac[:, k] = (rp - res) / step
        v = v + np.linalg.solve(jac, -res)
        res, boundary = full_residual(v)
    raise ConvergenceError("arclength correction stalled")


def continue_branch(model_name: str, m: int, b: float, xi_max: float,
                    steps: int, newton_tol: float = 1e-10,
                    modes: int | None = None, grid_size: int | None = None,
                    params: dict | None = None) -> Branch:
    """Amplitude continuation of the m-fold branch from the radial state.

    Points are reported at xi = k * xi_max / steps, k = 0..steps (so
    ``steps + 1`` points).  Between reported points, failed Newton solves
    trigger step halving; when halving exhausts (the fingerprint of a fold in
    the amplitude parametrization) one pseudo-arclength excursion is
    attempted before the partial branch is returned with a failure marker.
    """
    params = dict(params or {})
    if m < 1 or steps < 1 or xi_max <= 0.0:
        raise DomainError("need m >= 1, steps >= 1, xi_max > 0")
    model = contour_model(model_name, params)
    if model.disc and not (0.0 < b < 1.0):
        raise DomainError("disc models require b in (0,1)")
    if b <= 0.0:
        raise DomainError("b must be positive")
    if modes is None:
        modes = max(8, min(32, 4 * steps))
    if grid_size is None:
        grid_size = 1 << max(8, int(math.ceil(math.log2(8 * modes))))
    omega_c = bifurcation_point(model_name, m, b, params)
    oms = multiplier_omegas(model, m, b, 2)
    if abs(oms[1] - oms[0]) < 1e-12:
        raise ConvergenceError("crossing is not simple: Omega_{2m} == Omega_m")
    flat = PatchBoundary(fold=m, base_radius=b, coeffs=(),
                         grid_size=grid_size)
    points = [BranchPoint(amplitude=0.0, omega=omega_c, boundary=flat,
                          residual_norm=0.0, newton_iters=0)]
    state = {
        "xi": 0.0,
        "u": np.concatenate(([omega_c], np.zeros(modes - 1))),
        "prev": None,           # (xi, u) of the previous accepted solution
        "last": (np.zeros(modes), flat, 0),
    }
    min_step = (xi_max / steps) / 64.0

    def advance_to(xi_goal):
        while state["xi"] < xi_goal - 1e-15:
            dxi = xi_goal - state["xi"]
            while True:
                xi_try = state["xi"] + dxi
                pred = state["u"].copy()
                if state["prev"] is not None:
                    xi0, u0 = state["prev"]
                    gap = state["xi"] - xi0
                    if gap > 0:
                        pred = state["u"] + (state["u"] - u0) * (dxi / gap)
                try:
                    u_new, res, boundary, iters = _newton_solve(
                        model, m, b, xi_try, pred, modes, grid_size,
                        newton_tol)
                    break
                except (ConvergenceError, DomainError):
                    dxi *= 0.5
                    if dxi < min_step:
                        raise _FoldDetected from None
            state["prev"] = (state["xi"], state["u"].copy())
            state["xi"], state["u"] = xi_try, u_new
            state["last"] = (res, boundary, iters)

    xi_targets = np.linspace(0.0, xi_max, steps + 1)[1:]
    failure = None
    for xi in xi_targets:
        try:
            advance_to(xi)
        except _FoldDetected:
            # one pseudo-arclength excursion past the suspected fold
            try:
                if state["prev"] is None:
                    raise ConvergenceError("no tangent available")
                xi0, u0 = state["prev"]
                v_from = np.concatenate(([state["u"][0], state["xi"]],
                                         state["u"][1:]))
                v_prev = np.concatenate(([u0[0], xi0], u0[1:]))
                tangent = v_from - v_prev
                norm = np.linalg.norm(tangent)
                if norm == 0.0:
                    raise ConvergenceError("degenerate tangent")
                tangent /= norm
                ds = max(4.0 * min_step, norm)
                v_new, res, boundary, iters = _arclength_step(
                    model, m, b, v_from, tangent, ds, modes, grid_size,
                    newton_tol)
                state["prev"] = (state["xi"], state["u"].copy())
                state["xi"] = float(v_new[1])
                state["u"] = np.concatenate(([v_new[0]], v_new[2:]))
                state["last"] = (res, boundary, iters)
                continue  # the reported xi grid no longer applies
            except (ConvergenceError, DomainError, np.linalg.LinAlgError):
                failure = (f"continuation stalled near xi={state['xi']:.6g} "
                           "(fold suspected; arclength step failed)")
                break
        res, boundary, iters = state["last"]
        points.append(BranchPoint(
            amplitude=state["xi"], omega=float(state["u"][0]),
            boundary=boundary, residual_norm=float(np.max(np.abs(res))),
            newton_iters=iters))
    return Branch(model=model_name, params=params, m=m, b=b,
                  points=tuple(points), failure=failure)


# ---------------------------------------------------------------------------
# elliptical patches (the classical exact rotating state of the log kernel)


def ellipse_boundary(a: float, c: float, modes: int = 64,
                     grid_size: int = 512) -> PatchBoundary:
    """Exact elliptical patch with semi-axes (a, c) in the radial
    parametrization: R(theta)^2 = 1/(cos^2/a^2 + sin^2/c^2), r = (R^2-b^2)/2
    with b^2 = a c so the perturbation has zero mean."""
    if a <= 0 or c <= 0:
        raise DomainError("semi-axes must be positive")
    b = math.sqrt(a * c)
    th = 2.0 * math.pi * np.arange(grid_size) / grid_size
    r2 = 1.0 / (np.cos(th) ** 2 / a**2 + np.sin(th) ** 2 / c**2)
    r = 0.5 * (r2 - b * b)
    spec = np.fft.rfft(r) / grid_size
    coeffs = []
    for j in range(1, modes + 1):
        k = 2 * j
        coeffs.append(2.0 * spec[k].real if k < len(spec) else 0.0)
    return PatchBoundary(fold=2, base_radius=b, coeffs=tuple(coeffs),
                         grid_size=grid_size)


def ellipse_rotation_speed(a: float, c: float) -> float:
    """Uniform rotation speed of the elliptical patch, a c / (a + c)^2."""
    return a * c / (a + c) ** 2
