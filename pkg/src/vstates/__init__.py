"""Numerical toolkit for rotating vortex patches (V-states) of active scalar
equations whose velocity kernel has a completely monotone radial derivative.

Subpackages / modules:

* ``specfun``  -- self-contained special functions and quadrature
  (Gamma, Bessel J/I/K, Bessel zeros, tanh-sinh / adaptive rules, Hankel
  transform).
* ``cmkernel`` -- catalog of radial kernels with their Bernstein measures
  (Euler, gSQG, QGSW, Euler-alpha) and bounded-domain perturbations.
* ``phi``      -- the model-independent carrier of the spectrum's mode
  dependence: quadrature evaluation, ODE residual, exact rational recursion
  for the expansion functions, bound suites.
* ``spectrum`` -- linearized-operator eigenvalues by independent routes
  (trig quadrature, Bernstein factorization, closed forms), angular
  velocities for plane and disc models, asymptotic coefficients,
  monotonicity/convexity reports.
* ``contour``  -- the nonlinear boundary functional, its linearization,
  bifurcation points and amplitude continuation of m-fold branches.
* ``cli``      -- command-line front end (``vstates`` entry point).
"""

from .errors import ConvergenceError, DomainError, UnsupportedMethodError

__version__ = "0.1.0"

__all__ = ["ConvergenceError", "DomainError", "UnsupportedMethodError", "__version__"]
