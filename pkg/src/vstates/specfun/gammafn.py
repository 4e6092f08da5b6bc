"""Gamma function via the Lanczos approximation (g=7, 9 coefficients) with
reflection for arguments below 1/2.

The coefficient set is the standard published one for g=7, n=9 (Godfrey's
tabulation); it delivers ~1e-15 relative accuracy on the positive axis,
comfortably inside the 1e-13 target on |x| <= 50.
"""

import math

from ..errors import DomainError

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_series(x):
    # x >= 0.5 assumed; series for Gamma(x) with the shifted argument z = x-1
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    return acc


def _sinpi(x):
    # sin(pi*x) computed from the distance to the nearest integer, so the
    # reflection formula stays accurate arbitrarily close to the poles
    r = round(x)
    s = math.sin(math.pi * (x - r))
    return -s if (r % 2) else s


def gamma(x: float) -> float:
    """Gamma(x) for real x not equal to a nonpositive integer.

    Raises :class:`DomainError` at the poles.  Overflows to ``inf`` beyond
    x ~ 171.6 like every double-precision implementation.
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"gamma pole at x={x:g}")
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    acc = _lanczos_series(x)
    return _SQRT_2PI * t ** (z + 0.5) * math.exp(-t) * acc


def gammaln(x: float) -> float:
    """log Gamma(x) for x > 0 (needed for Gamma quotients at large argument
    where Gamma itself overflows)."""
    x = float(x)
    if x <= 0.0:
        raise DomainError(f"gammaln requires x > 0, got {x:g}")
    if x < 0.5:
        return math.log(math.pi / _sinpi(x)) - gammaln(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    acc = _lanczos_series(x)
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a)/Gamma(b) for a, b > 0, stable for large arguments."""
    return math.exp(gammaln(a) - gammaln(b))
