"""Self-contained special-function and quadrature toolbox.

Everything here is computed from scratch (no scipy): Lanczos Gamma,
integer-order Bessel J/I/K, Bessel zeros, adaptive and double-exponential
quadrature, and the Hankel transform.  All evaluators are pure functions and
safe to call concurrently; tables are immutable after construction.
"""

from .gammafn import gamma, gammaln
from .bessel import (
    BesselZeroTable,
    bessel_i,
    bessel_j,
    bessel_j_zeros,
    bessel_k,
)
from .quadrature import QuadratureSpec, gauss_legendre, integrate, tanh_sinh
from .hankel import hankel_transform

__all__ = [
    "BesselZeroTable",
    "QuadratureSpec",
    "bessel_i",
    "bessel_j",
    "bessel_j_zeros",
    "bessel_k",
    "gamma",
    "gammaln",
    "gauss_legendre",
    "hankel_transform",
    "integrate",
    "tanh_sinh",
]
