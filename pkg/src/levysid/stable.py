"""Alpha-stable random variates and rotationally symmetric stable increments.

The univariate sampler implements the Chambers-Mallows-Stuck transform in
the parametrization where a symmetric variate X ~ S_alpha(delta, 0, 0) has
characteristic function E exp(iuX) = exp(-delta^alpha |u|^alpha).  The
multivariate isotropic increment is built by Gaussian subordination: a
totally skewed stable factor F scales a standard normal vector so that
E exp(i u.X) = exp(-t |u|^alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

from .rng import RngStream

__all__ = [
    "StableParams",
    "sample_stable",
    "sample_rotsym_stable_increment",
    "levy_kernel_constant",
    "unit_sphere_area",
]


@dataclass(frozen=True)
class StableParams:
    """Parameters (alpha, scale, skewness, shift) of a stable law."""

    alpha: float
    scale: float = 1.0
    skewness: float = 0.0
    shift: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if abs(self.skewness) > 1.0:
            raise ValueError(f"skewness must lie in [-1, 1], got {self.skewness}")


def sample_stable(params: StableParams, rng: RngStream, size=None):
    """Draw variates from S_alpha(scale, skewness, shift).

    Returns a scalar when ``size`` is None, else an ndarray of that shape.
    """
    alpha, delta, beta, lam = params.alpha, params.scale, params.skewness, params.shift
    gen = rng.generator
    u = gen.uniform(-math.pi / 2.0, math.pi / 2.0, size=size)
    w = gen.standard_exponential(size=size)

    if alpha == 1.0:
        half_pi = math.pi / 2.0
        z = (2.0 / math.pi) * (
            (half_pi + beta * u) * np.tan(u)
            - beta * np.log((half_pi * w * np.cos(u)) / (half_pi + beta * u))
        )
        x = delta * z + (2.0 / math.pi) * beta * delta * math.log(delta) + lam
    else:
        tan_term = beta * math.tan(math.pi * alpha / 2.0)
        b = math.atan(tan_term) / alpha
        s = (1.0 + tan_term**2) ** (1.0 / (2.0 * alpha))
        z = (
            s
            * np.sin(alpha * (u + b))
            / np.cos(u) ** (1.0 / alpha)
            * (np.cos(u - alpha * (u + b)) / w) ** ((1.0 - alpha) / alpha)
        )
        x = delta * z + lam

    if size is None:
        return float(x)
    return x


def sample_rotsym_stable_increment(alpha, t, n, rng: RngStream, size=None):
    """Increment L_t of the isotropic alpha-stable process in dimension n.

    The characteristic function of the result is exp(-t |u|^alpha).  With
    ``size=None`` one vector of length n is returned, otherwise an array of
    shape (size, n).
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}; use a Gaussian path for alpha = 2")
    if t <= 0.0:
        raise ValueError(f"elapsed time must be positive, got {t}")
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")

    gamma0 = t ** (1.0 / alpha)
    scale_f = 2.0 * gamma0**2 * math.cos(math.pi * alpha / 4.0) ** (2.0 / alpha)
    f = sample_stable(StableParams(alpha / 2.0, scale_f, 1.0, 0.0), rng, size=size)
    # F is positive in exact arithmetic; rounding can produce tiny negatives.
    f = np.maximum(np.asarray(f, dtype=float), 0.0)
    m = 1 if size is None else int(size)
    g = rng.generator.standard_normal((m, n))
    x = np.sqrt(f).reshape(m, 1) * g
    if size is None:
        return x[0]
    return x


def levy_kernel_constant(n: int, alpha: float) -> float:
    """Normalizing constant c(n, alpha) of the isotropic stable jump kernel.

    The jump measure density is c(n, alpha) |y|^-(n+alpha).
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    return (
        alpha
        * _gamma((n + alpha) / 2.0)
        / (2.0 ** (1.0 - alpha) * math.pi ** (n / 2.0) * _gamma(1.0 - alpha / 2.0))
    )


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / _gamma(n / 2.0)
