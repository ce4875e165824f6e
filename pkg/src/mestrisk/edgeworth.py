"""Edgeworth cdf expansions and the auxiliary probabilistic bounds.

The expansions are evaluated at caller-supplied standardized skewness rho and
excess kurtosis kappa; uniformity over a shift parameter is the caller's
concern (it enters only through those coefficients).
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class EdgeworthOrder(Enum):
    ONE = 1
    TWO = 2


@dataclass(frozen=True)
class EdgeworthParams:
    """Sample size and standardized third/fourth moment inputs."""

    n: int
    rho_t: float
    kappa_t: float = 0.0
    order: EdgeworthOrder = EdgeworthOrder.TWO

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kappa_t < -2.0:
            raise ValueError("excess kurtosis of a standardized variable is >= -2")


def edgeworth_cdf(s, p: EdgeworthParams, clamp: bool = True):
    """Edgeworth-corrected cdf of a standardized n-fold sum at s.

    Order ONE applies the sqrt(n) skewness term, order TWO additionally the
    1/n kurtosis and skewness-squared terms.  The raw expansion value can
    leave [0, 1]; clamping is output-only (``clamp=False`` returns the raw
    signed value, which is what risk integrations consume).
    """
    s_arr = np.asarray(s, dtype=float)
    phi = np.exp(-0.5 * s_arr * s_arr) / _SQRT_2PI
    val = ndtr(s_arr) - phi / math.sqrt(p.n) * (p.rho_t / 6.0) * (s_arr * s_arr - 1.0)
    if p.order is EdgeworthOrder.TWO:
        val = val - (phi / p.n) * (
            (p.kappa_t / 24.0) * (s_arr ** 3 - 3.0 * s_arr)
            + (p.rho_t ** 2 / 72.0) * (s_arr ** 5 - 10.0 * s_arr ** 3 + 15.0 * s_arr)
        )
    if clamp:
        val = np.clip(val, 0.0, 1.0)
    return float(val) if np.ndim(s) == 0 else val


def hoeffding_bound(n: int, eps: float, M: float) -> float:
    """Tail bound exp(-2*n*eps^2/M^2) for means of variables with range M.

    ``M`` is the length of the enclosing interval (b - a); for variables
    bounded by |xi| <= m pass M = 2*m.
    """
    if eps <= 0 or M <= 0 or n < 1:
        raise ValueError("need n >= 1, eps > 0, M > 0")
    return math.exp(-2.0 * n * eps * eps / (M * M))


def binomial_moments(n: int, p, j: int):
    """E[X^j] for X ~ Bin(n, p), j in 1..4, in closed polynomial form.

    Pure scalar arithmetic, so exact-rational inputs (``fractions.Fraction``)
    stay exact.
    """
    if j not in (1, 2, 3, 4):
        raise ValueError(f"moment order must be in 1..4, got {j}")
    if not (0 <= p <= 1):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if j == 1:
        return p * n
    if j == 2:
        return p ** 2 * n ** 2 + p * n - p ** 2 * n
    if j == 3:
        return (
            p ** 3 * n ** 3
            - 3 * p ** 3 * n ** 2
            + 2 * p ** 3 * n
            + 3 * p ** 2 * n ** 2
            - 3 * p ** 2 * n
            + p * n
        )
    return (
        p ** 4 * n ** 4
        - 6 * p ** 4 * n ** 3
        + 11 * p ** 4 * n ** 2
        - 6 * p ** 4 * n
        + 6 * p ** 3 * n ** 3
        - 18 * p ** 3 * n ** 2
        + 12 * p ** 3 * n
        + 7 * p ** 2 * n ** 2
        - 7 * p ** 2 * n
        + p * n
    )


def binomial_tail_bound(n: int, r: float, k1: float) -> float:
    """Asymptotic bound exp(-kappa*r*sqrt(n)) on P(Bin(n, r/sqrt(n)) > k1*r*sqrt(n)).

    kappa = k1*log(k1) + 1 - k1.  The o(sqrt(n)) slack of the underlying
    inequality is omitted; the bound captures the exponential shape.
    """
    if k1 <= 1.0:
        raise ValueError(f"k1 must exceed 1, got {k1}")
    if r <= 0 or n < 1:
        raise ValueError("need n >= 1 and r > 0")
    kap = k1 * math.log(k1) + 1.0 - k1
    return math.exp(-kap * r * math.sqrt(n))


def truncated_normal_moment(k: int, c: float) -> float:
    """E[X^k 1{X >= c}] for X ~ N(0,1), k in 0..8.

    Uses the integration-by-parts recursion
    E[X^k 1{X>=c}] = c^(k-1)*phi(c) + (k-1)*E[X^(k-2) 1{X>=c}].
    """
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= 8:
        raise ValueError(f"moment order must be an integer in 0..8, got {k}")
    phi_c = math.exp(-0.5 * c * c) / _SQRT_2PI
    sf_c = float(ndtr(-c))
    if k == 0:
        return sf_c
    val_even, val_odd = sf_c, phi_c  # E[X^0 1], E[X^1 1]
    if k == 1:
        return val_odd
    for m in range(2, k + 1):
        if m % 2 == 0:
            val_even = c ** (m - 1) * phi_c + (m - 1) * val_even
        else:
            val_odd = c ** (m - 1) * phi_c + (m - 1) * val_odd
    return val_even if k % 2 == 0 else val_odd
