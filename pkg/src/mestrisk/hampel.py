"""Hampel-type influence curves under a standard Gaussian ideal model.

The clipped-linear score psi(x) = A_c * x * min(1, c/|x|) is the minimax-MSE
influence curve on gross-error balls.  This module provides the curve itself,
its moment functions

    L(t) = E psi(X - t),   S(t) = E psi(X - t)^2,
    M(t) = E psi(X - t)^3, N(t) = E psi(X - t)^4,   X ~ N(0,1),

and the Taylor coefficients of L, V = sqrt(S - L^2), skewness rho and excess
kurtosis kappa at t = 0, both in closed form and by adaptive quadrature for a
generic monotone bounded score.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import ndtr

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(x):
    """Standard normal density."""
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def _Phi(x):
    """Standard normal cdf."""
    return ndtr(x)


class QuadratureToleranceError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, what: str, achieved: float, requested: float):
        super().__init__(
            f"quadrature for {what} achieved error estimate {achieved:.3e} "
            f"> requested {requested:.3e}"
        )
        self.achieved = achieved
        self.requested = requested


@dataclass(frozen=True)
class InfluenceCurve:
    """A monotone bounded influence curve of Hampel (clipped-linear) form.

    ``clip_c`` may be ``math.inf``, the classical unbounded score psi(x) = x;
    operations that need boundedness reject that sentinel.
    """

    clip_c: float
    lagrange_A: float
    b_hat: float
    b_check: float
    b: float
    breakdown_eps0: float

    def __post_init__(self):
        if not self.b_check < 0 < self.b_hat:
            raise ValueError("score bounds must satisfy inf psi < 0 < sup psi")
        if self.b != max(self.b_hat, -self.b_check):
            raise ValueError("b must equal sup|psi|")
        if self.bounded and not 0 < self.breakdown_eps0 <= 0.5:
            raise ValueError("breakdown point must lie in (0, 1/2]")

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.clip_c)


def make_hampel_ic(c: float) -> InfluenceCurve:
    """Build the Hampel influence curve with clipping height ``c``.

    A_c = 1/(2*Phi(c) - 1) normalizes the score to unit Fisher pairing;
    c = inf gives the identity score (unbounded, breakdown 0).
    """
    if not c > 0:
        raise ValueError(f"clipping height must be > 0, got {c}")
    if math.isinf(c):
        return InfluenceCurve(
            clip_c=math.inf,
            lagrange_A=1.0,
            b_hat=math.inf,
            b_check=-math.inf,
            b=math.inf,
            breakdown_eps0=0.0,
        )
    a = 1.0 / (2.0 * _Phi(c) - 1.0)
    b = a * c
    return InfluenceCurve(
        clip_c=c, lagrange_A=a, b_hat=b, b_check=-b, b=b, breakdown_eps0=0.5
    )


def psi_eval(ic: InfluenceCurve, x):
    """Evaluate the score: A_c*x on |x| <= c, clipped at +-A_c*c outside.

    Accepts scalars or arrays; the unbounded sentinel returns x itself.
    """
    if not ic.bounded:
        return np.asarray(x, dtype=float) + 0.0 if np.ndim(x) else float(x)
    c = ic.clip_c
    if np.ndim(x) == 0:
        return ic.lagrange_A * (c if x > c else -c if x < -c else float(x))
    return ic.lagrange_A * np.clip(np.asarray(x, dtype=float), -c, c)


@dataclass(frozen=True)
class MomentCoefficients:
    """Taylor coefficients of the score moment functions at t = 0.

    l1, l2, l3 are the first three derivatives of L; v0 the ideal score s.d.;
    v1t, v2t the linear/quadratic coefficients of V(t)/v0; rho0, rho1 the
    skewness value and slope; kappa0 the excess kurtosis.  ``holder_delta``
    is the Hoelder exponent of the expansion remainders.
    """

    l1: float
    l2: float
    l3: float
    v0: float
    v1t: float
    v2t: float
    rho0: float
    rho1: float
    kappa0: float
    holder_delta: float = 1.0

    def __post_init__(self):
        if self.v0 <= 0:
            raise ValueError("v0 must be positive")
        if not 0 < self.holder_delta <= 1:
            raise ValueError("holder_delta must lie in (0, 1]")

    def as_record(self) -> dict:
        """Flat key-value view for CSV emission."""
        return {
            "l1": self.l1,
            "l2": self.l2,
            "l3": self.l3,
            "v0": self.v0,
            "v0_sq": self.v0 ** 2,
            "v1t": self.v1t,
            "v2t": self.v2t,
            "rho0": self.rho0,
            "rho1": self.rho1,
            "kappa0": self.kappa0,
            "holder_delta": self.holder_delta,
        }


#: c -> 0 limits (the median score) and c -> inf limits (identity score) of
#: the Gaussian closed forms.
MEDIAN_LIMIT = MomentCoefficients(
    l1=-1.0,
    l2=0.0,
    l3=1.0,
    v0=math.sqrt(math.pi / 2.0),
    v1t=0.0,
    v2t=-2.0 / math.pi,
    rho0=0.0,
    rho1=2.0 * math.sqrt(2.0 / math.pi),
    kappa0=-2.0,
)

IDENTITY_LIMIT = MomentCoefficients(
    l1=-1.0, l2=0.0, l3=0.0, v0=1.0, v1t=0.0, v2t=0.0, rho0=0.0, rho1=0.0, kappa0=0.0
)


def gaussian_coeffs(c: float) -> MomentCoefficients:
    """Closed-form expansion coefficients for the Gaussian Hampel score.

    ``c = 0`` and ``c = inf`` return the exact limiting coefficient sets
    (median and identity score respectively).
    """
    if c < 0:
        raise ValueError(f"clipping height must be >= 0, got {c}")
    if c == 0.0:
        return MEDIAN_LIMIT
    if math.isinf(c):
        return IDENTITY_LIMIT
    F = float(_Phi(c))
    f = float(_phi(c))
    a = 1.0 / (2.0 * F - 1.0)
    b = a * c
    v0_sq = 2.0 * b * b * (1.0 - F) + a * (1.0 - 2.0 * b * f)
    v0 = math.sqrt(v0_sq)
    l3 = 2.0 * c * f * a
    denom = 2.0 * c * c * (1.0 - F) + 2.0 * F - 1.0 - 2.0 * c * f
    v2t = (6.0 * F - 4.0 * F * F - 2.0 - 2.0 * c * f) / denom
    rho1 = 3.0 * a ** 3 * (1.0 - 2.0 * F + 2.0 * c * f) / v0 ** 3 + 3.0 / v0
    kappa0 = (
        2.0 * c ** 4 * (1.0 - F) - 2.0 * c * (c * c + 3.0) * f + 3.0 * (2.0 * F - 1.0)
    ) / denom ** 2 - 3.0
    return MomentCoefficients(
        l1=-1.0, l2=0.0, l3=l3, v0=v0, v1t=0.0, v2t=v2t, rho0=0.0, rho1=rho1, kappa0=kappa0
    )


@dataclass(frozen=True)
class MomentFunctions:
    """Evaluators of L, V, rho, kappa as functions of the location shift t."""

    L: Callable[[float], float]
    V: Callable[[float], float]
    rho: Callable[[float], float]
    kappa: Callable[[float], float]
    # raw power moments, used by the numeric cross-checks
    S: Callable[[float], float]
    M: Callable[[float], float]
    N: Callable[[float], float]


def moment_functions(ic: InfluenceCurve) -> MomentFunctions:
    """Closed-form moment functions of the Hampel score under N(0,1)."""
    if not ic.bounded:

        def L(t):
            return -np.asarray(t, dtype=float) - 0.0

        def S(t):
            return 1.0 + np.square(t)

        def M(t):
            t = np.asarray(t, dtype=float)
            return -3.0 * t - t ** 3

        def N(t):
            t = np.asarray(t, dtype=float)
            return t ** 4 + 6.0 * t ** 2 + 3.0

    else:
        a, c = ic.lagrange_A, ic.clip_c

        def L(t):
            t = np.asarray(t, dtype=float)
            return a * (
                c
                - (c + t) * _Phi(t + c)
                + (t - c) * _Phi(t - c)
                + _phi(t - c)
                - _phi(t + c)
            )

        def S(t):
            t = np.asarray(t, dtype=float)
            Fp, Fm = _Phi(t + c), _Phi(t - c)
            fp, fm = _phi(t + c), _phi(t - c)
            return a * a * (
                c * c * (1.0 - Fp + Fm)
                + (1.0 + t * t) * (Fp - Fm)
                + (t - c) * fp
                - (t + c) * fm
            )

        def M(t):
            t = np.asarray(t, dtype=float)
            Fp, Fm = _Phi(t + c), _Phi(t - c)
            fp, fm = _phi(t + c), _phi(t - c)
            return a ** 3 * (
                c ** 3
                - Fp * (c ** 3 + t ** 3 + 3.0 * t)
                - Fm * (c ** 3 - t ** 3 - 3.0 * t)
                + (t * t + t * c + 2.0 + c * c) * fm
                - (t * t - t * c + c * c + 2.0) * fp
            )

        def N(t):
            t = np.asarray(t, dtype=float)
            Fp, Fm = _Phi(t + c), _Phi(t - c)
            fp, fm = _phi(t + c), _phi(t - c)
            return a ** 4 * (
                c ** 4
                + (Fp - Fm) * (t ** 4 + 6.0 * t * t + 3.0 - c ** 4)
                + (t ** 3 - t * t * c + t * c * c - c ** 3 + 5.0 * t - 3.0 * c) * fp
                - (t ** 3 + t * t * c + t * c * c + c ** 3 + 5.0 * t + 3.0 * c) * fm
            )

    def V(t):
        w = np.maximum(S(t) - np.square(L(t)), 0.0)
        return np.sqrt(w)

    def rho(t):
        l, s, v = L(t), S(t), V(t)
        return (M(t) - 3.0 * l * s + 2.0 * l ** 3) / v ** 3

    def kappa(t):
        l, s, v = L(t), S(t), V(t)
        return (N(t) - 4.0 * M(t) * l + 6.0 * s * l * l - 3.0 * l ** 4) / v ** 4 - 3.0

    return MomentFunctions(L=L, V=V, rho=rho, kappa=kappa, S=S, M=M, N=N)


@dataclass(frozen=True)
class QuadratureConfig:
    """Panel layout and tolerances for the coefficient quadratures.

    ``breakpoints`` are interior kink locations of the integrands (the
    clipping points +-c for a Hampel score); the domain is  [-halfwidth,
    halfwidth], wide enough that the Gaussian tail is below ``abs_tol``.
    """

    breakpoints: tuple = ()
    halfwidth: float = 12.0
    abs_tol: float = 1e-12
    error_ceiling: float = 1e-9
    limit: int = 200


def _quad(f, cfg: QuadratureConfig, what: str) -> float:
    pts = [p for p in cfg.breakpoints if -cfg.halfwidth < p < cfg.halfwidth]
    val, err = integrate.quad(
        f,
        -cfg.halfwidth,
        cfg.halfwidth,
        points=pts or None,
        epsabs=cfg.abs_tol,
        epsrel=cfg.abs_tol,
        limit=cfg.limit,
    )
    if err > cfg.error_ceiling:
        raise QuadratureToleranceError(what, achieved=err, requested=cfg.error_ceiling)
    return val


def numeric_coeffs(
    psi: Callable[[float], float], cfg: QuadratureConfig | None = None
) -> MomentCoefficients:
    """Expansion coefficients of a generic monotone bounded score by quadrature.

    The moment derivatives S'(0), S''(0), M'(0) and the L-derivatives are
    obtained by differentiating under the integral sign against the Gaussian
    weight (kernels -y*phi, (y^2-1)*phi, -(y^3-3y)*phi), which is exact for
    any bounded score; the coefficient formulas then follow the same algebra
    as the closed-form route.  The score is assumed centered and Fisher
    normalized (l1 = -1); the standardized-variance formula hardwires that
    normalization.
    """
    cfg = cfg or QuadratureConfig()

    def mom(power: int, kernel: Callable[[float], float], what: str) -> float:
        return _quad(lambda y: psi(y) ** power * kernel(y), cfg, what)

    k0 = _phi
    k1 = lambda y: -y * _phi(y)  # noqa: E731  d/dt phi(y+t) at t=0
    k2 = lambda y: (y * y - 1.0) * _phi(y)  # noqa: E731
    k3 = lambda y: -(y ** 3 - 3.0 * y) * _phi(y)  # noqa: E731

    l1 = mom(1, k1, "L'(0)")
    l2 = mom(1, k2, "L''(0)")
    l3 = mom(1, k3, "L'''(0)")
    s0 = mom(2, k0, "S(0)")
    s1 = mom(2, k1, "S'(0)")
    s2 = mom(2, k2, "S''(0)")
    m0 = mom(3, k0, "M(0)")
    m1 = mom(3, k1, "M'(0)")
    n0 = mom(4, k0, "N(0)")

    v0 = math.sqrt(s0)
    v1t = s1 / (2.0 * s0)
    v2t = (2.0 * s2 - 4.0 - s1 * s1 / s0) / (4.0 * s0)
    rho0 = m0 / v0 ** 3
    rho1 = (-3.0 * m0 * v1t + m1 + 3.0 * s0) / v0 ** 3
    kappa0 = n0 / v0 ** 4 - 3.0
    return MomentCoefficients(
        l1=l1, l2=l2, l3=l3, v0=v0, v1t=v1t, v2t=v2t, rho0=rho0, rho1=rho1, kappa0=kappa0
    )


def hampel_quadrature_config(ic: InfluenceCurve, **overrides) -> QuadratureConfig:
    """Quadrature panels split at the clipping kinks of ``ic``."""
    if not ic.bounded:
        return QuadratureConfig(breakpoints=(), halfwidth=overrides.pop("halfwidth", 40.0), **overrides)
    hw = overrides.pop("halfwidth", ic.clip_c + 10.0)
    return QuadratureConfig(breakpoints=(-ic.clip_c, ic.clip_c), halfwidth=hw, **overrides)


def solve_c0(r: float) -> float:
    """Clipping height minimizing first-order max-MSE at radius ``r``.

    Solves 2*(phi(c) - c*Phi(-c)) = r^2 * c by bracketed bisection; the left
    side is the Gaussian mean clipping excess E(|X| - c)_+.  r = 0 has no
    finite solution (classical case) and returns inf.
    """
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    if r == 0.0:
        return math.inf

    def g(c):
        return 2.0 * (_phi(c) - c * _Phi(-c)) - r * r * c

    lo, hi = 1e-12, 8.0
    while g(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("failed to bracket the clipping-height equation")
    # plain bisection: g is strictly decreasing on (0, inf)
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
