"""Higher-order expansions of the maximal MSE of location M-estimators.

Everything here is plain polynomial arithmetic in the expansion coefficients:
the cumulative orders of n*maxMSE are

    order0 = r^2 b^2 + v0^2
    order1 = order0 + (r/sqrt(n)) * A1
    order2 = order1 + A2 / n

with A1, A2 polynomials in (r, b, l2, l3, v0, v1t, v2t, rho0, rho1) whose
sign-carrying terms flip with the contamination side.  kappa0 is accepted but
does not enter A2 (it cancels for squared-error loss); it is kept for the
Edgeworth evaluators.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import ContaminationSpec, Side
from .hampel import MomentCoefficients

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class RiskExpansion:
    """Cumulative first/second/third-order values of n*maxMSE."""

    order0: float
    order1: float
    order2: float
    A1: float
    A2: float
    side_used: Side


@dataclass(frozen=True)
class BiasVarExpansion:
    """Expansion terms of sqrt(n)*|bias|, n*bias^2 and n*variance.

    The squared-bias terms C1, C2 and variance terms D1, D2 satisfy
    C1 + D1 = A1 and C2 + D2 = A2 for the same contamination side.
    """

    B10: float
    B11: float
    B2: float
    C1: float
    C2: float
    D1: float
    D2: float
    side_used: Side


def choose_side(mc: MomentCoefficients, b: float, v0: float, r: float, n: int) -> Side:
    """Least-favourable side for a symmetric-bounded score (sup psi = -inf psi).

    Compares v1t against the l2-threshold with its finite-n correction;
    ties (both sides equal up to o(1/n)) are declared below 1e-12.
    """
    q = b * b / (v0 * v0)
    rn = r / math.sqrt(n)
    rhs = -(mc.l2 / 4.0) * (q * (r * r + 3.0) * (1.0 + rn - 2.0 * r * r / n) + 3.0 * (1.0 - q))
    diff = mc.v1t - rhs
    if abs(diff) < _TIE_TOL:
        return Side.TIE
    return Side.LEFT if diff > 0 else Side.RIGHT


def _resolve_sign(mc: MomentCoefficients, b: float, spec: ContaminationSpec):
    side = spec.side
    if side is Side.AUTO:
        side = choose_side(mc, b, mc.v0, spec.radius_r, spec.n)
    # left-side contamination carries the minus sign; a tie means every
    # sign-carrying term vanishes, so +1 is as good as -1
    sign = -1.0 if side is Side.LEFT else 1.0
    return side, sign


def risk_expansion(mc: MomentCoefficients, b: float, spec: ContaminationSpec) -> RiskExpansion:
    """Evaluate the three cumulative orders of n*maxMSE."""
    if not math.isfinite(b):
        raise ValueError("risk expansion needs a bounded score (finite b)")
    side, s = _resolve_sign(mc, b, spec)
    r, n = spec.radius_r, spec.n
    l2, l3, v1, v2 = mc.l2, mc.l3, mc.v1t, mc.v2t
    v0 = mc.v0
    v0sq = v0 * v0

    A1 = v0sq * (s * (4.0 * v1 + 3.0 * l2) * b + 1.0) + b * b + (
        2.0 * b * b + s * l2 * b ** 3
    ) * r * r
    A2 = (
        v0 ** 3 * ((l2 + 2.0 * v1) * mc.rho0 + (2.0 / 3.0) * mc.rho1)
        + v0sq * v0sq
        * (3.0 * v2 + 3.75 * l2 * l2 + l3 + 9.0 * v1 * v1 + 12.0 * v1 * l2)
        + (
            v0sq
            * (
                (3.0 * v2 + 3.0 * v1 * v1 + 7.5 * l2 * l2 + 2.0 * l3 + 12.0 * v1 * l2)
                * b * b
                + 1.0
                + s * (8.0 * v1 + 6.0 * l2) * b
            )
            + s * 3.0 * l2 * b ** 3
            + 5.0 * b * b
        )
        * r * r
        + ((1.25 * l2 * l2 + l3 / 3.0) * b ** 4 + s * 3.0 * l2 * b ** 3 + 3.0 * b * b)
        * r ** 4
    )
    order0 = r * r * b * b + v0sq
    order1 = order0 + (r / math.sqrt(n)) * A1
    order2 = order1 + A2 / n
    return RiskExpansion(order0=order0, order1=order1, order2=order2, A1=A1, A2=A2, side_used=side)


def bias_var_expansion(mc: MomentCoefficients, b: float, spec: ContaminationSpec) -> BiasVarExpansion:
    """Bias, squared-bias and variance expansion terms for the resolved side."""
    if not math.isfinite(b):
        raise ValueError("bias/variance expansion needs a bounded score (finite b)")
    side, s = _resolve_sign(mc, b, spec)
    r = spec.radius_r
    l2, l3, v1, v2 = mc.l2, mc.l3, mc.v1t, mc.v2t
    rho0, rho1 = mc.rho0, mc.rho1
    v0 = mc.v0
    v0sq = v0 * v0

    B10 = (0.5 * l2 + v1) * v0sq
    B11 = b * (1.0 + s * 0.5 * l2 * b)
    B2 = (
        ((0.5 * l2 * l2 + l3 / 6.0) * b ** 3 + b + s * l2 * b * b) * r * r
        + b * (1.0 + s * 0.5 * l2 * b)
        + ((0.5 * l3 + 1.5 * l2 * l2 + v2 + v1 * v1 + 3.0 * v1 * l2) * b + s * 0.5 * l2 + s * v1)
        * v0sq
    )

    C1 = b * b * r * r * (s * l2 * b + 2.0) + s * b * (l2 + 2.0 * v1) * v0sq
    C2 = (
        (v1 * l2 + 0.25 * l2 * l2 + v1 * v1) * v0sq * v0sq
        + (3.0 * b * b + s * 3.0 * l2 * b ** 3 + (1.25 * l2 * l2 + l3 / 3.0) * b ** 4) * r ** 4
        + (
            (3.5 * l2 * l2 + l3 + 2.0 * v2 + 2.0 * v1 * v1 + 7.0 * v1 * l2) * b * b * v0sq
            + s * (2.0 * l2 + 4.0 * v1) * b * v0sq
            + 2.0 * b * b
            + s * l2 * b ** 3
        )
        * r * r
    )

    D1 = (s * 2.0 * (l2 + v1) * b + 1.0) * v0sq + b * b
    D2 = (
        (l3 + 3.5 * l2 * l2 + 11.0 * v1 * l2 + 8.0 * v1 * v1 + 3.0 * v2) * v0sq * v0sq
        + ((2.0 / 3.0) * rho1 + (l2 + 2.0 * v1) * rho0) * v0 ** 3
        + (
            ((l3 + v1 * v1 + v2 + 5.0 * v1 * l2 + 4.0 * l2 * l2) * b * b
             + s * 4.0 * (l2 + v1) * b + 1.0) * v0sq
            + s * 2.0 * l2 * b ** 3
            + 3.0 * b * b
        )
        * r * r
    )
    return BiasVarExpansion(B10=B10, B11=B11, B2=B2, C1=C1, C2=C2, D1=D1, D2=D2, side_used=side)


def symmetric_mse(b: float, v0: float, r: float, n: int) -> float:
    """Second-order n*maxMSE in the symmetric case (l2 = v1t = rho0 = 0)."""
    rn = r / math.sqrt(n)
    return (r * r * b * b + v0 * v0) * (1.0 + rn) + rn * b * b * (1.0 + r * r)


def ideal_gaussian_limit(n: int) -> float:
    """Third-order ideal-model risk of the median-limit score: pi/2 * (1 + (pi/2 - 5/3)/n)."""
    return (math.pi / 2.0) * (1.0 + (math.pi / 2.0 - 5.0 / 3.0) / n)


def median_mse_so(f0: float, f1: float, r: float, n: int) -> float:
    """Second-order n*maxMSE of the sample median for an ideal density f.

    ``f0`` and ``f1`` are f(0) > 0 and f'(0).  No third-order version is
    offered: the median's two-point score law violates the smoothness
    condition behind the general order-2 term, whose rho1 contribution is
    wrong for the median.
    """
    if not f0 > 0:
        raise ValueError("density at zero must be positive")
    rn = r / math.sqrt(n)
    return (1.0 / (4.0 * f0 * f0)) * (
        (1.0 + r * r) * (1.0 + 2.0 * rn) - rn * (f1 / (2.0 * f0 * f0)) * (r * r + 3.0)
    )


def fixed_radius_mse(
    mc: MomentCoefficients,
    b: float,
    eps: float,
    n: int,
    breakdown_eps0: float = 0.5,
    side: Side = Side.AUTO,
) -> float:
    """Unstandardized maximal MSE on a fixed-radius (eps) thinned neighbourhood.

    Formal substitution r = eps*sqrt(n) into the shrinking-radius expansion,
    keeping the displayed groups through eps^2/n; the O(1/n^2) ideal remainder
    is excluded.  Valid for small eps below the breakdown point.
    """
    if not 0 <= eps < breakdown_eps0:
        raise ValueError(f"eps must lie in [0, {breakdown_eps0}), got {eps}")
    if side is Side.AUTO:
        side = choose_side(mc, b, mc.v0, eps * math.sqrt(n), n)
    s = -1.0 if side is Side.LEFT else 1.0
    l2, l3, v1, v2 = mc.l2, mc.l3, mc.v1t, mc.v2t
    v0sq = mc.v0 ** 2
    return (
        eps ** 2 * b ** 2
        + eps ** 3 * (2.0 * b * b + s * l2 * b ** 3)
        + eps ** 4 * ((1.25 * l2 * l2 + l3 / 3.0) * b ** 4 + s * 3.0 * l2 * b ** 3 + 3.0 * b * b)
        + v0sq / n
        + (eps / n) * (v0sq * (s * (4.0 * v1 + 3.0 * l2) * b + 1.0) + b * b)
        + (eps * eps / n)
        * (
            5.0 * b * b
            + s * 3.0 * l2 * b ** 3
            + v0sq
            * (
                (3.0 * v2 + 3.0 * v1 * v1 + 7.5 * l2 * l2 + 2.0 * l3 + 12.0 * v1 * l2) * b * b
                + 1.0
                + s * (8.0 * v1 + 6.0 * l2) * b
            )
        )
    )


class FraimanTriple(NamedTuple):
    as_bias: float
    as_var: float
    as_mse: float


def fraiman_check(mc: MomentCoefficients, b: float, v0: float, r: float, n: int) -> FraimanTriple:
    """Asymptotic bias/variance/MSE via the fixed-contamination route.

    Cross-check formulas for the symmetric case; as_mse agrees with
    ``symmetric_mse`` identically.
    """
    rn = r / math.sqrt(n)
    as_bias = r * b * (1.0 + rn)
    as_var = v0 * v0 + rn * (v0 * v0 + b)
    as_mse = (v0 * v0 + r * r * b * b) * (1.0 + rn) + rn * b * b * (1.0 + r * r)
    return FraimanTriple(as_bias=as_bias, as_var=as_var, as_mse=as_mse)
