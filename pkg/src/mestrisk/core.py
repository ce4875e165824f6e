"""Shared vocabulary types: contamination neighbourhoods and risk records."""

import math
from dataclasses import dataclass
from enum import Enum


class Side(Enum):
    """Which side the contaminating point mass sits on.

    AUTO defers the choice to the least-favourable-side rule; TIE is only
    ever *returned* (both sides give the same risk up to the expansion
    order) and is not a valid request.
    """

    LEFT = "left"
    RIGHT = "right"
    AUTO = "auto"
    TIE = "tie"


@dataclass(frozen=True)
class ContaminationSpec:
    """A shrinking contamination neighbourhood, thinned at the breakdown point.

    ``radius_r`` is the radius r of the r/sqrt(n) contamination ball,
    ``cap`` the largest admissible number of contaminated observations per
    sample (ceil(eps0*n) - 1).  ``cap`` is derived from ``breakdown_eps0``
    when not given explicitly.
    """

    radius_r: float
    n: int
    contaminating_point: float = 100.0
    side: Side = Side.AUTO
    breakdown_eps0: float = 0.5
    cap: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"sample size must be >= 1, got {self.n}")
        if self.radius_r < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius_r}")
        if not 0 < self.breakdown_eps0 <= 0.5:
            raise ValueError(f"breakdown point must lie in (0, 1/2], got {self.breakdown_eps0}")
        if self.side is Side.TIE:
            raise ValueError("side=TIE is a result, not a request; use AUTO")
        if self.cap is None:
            object.__setattr__(self, "cap", math.ceil(self.breakdown_eps0 * self.n) - 1)
        if self.cap < 0:
            raise ValueError(f"contamination cap must be >= 0, got {self.cap}")

    @property
    def rate(self) -> float:
        """Per-observation contamination probability min(r, sqrt(n))/sqrt(n)."""
        return min(self.radius_r, math.sqrt(self.n)) / math.sqrt(self.n)


@dataclass(frozen=True)
class RiskEstimate:
    """A risk value on the n*MSE scale with its provenance.

    ``method`` is one of asy0/asy1/asy2/exactC/exactD/mc.  ``std_err`` is 0
    and the CI degenerate for deterministic methods; for Monte Carlo the CI
    is the asymptotic 95% interval value +- 1.96*std_err.
    """

    value: float
    method: str
    std_err: float = 0.0
    ci_low: float | None = None
    ci_high: float | None = None

    def __post_init__(self):
        if self.std_err < 0:
            raise ValueError("std_err must be >= 0")
        if self.ci_low is None:
            object.__setattr__(self, "ci_low", self.value)
        if self.ci_high is None:
            object.__setattr__(self, "ci_high", self.value)
        if not self.ci_low <= self.value <= self.ci_high:
            raise ValueError("confidence interval must bracket the value")
