"""Monte Carlo replication of the contaminated-sampling risk study.

Each run draws its randomness from a counter-based Philox stream keyed by
(seed, run_index), so sweeps are reproducible bit-for-bit regardless of how
runs are batched or distributed.  Normal deviates come from the inverse cdf
applied to 53-bit uniforms, keeping streams platform independent.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .core import ContaminationSpec, RiskEstimate
from .hampel import InfluenceCurve, psi_eval

_BISECT_TOL = 1e-10
_Z95 = 1.96


@dataclass(frozen=True)
class SimConfig:
    """One simulation sweep: M runs of sample size spec.n under spec.

    ``estimator`` is "hampel" (with ``ic`` supplying the score) or "median".
    """

    spec: ContaminationSpec
    seed: int
    runs_M: int = 10000
    estimator: str = "hampel"
    ic: InfluenceCurve | None = None

    def __post_init__(self):
        if self.runs_M < 100:
            raise ValueError("need at least 100 runs for CI validity")
        if self.estimator not in ("hampel", "median"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "hampel":
            if self.ic is None or not self.ic.bounded:
                raise ValueError("hampel estimator needs a bounded influence curve")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def n(self) -> int:
        return self.spec.n


def _run_generator(seed: int, run_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, run_index]))


def _uniform_open(gen: np.random.Generator, size: int) -> np.ndarray:
    # 53-bit uniforms on the open interval, safe for the inverse normal cdf
    return gen.integers(1, 1 << 53, size=size) * (0.5 ** 53)


def sample_contaminated(cfg: SimConfig, run_index: int) -> np.ndarray:
    """Draw one sample of size n from the thinned contaminated law.

    The contamination indicator vector is redrawn wholesale while it exceeds
    the breakdown cap (exact conditional law by rejection); ideal
    observations are drawn once, after the indicators settle.
    """
    sample, _ = _sample_with_count(cfg, run_index)
    return sample


def _sample_with_count(cfg: SimConfig, run_index: int):
    gen = _run_generator(cfg.seed, run_index)
    spec = cfg.spec
    n, p, cap = spec.n, spec.rate, spec.cap
    if p == 0.0:
        contaminated = np.zeros(n, dtype=bool)
    else:
        while True:
            contaminated = gen.random(n) < p
            if contaminated.sum() <= cap:
                break
    x = ndtri(_uniform_open(gen, n))
    x[contaminated] = spec.contaminating_point
    return x, int(contaminated.sum())


def m_estimate(sample: np.ndarray, ic: InfluenceCurve) -> float:
    """Midpoint of the M-estimator bracket [S*, S**] by bisection.

    t -> sum psi(x_i - t) is nonincreasing; S* is the supremum with positive
    sum, S** the infimum with negative sum, each located to 1e-10 on
    [min(x) - c - 1, max(x) + c + 1].
    """
    x = np.asarray(sample, dtype=float)
    if not ic.bounded:
        raise ValueError("m-estimation needs a bounded influence curve")
    lo0 = float(x.min()) - ic.clip_c - 1.0
    hi0 = float(x.max()) + ic.clip_c + 1.0

    def score_sum(t):
        return float(psi_eval(ic, x - t).sum())

    def locate(strict_positive: bool) -> float:
        lo, hi = lo0, hi0
        while hi - lo > _BISECT_TOL:
            mid = 0.5 * (lo + hi)
            s = score_sum(mid)
            keep_low = s > 0.0 if strict_positive else s >= 0.0
            if keep_low:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    s_star = locate(strict_positive=True)
    s_star2 = locate(strict_positive=False)
    return 0.5 * (s_star + s_star2)


def _m_estimate_batch(samples: np.ndarray, ic: InfluenceCurve) -> np.ndarray:
    """Vectorized bracket-midpoint M-estimates, one per sample row."""
    x = np.asarray(samples, dtype=float)
    a, c = ic.lagrange_A, ic.clip_c
    lo0 = x.min(axis=1) - c - 1.0
    hi0 = x.max(axis=1) + c + 1.0
    span = float((hi0 - lo0).max())
    iters = max(1, math.ceil(math.log2(span / _BISECT_TOL)))

    out = np.empty((2, x.shape[0]))
    for variant, strict in enumerate((True, False)):
        lo, hi = lo0.copy(), hi0.copy()
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            s = (a * np.clip(x - mid[:, None], -c, c)).sum(axis=1)
            keep_low = s > 0.0 if strict else s >= 0.0
            lo = np.where(keep_low, mid, lo)
            hi = np.where(keep_low, hi, mid)
        out[variant] = 0.5 * (lo + hi)
    return 0.5 * (out[0] + out[1])


def median_estimate(sample: np.ndarray) -> float:
    """Order-statistic median, midpoint of the central pair for even n."""
    return float(np.median(np.asarray(sample, dtype=float)))


def simulate_runs(cfg: SimConfig, batch: int = 2048):
    """All per-run estimates and contamination counts for ``cfg``.

    Returns (estimates, k_contaminated), each of length runs_M, in run order.
    """
    estimates = np.empty(cfg.runs_M)
    kcounts = np.empty(cfg.runs_M, dtype=int)
    n = cfg.n
    for start in range(0, cfg.runs_M, batch):
        stop = min(start + batch, cfg.runs_M)
        rows = np.empty((stop - start, n))
        for i, run in enumerate(range(start, stop)):
            rows[i], kcounts[run] = _sample_with_count(cfg, run)
        if cfg.estimator == "median":
            estimates[start:stop] = np.median(rows, axis=1)
        else:
            estimates[start:stop] = _m_estimate_batch(rows, cfg.ic)
    return estimates, kcounts


def empirical_mse(cfg: SimConfig) -> RiskEstimate:
    """Empirical n*MSE over runs_M samples with its asymptotic 95% CI."""
    estimates, _ = simulate_runs(cfg)
    vals = cfg.n * np.square(estimates)
    value = float(vals.mean())
    std_err = float(vals.std(ddof=1) / math.sqrt(cfg.runs_M))
    return RiskEstimate(
        value=value,
        method="mc",
        std_err=std_err,
        ci_low=value - _Z95 * std_err,
        ci_high=value + _Z95 * std_err,
    )
