"""Distances between exact finite-n laws and their predicted limits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist_exact import ExactDistribution, distribution
from .errors import DomainError, RegimeError
from .limits import HalfNormal, LimitLaw, predict, REGIME_NAMES
from .steps import StepSet, drift_sign, structural_constants

__all__ = ["kolmogorov", "local_law_error", "scaled_mean_gap", "ConvergenceReport", "convergence_report"]


def _scaled_points(n: int, law: LimitLaw, ks: np.ndarray):
    """Map integer k to the variable the law describes, and the law's cdf there."""
    if law.scaling == "none":
        return ks.astype(float), np.array([law.cdf(k) for k in ks])
    if law.scaling == "sqrt_n":
        scale = math.sqrt(n) if n > 0 else 1.0
        xs = ks / scale
        return xs, np.array([law.cdf(x) for x in xs])
    if law.scaling == "centered":
        sd = math.sqrt(law.sigma2 * n) if n > 0 else 1.0
        xs = (ks - law.mu * n) / sd
        return xs, 0.5 * np.array([math.erfc(-x / math.sqrt(2.0)) for x in xs])
    raise DomainError(f"unknown scaling {law.scaling!r}")


def kolmogorov(exact: ExactDistribution, law: LimitLaw) -> float:
    """``sup_x |F_exact(x) - F_law(x)|`` under the law's scaling convention.

    The exact cdf is a step function, so the supremum is attained at a jump
    point or as the left limit at one; both are inspected.  For discrete
    limits the comparison runs over the union of both supports.
    """
    n = exact.n
    probs = exact.as_float()
    k_top = len(probs) - 1
    if law.scaling == "none":
        extra = len(getattr(law, "probs", ())) - 1
        k_top = max(k_top, extra, 0)
    ks = np.arange(k_top + 1)
    cdf = np.cumsum(np.pad(probs, (0, k_top + 1 - len(probs))))
    cdf = np.minimum(cdf, 1.0)
    _, law_cdf = _scaled_points(n, law, ks)
    dist = np.abs(cdf - law_cdf)
    if law.scaling != "none":
        left = np.concatenate([[0.0], cdf[:-1]])
        dist = np.maximum(dist, np.abs(left - law_cdf))
    return float(min(1.0, dist.max()))


def local_law_error(exact: ExactDistribution, law: HalfNormal, n: int | None = None) -> float:
    """``sup_k |P[X_n = k] - (1/sigma) sqrt(2/(pi n)) exp(-k**2 / (2 n sigma**2))|``."""
    if not isinstance(law, HalfNormal):
        raise RegimeError("the local law is stated for half-normal limits (zero drift)")
    n = exact.n if n is None else n
    if n <= 0:
        raise DomainError("the local law needs n >= 1")
    probs = exact.as_float()
    ks = np.arange(len(probs) + 1, dtype=float)
    sigma = law.sigma
    with np.errstate(under="ignore"):
        dens = (1.0 / sigma) * math.sqrt(2.0 / (math.pi * n)) * np.exp(-(ks**2) / (2.0 * n * sigma**2))
    masses = np.append(probs, 0.0)
    return float(np.max(np.abs(masses - dens)))


def scaled_mean_gap(exact: ExactDistribution, law: LimitLaw) -> float:
    """Gap between the mean of the scaled statistic and the mean of the law."""
    n = exact.n
    mean = float(exact.mean)
    if law.scaling == "none":
        return abs(mean - law.mean())
    if law.scaling == "sqrt_n":
        return abs(mean / math.sqrt(n) - law.mean())
    return abs((mean - law.mu * n) / math.sqrt(law.sigma2 * n))


def scaled_variance_ratio(exact: ExactDistribution, law: LimitLaw) -> float:
    """Variance of the scaled statistic divided by the variance of the law."""
    n = exact.n
    var = float(exact.variance)
    if law.scaling == "none":
        return var / law.var()
    if law.scaling == "sqrt_n":
        return var / n / law.var()
    return var / (law.sigma2 * n)


@dataclass
class ConvergenceRow:
    n: int
    d_n: float
    e_n: float | None
    m_n: float
    var_ratio: float


@dataclass
class ConvergenceReport:
    stat: str
    regime: str
    law: dict
    scaling: str
    rows: list = field(default_factory=list)
    threshold: float | None = None

    @property
    def n_list(self) -> list:
        return [r.n for r in self.rows]

    @property
    def distances(self) -> list:
        return [r.d_n for r in self.rows]

    @property
    def decreasing(self) -> bool:
        d = self.distances
        return all(b < a for a, b in zip(d, d[1:]))

    @property
    def ratios(self) -> list:
        d = self.distances
        return [b / a if a else float("nan") for a, b in zip(d, d[1:])]

    @property
    def below_threshold(self) -> bool | None:
        if self.threshold is None or not self.rows:
            return None
        return self.rows[-1].d_n <= self.threshold

    def to_dict(self) -> dict:
        return {
            "stat": self.stat,
            "regime": self.regime,
            "law": self.law,
            "scaling": self.scaling,
            "rows": [vars(r) for r in self.rows],
            "ratios": self.ratios,
            "decreasing": self.decreasing,
            "threshold": self.threshold,
            "below_threshold": self.below_threshold,
        }

    def csv_rows(self) -> list:
        return [("n", "d_n", "e_n", "m_n")] + [(r.n, r.d_n, r.e_n, r.m_n) for r in self.rows]


def convergence_report(
    steps: StepSet, stat: str, n_list, threshold: float | None = None
) -> ConvergenceReport:
    """Exact laws at each n in ``n_list`` (float mode) against the predicted limit."""
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError("n_list must be non-empty and strictly increasing")
    if n_list[0] < 1:
        raise DomainError("convergence needs n >= 1")
    consts = structural_constants(steps)
    law = predict(steps, consts, stat)
    report = ConvergenceReport(
        stat=stat,
        regime=REGIME_NAMES[drift_sign(consts.drift)],
        law=law.to_dict(),
        scaling=law.scaling,
        threshold=threshold,
    )
    for n in n_list:
        exact = distribution(steps, stat, n, exact=False)
        e_n = local_law_error(exact, law) if isinstance(law, HalfNormal) else None
        report.rows.append(
            ConvergenceRow(n, kolmogorov(exact, law), e_n, scaled_mean_gap(exact, law), scaled_variance_ratio(exact, law))
        )
    return report
