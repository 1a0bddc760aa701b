"""Limit laws of the path statistics and their predicted parameters.

Every law uses one convention for each family: a geometric law has pmf
``p (1 - p)**k`` with success probability ``p``.  Where a ratio ``q`` is
the natural parameter (sign changes, height of Motzkin walks), it is stored
alongside as ``ratio = 1 - p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, PeriodicStepSetError, RegimeError
from .kernel import kernel_roots
from .series import eval_gf, require_motzkin
from .steps import StepSet, StructuralConstants, drift_sign, eval_P

__all__ = [
    "Geometric",
    "HalfNormal",
    "Rayleigh",
    "Normal",
    "DiscreteLargeBranch",
    "law_eval",
    "predict",
    "height_discrete_law",
    "b_at_rho1",
    "REGIME_NAMES",
]

REGIME_NAMES = {-1: "negative drift", 0: "zero drift", 1: "positive drift"}

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class _Law:
    kind = ""
    scaling = "none"

    def _outside(self, x, strict):
        if strict:
            raise DomainError(f"x = {x} is outside the support of {self.kind}")
        return 0.0

    def to_dict(self) -> dict:
        return {"law": self.kind, "params": self.params(), "scaling": self.scaling}


@dataclass(frozen=True)
class Geometric(_Law):
    p: float
    ratio: float | None = None
    kind = "geometric"

    def pdf(self, k, strict=False):
        if k < 0 or k != int(k):
            return self._outside(k, strict)
        return self.p * (1.0 - self.p) ** int(k)

    def cdf(self, x):
        if x < 0:
            return 0.0
        return 1.0 - (1.0 - self.p) ** (math.floor(x) + 1)

    def mean(self):
        return (1.0 - self.p) / self.p

    def var(self):
        return (1.0 - self.p) / self.p**2

    def params(self):
        out = {"p": self.p}
        if self.ratio is not None:
            out["ratio"] = self.ratio
        return out


@dataclass(frozen=True)
class HalfNormal(_Law):
    sigma: float
    kind = "half_normal"
    scaling = "sqrt_n"

    def pdf(self, x, strict=False):
        if x < 0:
            return self._outside(x, strict)
        s = self.sigma
        return math.sqrt(2.0 / (math.pi * s * s)) * math.exp(-x * x / (2.0 * s * s))

    def cdf(self, x):
        if x <= 0:
            return 0.0
        return math.erf(x / (self.sigma * math.sqrt(2.0)))

    def mean(self):
        return self.sigma * math.sqrt(2.0 / math.pi)

    def var(self):
        return self.sigma**2 * (1.0 - 2.0 / math.pi)

    def params(self):
        return {"sigma": self.sigma}


@dataclass(frozen=True)
class Rayleigh(_Law):
    sigma: float
    kind = "rayleigh"
    scaling = "sqrt_n"

    def pdf(self, x, strict=False):
        if x < 0:
            return self._outside(x, strict)
        s2 = self.sigma**2
        return x / s2 * math.exp(-x * x / (2.0 * s2))

    def cdf(self, x):
        if x <= 0:
            return 0.0
        return -math.expm1(-x * x / (2.0 * self.sigma**2))

    def mean(self):
        return self.sigma * math.sqrt(math.pi / 2.0)

    def var(self):
        return self.sigma**2 * (2.0 - math.pi / 2.0)

    def params(self):
        return {"sigma": self.sigma}


@dataclass(frozen=True)
class Normal(_Law):
    """N(mu, sigma2); for the height, mu and sigma2 are per step and the
    statistic is compared through ``(X_n - mu n) / sqrt(sigma2 n)``."""

    mu: float
    sigma2: float
    kind = "normal"
    scaling = "centered"

    def pdf(self, x, strict=False):
        return math.exp(-((x - self.mu) ** 2) / (2.0 * self.sigma2)) / (_SQRT_2PI * math.sqrt(self.sigma2))

    def cdf(self, x):
        return 0.5 * math.erfc(-(x - self.mu) / math.sqrt(2.0 * self.sigma2))

    def mean(self):
        return self.mu

    def var(self):
        return self.sigma2

    def params(self):
        return {"mu": self.mu, "sigma2": self.sigma2}


@dataclass(frozen=True)
class DiscreteLargeBranch(_Law):
    """Law with pgf ``prod_j (1 - v_j) / (u - v_j)``, truncated at ``len(probs) - 1``."""

    probs: tuple
    tail: float = 0.0
    branches: tuple = field(default=(), compare=False)
    kind = "discrete_large_branch"

    def pdf(self, k, strict=False):
        if k < 0 or k != int(k):
            return self._outside(k, strict)
        k = int(k)
        return self.probs[k] if k < len(self.probs) else 0.0

    def cdf(self, x):
        if x < 0:
            return 0.0
        k = min(math.floor(x), len(self.probs) - 1)
        return math.fsum(self.probs[: k + 1])

    def mean(self):
        return math.fsum(k * p for k, p in enumerate(self.probs))

    def var(self):
        m = self.mean()
        return math.fsum((k - m) ** 2 * p for k, p in enumerate(self.probs))

    def params(self):
        return {
            "probs": list(self.probs),
            "tail": self.tail,
            "large_branches_at_rho1": [[b.real, b.imag] for b in self.branches],
        }


LimitLaw = Geometric | HalfNormal | Rayleigh | Normal | DiscreteLargeBranch


def law_eval(law: LimitLaw, query: str, x=None, strict: bool = False) -> float:
    """Evaluate ``pdf``, ``cdf``, ``mean`` or ``var`` of a law."""
    if query == "mean":
        return law.mean()
    if query == "var":
        return law.var()
    if x is None:
        raise DomainError(f"query {query!r} needs a point x")
    if query == "pdf":
        return law.pdf(x, strict=strict)
    if query == "cdf":
        return law.cdf(x)
    raise DomainError(f"unknown query {query!r}; choose pdf, cdf, mean or var")


# ---------------------------------------------------------------------------
# predictions
# ---------------------------------------------------------------------------


def _P(steps, order, at=1):
    """P^(order)(at), exact when the weights are."""
    point = Fraction(at) if steps.exact and isinstance(at, (int, Fraction)) else float(at)
    return eval_P(steps, point, order)


def b_at_rho1(steps: StepSet, consts: StructuralConstants) -> float:
    """Bridges generating function at ``rho1 = 1/P(1)`` (finite only off zero drift)."""
    if drift_sign(consts.drift) == 0:
        raise RegimeError("B(z) is singular at rho1 = rho when the drift is zero")
    return float(eval_gf(steps, consts, "bridges", float(consts.rho1)))


def height_discrete_law(steps: StepSet, consts: StructuralConstants, k_max: int = 60) -> DiscreteLargeBranch:
    """Limit law of the height for negative drift, as coefficients of
    ``omega(u) = prod_j (1 - v_j(rho1)) / (u - v_j(rho1))``.

    Coefficients come from the trapezoidal rule on ``|u| = r`` with
    ``m = 8 k_max`` nodes; ``r`` sits just inside the smallest large branch
    so that aliasing is below 1e-13 relative.
    """
    if drift_sign(consts.drift) >= 0:
        raise RegimeError("the discrete height law needs a negative drift")
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    roots = kernel_roots(steps, consts, float(consts.rho1), track=False)
    vs = np.array(roots.large)
    m = 8 * k_max
    r = float(np.min(np.abs(vs))) * math.exp(-30.0 / m)
    nodes = r * np.exp(2j * np.pi * np.arange(m) / m)
    omega = np.ones(m, dtype=complex)
    for v in vs:
        omega *= (1.0 - v) / (nodes - v)
    coeffs = np.fft.fft(omega) / m
    probs = [float(coeffs[k].real / r**k) for k in range(k_max + 1)]
    tail = 1.0 - math.fsum(probs)
    return DiscreteLargeBranch(tuple(probs), tail, tuple(complex(v) for v in vs))


def _check_aperiodic(consts):
    if consts.period != 1:
        what = "degenerate (single jump)" if consts.period == 0 else f"periodic with period {consts.period}"
        raise PeriodicStepSetError(f"limit laws are only predicted for aperiodic step sets; this one is {what}")


def predict(steps: StepSet, consts: StructuralConstants, stat: str, k_max: int = 60) -> LimitLaw:
    """Predicted limit law of ``stat`` (returns, height, signchanges,
    bridge_signchanges) in the drift regime of ``steps``."""
    _check_aperiodic(consts)
    regime = drift_sign(consts.drift)
    P1, dP1, ddP1 = (_P(steps, k) for k in range(3))

    if stat == "returns":
        if regime == 0:
            return HalfNormal(math.sqrt(float(P1 / ddP1)))
        p = 1.0 / b_at_rho1(steps, consts)
        return Geometric(p, 1.0 - p)

    if stat == "height":
        if regime == 0:
            return HalfNormal(math.sqrt(float(ddP1 / P1)))
        if regime > 0:
            mu = dP1 / P1
            return Normal(float(mu), float(ddP1 / P1 + dP1 / P1 - mu * mu))
        return height_discrete_law(steps, consts, k_max)

    if stat == "signchanges":
        require_motzkin(steps, "sign changes")
        if regime == 0:
            return HalfNormal(0.5 * math.sqrt(float(ddP1 / P1)))
        pm, pp = steps.weight(-1), steps.weight(1)
        q = pp / pm if regime < 0 else pm / pp
        return Geometric(float(1 - q), float(q))

    if stat == "bridge_signchanges":
        require_motzkin(steps, "sign changes")
        tau = consts.tau
        ratio = eval_P(steps, tau, 2) / eval_P(steps, tau, 0)
        return Rayleigh(0.5 * float(tau) * math.sqrt(float(ratio)))

    raise DomainError(f"unknown statistic {stat!r}")


def prediction_record(steps: StepSet, consts: StructuralConstants, stat: str) -> dict:
    """JSON-ready prediction: law, parameters, scaling and regime."""
    law = predict(steps, consts, stat)
    out = law.to_dict()
    out["regime"] = REGIME_NAMES[drift_sign(consts.drift)]
    out["statistic"] = stat
    return out

