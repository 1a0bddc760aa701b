"""Weighted step sets, the jump polynomial and structural constants.

A step set is a finite collection of jumps ``s`` with positive weights
``p_s``.  The jump polynomial is the Laurent polynomial
``P(u) = sum_s p_s u**s``; everything else in the package is derived from it.

Weights are either exact :class:`fractions.Fraction` values (exact mode) or
floats.  Exact mode propagates through the counting code; the analytic code
always works in floating point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

from .errors import DomainError, StepSetError

__all__ = [
    "StepSet",
    "StructuralConstants",
    "parse_weight",
    "eval_P",
    "structural_constants",
    "period",
    "motzkin",
]

Weight = Fraction | float

_BISECTION_LO = 1e-9
_TAU_DENOMINATOR_LIMIT = 10**6


def parse_weight(raw) -> Weight:
    """Turn a JSON weight into a Fraction or a float.

    Strings such as ``"2"`` or ``"2/3"`` and JSON integers are exact; strings
    with a decimal point or exponent, and JSON floats, become floats.
    """
    if isinstance(raw, bool):
        raise StepSetError(f"weight must be a number or string, got {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, str):
        text = raw.strip()
        try:
            if any(ch in text for ch in ".eE") and "/" not in text:
                return float(text)
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise StepSetError(f"cannot parse weight {raw!r}") from exc
    raise StepSetError(f"weight must be a number or string, got {raw!r}")


@dataclass(frozen=True)
class StepSet:
    """An immutable weighted set of integer jumps, sorted by jump."""

    jumps: tuple[tuple[int, Weight], ...]

    def __init__(self, jumps: Iterable[tuple[int, object]] | dict):
        items = jumps.items() if isinstance(jumps, dict) else jumps
        parsed = []
        for jump, weight in items:
            if isinstance(jump, bool) or not isinstance(jump, int):
                raise StepSetError(f"jump must be an integer, got {jump!r}")
            w = parse_weight(weight)
            if not w > 0 or (isinstance(w, float) and not math.isfinite(w)):
                raise StepSetError(f"weight of jump {jump} must be positive and finite, got {weight!r}")
            parsed.append((jump, w))
        parsed.sort(key=lambda jw: jw[0])
        seen = [j for j, _ in parsed]
        if len(set(seen)) != len(seen):
            raise StepSetError(f"jumps must be pairwise distinct, got {seen}")
        if not parsed:
            raise StepSetError("step set is empty")
        if parsed[0][0] >= 0 or parsed[-1][0] <= 0:
            raise StepSetError(
                "step set needs at least one negative and one positive jump (c >= 1 and d >= 1)"
            )
        object.__setattr__(self, "jumps", tuple(parsed))

    # -- basic accessors ---------------------------------------------------

    @property
    def c(self) -> int:
        """Magnitude of the most negative jump."""
        return -self.jumps[0][0]

    @property
    def d(self) -> int:
        """Largest positive jump."""
        return self.jumps[-1][0]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.jumps)

    @property
    def weights(self) -> tuple[Weight, ...]:
        return tuple(w for _, w in self.jumps)

    @property
    def exact(self) -> bool:
        """True when every weight is a Fraction."""
        return all(isinstance(w, Fraction) for _, w in self.jumps)

    @property
    def is_motzkin(self) -> bool:
        """Support contained in {-1, 0, +1}."""
        return set(self.support) <= {-1, 0, 1}

    def weight(self, jump: int) -> Weight:
        """Weight of ``jump``, or 0 when the jump is absent."""
        for j, w in self.jumps:
            if j == jump:
                return w
        return Fraction(0) if self.exact else 0.0

    def total_weight(self) -> Weight:
        return sum((w for _, w in self.jumps), Fraction(0) if self.exact else 0.0)

    def as_float(self) -> "StepSet":
        return StepSet((j, float(w)) for j, w in self.jumps)

    def mirrored(self) -> "StepSet":
        """The step set with every jump ``s`` replaced by ``-s``."""
        return StepSet((-j, w) for j, w in self.jumps)

    def P(self, u, order: int = 0):
        return eval_P(self, u, order)

    # -- serialisation -----------------------------------------------------

    @classmethod
    def from_json(cls, text: str) -> "StepSet":
        """Parse ``{"steps": [{"jump": -1, "weight": "2"}, ...]}``."""
        data = json.loads(text)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data) -> "StepSet":
        try:
            entries = data["steps"]
            return cls((entry["jump"], entry["weight"]) for entry in entries)
        except (KeyError, TypeError) as exc:
            raise StepSetError(
                'expected {"steps": [{"jump": <int>, "weight": <str|number>}, ...]}'
            ) from exc

    def to_dict(self) -> dict:
        return {"steps": [{"jump": j, "weight": format_number(w)} for j, w in self.jumps]}

    def __str__(self):
        body = ", ".join(f"{j:+d}:{format_number(w)}" for j, w in self.jumps)
        return "{" + body + "}"


def format_number(x) -> str:
    """Rationals as ``"num/den"`` strings, floats as shortest round-trip decimals."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def motzkin(p_minus, p_zero, p_plus) -> StepSet:
    """Motzkin step set with weights (p_-1, p_0, p_+1); a zero p_0 drops the flat step."""
    jumps = [(-1, p_minus), (1, p_plus)]
    if parse_weight(p_zero) != 0:
        jumps.append((0, p_zero))
    return StepSet(jumps)


def eval_P(steps: StepSet, u, order: int = 0):
    """Evaluate ``P``, ``P'`` or ``P''`` at ``u``.

    ``u`` may be any field element supporting integer powers (float, complex,
    Fraction, :class:`walklab.kernel.SqrtExt`).
    """
    if order not in (0, 1, 2):
        raise DomainError(f"order must be 0, 1 or 2, got {order}")
    if u == 0:
        raise DomainError("the jump polynomial has negative powers; u must be non-zero")
    total = None
    for s, p in steps.jumps:
        if order == 0:
            coeff, power = p, s
        elif order == 1:
            coeff, power = p * s, s - 1
        else:
            coeff, power = p * s * (s - 1), s - 2
        if coeff == 0:
            continue
        term = (u**power) * coeff if power else _one_like(u) * coeff
        total = term if total is None else total + term
    if total is None:
        return _one_like(u) * 0
    return total


def _one_like(u):
    one = getattr(u, "one", None)
    if callable(one):
        return one()
    return u**0


def period(steps: StepSet | Sequence[int]) -> int:
    """gcd of the differences of the support; 1 means aperiodic, 0 a single jump."""
    support = steps.support if isinstance(steps, StepSet) else tuple(steps)
    if not support:
        raise StepSetError("empty support")
    s0 = support[0]
    return reduce(math.gcd, (abs(s - s0) for s in support), 0)


@dataclass(frozen=True)
class StructuralConstants:
    """Constants attached to a step set.

    ``tau`` solves ``P'(tau) = 0`` on the positive axis, ``rho = 1/P(tau)`` is
    the structural radius, ``rho1 = 1/P(1)`` the radius of the walks, ``drift``
    is ``P'(1)`` and ``bigC = sqrt(2 P(tau) / P''(tau))`` the coefficient of
    the square-root term of the principal branches at ``rho``.
    """

    tau: Weight
    rho: Weight
    rho1: Weight
    drift: Weight
    bigC: float
    period: int

    @property
    def aperiodic(self) -> bool:
        return self.period == 1

    def regime(self, tol: float = 1e-12) -> int:
        """Sign of the drift: -1, 0 or +1 (exact comparison for rational drifts)."""
        return drift_sign(self.drift, tol)

    def to_dict(self) -> dict:
        return {
            "tau": format_number(self.tau),
            "rho": format_number(self.rho),
            "rho1": format_number(self.rho1),
            "drift": format_number(self.drift),
            "C": format_number(self.bigC),
            "period": self.period,
        }


def drift_sign(drift, tol: float = 1e-12) -> int:
    if isinstance(drift, Fraction):
        return (drift > 0) - (drift < 0)
    if abs(drift) < tol:
        return 0
    return 1 if drift > 0 else -1


def _solve_tau(steps: StepSet) -> float:
    fsteps = steps if not steps.exact else steps.as_float()

    def dP(u):
        return eval_P(fsteps, u, 1)

    lo, hi = _BISECTION_LO, 1.0
    while dP(hi) <= 0:
        hi *= 2.0
    while dP(lo) >= 0:
        lo /= 2.0
    # P' is strictly increasing on (0, inf); bisect to machine resolution.
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if dP(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-16 * hi:
            break
    return lo if abs(dP(lo)) <= abs(dP(hi)) else hi


def structural_constants(steps: StepSet) -> StructuralConstants:
    """Compute tau, rho, rho1, drift, C and the period of ``steps``."""
    tau: Weight = _solve_tau(steps)
    if steps.exact:
        candidate = Fraction(tau).limit_denominator(_TAU_DENOMINATOR_LIMIT)
        if eval_P(steps, candidate, 1) == 0:
            tau = candidate
        drift = eval_P(steps, Fraction(1), 1)
        rho1 = 1 / eval_P(steps, Fraction(1), 0)
    else:
        drift = eval_P(steps, 1.0, 1)
        rho1 = 1.0 / eval_P(steps, 1.0, 0)
    P_tau = eval_P(steps, tau, 0)
    rho = 1 / P_tau
    bigC = math.sqrt(2.0 * float(P_tau) / float(eval_P(steps, tau, 2)))
    return StructuralConstants(
        tau=tau, rho=rho, rho1=rho1, drift=drift, bigC=bigC, period=period(steps)
    )
