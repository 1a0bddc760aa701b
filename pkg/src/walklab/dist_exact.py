"""Exact laws of returns to zero, height and sign changes at fixed length n.

All three are dynamic programmes over the altitude.  Exact mode runs on
integers (weights scaled by their common denominator) and yields Fractions;
float mode runs on the probability-normalised weights ``p_s / P(1)`` so that
nothing overflows at large n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, StepSetError
from .series import _integer_weights, require_motzkin
from .steps import StepSet

__all__ = [
    "STATISTICS",
    "ExactDistribution",
    "dist_returns",
    "dist_height",
    "dist_signchanges",
    "distribution",
]

STATISTICS = ("returns", "height", "signchanges", "bridge_signchanges")


@dataclass(frozen=True)
class ExactDistribution:
    """Law of a statistic on paths of length ``n``; ``probs[k] = P[X_n = k]``."""

    n: int
    statistic: str
    probs: tuple
    exact: bool

    @property
    def support(self) -> range:
        return range(len(self.probs))

    @property
    def k_max(self) -> int:
        return len(self.probs) - 1

    @property
    def mean(self):
        if self.exact:
            return sum((k * p for k, p in enumerate(self.probs)), Fraction(0))
        return math.fsum(k * p for k, p in enumerate(self.probs))

    @property
    def variance(self):
        m = self.mean
        if self.exact:
            return sum(((k - m) ** 2 * p for k, p in enumerate(self.probs)), Fraction(0))
        return math.fsum((k - m) ** 2 * p for k, p in enumerate(self.probs))

    def cdf(self) -> list:
        out, acc = [], Fraction(0) if self.exact else 0.0
        for p in self.probs:
            acc += p
            out.append(acc)
        return out

    def as_float(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    def total(self):
        if self.exact:
            return sum(self.probs, Fraction(0))
        return math.fsum(self.probs)


def _trim(values):
    values = list(values)
    while len(values) > 1 and values[-1] == 0:
        values.pop()
    return values


def _finish_exact(counts, total, n, stat):
    probs = [Fraction(int(x), int(total)) for x in counts]
    return ExactDistribution(n, stat, tuple(_trim(probs)), True)


def _finish_float(masses, n, stat):
    masses = [float(x) for x in masses]
    total = math.fsum(masses)
    probs = [x / total for x in masses]
    return ExactDistribution(n, stat, tuple(_trim(probs)), False)


def _mode(steps: StepSet, exact):
    exact = steps.exact if exact is None else exact
    if exact and not steps.exact:
        raise StepSetError("exact mode needs rational weights")
    return exact


def _step_weights(steps: StepSet, exact: bool):
    """Integer weights and their sum (exact) or probabilities (float)."""
    if exact:
        qs, _ = _integer_weights(steps)
        return qs, sum(qs)
    total = float(steps.total_weight())
    return [float(w) / total for w in steps.weights], 1.0


def _zeros(shape, exact):
    if exact:
        arr = np.empty(shape, dtype=object)
        arr.fill(0)
        return arr
    return np.zeros(shape)


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    return int(n)


# ---------------------------------------------------------------------------
# returns to zero
# ---------------------------------------------------------------------------


def dist_returns(steps: StepSet, n: int, exact: bool | None = None) -> ExactDistribution:
    """Law of the number of returns to altitude 0 among the n non-initial points."""
    n = _check_n(n)
    exact = _mode(steps, exact)
    if exact:
        return _returns(steps, n, True)
    return _returns_cached(steps, n)


@lru_cache(maxsize=16)
def _returns_cached(steps, n):
    return _returns_by_arches(steps, n)


def _returns_by_arches(steps, n):
    """Float path: a walk with k returns is k arches followed by a tail that
    never comes back, so ``P[X_n = k] = [z^n] A(z)**k T(z)``.

    Arches and tails come from one O(n**2) pass over non-zero altitudes.
    """
    ws, _ = _step_weights(steps, False)
    c, d = steps.c, steps.d
    off = n * c
    arches = np.zeros(n + 1)
    tails = np.zeros(n + 1)
    tails[0] = 1.0
    cur = np.zeros(n * (c + d) + 1)
    nxt = np.zeros_like(cur)
    for t in range(1, n + 1):
        if t == 1:
            nxt[:] = 0
            for s, w in zip(steps.support, ws):
                nxt[off + s] += w
        else:
            lo, hi = off - (t - 1) * c, off + (t - 1) * d
            nxt[off - t * c : off + t * d + 1] = 0
            for s, w in zip(steps.support, ws):
                nxt[lo + s : hi + s + 1] += w * cur[lo : hi + 1]
        arches[t] = nxt[off]
        nxt[off] = 0.0
        tails[t] = math.fsum(nxt[off - t * c : off + t * d + 1])
        cur, nxt = nxt, cur
    masses = [tails[n]]
    power = tails.copy()  # A**k T, truncated at n
    for k in range(1, n + 1):
        power = np.convolve(arches[: n + 2 - k], power)[: n + 1]
        masses.append(power[n])
    return _finish_float(masses, n, "returns")


def _returns(steps, n, exact):
    c, d = steps.c, steps.d
    ws, total = _step_weights(steps, exact)
    js = steps.support
    off = n * c
    width = n * (c + d) + 1
    # state[k, off + a]: weight of walks at altitude a with k returns so far
    cur = _zeros((n + 1, width), exact)
    nxt = _zeros((n + 1, width), exact)
    cur[0, off] = 1
    for t in range(1, n + 1):
        plo, phi = off - (t - 1) * c, off + (t - 1) * d
        lo, hi = off - t * c, off + t * d
        rows = t  # k <= t - 1 before the step
        nxt[: rows + 1, lo : hi + 1] = 0
        for s, w in zip(js, ws):
            nxt[:rows, plo + s : phi + s + 1] += w * cur[:rows, plo : phi + 1]
        landing = nxt[:rows, off].copy()
        nxt[1 : rows + 1, off] = landing
        nxt[0, off] = 0
        cur, nxt = nxt, cur
    masses = [_row_total(cur[k], exact) for k in range(n + 1)]
    if exact:
        return _finish_exact(masses, total**n, n, "returns")
    return _finish_float(masses, n, "returns")


def _row_total(row, exact):
    if exact:
        return sum(row.tolist())
    return math.fsum(row)


# ---------------------------------------------------------------------------
# height
# ---------------------------------------------------------------------------


def dist_height(steps: StepSet, n: int, exact: bool | None = None) -> ExactDistribution:
    """Law of the maximal altitude (the start counts, so the support begins at 0).

    ``P[height <= h]`` is the weight of walks confined below the wall ``h``;
    by translation it obeys ``R_t(h) = sum_s p_s [h >= s] R_{t-1}(h - s)``,
    which yields every wall at once.  Differencing over h gives the law.
    """
    n = _check_n(n)
    exact = _mode(steps, exact)
    if exact:
        return _height(steps, n, True)
    return _height_cached(steps, n)


@lru_cache(maxsize=16)
def _height_cached(steps, n):
    return _height(steps, n, False)


def _height(steps, n, exact):
    d = steps.d
    ws, total = _step_weights(steps, exact)
    top = n * d
    # below[h] = weight of t-step walks staying <= h, for walls h = 0..top
    below = _zeros(top + 1, exact)
    below[:] = 1
    level = 1  # total weight of t-step walks
    for _ in range(n):
        new = _zeros(top + 1, exact)
        for s, w in zip(steps.support, ws):
            if s >= 0:
                # require h - s >= 0
                new[s:] += w * below[: top + 1 - s]
            else:
                k = -s
                new[: top + 1 - k] += w * below[k:]
                new[top + 1 - k :] += w * level  # walls beyond reach are never hit
        level = level * total
        below = new
    counts = [below[0]] + [below[h] - below[h - 1] for h in range(1, top + 1)]
    if exact:
        return _finish_exact(counts, level, n, "height")
    return _finish_float(counts, n, "height")


# ---------------------------------------------------------------------------
# sign changes (Motzkin)
# ---------------------------------------------------------------------------


def dist_signchanges(
    steps: StepSet, n: int, constrained: str = "walks", exact: bool | None = None
) -> ExactDistribution:
    """Law of the number of sign changes ``+(0)-`` / ``-(0)+`` of Motzkin walks
    (``constrained='walks'``) or Motzkin bridges (``'bridges'``)."""
    require_motzkin(steps, "sign changes")
    if constrained not in ("walks", "bridges"):
        raise DomainError("constrained must be 'walks' or 'bridges'")
    n = _check_n(n)
    exact = _mode(steps, exact)
    walks, bridges = _signchanges(steps, n, True) if exact else _signchanges_cached(steps, n)
    if constrained == "bridges":
        if bridges is None:
            raise DomainError(f"no bridges of length {n}")
        return bridges
    return walks


@lru_cache(maxsize=16)
def _signchanges_cached(steps, n):
    return _signchanges(steps, n, False)


def _signchanges(steps, n, exact):
    """Both laws (walks, bridges) from one pass."""
    if exact:
        qs, _ = _integer_weights(steps)
        weights = dict(zip(steps.support, qs))
    else:
        total = float(steps.total_weight())
        weights = {s: float(w) / total for s, w in zip(steps.support, steps.weights)}
    wm, w0, wp = (weights.get(j, 0) for j in (-1, 0, 1))
    width = max(n, 1)
    # neg[k, m] / pos[k, m]: altitude -(m+1) / m+1 with k changes so far;
    # zm / zp: at 0 with last non-zero sign - / +;  chain: never left 0.
    # A change needs two steps (through 0), so k <= t // 2 after t steps.
    neg, new_neg = _zeros((n + 1, width), exact), _zeros((n + 1, width), exact)
    pos, new_pos = _zeros((n + 1, width), exact), _zeros((n + 1, width), exact)
    zm = _zeros(n + 1, exact)
    zp = _zeros(n + 1, exact)
    chain = 1
    for t in range(1, n + 1):
        m = min(t, width)  # depths reachable after this step
        r = t // 2 + 1  # rows that can be non-zero after this step
        rp = (t - 1) // 2 + 1  # ... and before it
        for arr, new, w_out, w_in in ((neg, new_neg, wm, wp), (pos, new_pos, wp, wm)):
            new[:r, :m] = 0
            # w_out moves away from 0, w_in moves towards 0
            new[:rp, :m] += w0 * arr[:rp, :m]
            new[:rp, 1:m] += w_out * arr[:rp, : m - 1]
            new[:rp, : m - 1] += w_in * arr[:rp, 1:m]
        new_zm = w0 * zm + wp * neg[:, 0]
        new_zp = w0 * zp + wm * pos[:, 0]
        # leaving 0
        new_neg[:rp, 0] += wm * zm[:rp]
        new_neg[1 : rp + 1, 0] += wm * zp[:rp]
        new_pos[:rp, 0] += wp * zp[:rp]
        new_pos[1 : rp + 1, 0] += wp * zm[:rp]
        new_neg[0, 0] += wm * chain
        new_pos[0, 0] += wp * chain
        chain = w0 * chain
        neg, new_neg = new_neg, neg
        pos, new_pos = new_pos, pos
        zm, zp = new_zm, new_zp
    bridge_masses = [zm[k] + zp[k] for k in range(n + 1)]
    bridge_masses[0] += chain
    walk_masses = [_row_total(neg[k], exact) + _row_total(pos[k], exact) + zm[k] + zp[k] for k in range(n + 1)]
    walk_masses[0] += chain
    return (
        _finish_counts(walk_masses, n, "signchanges", exact),
        _finish_counts(bridge_masses, n, "bridge_signchanges", exact),
    )


def _finish_counts(masses, n, stat, exact):
    if not any(masses):
        return None  # no paths of this kind at length n
    if exact:
        return _finish_exact(masses, sum(masses), n, stat)
    return _finish_float(masses, n, stat)


def distribution(steps: StepSet, stat: str, n: int, exact: bool | None = None) -> ExactDistribution:
    """Dispatch by statistic name."""
    if stat == "returns":
        return dist_returns(steps, n, exact)
    if stat == "height":
        return dist_height(steps, n, exact)
    if stat == "signchanges":
        return dist_signchanges(steps, n, "walks", exact)
    if stat == "bridge_signchanges":
        return dist_signchanges(steps, n, "bridges", exact)
    raise DomainError(f"unknown statistic {stat!r}; choose from {', '.join(STATISTICS)}")
