"""Monte Carlo sampling of random walks for empirical cross-checks.

Steps are drawn with probabilities ``p_s / P(1)`` through Vose's alias
method.  The generator is numpy's PCG64; trials are cut into fixed-size
chunks and chunk ``i`` draws from ``SeedSequence(seed, spawn_key=(i,))``, so
the output depends only on ``(seed, n, trials)`` and not on the number of
worker threads (``WALKLAB_THREADS``).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .steps import StepSet

__all__ = ["AliasTable", "SampleSummary", "simulate", "GENERATOR"]

GENERATOR = f"numpy {np.__version__} PCG64, SeedSequence(seed, spawn_key=(chunk,))"
CHUNK_TRIALS = 1 << 16
MAX_CELLS = 1 << 22


@dataclass(frozen=True)
class AliasTable:
    prob: np.ndarray
    alias: np.ndarray

    @classmethod
    def build(cls, probabilities) -> "AliasTable":
        p = np.asarray(probabilities, dtype=float)
        m = len(p)
        scaled = p * m / p.sum()
        prob = np.ones(m)
        alias = np.arange(m)
        small = [i for i in range(m) if scaled[i] < 1.0]
        large = [i for i in range(m) if scaled[i] >= 1.0]
        while small and large:
            s, g = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        return cls(prob, alias)

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        column = rng.integers(0, len(self.prob), size=shape)
        keep = rng.random(size=shape) < self.prob[column]
        return np.where(keep, column, self.alias[column])


@dataclass(frozen=True)
class SampleSummary:
    n: int
    trials: int
    seed: int
    generator: str
    counts: dict  # statistic -> tuple of counts indexed by k
    sample_sizes: dict  # statistic -> number of samples behind the counts

    def distribution(self, stat: str) -> np.ndarray:
        counts = np.asarray(self.counts[stat], dtype=float)
        size = self.sample_sizes[stat]
        return counts / size if size else counts

    def mean(self, stat: str) -> float:
        probs = self.distribution(stat)
        return float(np.dot(np.arange(len(probs)), probs))

    def variance(self, stat: str) -> float:
        probs = self.distribution(stat)
        k = np.arange(len(probs))
        m = float(np.dot(k, probs))
        return float(np.dot((k - m) ** 2, probs))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "generator": self.generator,
            "statistics": {
                stat: {
                    "samples": self.sample_sizes[stat],
                    "probs": self.distribution(stat).tolist(),
                    "mean": self.mean(stat),
                    "variance": self.variance(stat),
                }
                for stat in self.counts
            },
        }


def _statistics(altitudes: np.ndarray, motzkin: bool) -> dict:
    """Per-trial statistics of a (trials, n) array of altitudes."""
    trials = altitudes.shape[0]
    out = {
        "returns": np.count_nonzero(altitudes == 0, axis=1),
        "height": np.maximum(altitudes.max(axis=1, initial=0), 0),
    }
    if motzkin:
        signs = np.sign(altitudes)
        n = signs.shape[1]
        idx = np.where(signs != 0, np.arange(n), -1)
        last = np.maximum.accumulate(idx, axis=1)
        rows = np.arange(trials)[:, None]
        last_sign = np.where(last >= 0, signs[rows, np.maximum(last, 0)], 0)
        prev = np.concatenate([np.zeros((trials, 1), dtype=signs.dtype), last_sign[:, :-1]], axis=1)
        changes = np.count_nonzero((signs != 0) & (prev != 0) & (signs != prev), axis=1)
        out["signchanges"] = changes
        ends = altitudes[:, -1] == 0 if n else np.ones(trials, dtype=bool)
        out["bridge_signchanges"] = changes[ends]
    return out


def _run_chunk(table, jumps, n, size, seed, index, motzkin):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    hist: dict[str, np.ndarray] = {}
    sizes: dict[str, int] = {}
    rows_per_block = max(1, MAX_CELLS // max(n, 1))
    done = 0
    while done < size:
        block = min(rows_per_block, size - done)
        if n:
            moves = jumps[table.sample(rng, (block, n))]
            alts = np.cumsum(moves, axis=1)
        else:
            alts = np.zeros((block, 0), dtype=np.int64)
        for stat, values in _statistics(alts, motzkin).items():
            counts = np.bincount(values, minlength=1) if values.size else np.zeros(1, dtype=np.int64)
            hist[stat] = _add(hist.get(stat), counts)
            sizes[stat] = sizes.get(stat, 0) + int(values.size)
        done += block
    return hist, sizes


def _add(a, b):
    if a is None:
        return b.astype(np.int64)
    if len(a) < len(b):
        a, b = b, a
    a = a.astype(np.int64, copy=True)
    a[: len(b)] += b
    return a


def _threads() -> int:
    raw = os.environ.get("WALKLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise DomainError(f"WALKLAB_THREADS must be an integer, got {raw!r}") from None
    return min(4, os.cpu_count() or 1)


def simulate(steps: StepSet, n: int, trials: int, seed: int) -> SampleSummary:
    """Sample ``trials`` walks of length ``n`` and tabulate returns, height
    and, for Motzkin steps, sign changes of walks and of the bridges among them."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    n, trials, seed = int(n), int(trials), int(seed)
    table = AliasTable.build([float(w) for w in steps.weights])
    jumps = np.array(steps.support, dtype=np.int64)
    chunks = [(i, min(CHUNK_TRIALS, trials - i * CHUNK_TRIALS)) for i in range((trials + CHUNK_TRIALS - 1) // CHUNK_TRIALS)]
    args = [(table, jumps, n, size, seed, i, steps.is_motzkin) for i, size in chunks]
    workers = min(_threads(), len(args))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _run_chunk(*a), args))
    else:
        results = [_run_chunk(*a) for a in args]
    hist: dict[str, np.ndarray] = {}
    sizes: dict[str, int] = {}
    for h, s in results:  # merged in chunk order
        for stat in h:
            hist[stat] = _add(hist.get(stat), h[stat])
            sizes[stat] = sizes.get(stat, 0) + s[stat]
    counts = {stat: tuple(int(x) for x in np.trim_zeros(c, "b")) or (0,) for stat, c in hist.items()}
    return SampleSummary(n, trials, seed, GENERATOR, counts, sizes)
