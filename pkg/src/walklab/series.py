"""Counting sequences and closed-form generating functions of path families.

Two independent routes to the same numbers:

* :func:`coeffs` counts paths exactly by a transfer-matrix recursion over the
  altitude (arches, tails and ``e1`` via truncated series arithmetic);
* :func:`eval_gf` / :func:`eval_bivariate` evaluate the kernel-method closed
  forms from the small and large branches.

The closed forms are written once in :class:`BranchData`, generic over the
number type of the branches, so that :mod:`walklab.scheme` can evaluate the
very same expressions in :class:`~walklab.kernel.SqrtExt` arithmetic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, PoleError, StepSetError, UnsupportedStatisticError
from .kernel import SqrtExt, branch_derivative, kernel_roots
from .steps import StepSet, StructuralConstants, eval_P

__all__ = [
    "FAMILIES",
    "BIVARIATE_STATS",
    "SeriesTable",
    "coeffs",
    "altitude_profiles",
    "series_multiply",
    "series_reciprocal",
    "series_divide",
    "BranchData",
    "eval_gf",
    "eval_bivariate",
    "height_motzkin_closed_form",
    "bivariate_coefficients",
    "require_motzkin",
]

FAMILIES = (
    "walks",
    "bridges",
    "excursions",
    "meanders",
    "arches",
    "chains",
    "e1",
    "neg_meanders",
    "strict_neg_meanders",
    "tails",
)

BIVARIATE_STATS = ("returns", "height", "signchanges", "bridge_signchanges")


def require_motzkin(steps: StepSet, what: str) -> None:
    if not steps.is_motzkin:
        raise UnsupportedStatisticError(
            f"{what} is only defined for Motzkin step sets (support in {{-1,0,1}}), got {steps}"
        )


# ---------------------------------------------------------------------------
# truncated power series
# ---------------------------------------------------------------------------


def series_multiply(a: Sequence, b: Sequence, n: int) -> list:
    out = []
    for k in range(n + 1):
        acc = 0
        for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
            acc += a[i] * b[k - i]
        out.append(acc)
    return out


def series_reciprocal(a: Sequence, n: int) -> list:
    """Coefficients of ``1/a`` up to order ``n``; needs ``a[0] != 0``."""
    if not a or a[0] == 0:
        raise ZeroDivisionError("series reciprocal needs a non-zero constant term")
    inv0 = 1 / a[0]
    out = [inv0]
    for k in range(1, n + 1):
        acc = 0
        for i in range(1, min(k, len(a) - 1) + 1):
            acc += a[i] * out[k - i]
        out.append(-acc * inv0)
    return out


def series_divide(a: Sequence, b: Sequence, n: int) -> list:
    """Coefficients of ``a/b`` up to order ``n``."""
    if not b or b[0] == 0:
        raise ZeroDivisionError("series division needs a divisor with non-zero constant term")
    inv0 = 1 / b[0]
    out = []
    for k in range(n + 1):
        acc = a[k] if k < len(a) else 0
        for i in range(1, min(k, len(b) - 1) + 1):
            acc -= b[i] * out[k - i]
        out.append(acc * inv0)
    return out


# ---------------------------------------------------------------------------
# transfer matrix over the altitude
# ---------------------------------------------------------------------------


def _integer_weights(steps: StepSet) -> tuple[list[int], int]:
    """Scale exact weights to integers: ``p_j = q_j / D``."""
    den = 1
    for w in steps.weights:
        den = den * w.denominator // math.gcd(den, w.denominator)
    return [int(w * den) for w in steps.weights], den


def altitude_profiles(steps: StepSet, n_max: int, floor=None, ceiling=None, exact=None):
    """Yield ``(n, offset, vector)`` for n = 0..n_max.

    ``vector[offset + a]`` is the total weight of n-step paths from altitude 0
    whose altitudes after every step lie in ``[floor, ceiling]`` and end at
    ``a``.  In exact mode the vector holds integers and the true weight is
    ``vector / D**n`` with the returned ``scale = D``; see :func:`_dp_scale`.
    """
    exact = steps.exact if exact is None else exact
    c, d = steps.c, steps.d
    lo = -n_max * c if floor is None else max(floor, -n_max * c)
    hi = n_max * d if ceiling is None else min(ceiling, n_max * d)
    lo, hi = min(lo, 0), max(hi, 0)
    offset = -lo
    size = hi - lo + 1
    if exact:
        qs, _ = _integer_weights(steps)
        vec = np.zeros(size, dtype=object)
        vec[:] = 0
        vec[offset] = 1
    else:
        qs = [float(w) for w in steps.weights]
        vec = np.zeros(size)
        vec[offset] = 1.0
    js = steps.support
    fl = -np.inf if floor is None else floor
    cl = np.inf if ceiling is None else ceiling
    alts = np.arange(lo, hi + 1)
    allowed = (alts >= fl) & (alts <= cl)
    yield 0, offset, vec
    for n in range(1, n_max + 1):
        new = np.zeros(size, dtype=object) if exact else np.zeros(size)
        if exact:
            new[:] = 0
        for s, q in zip(js, qs):
            if s >= 0:
                new[s:] += q * vec[: size - s]
            else:
                new[: size + s] += q * vec[-s:]
        new[~allowed] = 0
        vec = new
        yield n, offset, vec


def _dp_scale(steps: StepSet, exact: bool):
    if exact:
        return _integer_weights(steps)[1]
    return 1.0


def _normalize(raw, scale, n, exact):
    if exact:
        return Fraction(int(raw), scale**n)
    return float(raw)


@dataclass(frozen=True)
class SeriesTable:
    family: str
    coeffs: tuple

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)


def _constrained(steps, n_max, exact, floor=None, ceiling=None, endpoint=None):
    scale = _dp_scale(steps, exact)
    out = []
    for n, offset, vec in altitude_profiles(steps, n_max, floor, ceiling, exact):
        raw = vec[offset] if endpoint == 0 else vec.sum()
        out.append(_normalize(raw, scale, n, exact))
    return out


def coeffs(steps: StepSet, family: str, n_max: int, exact: bool | None = None) -> SeriesTable:
    """Exact (or float) counting sequence of ``family`` for lengths 0..n_max."""
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    exact = steps.exact if exact is None else exact
    if exact and not steps.exact:
        raise StepSetError("exact mode needs rational weights")
    one = Fraction(1) if exact else 1.0
    cast = (lambda w: Fraction(w)) if exact else float

    if family == "walks":
        total = cast(steps.total_weight())
        values = [total**n for n in range(n_max + 1)]
    elif family == "bridges":
        values = _constrained(steps, n_max, exact, endpoint=0)
    elif family == "excursions":
        values = _constrained(steps, n_max, exact, floor=0, endpoint=0)
    elif family == "meanders":
        values = _constrained(steps, n_max, exact, floor=0)
    elif family == "neg_meanders":
        values = _constrained(steps, n_max, exact, ceiling=0)
    elif family == "strict_neg_meanders":
        values = _constrained(steps, n_max, exact, ceiling=-1)
    elif family == "chains":
        p0 = cast(steps.weight(0))
        values = [p0**n if n else one for n in range(n_max + 1)]
    elif family == "arches":
        bridges = _constrained(steps, n_max, exact, endpoint=0)
        inv = series_reciprocal(bridges, n_max)
        values = [one - inv[0]] + [-x for x in inv[1:]]
    elif family == "tails":
        bridges = _constrained(steps, n_max, exact, endpoint=0)
        total = cast(steps.total_weight())
        walks = [total**n for n in range(n_max + 1)]
        values = series_divide(walks, bridges, n_max)
    else:  # e1
        require_motzkin(steps, "e1 (excursions starting with a +1 jump)")
        exc = _constrained(steps, n_max, exact, floor=0, endpoint=0)
        p0 = cast(steps.weight(0))
        values = [exc[n] - (p0 * exc[n - 1] if n else 0) for n in range(n_max + 1)]
        values[0] -= one
    return SeriesTable(family, tuple(values))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def _prod(xs, one):
    acc = one
    for x in xs:
        acc = acc * x
    return acc


def _check_pole(den, what):
    if isinstance(den, SqrtExt):
        return
    if not cmath.isfinite(den) or abs(den) < 1e-14:
        raise PoleError(f"{what} vanishes (|denominator| = {abs(den):.3e})")


class BranchData:
    """Kernel branches at one point ``z`` and the closed forms built on them.

    ``small``/``large`` are the branch values as numbers or as SqrtExt
    elements.  Derivatives of the small branches are computed on demand by
    implicit differentiation of the kernel equation.
    """

    def __init__(self, steps: StepSet, z, small, large, one=1.0):
        self.steps = steps
        self.z = z
        self.small = list(small)
        self.large = list(large)
        self.one = one
        self.P1 = float(steps.total_weight())
        self.p_minus = float(steps.weight(-steps.c))
        self.p_plus = float(steps.weight(steps.d))
        self.p0 = float(steps.weight(0))
        self._bridges = None

    @classmethod
    def at(cls, steps: StepSet, consts: StructuralConstants, z) -> "BranchData":
        if abs(z) >= float(consts.rho):
            raise DomainError(f"closed forms need |z| < rho = {float(consts.rho)}, got |z| = {abs(z)}")
        if z == 0:
            raise DomainError("closed forms are evaluated at z != 0; use the series at z = 0")
        # only symmetric functions of the branches enter, so no principal tracking
        roots = kernel_roots(steps, consts, z, track=False)
        zz = z.real if isinstance(z, complex) and z.imag == 0 else z
        small = [_realify(x, zz) for x in roots.small]
        large = [_realify(x, zz) for x in roots.large]
        return cls(steps, zz, small, large)

    # univariate -----------------------------------------------------------

    def walks(self):
        return self.one / (self.one - self.z * self.P1)

    def bridges(self):
        if self._bridges is None:
            terms = [branch_derivative(self.steps, self.z, u) / u for u in self.small]
            self._bridges = self.z * sum(terms[1:], terms[0])
        return self._bridges

    def excursions(self):
        c = self.steps.c
        sign = -1.0 if (c - 1) % 2 else 1.0
        return _prod(self.small, self.one) * (sign / (self.p_minus * self.z))

    def meanders(self):
        return _prod([self.one - u for u in self.small], self.one) * self.walks()

    def arches(self):
        return self.one - self.one / self.bridges()

    def chains(self):
        return self.one / (self.one - self.p0 * self.z)

    def e1(self):
        return self.excursions() / self.chains() - self.one

    def neg_meanders(self):
        return self.excursions() * self.strict_neg_meanders()

    def strict_neg_meanders(self):
        return _prod([self.one / (self.one - u) for u in self.small], self.one)

    def tails(self):
        return self.walks() / self.bridges()

    def univariate(self, family: str):
        if family not in FAMILIES:
            raise DomainError(f"unknown family {family!r}")
        if family == "e1":
            require_motzkin(self.steps, "e1 (excursions starting with a +1 jump)")
        return getattr(self, family)()

    # bivariate ------------------------------------------------------------

    def meanders_final_altitude(self, u, form: str = "small"):
        """M(z, u) with u marking the final altitude, from either branch family."""
        if form == "small":
            den = u**self.steps.c * (self.one - self.z * eval_P(self.steps, u, 0))
            _check_pole(den, "u^c (1 - z P(u))")
            return _prod([u - x for x in self.small], self.one) / den
        if form == "large":
            dens = [u - v for v in self.large]
            for den in dens:
                _check_pole(den, "u - v_l(z)")
            return _prod([self.one / den for den in dens], self.one) * (-1.0 / (self.p_plus * self.z))
        raise DomainError("form must be 'small' or 'large'")

    def returns(self, u):
        den = u + (self.one - u) * self.bridges()
        _check_pole(den, "u + (1-u) B(z)")
        return self.walks() / den

    def height(self, u):
        dens = [u - v for v in self.large]
        for den in dens:
            _check_pole(den, "u - v_l(z)")
        left = _prod([self.one / (self.one - x) for x in self.small], self.one)
        right = _prod([self.one / den for den in dens], self.one)
        return left * right * (-1.0 / (self.p_plus * self.z))

    def bridge_signchanges(self, u):
        e1 = self.e1()
        den = self.one - u * e1
        _check_pole(den, "1 - u E1(z)")
        return self.chains() * (self.one + 2.0 * e1 / den)

    def signchanges(self, u):
        bzu = self.bridge_signchanges(u)
        tail = self.tails()
        b_plus = (bzu - self.chains()) * 0.5
        return bzu * tail + b_plus * (tail - self.one) * (u - self.one)

    def bivariate(self, stat: str, u):
        if stat not in BIVARIATE_STATS:
            raise DomainError(f"unknown statistic {stat!r}; choose from {', '.join(BIVARIATE_STATS)}")
        if stat in ("signchanges", "bridge_signchanges"):
            require_motzkin(self.steps, "sign changes")
        return getattr(self, stat)(u)


def _realify(x: complex, z):
    if isinstance(z, float) and abs(x.imag) <= 1e-13 * max(1.0, abs(x)):
        return x.real
    return x


def _finish(value, z):
    if isinstance(value, complex) and isinstance(z, float) and abs(value.imag) <= 1e-12 * max(1.0, abs(value)):
        return value.real
    return value


def _as_point(z):
    z = complex(z)
    return z.real if z.imag == 0 else z


def eval_gf(steps: StepSet, consts: StructuralConstants, which: str, z, u=None, form: str = "small"):
    """Numeric value of a univariate family at ``z``; ``which='meanders'`` with
    ``u`` given evaluates M(z, u) by either side of the kernel factorisation."""
    z = _as_point(z)
    data = BranchData.at(steps, consts, z)
    if which == "meanders" and u is not None:
        return _finish(data.meanders_final_altitude(u, form), z)
    return _finish(data.univariate(which), z)


def eval_bivariate(steps: StepSet, consts: StructuralConstants, stat: str, z, u):
    """Numeric value of the bivariate GF of ``stat`` at ``(z, u)``, ``|z| < rho``."""
    if stat in ("signchanges", "bridge_signchanges"):
        require_motzkin(steps, "sign changes")
    z = _as_point(z)
    data = BranchData.at(steps, consts, z)
    return _finish(data.bivariate(stat, u), z)


def height_motzkin_closed_form(steps: StepSet, z, u):
    """Explicit square-root form of the height BGF of Motzkin walks."""
    require_motzkin(steps, "the Motzkin height closed form")
    pm, p0, pp = (float(steps.weight(j)) for j in (-1, 0, 1))
    root = cmath.sqrt((1 - p0 * z) ** 2 - 4 * pm * pp * z * z)
    den = (1 + u) * (1 - p0 * z) - 2 * z * (pm + u * pp) + (1 - u) * root
    _check_pole(den, "Motzkin height denominator")
    return _finish(2.0 / den, z if isinstance(z, float) else complex(z))


def bivariate_coefficients(
    steps: StepSet,
    consts: StructuralConstants,
    stat: str,
    n_max: int,
    k_max: int,
    radius_z: float | None = None,
    radius_u: float = 0.5,
    points_z: int = 64,
    points_u: int = 32,
):
    """``[z^n u^k]`` of a bivariate GF by trapezoidal Cauchy integrals on circles.

    Returns a real array of shape ``(n_max + 1, k_max + 1)``.  The n = 0 row
    is not reachable from the closed forms (z = 0 is excluded) and is obtained
    from the integral as well.
    """
    rz = 0.5 * float(consts.rho) if radius_z is None else radius_z
    mz = max(points_z, 2 * (n_max + 1))
    mu = max(points_u, 2 * (k_max + 1))
    zs = rz * np.exp(2j * np.pi * (np.arange(mz) + 0.5) / mz)
    us = radius_u * np.exp(2j * np.pi * np.arange(mu) / mu)
    grid = np.empty((mz, mu), dtype=complex)
    for i, z in enumerate(zs):
        data = BranchData.at(steps, consts, complex(z))
        for j, u in enumerate(us):
            grid[i, j] = data.bivariate(stat, complex(u))
    # half-sample shift in z keeps z off the real axis (no branch-classification ties)
    phase = np.exp(-1j * np.pi * np.arange(mz) / mz)
    fz = np.fft.fft(grid, axis=0) / mz
    fz = fz * phase[:, None]
    fzu = np.fft.fft(fz, axis=1) / mu
    n_idx = np.arange(n_max + 1)
    k_idx = np.arange(k_max + 1)
    out = fzu[np.ix_(n_idx, k_idx)]
    out = out / (rz ** n_idx[:, None]) / (radius_u ** k_idx[None, :])
    return out.real
