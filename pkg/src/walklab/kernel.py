"""Kernel equation ``1 - z P(u) = 0``: branches, their derivatives and the
square-root extension used to split expressions near the structural radius.

The kernel polynomial ``K(z, u) = u**c - z u**c P(u)`` has degree ``c + d`` in
``u``.  Its ``c`` roots that vanish as ``z -> 0`` are the small branches, the
other ``d`` roots are the large branches.  For real ``0 < z < rho`` the
principal small branch ``u1`` and the principal large branch ``v1`` are the
two real positive roots on either side of ``tau``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from .errors import DomainError, NumericError, SingularityError
from .steps import StepSet, StructuralConstants, eval_P

__all__ = [
    "SqrtExt",
    "KernelRoots",
    "kernel_coefficients",
    "kernel_roots",
    "branch_derivative",
    "branch_frame",
    "principal_pair",
]

_HOMOTOPY_STEPS = 64


# ---------------------------------------------------------------------------
# arithmetic in R[s] / (s**2 - sigma0)
# ---------------------------------------------------------------------------


class SqrtExt:
    """Element ``reg + sing * s`` of the ring ``C[s]/(s**2 - sigma0)``.

    With ``sigma0 = 1 - z/rho`` the embedding ``s -> +sqrt(sigma0)`` maps an
    element to a number; the pair (reg, sing) is the regular/singular split of
    that number near ``rho``.
    """

    __slots__ = ("reg", "sing", "sigma0")

    def __init__(self, reg, sing=0.0, sigma0=0.0):
        self.reg = complex(reg) if isinstance(reg, complex) else float(reg)
        self.sing = complex(sing) if isinstance(sing, complex) else float(sing)
        self.sigma0 = float(sigma0)

    def _coerce(self, other) -> "SqrtExt":
        if isinstance(other, SqrtExt):
            if other.sigma0 != self.sigma0:
                raise DomainError(
                    f"mismatched extensions: sigma0={self.sigma0} vs {other.sigma0}"
                )
            return other
        if isinstance(other, (int, float, complex)) or hasattr(other, "denominator"):
            return SqrtExt(_num(other), 0.0, self.sigma0)
        return NotImplemented

    def one(self) -> "SqrtExt":
        return SqrtExt(1.0, 0.0, self.sigma0)

    def conjugate_branch(self) -> "SqrtExt":
        """Image under ``s -> -s`` (swaps u1 and v1)."""
        return SqrtExt(self.reg, -self.sing, self.sigma0)

    def norm(self):
        return self.reg * self.reg - self.sing * self.sing * self.sigma0

    def embed(self):
        """Numeric value with ``s = +sqrt(sigma0)``."""
        return self.reg + self.sing * math.sqrt(self.sigma0)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return SqrtExt(self.reg + o.reg, self.sing + o.sing, self.sigma0)

    __radd__ = __add__

    def __neg__(self):
        return SqrtExt(-self.reg, -self.sing, self.sigma0)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return SqrtExt(self.reg - o.reg, self.sing - o.sing, self.sigma0)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return SqrtExt(
            self.reg * o.reg + self.sing * o.sing * self.sigma0,
            self.reg * o.sing + o.reg * self.sing,
            self.sigma0,
        )

    __rmul__ = __mul__

    def inverse(self) -> "SqrtExt":
        n = self.norm()
        if abs(n) <= 1e-300:
            raise SingularityError(f"element {self!r} is not invertible")
        return SqrtExt(self.reg / n, -self.sing / n, self.sigma0)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("SqrtExt supports integer powers only")
        base = self if k >= 0 else self.inverse()
        result = self.one()
        k = abs(k)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.reg == other and self.sing == 0
        if isinstance(other, SqrtExt):
            return (self.reg, self.sing, self.sigma0) == (other.reg, other.sing, other.sigma0)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"SqrtExt({self.reg!r}, {self.sing!r}, sigma0={self.sigma0!r})"


def _num(x):
    if isinstance(x, complex):
        return x
    return float(x)


# ---------------------------------------------------------------------------
# roots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelRoots:
    z: complex
    small: tuple[complex, ...]
    large: tuple[complex, ...]
    principal_small_index: int
    principal_large_index: int
    residuals: tuple[float, ...] = field(default=())
    collided: bool = False

    @property
    def u1(self) -> complex:
        return self.small[self.principal_small_index]

    @property
    def v1(self) -> complex:
        return self.large[self.principal_large_index]

    def all_roots(self) -> tuple[complex, ...]:
        return self.small + self.large


def kernel_coefficients(steps: StepSet, z) -> np.ndarray:
    """Coefficients of ``u**c - z u**c P(u)``, highest degree first."""
    c, d = steps.c, steps.d
    deg = c + d
    coeffs = np.zeros(deg + 1, dtype=complex)
    for s, p in steps.jumps:
        coeffs[deg - (s + c)] -= z * float(p)
    coeffs[deg - c] += 1.0
    return coeffs


def _kernel_residual(steps: StepSet, z, u) -> float:
    return abs(1.0 - z * eval_P(steps, u, 0))


def _polish(coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """A few guarded Newton steps; a step is kept only if it lowers |K| and
    does not drift towards a neighbouring root."""
    dcoeffs = np.polyder(coeffs)
    out = roots.copy()
    for i, r in enumerate(roots):
        others = np.delete(out, i)
        guard = 0.25 * np.min(np.abs(others - r)) if others.size else np.inf
        x = r
        fx = abs(np.polyval(coeffs, x))
        for _ in range(6):
            dfx = np.polyval(dcoeffs, x)
            if dfx == 0:
                break
            step = np.polyval(coeffs, x) / dfx
            y = x - step
            fy = abs(np.polyval(coeffs, y))
            if fy >= fx or abs(y - r) > guard:
                break
            x, fx = y, fy
        out[i] = x
    return out


def _raw_roots(steps: StepSet, z) -> np.ndarray:
    coeffs = kernel_coefficients(steps, z)
    roots = np.roots(coeffs)
    if roots.size != steps.c + steps.d:
        raise NumericError("kernel polynomial lost degree", {"z": z, "roots": roots.tolist()})
    return _polish(coeffs, roots)


def principal_pair(steps: StepSet, consts: StructuralConstants, z: float) -> tuple[float, float]:
    """Real principal branches ``(u1(z), v1(z))`` for ``0 < z < rho`` by bracketing."""
    rho, tau = float(consts.rho), float(consts.tau)
    if not 0.0 < z < rho:
        raise DomainError(f"real principal branches need 0 < z < rho={rho}, got {z}")
    fsteps = steps.as_float()

    def g(u):
        return 1.0 - z * eval_P(fsteps, u, 0)

    lo = tau / 2.0
    while g(lo) > 0:
        lo /= 2.0
    hi = 2.0 * tau
    while g(hi) > 0:
        hi *= 2.0
    u1 = brentq(g, lo, tau, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    v1 = brentq(g, tau, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return u1, v1


def _split_by_modulus(roots: np.ndarray, c: int):
    order = np.argsort(np.abs(roots), kind="stable")
    return roots[order[:c]], roots[order[c:]]


def _match(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    cost = np.abs(prev[:, None] - cur[None, :])
    _, cols = linear_sum_assignment(cost)
    return cur[cols]


def _track(steps: StepSet, path, start_roots: np.ndarray) -> np.ndarray:
    """Continue labelled roots along the points of ``path``."""
    cur = start_roots
    for zt in path:
        cur = _match(cur, _raw_roots(steps, zt))
    return cur


def kernel_roots(steps: StepSet, consts: StructuralConstants, z, track: bool = True) -> KernelRoots:
    """All ``c + d`` kernel roots at ``z``, split into small and large branches.

    Inside the disc ``|z| < rho`` the split is by modulus (small branches lie
    in ``|u| < tau``, large ones outside).  Elsewhere the labels come from
    continuation along the straight segment from ``rho/2``.  Exactly at
    ``z = rho`` the principal pair collides; both are returned as ``tau`` and
    the result is flagged.

    With ``track=False`` the principal labels at complex ``|z| < rho`` are
    taken by modulus instead of by continuation along an arc; callers that
    only use symmetric functions of the branches can skip the tracking.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("kernel roots are undefined at z = 0")
    c = steps.c
    rho, tau = float(consts.rho), float(consts.tau)
    az = abs(z)
    roots = _raw_roots(steps, z)
    collided = False

    if az < rho:
        small, large = _split_by_modulus(roots, c)
        if z.imag == 0 and z.real > 0:
            u1, v1 = principal_pair(steps, consts, z.real)
            i = int(np.argmin(np.abs(small - u1)))
            j = int(np.argmin(np.abs(large - v1)))
            small[i], large[j] = u1, v1
        elif track and (c > 1 or steps.d > 1):
            i, j = _principal_by_arc(steps, consts, z, small, large)
        else:
            i, j = int(np.argmax(np.abs(small))), int(np.argmin(np.abs(large)))
    else:
        z0 = rho / 2.0
        start = _raw_roots(steps, z0)
        s0, l0 = _split_by_modulus(start, c)
        u1, v1 = principal_pair(steps, consts, z0)
        i0 = int(np.argmin(np.abs(s0 - u1)))
        j0 = int(np.argmin(np.abs(l0 - v1)))
        labelled = np.concatenate([s0, l0])
        ts = np.linspace(0.0, 1.0, _HOMOTOPY_STEPS + 1)[1:]
        path = [z0 + t * (z - z0) for t in ts]
        if abs(z - rho) < 1e-12 * rho:
            path[-1] = z
            collided = True
        tracked = _track(steps, path[:-1], labelled)
        tracked = _match(tracked, roots)
        small, large = tracked[:c].copy(), tracked[c:].copy()
        i, j = i0, j0
        if collided:
            small[i] = tau
            large[j] = tau

    residuals = tuple(_kernel_residual(steps, z, r) for r in np.concatenate([small, large]))
    bound = 1e-9 * (1.0 + az)
    if not collided and max(residuals) > bound:
        raise NumericError(
            f"kernel root residual {max(residuals):.3e} exceeds {bound:.3e}",
            {"z": z, "residuals": residuals},
        )
    return KernelRoots(
        z=z,
        small=tuple(complex(x) for x in small),
        large=tuple(complex(x) for x in large),
        principal_small_index=int(i),
        principal_large_index=int(j),
        residuals=residuals,
        collided=collided,
    )


def _principal_by_arc(steps, consts, z, small, large):
    """Index of the principal branches at complex ``|z| < rho`` by continuing
    the real positive pair along the arc ``|z| e^{i theta}``."""
    r = abs(z)
    u1, v1 = principal_pair(steps, consts, r)
    start = _raw_roots(steps, r)
    s0, l0 = _split_by_modulus(start, steps.c)
    s0[int(np.argmin(np.abs(s0 - u1)))] = u1
    l0[int(np.argmin(np.abs(l0 - v1)))] = v1
    theta = cmath.phase(z)
    path = [r * cmath.exp(1j * theta * t) for t in np.linspace(0.0, 1.0, _HOMOTOPY_STEPS + 1)[1:]]
    labelled = np.concatenate([s0, l0])
    tracked = _track(steps, path[:-1], labelled)
    tracked = _match(tracked, np.concatenate([small, large]))
    pu, pv = tracked[int(np.argmin(np.abs(s0 - u1)))], tracked[steps.c + int(np.argmin(np.abs(l0 - v1)))]
    return int(np.argmin(np.abs(small - pu))), int(np.argmin(np.abs(large - pv)))


# ---------------------------------------------------------------------------
# derivatives and the local frame of the principal pair
# ---------------------------------------------------------------------------


def branch_derivative(steps: StepSet, z, u):
    """``u'(z) = -P(u) / (z P'(u))`` for a branch ``u`` of the kernel at ``z``.

    ``u`` may be a number or a :class:`SqrtExt`; in the latter case the
    result carries the ``1/sqrt(1 - z/rho)`` blow-up of ``u1'`` in its
    singular part.
    """
    denom = z * eval_P(steps, u, 1)
    if isinstance(denom, SqrtExt):
        return -eval_P(steps, u, 0) / denom
    if denom == 0 or abs(denom) <= 1e-300:
        raise SingularityError(f"z P'(u) vanishes at z={z}, u={u}")
    return -eval_P(steps, u, 0) / denom


def branch_frame(steps: StepSet, consts: StructuralConstants, z: float) -> tuple[float, float]:
    """``(a, b)`` with ``u1 = a - b s`` and ``v1 = a + b s``, ``s = sqrt(1 - z/rho)``."""
    z = float(z)
    rho = float(consts.rho)
    if not 0.0 < z < rho:
        raise DomainError(f"branch_frame needs 0 < z < rho={rho}, got {z}")
    u1, v1 = principal_pair(steps, consts, z)
    s = math.sqrt(1.0 - z / rho)
    return 0.5 * (u1 + v1), (v1 - u1) / (2.0 * s)
