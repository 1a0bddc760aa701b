"""Numerical check of the square-root scheme behind the half-normal law.

For each application the bivariate generating function ``c(z, u)`` is
assembled from the kernel branches inside the ring ``R[s]/(s**2 - sigma0)``
with ``sigma0 = 1 - z/rho``: the principal pair enters as
``u1 = a - b s`` and ``v1 = a + b s``, every other branch is a plain number.
Inverting ``c`` in that ring gives ``1/c = g + h s`` directly, so ``g`` and
``h`` are never fitted.  Derivatives at ``(rho, 1)`` come from finite
differences followed by Richardson extrapolation along ``z -> rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, NumericError, WalkLabError
from .kernel import SqrtExt, branch_frame, kernel_roots
from .limits import predict
from .series import BranchData, require_motzkin
from .steps import StepSet, StructuralConstants

__all__ = ["APPS", "SchemeReport", "decompose", "check_hypothesis"]

# application -> (bivariate statistic, statistic name used by predict)
APPS = {
    "returns": ("returns", "returns"),
    "height": ("height", "height"),
    "signchanges_walks": ("signchanges", "signchanges"),
    "signchanges_bridges": ("bridge_signchanges", "bridge_signchanges"),
}

ZERO_TOL = 1e-5
NONZERO_TOL = 1e-2
U_STEP = 1e-3
K_RANGE = range(2, 8)

ASSUMED = (
    "analytic continuation of g and h to a neighbourhood of z = rho beyond the disc",
    "continuation for |u - 1| > eps/2 (only checked near u = 1)",
)


def _stat(app: str) -> tuple[str, str]:
    try:
        return APPS[app]
    except KeyError:
        raise DomainError(f"unknown application {app!r}; choose from {', '.join(APPS)}") from None


def _branches_in_extension(steps, consts, z):
    rho = float(consts.rho)
    sigma0 = 1.0 - z / rho
    a, b = branch_frame(steps, consts, z)
    roots = kernel_roots(steps, consts, z)
    one = SqrtExt(1.0, 0.0, sigma0)
    small = [SqrtExt(a, -b, sigma0) if i == roots.principal_small_index else _plain(x)
             for i, x in enumerate(roots.small)]
    large = [SqrtExt(a, b, sigma0) if i == roots.principal_large_index else _plain(x)
             for i, x in enumerate(roots.large)]
    return BranchData(steps, z, small, large, one=one)


def _plain(x: complex):
    return x.real if abs(x.imag) <= 1e-13 * max(1.0, abs(x)) else x


def decompose(app: str, steps: StepSet, consts: StructuralConstants, z: float, u: float) -> tuple[float, float]:
    """``(g, h)`` with ``1/c(z, u) = g + h sqrt(1 - z/rho)`` at real ``0 < z < rho``."""
    stat, _ = _stat(app)
    if stat in ("signchanges", "bridge_signchanges"):
        require_motzkin(steps, "sign changes")
    z = float(z)
    data = _branches_in_extension(steps, consts, z)
    inv = data.one / data.bivariate(stat, float(u))
    return _real(inv.reg), _real(inv.sing)


def _real(x):
    return x.real if isinstance(x, complex) else float(x)


# ---------------------------------------------------------------------------
# extrapolation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float

    def to_dict(self):
        return {"value": self.value, "error": self.error}


def richardson(values, ratio: float = 4.0) -> Estimate:
    """Extrapolate a sequence whose error shrinks by ``ratio`` per term.

    Builds the full Richardson table; the error estimate is the gap between
    the last two diagonal entries.
    """
    row = [float(v) for v in values]
    diag = [row[-1]]
    factor = ratio
    while len(row) > 1:
        row = [(factor * row[i + 1] - row[i]) / (factor - 1.0) for i in range(len(row) - 1)]
        diag.append(row[-1])
        factor *= ratio
    err = abs(diag[-1] - diag[-2]) if len(diag) > 1 else float("inf")
    return Estimate(diag[-1], err)


# ---------------------------------------------------------------------------
# the report
# ---------------------------------------------------------------------------


@dataclass
class SchemeReport:
    app: str
    rho: float
    g: Estimate
    h: Estimate
    g_u: Estimate
    g_uu: Estimate
    g_z: Estimate
    h_u: Estimate
    sigma: float | None
    sigma_predicted: float | None
    verdict: str
    violated: list = field(default_factory=list)
    tol: float = ZERO_TOL
    assumed: tuple = ASSUMED

    @property
    def sigma_rel_error(self) -> float | None:
        if self.sigma is None or not self.sigma_predicted:
            return None
        return abs(self.sigma - self.sigma_predicted) / abs(self.sigma_predicted)

    def to_dict(self) -> dict:
        values = {name: getattr(self, name).to_dict() for name in ("g", "h", "g_u", "g_uu", "g_z", "h_u")}
        return {
            "app": self.app,
            "rho": self.rho,
            "at_rho_1": values,
            "sigma": self.sigma,
            "sigma_predicted": self.sigma_predicted,
            "sigma_rel_error": self.sigma_rel_error,
            "verdict": self.verdict,
            "violated": list(self.violated),
            "tol": self.tol,
            "assumed_not_checked": list(self.assumed),
        }


def check_hypothesis(app: str, steps: StepSet, consts: StructuralConstants, tol: float = ZERO_TOL) -> SchemeReport:
    """Evaluate the decomposition on ``z_k = rho (1 - 4**-k)`` and test the
    conditions of the half-normal theorem at ``(rho, 1)``."""
    _, pred_stat = _stat(app)
    rho = float(consts.rho)
    zs = [rho * (1.0 - 4.0**-k) for k in K_RANGE]
    eps = U_STEP
    g0, h0, gu, guu, hu = [], [], [], [], []
    for z in zs:
        gm, hm = decompose(app, steps, consts, z, 1.0 - eps)
        gc, hc = decompose(app, steps, consts, z, 1.0)
        gp, hp = decompose(app, steps, consts, z, 1.0 + eps)
        g0.append(gc)
        h0.append(hc)
        gu.append((gp - gm) / (2 * eps))
        guu.append((gp - 2 * gc + gm) / eps**2)
        hu.append((hp - hm) / (2 * eps))
    gz = [(g0[i + 1] - g0[i]) / (zs[i + 1] - zs[i]) for i in range(len(zs) - 1)]

    est = {
        "g": richardson(g0),
        "h": richardson(h0),
        "g_u": richardson(gu),
        "g_uu": richardson(guu),
        "g_z": richardson(gz),
        "h_u": richardson(hu),
    }
    for name, e in est.items():
        if not math.isfinite(e.value) or e.error > 1e-2 * max(1.0, abs(e.value)):
            raise NumericError(
                f"extrapolation of {name} at (rho, 1) is unstable",
                {"estimate": e.value, "error": e.error},
            )

    # zero conditions are measured relative to the size of the non-zero ones
    scale = max(1.0, abs(est["g_z"].value), abs(est["h_u"].value))
    violated = []
    for name in ("g", "g_u", "g_uu"):
        if abs(est[name].value) >= tol * scale:
            violated.append(f"{name}(rho,1) != 0")
    h_nonzero = abs(est["h"].value) >= tol * scale
    if h_nonzero:
        violated.append("h(rho,1) != 0")
    if abs(est["g_z"].value) <= NONZERO_TOL:
        violated.append("g_z(rho,1) = 0")
    if abs(est["h_u"].value) <= NONZERO_TOL:
        violated.append("h_u(rho,1) = 0")

    sigma = None
    if not violated:
        verdict = "half_normal"
        sigma = math.sqrt(2.0) * est["h_u"].value / (rho * est["g_z"].value)
    elif h_nonzero and "g(rho,1) != 0" not in violated:
        verdict = "rayleigh_regime"
    else:
        verdict = "violated"

    try:
        law = predict(steps, consts, pred_stat)
        sigma_pred = getattr(law, "sigma", None) if verdict == "half_normal" else None
    except WalkLabError:  # prediction refused (periodic set): report without it
        sigma_pred = None

    return SchemeReport(
        app=app,
        rho=rho,
        sigma=sigma,
        sigma_predicted=sigma_pred,
        verdict=verdict,
        violated=violated,
        tol=tol,
        **est,
    )
