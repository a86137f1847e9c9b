"""Integral statements checked by quadrature.

On a transformed bubble ``v = C1 + C2 r^k`` every integrand of interest is
radial, so integrals over balls reduce to one-dimensional radial integrals.
Three families are checked:

* the cutoff flux identity obtained by integrating
  ``div(v^(1-q) psi X)`` against a compactly supported ``psi``:
  ``(a+1-q) int v^-q |grad v|^p psi + b int v^-q psi = -int v^(1-q) X.grad psi``;
* growth of ``int_{B_R} v^-q`` and ``int_{B_R} v^-q |grad v|^p``, whose
  log-log slopes are compared with the upper bound ``n - q`` and with the
  exact bubble exponents;
* the divergence theorem for ``F_i = v^(1-n) g^m X^j E_ij`` on a box, with
  ``div F`` from its closed form rather than from differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bubbles import Bubble, bubble_constants
from .errors import CriticalPointError, DomainError, QuadratureError
from .fields import TestField, eval_jet2, eval_jet3
from .fitting import fit_loglog_slope, geometric_ladder
from .params import EqParams
from .quadrature import adaptive_simpson, gauss_legendre_box, sphere_area
from .tensors import build_frame, grad_rho

RadialIntegrand = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


# -- cutoff ---------------------------------------------------------------


def smoothstep(t):
    """``3 t^2 - 2 t^3`` clipped to ``[0, 1]``."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


@dataclass(frozen=True)
class Cutoff:
    """``psi = eta^theta`` with ``eta = 1`` on ``[0, R]``, ``0`` past ``2R`` and a
    cubic smoothstep in between.  ``|eta'| <= 1.5 / R``."""

    R: float
    theta: float = 4.0

    def __post_init__(self):
        if not self.R > 0.0:
            raise DomainError(f"cutoff radius must be positive, got {self.R!r}")
        if not self.theta >= 1.0:
            raise DomainError("cutoff power must be at least 1")

    def eta(self, r):
        return smoothstep((2.0 * self.R - np.asarray(r, dtype=float)) / self.R)

    def deta(self, r):
        t = np.clip((2.0 * self.R - np.asarray(r, dtype=float)) / self.R, 0.0, 1.0)
        return -6.0 * t * (1.0 - t) / self.R

    def psi(self, r):
        return self.eta(r) ** self.theta

    def dpsi(self, r):
        e = self.eta(r)
        return self.theta * e ** (self.theta - 1.0) * self.deta(r)

    def max_gradient(self, samples: int = 20001) -> float:
        """Measured ``max |eta'|`` on a fine grid of the transition shell."""
        r = np.linspace(self.R, 2.0 * self.R, samples)
        return float(np.max(np.abs(self.deta(r))))


# -- radial integrals ----------------------------------------------------


def bubble_radial(params: EqParams, bubble: Bubble):
    """``(v, v')`` of the transformed bubble as functions of ``r``."""
    c = bubble_constants(params, bubble)

    def v(r):
        return c.c1 + c.c2 * r**c.k

    def dv(r):
        return c.c2 * c.k * r ** (c.k - 1.0)

    return v, dv


def radial_integral(
    params: EqParams,
    bubble: Bubble,
    integrand: RadialIntegrand,
    R: float,
    rtol: float = 1e-9,
    inner: float = 0.0,
    breakpoints=(),
) -> float:
    """``int_{inner < |x| < R} f`` for a radial ``f(r, v, v')``.

    Equals ``omega * int f(r) r^(n-1) dr`` with ``omega`` the unit sphere
    area.  ``breakpoints`` split the radial interval where ``f`` has kinks.
    """
    if not R > inner >= 0.0:
        raise DomainError("need 0 <= inner < R")
    n = params.n
    v, dv = bubble_radial(params, bubble)

    def f(r):
        return integrand(r, v(r), dv(r)) * r ** (n - 1)

    cuts = [inner] + sorted(b for b in breakpoints if inner < b < R) + [R]
    total = sum(adaptive_simpson(f, lo, hi, rtol=rtol) for lo, hi in zip(cuts[:-1], cuts[1:]))
    return sphere_area(n) * total


# -- cutoff flux identity -------------------------------------------------


@dataclass
class CutoffIdentityReport:
    q: float
    R: float
    theta: float
    lhs: float
    rhs: float
    lhs_terms: tuple[float, float]
    tol: float

    @property
    def relative(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), abs(self.rhs), 1e-300)

    @property
    def passed(self) -> bool:
        return self.relative <= self.tol


def check_cutoff_flux_identity(
    params: EqParams,
    bubble: Bubble,
    q: float,
    cutoff: Cutoff,
    tol: float = 1e-6,
    rtol: float = 1e-10,
) -> CutoffIdentityReport:
    """Both sides of the cutoff flux identity by radial quadrature.

    ``X = |v'|^(p-2) v' e_r`` and ``grad psi = psi' e_r``, so the right side is
    ``-omega int v^(1-q) |v'|^(p-1) psi' r^(n-1) dr`` over ``[R, 2R]``.
    """
    a, b, p = params.a, params.b, params.p
    R2 = 2.0 * cutoff.R
    brk = (cutoff.R,)
    grad_term = radial_integral(
        params, bubble, lambda r, v, dv: v ** (-q) * np.abs(dv) ** p * cutoff.psi(r), R2, rtol, breakpoints=brk
    )
    plain_term = radial_integral(
        params, bubble, lambda r, v, dv: v ** (-q) * cutoff.psi(r), R2, rtol, breakpoints=brk
    )
    rhs = -radial_integral(
        params,
        bubble,
        lambda r, v, dv: v ** (1.0 - q) * np.abs(dv) ** (p - 1.0) * cutoff.dpsi(r),
        R2,
        rtol,
        inner=cutoff.R,
    )
    t1 = (a + 1.0 - q) * grad_term
    t2 = b * plain_term
    return CutoffIdentityReport(q, cutoff.R, cutoff.theta, t1 + t2, rhs, (t1, t2), tol)


def cutoff_identity_q_grid(params: EqParams) -> tuple[float, ...]:
    """``{p/2, p, (p+a+1)/2, a+1}``."""
    p, a = params.p, params.a
    return (p / 2.0, p, (p + a + 1.0) / 2.0, a + 1.0)


# -- growth of weighted integrals ------------------------------------------

WEIGHTS = ("plain", "gradient")


@dataclass
class GrowthFit:
    q: float
    weight: str
    radii: np.ndarray
    values: np.ndarray
    fitted_slope: float
    bound_slope: float
    predicted_slope: float
    slope_tol: float = 0.05
    fit_from: int = 0  # index of the first radius used in the fit
    tail_slope: float = float("nan")  # slope of the shell integrals between ladder radii

    @property
    def bound_ok(self) -> bool:
        return self.fitted_slope <= self.bound_slope + self.slope_tol

    @property
    def compares_prediction(self) -> bool:
        return self.predicted_slope > 0.2

    @property
    def prediction_error(self) -> float:
        return abs(self.fitted_slope - self.predicted_slope)

    @property
    def prediction_ok(self) -> bool:
        return not self.compares_prediction or self.prediction_error <= self.slope_tol

    @property
    def tail_prediction_ok(self) -> bool:
        """The shell slope carries no constant offset from the core, so it
        stays close to the exponent even when that exponent is small."""
        return not self.compares_prediction or abs(self.tail_slope - self.predicted_slope) <= self.slope_tol

    @property
    def equality_case(self) -> bool:
        """Bound and bubble exponent coincide."""
        return abs(self.bound_slope - self.predicted_slope) < 1e-12

    @property
    def passed(self) -> bool:
        return self.bound_ok and self.prediction_ok


def predicted_growth_slope(params: EqParams, q: float, weight: str) -> float:
    """Growth exponent of the weighted integral on a bubble.

    For large ``r``, ``v ~ C2 r^k`` and ``|v'| ~ k C2 r^(k-1)`` with
    ``(k-1) p = k``, so the integrands decay like ``r^(-qk)`` and
    ``r^((1-q)k)`` respectively.
    """
    k = params.k
    if weight == "plain":
        return max(params.n - q * k, 0.0)
    if weight == "gradient":
        return max(params.n + (1.0 - q) * k, 0.0)
    raise DomainError(f"unknown weight {weight!r}")


def growth_q_grid(params: EqParams, weight: str, count: int = 5) -> tuple[float, ...]:
    """``count`` values spanning ``[p, a+1]`` (gradient) or ``(0, a+1]`` (plain)."""
    a1 = params.a + 1.0
    if weight == "gradient":
        return tuple(float(x) for x in np.linspace(params.p, a1, count))
    if weight == "plain":
        return tuple(float(x) for x in np.linspace(0.0, a1, count + 1)[1:])
    raise DomainError(f"unknown weight {weight!r}")


def check_growth(
    params: EqParams,
    bubble: Bubble,
    q: float,
    weight: str,
    radii=None,
    slope_tol: float = 0.05,
    rtol: float = 1e-10,
) -> GrowthFit:
    """Integrals over ``B_R`` on a geometric ladder and their log-log slope.

    Shell integrals between consecutive radii are accumulated, so each ladder
    value costs one shell.  The slope is fitted on the top half of the ladder.
    ``tail_slope`` fits the shells themselves over the same radii; for a
    geometric ladder it shares the growth exponent of the ball integrals but
    not their constant core contribution.
    """
    if weight not in WEIGHTS:
        raise DomainError(f"unknown weight {weight!r}")
    lo_q = params.p if weight == "gradient" else 0.0
    if not (lo_q <= q <= params.a + 1.0 + 1e-12) or (weight == "plain" and q <= 0.0):
        raise DomainError(f"q = {q} outside the admissible range for the {weight} weight")
    radii = geometric_ladder(1.0, 2.0, 12) if radii is None else np.asarray(radii, dtype=float)
    if radii.size < 4 or np.any(np.diff(radii) <= 0) or np.log10(radii[-1] / radii[0]) < 2.0:
        raise DomainError("growth ladder must be increasing and span at least two decades")
    p = params.p
    if weight == "plain":
        def f(r, v, dv):
            return v ** (-q)
    else:
        def f(r, v, dv):
            return v ** (-q) * np.abs(dv) ** p

    edges = np.concatenate([[0.0], radii])
    shells = [radial_integral(params, bubble, f, hi, rtol, inner=lo) for lo, hi in zip(edges[:-1], edges[1:])]
    values = np.cumsum(shells)
    start = radii.size // 2
    return GrowthFit(
        q=float(q),
        weight=weight,
        radii=radii,
        values=values,
        fitted_slope=fit_loglog_slope(radii[start:], values[start:]),
        bound_slope=params.n - q,
        predicted_slope=predicted_growth_slope(params, q, weight),
        slope_tol=slope_tol,
        fit_from=start,
        tail_slope=fit_loglog_slope(radii[start:], np.asarray(shells)[start:]),
    )


# -- divergence theorem ---------------------------------------------------


@dataclass
class DivergenceTheoremReport:
    volume: float
    flux: float
    volume_refined: float
    flux_refined: float
    nodes: int
    tol: float
    scale: float
    extra: dict = field(default_factory=dict)
    floor: float = 1e-9  # absolute floor: both sides vanish identically on bubbles

    @property
    def relative(self) -> float:
        return abs(self.volume_refined - self.flux_refined) / max(self.scale, self.floor)

    @property
    def convergence(self) -> float:
        """Change of either side between the two node counts, relative."""
        d = max(abs(self.volume - self.volume_refined), abs(self.flux - self.flux_refined))
        return d / max(self.scale, self.floor)

    @property
    def passed(self) -> bool:
        return self.relative <= self.tol


def _flux_field(params: EqParams, m: float):
    """``F_i = v^(1-n) g^m X^j E_ij`` and its divergence at points ``(k, n)``."""
    n = params.n
    q = 1.0 - n

    def evaluate(fieldspec: TestField, x: np.ndarray):
        jet = eval_jet3(fieldspec, params, x)
        fr = build_frame(params, jet)
        w = fr.v**q * fr.g**m
        XE = np.einsum("...j,...ij->...i", fr.X, fr.E)
        F = w[..., None] * XE
        rho_j = grad_rho(params, jet)
        XEE = np.einsum("...j,...ij,...i->...", fr.X, fr.E, fr.E_lower)
        Xrho = np.einsum("...j,...j->...", fr.X, rho_j)
        # the (n-1+q) X.E_lower term vanishes for q = 1-n
        div = w * (fr.trE2 + fr.g * fr.rho / n + Xrho) + n * m * w / fr.g * XEE
        return F, div

    return evaluate


def _box_sides(params: EqParams, fieldspec: TestField, evaluate, lo, hi, nodes):
    """``(int div F, int |div F|, outward flux)`` by tensor Gauss-Legendre."""
    n = params.n

    def both(x):
        div = evaluate(fieldspec, x)[1]
        return np.stack([div, np.abs(div)], axis=-1)

    volume, abs_volume = gauss_legendre_box(both, lo, hi, nodes)
    flux = 0.0
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for side, sign in ((hi[i], 1.0), (lo[i], -1.0)):
            def face(y, i=i, side=side, others=others):
                x = np.empty((y.shape[0], n))
                x[:, others] = y
                x[:, i] = side
                return evaluate(fieldspec, x)[0][:, i]

            flux += sign * gauss_legendre_box(face, lo[others], hi[others], nodes)
    return volume, abs_volume, flux


def min_gradient_on_box(params: EqParams, fieldspec: TestField, lo, hi, per_axis: int = 41) -> float:
    """Smallest ``|grad v|`` over a uniform grid of the closed box."""
    axes = [np.linspace(l, h, per_axis) for l, h in zip(lo, hi)]
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    return float(np.min(np.linalg.norm(eval_jet2(fieldspec, params, pts).grad, axis=-1)))


def check_divergence_theorem(
    params: EqParams,
    fieldspec: TestField,
    m: float,
    box: float = 1.0,
    nodes: int = 24,
    refine: int = 8,
    tol: float = 1e-4,
    min_grad: float = 0.05,
) -> DivergenceTheoremReport:
    """``int_box div F`` against the outward flux of ``F`` through the faces.

    Both sides use tensor Gauss-Legendre rules; they are evaluated at
    ``nodes`` and ``nodes + refine`` points per axis and the refined pair is
    compared.  Raises :class:`CriticalPointError` if ``|grad v|`` comes
    within ``min_grad`` of zero on the box.
    """
    n = params.n
    if n not in (2, 3):
        raise DomainError("the divergence-theorem check is limited to n in {2, 3}")
    lo, hi = np.full(n, -box), np.full(n, box)
    gmin = min_gradient_on_box(params, fieldspec, lo, hi)
    if gmin < min_grad:
        raise CriticalPointError(f"|grad v| drops to {gmin:.3g} on the box")
    evaluate = _flux_field(params, m)
    vol0, _, flux0 = _box_sides(params, fieldspec, evaluate, lo, hi, nodes)
    vol1, abs_vol, flux1 = _box_sides(params, fieldspec, evaluate, lo, hi, nodes + refine)
    # integral of |div F| as the scale, so cancellation in the totals is not rewarded
    scale = max(abs_vol, abs(vol1), abs(flux1))
    rep = DivergenceTheoremReport(vol0, flux0, vol1, flux1, nodes + refine, tol, scale, {"min_grad": gmin, "m": m})
    if rep.convergence > 10 * tol:
        raise QuadratureError(f"Gauss-Legendre sides changed by {rep.convergence:.3g} under refinement")
    return rep


def divergence_test_field(
    n: int,
    rng: np.random.Generator,
    box: float = 1.0,
    attempts: int = 200,
    params: EqParams | None = None,
    min_grad: float = 0.05,
) -> TestField:
    """A random bump field with bump centers outside the box.

    Interior bump centers would put maxima inside the box.  With ``params``
    given, fields whose gradient drops below ``min_grad`` on the box are
    redrawn: near-critical points make ``|grad v|^(p-2)`` too rough for the
    tensor rule.
    """
    for _ in range(attempts):
        K = int(rng.integers(2, 6))
        dirs = rng.normal(size=(K, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        centers = dirs * rng.uniform(1.5 * box * np.sqrt(n), 3.0 * box * np.sqrt(n), size=(K, 1))
        f = TestField.gaussians(
            offset=rng.uniform(1.0, 2.0),
            centers=centers,
            widths=rng.uniform(1.0, 3.0, size=K),
            amplitudes=rng.uniform(0.1, 1.0, size=K),
        )
        if params is None:
            return f
        lo, hi = np.full(n, -box), np.full(n, box)
        # a coarse grid rejects most bad draws cheaply
        if min_gradient_on_box(params, f, lo, hi, 9) < min_grad:
            continue
        if min_gradient_on_box(params, f, lo, hi) >= min_grad:
            return f
    raise DomainError("could not draw a field without critical points on the box")


__all__ = [
    "Cutoff",
    "CutoffIdentityReport",
    "DivergenceTheoremReport",
    "GrowthFit",
    "bubble_radial",
    "check_cutoff_flux_identity",
    "check_divergence_theorem",
    "check_growth",
    "cutoff_identity_q_grid",
    "divergence_test_field",
    "growth_q_grid",
    "min_gradient_on_box",
    "predicted_growth_slope",
    "radial_integral",
]
