"""Radial shooting for the critical equation and the bubble-profile residual.

A radial solution ``u(r)`` with flux ``w = r^(n-1) |u'|^(p-2) u'`` satisfies

    u' = -(-w / r^(n-1))^(1/(p-1)),    w' = -r^(n-1) u^(p*-1).

The system is singular at ``r = 0``; integration starts at ``r0`` from the
truncated series ``u = u0 - (p-1)/p (u0^(p*-1)/n)^(1/(p-1)) r^(p/(p-1))``,
``w = -u0^(p*-1) r^n / n``.  Steps are taken in ``t = log r`` so that the
step size tracks the scale of the solution over five decades of radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bubbles import Bubble, bubble_profile_u, lambda_for_center_value
from .errors import BlowDownError, DomainError, StepFailureError
from .jets import Jet
from .params import EqParams


@dataclass
class RadialState:
    r: float
    u: float
    w: float


@dataclass
class ShootResult:
    center_value: float
    r: np.ndarray
    u: np.ndarray
    w: np.ndarray
    matched_lambda: float
    max_rel_error: float
    accepted_steps: int
    rejected_steps: int

    @property
    def trajectory(self) -> list[RadialState]:
        return [RadialState(float(a), float(b), float(c)) for a, b, c in zip(self.r, self.u, self.w)]

    @property
    def flux_monotone(self) -> bool:
        return bool(np.all(np.diff(self.w) <= 0.0))

    @property
    def positive(self) -> bool:
        return bool(np.all(self.u > 0.0))


def series_start(params: EqParams, u0: float, r0: float) -> tuple[float, float]:
    """``(u(r0), w(r0))`` from the leading terms of the expansion at the origin."""
    n, p = params.n, params.p
    src = u0 ** (params.p_star - 1.0)
    u = u0 - (p - 1.0) / p * (src / n) ** (1.0 / (p - 1.0)) * r0 ** (p / (p - 1.0))
    w = -src * r0**n / n
    return u, w


def _rhs(params: EqParams) -> Callable[[float, np.ndarray], np.ndarray]:
    n, p, ps = params.n, params.p, params.p_star

    def f(t: float, y: np.ndarray) -> np.ndarray:
        r = np.exp(t)
        u, w = y
        if u <= 0.0:
            raise BlowDownError(f"solution reached zero at r = {r:.6g}")
        flux = max(-w, 0.0) / r ** (n - 1)
        du = -(flux ** (1.0 / (p - 1.0)))
        dw = -(r ** (n - 1)) * u ** (ps - 1.0)
        return np.array([r * du, r * dw])

    return f


def _rk4(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_step_doubling(
    f,
    t0: float,
    y0: np.ndarray,
    t1: float,
    tol: float,
    h0: float = 1e-3,
    h_min: float = 1e-12,
    max_steps: int = 200_000,
):
    """Classical RK4 with step-doubling error control.

    Each step compares one step of size ``h`` with two of size ``h/2``; the
    local error estimate is their difference over 15, measured relative to
    the state.  The two-half-step solution is propagated (no extrapolation),
    so the method keeps its nominal fourth order.
    """
    ts, ys = [t0], [np.asarray(y0, dtype=float)]
    t, y, h = t0, ys[0], h0
    accepted = rejected = 0
    while t < t1:
        if accepted + rejected > max_steps:
            raise StepFailureError("step budget exhausted")
        h = min(h, t1 - t)
        big = _rk4(f, t, y, h)
        half = _rk4(f, t, y, h / 2)
        small = _rk4(f, t + h / 2, half, h / 2)
        err = np.max(np.abs(small - big) / (15.0 * np.maximum(np.abs(small), 1e-300)))
        if err <= tol:
            t, y = t + h, small
            ts.append(t)
            ys.append(y)
            accepted += 1
        else:
            rejected += 1
        factor = 0.9 * (tol / err) ** 0.2 if err > 0 else 5.0
        h = h * min(5.0, max(0.2, factor))
        if h < h_min:
            raise StepFailureError(f"step size underflow at t = {t:.6g}")
    return np.array(ts), np.array(ys), accepted, rejected


def shoot(params: EqParams, u0: float, r_max: float = 50.0, tol: float = 1e-10, r0: float = 1e-4) -> ShootResult:
    """Integrate the radial equation from center value ``u0`` out to ``r_max``.

    The trajectory is compared against the bubble with the same center value;
    ``max_rel_error`` is the sup of ``|u - U| / U`` over accepted steps.
    """
    if not u0 > 0.0:
        raise DomainError(f"center value must be positive, got {u0!r}")
    if r_max < 10.0:
        raise DomainError("r_max must be at least 10")
    if not tol > 0.0:
        raise DomainError("tolerance must be positive")
    u_start, w_start = series_start(params, u0, r0)
    ts, ys, acc, rej = integrate_step_doubling(
        _rhs(params), np.log(r0), np.array([u_start, w_start]), np.log(r_max), tol
    )
    r = np.exp(ts)
    r[-1] = r_max
    u, w = ys[:, 0], ys[:, 1]
    lam = lambda_for_center_value(params, u0)
    exact = bubble_profile_u(params, Bubble.centered(lam, params.n), r)
    return ShootResult(
        center_value=u0,
        r=r,
        u=u,
        w=w,
        matched_lambda=lam,
        max_rel_error=float(np.max(np.abs(u - exact) / exact)),
        accepted_steps=acc,
        rejected_steps=rej,
    )


def shoot_value_at(params: EqParams, u0: float, r: float, tol: float = 1e-10, r0: float = 1e-4) -> float:
    """``u(r)`` of the shot from center value ``u0``, integrating exactly to ``r``."""
    if not r > r0:
        raise DomainError(f"radius must exceed the series start {r0}")
    u_start, w_start = series_start(params, u0, r0)
    _, ys, _, _ = integrate_step_doubling(_rhs(params), np.log(r0), np.array([u_start, w_start]), np.log(r), tol)
    return float(ys[-1, 0])


def radial_pde_terms(params: EqParams, bubble: Bubble, radii) -> np.ndarray:
    """The three terms ``-(p-1)|u'|^(p-2) u''``, ``-(n-1)/r |u'|^(p-2) u'`` and
    ``-u^(p*-1)`` of the radial equation, shape ``(3, len(radii))``."""
    n, p = params.n, params.p
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise DomainError("radii must be positive")
    r = Jet.coordinate(radii[:, None], 0)
    u = bubble_profile_u(params, bubble, r)
    du, d2u = u.grad[:, 0], u.hess[:, 0, 0]
    mag = np.abs(du) ** (p - 2.0)
    return np.stack(
        [-(p - 1.0) * mag * d2u, -(n - 1.0) / radii * mag * du, -(u.value ** (params.p_star - 1.0))]
    )


def radial_pde_residual(params: EqParams, bubble: Bubble, radii, normalize: str = "source") -> float:
    """Max residual of the radial equation on the bubble profile.

    ``normalize="source"`` divides by ``u^(p*-1)``.  Far from the core the two
    derivative terms cancel down to the much smaller source term, so that
    ratio loses digits as ``r / lambda`` grows (fastest for ``p`` near 1);
    ``normalize="terms"`` divides by the sum of term magnitudes instead and
    stays at rounding level at every radius.
    """
    t = radial_pde_terms(params, bubble, radii)
    res = np.abs(t.sum(axis=0))
    if normalize == "source":
        scale = np.abs(t[2])
    elif normalize == "terms":
        scale = np.abs(t).sum(axis=0)
    else:
        raise DomainError(f"unknown normalization {normalize!r}")
    return float(np.max(res / scale))


def core_radii(bubble: Bubble, count: int, rng: np.random.Generator, lo: float = 1e-3, hi: float = 10.0) -> np.ndarray:
    """Log-uniform radii in ``[lo, hi] * lambda``."""
    return bubble.lam * np.exp(rng.uniform(np.log(lo), np.log(hi), size=count))
