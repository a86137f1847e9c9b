"""The two-parameter bubble family and its transformed profile.

For ``lambda > 0`` and a center ``x0`` the bubble is

    U(x) = (lambda^(1/(p-1)) P / (lambda^k + |x - x0|^k))^((n-p)/p),
    P = n^(1/p) ((n-p)/(p-1))^((p-1)/p),  k = p/(p-1).

Raising to ``-p/(n-p)`` undoes the outer power, so the transformed function
is affine in ``|x - x0|^k``:

    v = U^(-p/(n-p)) = C1 + C2 |x - x0|^k,
    C2 = K = 1 / (lambda^(1/(p-1)) P),  C1 = lambda^k K.

The center value is ``U(x0) = (P / lambda)^((n-p)/p)``, which inverts to
``lambda = P * u0^(-p/(n-p))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fitting import fit_loglog_slope
from .jets import Jet
from .params import EqParams


@dataclass(frozen=True)
class Bubble:
    lam: float
    x0: tuple[float, ...]

    def __post_init__(self):
        if not (self.lam > 0.0) or not np.isfinite(self.lam):
            raise DomainError(f"bubble scale must be positive, got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "x0", tuple(float(c) for c in self.x0))

    @classmethod
    def centered(cls, lam: float, n: int) -> "Bubble":
        return cls(lam, (0.0,) * n)

    def center(self, params: EqParams) -> np.ndarray:
        if len(self.x0) != params.n:
            raise DomainError(f"center has {len(self.x0)} coordinates, expected n={params.n}")
        return np.asarray(self.x0)


@dataclass(frozen=True)
class BubbleConstants:
    """Closed-form constants of ``v = c1 + c2 r^k``."""

    c1: float
    c2: float
    k: float
    prefactor: float  # lambda^(1/(p-1)) P, the numerator inside U


def shape_constant(params: EqParams) -> float:
    """``P = n^(1/p) ((n-p)/(p-1))^((p-1)/p)``."""
    n, p = params.n, params.p
    return n ** (1.0 / p) * ((n - p) / (p - 1.0)) ** ((p - 1.0) / p)


def bubble_constants(params: EqParams, bubble: Bubble) -> BubbleConstants:
    lam, p = bubble.lam, params.p
    prefactor = lam ** (1.0 / (p - 1.0)) * shape_constant(params)
    K = 1.0 / prefactor
    return BubbleConstants(c1=lam**params.k * K, c2=K, k=params.k, prefactor=prefactor)


def center_value(params: EqParams, lam: float) -> float:
    """``U(x0)`` of the bubble with scale ``lam``."""
    return (shape_constant(params) / lam) ** ((params.n - params.p) / params.p)


def lambda_for_center_value(params: EqParams, u0: float) -> float:
    """Invert :func:`center_value`."""
    if not u0 > 0.0:
        raise DomainError(f"center value must be positive, got {u0!r}")
    return shape_constant(params) * u0 ** (-params.p / (params.n - params.p))


def _radius(params: EqParams, bubble: Bubble, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.n:
        raise DomainError(f"points have {x.shape[-1]} coordinates, expected n={params.n}")
    d = x - bubble.center(params)
    return np.sqrt(np.einsum("...i,...i->...", d, d))


def bubble_profile_u(params: EqParams, bubble: Bubble, r):
    """Radial profile ``U(r)``; ``r`` may be an array or a 1-variable :class:`Jet`."""
    const = bubble_constants(params, bubble)
    e = (params.n - params.p) / params.p
    if isinstance(r, Jet):
        return (const.prefactor / (bubble.lam**const.k + r**const.k)) ** e
    r = np.asarray(r, dtype=float)
    return (const.prefactor / (bubble.lam**const.k + r**const.k)) ** e


def bubble_u(params: EqParams, bubble: Bubble, x) -> np.ndarray:
    """Evaluate the bubble at ``x`` (shape ``(..., n)``)."""
    return bubble_profile_u(params, bubble, _radius(params, bubble, x))


def bubble_v(params: EqParams, bubble: Bubble, x) -> np.ndarray:
    """``U^(-p/(n-p))`` evaluated by transforming :func:`bubble_u`."""
    return bubble_u(params, bubble, x) ** params.transform_exponent


def bubble_v_closed_form(params: EqParams, bubble: Bubble, x) -> np.ndarray:
    """``C1 + C2 |x - x0|^k``."""
    const = bubble_constants(params, bubble)
    return const.c1 + const.c2 * _radius(params, bubble, x) ** const.k


def bubble_source_constant(params: EqParams, bubble: Bubble) -> float:
    """The constant value of the source term ``g`` on a transformed bubble.

    ``X = (k C2)^(p-1) (x - x0)`` is linear, so its divergence is
    ``n (k C2)^(p-1)``.
    """
    const = bubble_constants(params, bubble)
    return params.n * (const.k * const.c2) ** (params.p - 1.0)


@dataclass
class DecayReport:
    radii: np.ndarray
    u_values: np.ndarray
    v_values: np.ndarray
    u_constant: float  # min of u on the unit sphere
    v_constant: float  # max of v on the unit sphere
    u_bound_ok: bool
    v_bound_ok: bool
    u_slope: float
    v_slope: float
    u_slope_expected: float
    v_slope_expected: float
    slope_tol: float

    @property
    def u_slope_error(self) -> float:
        return abs(self.u_slope - self.u_slope_expected)

    @property
    def v_slope_error(self) -> float:
        return abs(self.v_slope - self.v_slope_expected)

    @property
    def passed(self) -> bool:
        return (
            self.u_bound_ok
            and self.v_bound_ok
            and self.u_slope_error <= self.slope_tol
            and self.v_slope_error <= self.slope_tol
        )


def _unit_sphere_extrema(params: EqParams, bubble: Bubble) -> tuple[float, float]:
    # u is radial and decreasing about x0, so on |x| = 1 it is smallest at the
    # point farthest from x0.
    x0 = bubble.center(params)
    norm = np.linalg.norm(x0)
    direction = -x0 / norm if norm > 0 else np.eye(params.n)[0]
    far = direction[None, :]
    return float(bubble_u(params, bubble, far)[0]), float(bubble_v_closed_form(params, bubble, far)[0])


def check_decay_bounds(
    params: EqParams,
    bubble: Bubble,
    radii,
    slope_tol: float = 0.01,
    directions: int = 4,
    seed: int = 0,
) -> DecayReport:
    """Check the far-field lower bound on ``u`` and upper bound on ``v``.

    With ``C = min_{|x|=1} u`` and ``C' = max_{|x|=1} v`` the bubble obeys
    ``u >= C |x|^-(n-p)/(p-1)`` and ``v <= C' |x|^(p/(p-1))`` for ``|x| > 1``;
    both are checked along a few random directions.  The log-log slopes of
    ``u`` and ``v`` along the first direction are fitted and compared with
    ``-(n-p)/(p-1)`` and ``p/(p-1)``.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 1.0):
        raise DomainError("decay radii must all exceed 1")
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(directions, params.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = radii[None, :, None] * dirs[:, None, :]
    u = bubble_u(params, bubble, pts)
    v = bubble_v_closed_form(params, bubble, pts)
    c_u, c_v = _unit_sphere_extrema(params, bubble)
    u_ok = bool(np.all(u >= c_u * radii ** (-params.decay) * (1.0 - 1e-12)))
    v_ok = bool(np.all(v <= c_v * radii**params.k * (1.0 + 1e-12)))
    return DecayReport(
        radii=radii,
        u_values=u[0],
        v_values=v[0],
        u_constant=c_u,
        v_constant=c_v,
        u_bound_ok=u_ok,
        v_bound_ok=v_ok,
        u_slope=fit_loglog_slope(radii, u[0]),
        v_slope=fit_loglog_slope(radii, v[0]),
        u_slope_expected=-params.decay,
        v_slope_expected=params.k,
        slope_tol=slope_tol,
    )
