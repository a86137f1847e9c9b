"""Smooth positive test fields and their derivative jets.

Kinds:

``bubble-v``
    transformed bubble ``C1 + C2 |x - x0|^k`` (an exact solution of the
    transformed equation).
``bubble-u``
    the bubble itself.
``random-smooth``
    ``c0 + sum_k A_k exp(-|x - y_k|^2 / s_k^2)``.
``perturbed-bubble``
    ``bubble-v`` plus Gaussian bumps; smooth away from ``x0`` but not a
    solution.
``radial-power``
    ``c1 + c2 |x - x0|^k`` with arbitrary constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bubbles import Bubble, bubble_constants
from .errors import DomainError
from .jets import Jet
from .params import EqParams

KINDS = ("bubble-v", "bubble-u", "random-smooth", "perturbed-bubble", "radial-power")

CRITICAL_GRAD = 1e-8


@dataclass(frozen=True)
class TestField:
    kind: str
    bubble: Optional[Bubble] = None
    offset: float = 0.0
    centers: tuple = ()
    widths: tuple = ()
    amplitudes: tuple = ()
    radial: tuple = ()  # (c1, c2, k, x0) for radial-power

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown field kind {self.kind!r}")
        if self.kind in ("bubble-v", "bubble-u", "perturbed-bubble") and self.bubble is None:
            raise DomainError(f"{self.kind} needs a bubble")
        if self.kind == "random-smooth" and self.offset <= 0.0:
            raise DomainError("random-smooth field needs a positive offset")

    # -- constructors -----------------------------------------------------

    @classmethod
    def bubble_v(cls, bubble: Bubble) -> "TestField":
        return cls("bubble-v", bubble=bubble)

    @classmethod
    def bubble_u(cls, bubble: Bubble) -> "TestField":
        return cls("bubble-u", bubble=bubble)

    @classmethod
    def gaussians(cls, offset, centers, widths, amplitudes) -> "TestField":
        return cls(
            "random-smooth",
            offset=float(offset),
            centers=tuple(tuple(map(float, c)) for c in centers),
            widths=tuple(map(float, widths)),
            amplitudes=tuple(map(float, amplitudes)),
        )

    @classmethod
    def perturbed(cls, bubble: Bubble, centers, widths, amplitudes) -> "TestField":
        return cls(
            "perturbed-bubble",
            bubble=bubble,
            centers=tuple(tuple(map(float, c)) for c in centers),
            widths=tuple(map(float, widths)),
            amplitudes=tuple(map(float, amplitudes)),
        )

    @classmethod
    def radial_power(cls, c1: float, c2: float, k: float, x0) -> "TestField":
        return cls("radial-power", radial=(float(c1), float(c2), float(k), tuple(map(float, x0))))

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.bubble is not None:
            out["lambda"] = self.bubble.lam
            out["x0"] = list(self.bubble.x0)
        if self.centers:
            out["bumps"] = len(self.centers)
        return out


def random_smooth_field(
    n: int,
    rng: np.random.Generator,
    box: float = 2.0,
    bumps: tuple[int, int] = (2, 5),
    offset: tuple[float, float] = (1.0, 2.0),
) -> TestField:
    """Random sum of 2..5 Gaussian bumps on a constant ``c0 >= 1``.

    Amplitudes lie in ``[0.1, 1]`` and widths in ``[0.5, 2]``; centers are
    uniform in ``[-box, box]^n``.
    """
    K = int(rng.integers(bumps[0], bumps[1] + 1))
    return TestField.gaussians(
        offset=rng.uniform(*offset),
        centers=rng.uniform(-box, box, size=(K, n)),
        widths=rng.uniform(0.5, 2.0, size=K),
        amplitudes=rng.uniform(0.1, 1.0, size=K),
    )


def _bumps(field: TestField, x: np.ndarray, order: int) -> Jet:
    total = Jet.constant(0.0, x, order)
    for c, s, A in zip(field.centers, field.widths, field.amplitudes):
        total = total + (Jet.squared_distance(x, c, order) * (-1.0 / s**2)).exp() * A
    return total


def eval_jet(field: TestField, params: EqParams, x, order: int = 2) -> Jet:
    """Value and derivatives (up to ``order`` 2 or 3) of ``field`` at ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.n:
        raise DomainError(f"points have {x.shape[-1]} coordinates, expected n={params.n}")
    kind = field.kind
    if kind in ("bubble-v", "perturbed-bubble"):
        const = bubble_constants(params, field.bubble)
        s = Jet.squared_distance(x, field.bubble.center(params), order)
        jet = s ** (const.k / 2.0) * const.c2 + const.c1
        if kind == "perturbed-bubble":
            jet = jet + _bumps(field, x, order)
        return jet
    if kind == "bubble-u":
        const = bubble_constants(params, field.bubble)
        s = Jet.squared_distance(x, field.bubble.center(params), order)
        e = (params.n - params.p) / params.p
        return ((s ** (const.k / 2.0) + field.bubble.lam**const.k).reciprocal() * const.prefactor) ** e
    if kind == "random-smooth":
        return _bumps(field, x, order) + field.offset
    c1, c2, k, x0 = field.radial
    return Jet.squared_distance(x, x0, order) ** (k / 2.0) * c2 + c1


def eval_jet2(field: TestField, params: EqParams, x) -> Jet:
    """Exact value, gradient and Hessian of ``field`` at ``x``."""
    return eval_jet(field, params, x, order=2)


def eval_jet3(field: TestField, params: EqParams, x) -> Jet:
    """As :func:`eval_jet2`, plus the third-derivative tensor."""
    return eval_jet(field, params, x, order=3)


def _draw(field: TestField, params: EqParams, count: int, rng: np.random.Generator, box: float) -> np.ndarray:
    if field.centers:
        # Gaussian clouds around the bumps; uniform boxes leave most points in
        # regions where a high-dimensional bump field is numerically flat.
        idx = rng.integers(0, len(field.centers), size=count)
        centers = np.asarray(field.centers)[idx]
        widths = np.asarray(field.widths)[idx]
        return centers + 0.8 * widths[:, None] * rng.normal(size=(count, params.n))
    return rng.uniform(-box, box, size=(count, params.n))


def sample_noncritical_points(
    field: TestField,
    params: EqParams,
    count: int,
    rng: np.random.Generator,
    box: float = 2.0,
    min_grad: float = CRITICAL_GRAD,
    max_rounds: int = 100,
) -> np.ndarray:
    """Sample points with ``|grad v| >= min_grad``.

    Bubble and radial fields are sampled uniformly in ``[-box, box]^n``;
    bump fields around their bump centers.  Points that land (numerically)
    on the critical set are redrawn.
    """
    pts = _draw(field, params, count, rng, box)
    for _ in range(max_rounds):
        grad = eval_jet2(field, params, pts).grad
        bad = np.linalg.norm(grad, axis=-1) < min_grad
        if not np.any(bad):
            return pts
        pts[bad] = _draw(field, params, int(bad.sum()), rng, box)
    raise DomainError("could not sample enough non-critical points")
