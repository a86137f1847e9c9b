"""Richardson-extrapolated central differences of jet-derived quantities.

Third-order quantities (divergences of tensors built from second derivatives)
are obtained by differencing exactly computed second-order data.  With
``D(h)`` the central difference, ``R(h) = (4 D(h/2) - D(h)) / 3`` is accurate
to ``O(h^4)``; the estimate returned is ``R(h/2)`` and ``|R(h) - R(h/2)|``
serves as its error indicator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IllConditionedError
from .fields import TestField, eval_jet2
from .jets import Jet
from .params import EqParams

Quantity = Callable[[Jet], np.ndarray]


@dataclass
class FDEstimate:
    """Derivative tensor with a trailing direction axis, plus error indicator."""

    value: np.ndarray
    error: np.ndarray

    def divergence(self, axis: int = 0) -> "FDEstimate":
        """Contract the direction axis with tensor axis ``axis``.

        ``axis`` counts tensor axes after the batch axis, so for a matrix
        quantity ``T[b, i, j]`` with derivative ``D[b, i, j, k]``, ``axis=0``
        gives ``sum_i d_i T_ij``.
        """
        return FDEstimate(_contract(self.value, axis), _contract(np.abs(self.error), axis))


def _contract(d: np.ndarray, axis: int) -> np.ndarray:
    d = np.moveaxis(d, 1 + axis, -2)
    return np.trace(d, axis1=-2, axis2=-1)


def third_derivative_fd(
    field: TestField,
    params: EqParams,
    x,
    quantity: Quantity,
    h=1e-2,
    tol: float | None = None,
    scale: float = 1.0,
) -> FDEstimate:
    """Differentiate ``quantity(jet)`` in every coordinate direction.

    ``x`` has shape ``(m, n)``; ``h`` is a scalar or per-point array.  The
    result has shape ``(m, *q_shape, n)``.  With ``tol`` given, raises
    :class:`IllConditionedError` wherever the indicator exceeds
    ``tol * max(|estimate|, scale)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m, n = x.shape
    h = np.broadcast_to(np.asarray(h, dtype=float), (m,))
    if np.any(h <= 0):
        raise ValueError("finite-difference step must be positive")
    steps = np.array([1.0, 0.5, 0.25])
    eye = np.eye(n)
    # offsets[s, sign, k, m, n]
    shift = steps[:, None, None, None, None] * np.array([1.0, -1.0])[None, :, None, None, None]
    shift = shift * eye[None, None, :, None, :] * h[None, None, None, :, None]
    pts = x[None, None, None] + shift
    q = quantity(eval_jet2(field, params, pts.reshape(-1, n)))
    q = q.reshape((3, 2, n, m) + q.shape[1:])
    hs = (steps[:, None] * h[None, :]).reshape((3, 1, m) + (1,) * (q.ndim - 4))
    D = (q[:, 0] - q[:, 1]) / (2.0 * hs)  # (3, n, m, ...)
    R_h = (4.0 * D[1] - D[0]) / 3.0
    R_h2 = (4.0 * D[2] - D[1]) / 3.0
    est = np.moveaxis(R_h2, 0, -1)
    err = np.moveaxis(np.abs(R_h - R_h2), 0, -1)
    if tol is not None:
        bad = err > tol * np.maximum(np.abs(est), scale)
        if np.any(bad):
            raise IllConditionedError(
                f"finite-difference indicator {float(err.max()):.3g} exceeds tolerance at "
                f"{int(bad.reshape(m, -1).any(axis=1).sum())} point(s)"
            )
    return FDEstimate(est, err)
