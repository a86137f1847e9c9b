"""Truncated Taylor arithmetic in several variables (forward-mode AD).

A :class:`Jet` carries the value, gradient and Hessian of a scalar field at a
batch of points, optionally also the third-derivative tensor.  Arithmetic is
closed under ``+ - * /``, scalar powers, ``exp``, ``log`` and ``sqrt``.  Every
Hessian is assembled from symmetric pieces (``f' H``, ``f'' g g^T``,
``g h^T + h g^T``), so it comes out exactly symmetric without any
symmetrization pass.

Shapes: ``value`` is ``(...)``, ``grad`` is ``(..., n)``, ``hess`` is
``(..., n, n)`` and ``third`` is ``(..., n, n, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

Scalar = Union[int, float]


def _sym3(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``h_ij g_k + h_ik g_j + h_jk g_i``."""
    t = h[..., :, :, None] * g[..., None, None, :]
    return t + np.swapaxes(t, -1, -2) + np.moveaxis(t, -1, -3)


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def _outer3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return a[..., :, None, None] * b[..., None, :, None] * c[..., None, None, :]


@dataclass
class Jet:
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: Optional[np.ndarray] = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, c, x: np.ndarray, order: int = 2) -> "Jet":
        """Constant field ``c`` sampled at points ``x`` of shape ``(..., n)``."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        batch = x.shape[:-1]
        value = np.broadcast_to(np.asarray(c, dtype=float), batch).copy()
        third = np.zeros(batch + (n, n, n)) if order >= 3 else None
        return cls(value, np.zeros(batch + (n,)), np.zeros(batch + (n, n)), third)

    @classmethod
    def coordinate(cls, x: np.ndarray, k: int, order: int = 2) -> "Jet":
        """The coordinate function ``x_k``."""
        x = np.asarray(x, dtype=float)
        jet = cls.constant(0.0, x, order)
        jet.value = x[..., k].copy()
        jet.grad[..., k] = 1.0
        return jet

    @classmethod
    def squared_distance(cls, x: np.ndarray, center, order: int = 2) -> "Jet":
        """``|x - center|^2`` with exact derivatives ``2(x - c)`` and ``2I``."""
        x = np.asarray(x, dtype=float)
        d = x - np.asarray(center, dtype=float)
        n = x.shape[-1]
        batch = x.shape[:-1]
        hess = np.broadcast_to(2.0 * np.eye(n), batch + (n, n)).copy()
        third = np.zeros(batch + (n, n, n)) if order >= 3 else None
        return cls(np.einsum("...i,...i->...", d, d), 2.0 * d, hess, third)

    # -- structure ----------------------------------------------------------

    @property
    def order(self) -> int:
        return 2 if self.third is None else 3

    @property
    def ndim(self) -> int:
        return self.grad.shape[-1]

    def copy(self) -> "Jet":
        return Jet(
            self.value.copy(),
            self.grad.copy(),
            self.hess.copy(),
            None if self.third is None else self.third.copy(),
        )

    def __getitem__(self, idx) -> "Jet":
        """Index the batch dimensions."""
        return Jet(
            self.value[idx],
            self.grad[idx],
            self.hess[idx],
            None if self.third is None else self.third[idx],
        )

    # -- elementary operations ---------------------------------------------

    def _chain(self, f0, f1, f2, f3=None) -> "Jet":
        """Compose a scalar function with derivatives ``f0..f3`` at ``value``."""
        g, h = self.grad, self.hess
        f1v, f2m = f1[..., None], f2[..., None, None]
        with np.errstate(invalid="ignore"):
            grad = f1v * g
            hess = f1[..., None, None] * h + f2m * _outer(g, g)
            third = None
            if self.third is not None:
                third = (
                    f1[..., None, None, None] * self.third
                    + f2[..., None, None, None] * _sym3(h, g)
                    + f3[..., None, None, None] * _outer3(g, g, g)
                )
        return Jet(f0, grad, hess, third)

    def __neg__(self) -> "Jet":
        return Jet(
            -self.value,
            -self.grad,
            -self.hess,
            None if self.third is None else -self.third,
        )

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            third = None
            if self.third is not None and other.third is not None:
                third = self.third + other.third
            return Jet(
                self.value + other.value,
                self.grad + other.grad,
                self.hess + other.hess,
                third,
            )
        out = self.copy()
        out.value = self.value + other
        return out

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(
                self.value * c,
                self.grad * c[..., None],
                self.hess * c[..., None, None],
                None if self.third is None else self.third * c[..., None, None, None],
            )
        u, w = self, other
        uv, wv = u.value, w.value
        grad = u.grad * wv[..., None] + uv[..., None] * w.grad
        hess = (
            u.hess * wv[..., None, None]
            + uv[..., None, None] * w.hess
            + (_outer(u.grad, w.grad) + _outer(w.grad, u.grad))
        )
        third = None
        if u.third is not None and w.third is not None:
            third = (
                u.third * wv[..., None, None, None]
                + uv[..., None, None, None] * w.third
                + _sym3(u.hess, w.grad)
                + _sym3(w.hess, u.grad)
            )
        return Jet(uv * wv, grad, hess, third)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        x = self.value
        return self._chain(1.0 / x, -1.0 / x**2, 2.0 / x**3, -6.0 / x**4)

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, c: Scalar) -> "Jet":
        c = float(c)
        if c == 0.0:
            return Jet(
                np.ones_like(self.value),
                np.zeros_like(self.grad),
                np.zeros_like(self.hess),
                None if self.third is None else np.zeros_like(self.third),
            )
        if c == 1.0:
            return self.copy()
        if c == 2.0:
            return self * self
        x = self.value
        with np.errstate(divide="ignore", invalid="ignore"):
            f0 = x**c
            f1 = c * x ** (c - 1.0)
            f2 = c * (c - 1.0) * x ** (c - 2.0)
            f3 = c * (c - 1.0) * (c - 2.0) * x ** (c - 3.0)
        out = self._chain(f0, f1, f2, f3)
        # At a zero of a smooth non-negative base the gradient vanishes, so
        # the unbounded higher coefficients multiply an exact zero.
        if c > 1.0:
            zero = x == 0.0
            if np.any(zero):
                out.hess = np.where(zero[..., None, None], f1[..., None, None] * self.hess, out.hess)
                if out.third is not None:
                    out.third = np.where(zero[..., None, None, None], 0.0, out.third)
        return out

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self._chain(e, e, e, e)

    def log(self) -> "Jet":
        x = self.value
        return self._chain(np.log(x), 1.0 / x, -1.0 / x**2, 2.0 / x**3)

    def sqrt(self) -> "Jet":
        return self**0.5

