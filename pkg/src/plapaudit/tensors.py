"""Pointwise tensors built from the second-order jet of a positive field ``v``.

Notation (summation over repeated indices):

* ``X^i = |grad v|^(p-2) v_i`` and its Jacobian ``X^i_{,j}``,
* ``g = (a |grad v|^p + b) / v``,
* ``E_ij = X^i_{,j} - g/n delta_ij`` and ``E_j = v^-1 v_i E_ij``,
* ``rho = X^k_{,k} - g``, the residual of the transformed equation.

``E`` subtracts ``g/n`` rather than its own trace, so ``Tr E = rho`` for any
field and ``E`` is trace free exactly on solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CriticalPointError
from .fields import CRITICAL_GRAD
from .jets import Jet
from .params import EqParams


@dataclass
class RigidityFrame:
    v: np.ndarray
    grad: np.ndarray
    X: np.ndarray
    g: np.ndarray
    gradX: np.ndarray
    E: np.ndarray
    E_lower: np.ndarray
    trE2: np.ndarray
    rho: np.ndarray

    @property
    def plap(self) -> np.ndarray:
        """``Delta_p v = X^k_{,k}``."""
        return np.trace(self.gradX, axis1=-2, axis2=-1)

    @property
    def asymmetry(self) -> np.ndarray:
        """Frobenius norm of ``E - E^T``."""
        return np.linalg.norm(self.E - np.swapaxes(self.E, -1, -2), axis=(-2, -1))


def _check_noncritical(grad: np.ndarray, threshold: float) -> np.ndarray:
    gn = np.linalg.norm(grad, axis=-1)
    if np.any(gn < threshold):
        raise CriticalPointError(
            f"{int(np.sum(gn < threshold))} point(s) with |grad v| < {threshold:g}"
        )
    return gn


def build_frame(params: EqParams, jet: Jet, critical_threshold: float = CRITICAL_GRAD) -> RigidityFrame:
    """All frame tensors from a jet of ``v`` (batched)."""
    n, p, a, b = params.n, params.p, params.a, params.b
    v, G, H = jet.value, jet.grad, jet.hess
    if np.any(v <= 0):
        raise CriticalPointError("field must be positive")
    gn = _check_noncritical(G, critical_threshold)
    s = gn**2
    w = gn ** (p - 2.0)
    HG = np.einsum("...ij,...j->...i", H, G)
    X = w[..., None] * G
    gradX = w[..., None, None] * (H + (p - 2.0) * G[..., :, None] * HG[..., None, :] / s[..., None, None])
    g = (a * gn**p + b) / v
    E = gradX - (g / n)[..., None, None] * np.eye(n)
    E_lower = np.einsum("...i,...ij->...j", G, E) / v[..., None]
    trE2 = np.einsum("...ij,...ji->...", E, E)
    rho = np.trace(gradX, axis1=-2, axis2=-1) - g
    return RigidityFrame(v=v, grad=G, X=X, g=g, gradX=gradX, E=E, E_lower=E_lower, trE2=trE2, rho=rho)


def grad_g(params: EqParams, jet: Jet) -> np.ndarray:
    """Gradient of ``g`` by the chain rule, using only second derivatives.

    ``g_j = a p |grad v|^(p-2) v_i v_ij / v - g v_j / v``.
    """
    a, b, p = params.a, params.b, params.p
    v, G, H = jet.value, jet.grad, jet.hess
    gn = np.linalg.norm(G, axis=-1)
    HG = np.einsum("...ij,...j->...i", H, G)
    g = (a * gn**p + b) / v
    return (a * p * gn ** (p - 2.0) / v)[..., None] * HG - (g / v)[..., None] * G


def grad_rho(params: EqParams, jet: Jet) -> np.ndarray:
    """Gradient of the residual ``rho`` from a third-order jet.

    Writes ``Delta_p v = w L`` with ``w = s^((p-2)/2)``, ``s = |grad v|^2``
    and ``L = tr H + (p-2) G.HG / s`` and differentiates each factor.
    """
    if jet.third is None:
        raise ValueError("grad_rho needs a third-order jet")
    p = params.p
    G, H, T = jet.grad, jet.hess, jet.third
    s = np.einsum("...i,...i->...", G, G)
    HG = np.einsum("...ij,...j->...i", H, G)
    HHG = np.einsum("...ij,...j->...i", H, HG)
    GHG = np.einsum("...i,...i->...", G, HG)
    w = s ** ((p - 2.0) / 2.0)
    dw = ((p - 2.0) * s ** ((p - 4.0) / 2.0))[..., None] * HG
    L = np.trace(H, axis1=-2, axis2=-1) + (p - 2.0) * GHG / s
    dtrH = np.einsum("...iij->...j", T)
    dGHG = 2.0 * HHG + np.einsum("...a,...abj,...b->...j", G, T, G)
    dL = dtrH + (p - 2.0) * (dGHG / s[..., None] - 2.0 * (GHG / s**2)[..., None] * HG)
    dplap = dw * L[..., None] + w[..., None] * dL
    return dplap - grad_g(params, jet)


@dataclass
class AnisotropyDecomposition:
    """``gradX = |grad v|^(p-2) A H`` and ``E = A C`` with ``C`` symmetric."""

    A: np.ndarray
    C: np.ndarray
    lambda_min: float
    lambda_max: float


def anisotropy_decomposition(params: EqParams, jet: Jet, frame: RigidityFrame | None = None) -> AnisotropyDecomposition:
    n, p = params.n, params.p
    frame = frame if frame is not None else build_frame(params, jet)
    G = jet.grad
    s = np.einsum("...i,...i->...", G, G)
    P = G[..., :, None] * G[..., None, :] / s[..., None, None]
    eye = np.eye(n)
    A = eye + (p - 2.0) * P
    A_inv = eye + (1.0 / (p - 1.0) - 1.0) * P
    w = s ** ((p - 2.0) / 2.0)
    C = w[..., None, None] * jet.hess - (frame.g / n)[..., None, None] * A_inv
    return AnisotropyDecomposition(A=A, C=C, lambda_min=min(p - 1.0, 1.0), lambda_max=max(p - 1.0, 1.0))


def householder_to_first_axis(direction: np.ndarray) -> np.ndarray:
    """Reflections ``Q`` (batched) with ``Q d = -+ e_1`` for unit vectors ``d``.

    The sign follows the stable choice ``u = d + sign(d_1) e_1``.
    """
    d = np.asarray(direction, dtype=float)
    n = d.shape[-1]
    sign = np.where(d[..., 0] >= 0.0, 1.0, -1.0)
    u = d.copy()
    u[..., 0] += sign
    uu = np.einsum("...i,...i->...", u, u)
    return np.eye(n) - 2.0 * u[..., :, None] * u[..., None, :] / uu[..., None, None]


def rotated_coefficients(params: EqParams, jet: Jet, frame: RigidityFrame | None = None):
    """``C`` in a frame where ``grad v`` lies along the first axis.

    Returns ``(C_rot, eigs)`` where ``eigs = (p-1, 1, ..., 1)`` is the diagonal
    of the rotated ``A``.
    """
    dec = anisotropy_decomposition(params, jet, frame)
    G = jet.grad
    Q = householder_to_first_axis(G / np.linalg.norm(G, axis=-1, keepdims=True))
    C_rot = Q @ dec.C @ np.swapaxes(Q, -1, -2)
    eigs = np.ones(params.n)
    eigs[0] = params.p - 1.0
    return C_rot, eigs
