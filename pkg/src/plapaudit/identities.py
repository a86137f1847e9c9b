"""Differential identities of the rigidity frame, checked pointwise.

The gradient identity ``grad g = n E_lower`` holds for every smooth positive
``v``.  The remaining identities hold as stated only on solutions; here they
carry the residual ``rho`` so that they hold for arbitrary fields:

* ``d_i E_ij = (n-1) E_j + rho_j``
* ``d_i (X^j E_ij) = Tr E^2 + g rho / n + (n-1) X.E_lower + X.grad rho``
* ``div(v^q g^m X) = (a+q) v^(q-1) g^m |grad v|^p + b v^(q-1) g^m
  + n m v^q g^(m-1) X.E_lower + v^q g^m rho``
* ``d_i (v^q g^m X^j E_ij) = v^q g^m Tr E^2 + n m v^q g^(m-1) X^j E_ij E_i
  + (n-1+q) v^q g^m X.E_lower + v^q g^m (g rho / n + X.grad rho)``

Both follow from ``Tr E = rho`` and ``X^i_{,ij} = (g + rho)_j``.  Divergences
and ``grad rho`` come from Richardson differences of exact jets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fd import third_derivative_fd
from .fields import TestField, eval_jet2
from .params import EqParams
from .tensors import build_frame, grad_g


@dataclass
class IdentityReport:
    name: str
    residual: np.ndarray  # |LHS - RHS| per point
    scale: np.ndarray  # sum of term magnitudes per point
    tol: float
    floor: float = 1e-12
    max_term: float = 0.0
    correction: Optional[np.ndarray] = None  # size of the rho terms per point
    uncorrected: Optional[np.ndarray] = None  # residual with the rho terms dropped
    fd_error: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    @property
    def relative(self) -> np.ndarray:
        return self.residual / np.maximum(self.scale, self.floor)

    @property
    def max_relative(self) -> float:
        return float(np.max(self.relative)) if self.residual.size else 0.0

    @property
    def passed(self) -> bool:
        return self.max_relative <= self.tol

    @property
    def points(self) -> int:
        return int(self.residual.size)


def _norm(a: np.ndarray) -> np.ndarray:
    return np.abs(a) if a.ndim == 1 else np.linalg.norm(a, axis=-1)


def check_source_gradient_identity(
    params: EqParams, field: TestField, points, tol: float = 1e-9
) -> IdentityReport:
    """``grad g = n E_lower`` with both sides from exact second-order data."""
    jet = eval_jet2(field, params, points)
    frame = build_frame(params, jet)
    lhs = grad_g(params, jet)
    rhs = params.n * frame.E_lower
    # the two sides are differences of the same two pieces; scale by the pieces
    pieces = _norm(frame.g[:, None] * frame.grad / frame.v[:, None]) + _norm(lhs) + _norm(rhs)
    return IdentityReport(
        name="source-gradient",
        residual=_norm(lhs - rhs),
        scale=pieces,
        tol=tol,
        max_term=float(max(np.abs(lhs).max(), np.abs(rhs).max())),
        extra={"max_abs_grad_g": float(np.abs(lhs).max())},
    )


def _weights(frame, q: float, m: float):
    return frame.v**q * frame.g**m


def _flat_quantities(params: EqParams, q: float, m: float):
    n = params.n

    def quantity(jet):
        fr = build_frame(params, jet)
        w = _weights(fr, q, m)
        XE = np.einsum("...j,...ij->...i", fr.X, fr.E)
        parts = [
            fr.E.reshape(fr.E.shape[:-2] + (n * n,)),
            XE,
            w[..., None] * fr.X,
            w[..., None] * XE,
            fr.rho[..., None],
        ]
        return np.concatenate(parts, axis=-1)

    return quantity


def _fd_with_refinement(params, field, points, quantity, h, fd_tol, rounds=3):
    """FD derivative with per-point steps halved where the indicator is large."""
    jet = eval_jet2(field, params, points)
    gn = np.linalg.norm(jet.grad, axis=-1)
    hn = np.linalg.norm(jet.hess, axis=(-2, -1))
    steps = h * np.clip(gn / np.maximum(hn, 1e-300), 1e-2, 1.0)
    est = third_derivative_fd(field, params, points, quantity, h=steps)
    value, error = est.value, est.error

    def badness(val, err):
        mag = np.max(np.abs(val).reshape(len(points), -1), axis=1)
        return np.max(err.reshape(len(points), -1), axis=1) / np.maximum(mag, 1e-300)

    bad = badness(value, error)
    for _ in range(rounds):
        redo = bad > fd_tol
        if not np.any(redo):
            break
        steps = np.where(redo, steps / 2.0, steps)
        sub = third_derivative_fd(field, params, points[redo], quantity, h=steps[redo])
        sub_bad = badness(sub.value, sub.error)
        better = sub_bad < bad[redo]
        idx = np.flatnonzero(redo)[better]
        value[idx] = sub.value[better]
        error[idx] = sub.error[better]
        bad[idx] = sub_bad[better]
    return value, error, steps


def _divergence_data(params, field, points, q, m, h, fd_tol):
    n = params.n
    points = np.atleast_2d(np.asarray(points, dtype=float))
    quantity = _flat_quantities(params, q, m)
    D, err, steps = _fd_with_refinement(params, field, points, quantity, h, fd_tol)
    # D[b, c, k]: derivative of component c in direction k
    o = 0
    dE = D[:, o : o + n * n].reshape(-1, n, n, n)
    o += n * n
    dXE = D[:, o : o + n]
    o += n
    dY = D[:, o : o + n]
    o += n
    dZ = D[:, o : o + n]
    o += n
    drho = D[:, o, :]
    data = {
        "divE": np.einsum("bijk->bj", dE * np.eye(n)[None, :, None, :]),  # sum_i d_i E_ij
        "divXE": np.trace(dXE, axis1=1, axis2=2),
        "divY": np.trace(dY, axis1=1, axis2=2),
        "divZ": np.trace(dZ, axis1=1, axis2=2),
        "grad_rho": drho,
        "fd_error": np.max(err.reshape(len(points), -1), axis=1),
        "steps": steps,
    }
    return data


def check_divergence_identities(
    params: EqParams, field: TestField, points, h: float = 1e-2, tol: float = 1e-5
) -> tuple[IdentityReport, IdentityReport]:
    """The corrected divergence identities for ``E`` and ``X^j E_ij``."""
    n = params.n
    points = np.atleast_2d(np.asarray(points, dtype=float))
    fr = build_frame(params, eval_jet2(field, params, points))
    d = _divergence_data(params, field, points, 0.0, 0.0, h, tol / 10.0)
    rho_j = d["grad_rho"]

    main = (n - 1) * fr.E_lower
    res2 = d["divE"] - main - rho_j
    rep2 = IdentityReport(
        name="tensor-divergence",
        residual=_norm(res2),
        scale=_norm(d["divE"]) + _norm(main) + _norm(rho_j),
        tol=tol,
        max_term=float(max(np.abs(d["divE"]).max(), np.abs(main).max(), np.abs(rho_j).max())),
        correction=_norm(rho_j),
        uncorrected=_norm(d["divE"] - main),
        fd_error=d["fd_error"],
    )

    XdotE = np.einsum("bj,bj->b", fr.X, fr.E_lower)
    Xrho = np.einsum("bj,bj->b", fr.X, rho_j)
    terms = [fr.trE2, fr.g * fr.rho / n, (n - 1) * XdotE, Xrho]
    res3 = d["divXE"] - sum(terms)
    rep3 = IdentityReport(
        name="contracted-divergence",
        residual=np.abs(res3),
        scale=np.abs(d["divXE"]) + sum(np.abs(t) for t in terms),
        tol=tol,
        max_term=float(max(np.abs(d["divXE"]).max(), *(np.abs(t).max() for t in terms))),
        correction=np.abs(terms[1]) + np.abs(terms[3]),
        uncorrected=np.abs(d["divXE"] - terms[0] - terms[2]),
        fd_error=d["fd_error"],
    )
    return rep2, rep3


def check_weighted_identities(
    params: EqParams,
    field: TestField,
    points,
    q: float,
    m: float,
    h: float = 1e-2,
    tol: float = 1e-5,
) -> tuple[IdentityReport, IdentityReport]:
    """The corrected weighted divergence identities for ``v^q g^m X`` and
    ``v^q g^m X^j E_ij``."""
    n, a, b = params.n, params.a, params.b
    points = np.atleast_2d(np.asarray(points, dtype=float))
    fr = build_frame(params, eval_jet2(field, params, points))
    d = _divergence_data(params, field, points, q, m, h, tol / 10.0)
    rho_j = d["grad_rho"]
    w = _weights(fr, q, m)
    gn_p = np.linalg.norm(fr.grad, axis=-1) ** params.p
    XdotE = np.einsum("bj,bj->b", fr.X, fr.E_lower)

    t11 = [
        (a + q) * fr.v ** (q - 1) * fr.g**m * gn_p,
        b * fr.v ** (q - 1) * fr.g**m,
        n * m * w / fr.g * XdotE,
        w * fr.rho,
    ]
    res11 = d["divY"] - sum(t11)
    rep11 = IdentityReport(
        name="weighted-flux-divergence",
        residual=np.abs(res11),
        scale=np.abs(d["divY"]) + sum(np.abs(t) for t in t11),
        tol=tol,
        max_term=float(max(np.abs(d["divY"]).max(), *(np.abs(t).max() for t in t11))),
        correction=np.abs(t11[3]),
        uncorrected=np.abs(d["divY"] - sum(t11[:3])),
        fd_error=d["fd_error"],
        extra={"q": q, "m": m},
    )

    XEE = np.einsum("bj,bij,bi->b", fr.X, fr.E, fr.E_lower)
    Xrho = np.einsum("bj,bj->b", fr.X, rho_j)
    t12 = [
        w * fr.trE2,
        n * m * w / fr.g * XEE,
        (n - 1 + q) * w * XdotE,
        w * (fr.g * fr.rho / n + Xrho),
    ]
    res12 = d["divZ"] - sum(t12)
    rep12 = IdentityReport(
        name="weighted-tensor-divergence",
        residual=np.abs(res12),
        scale=np.abs(d["divZ"]) + sum(np.abs(t) for t in t12),
        tol=tol,
        max_term=float(max(np.abs(d["divZ"]).max(), *(np.abs(t).max() for t in t12))),
        correction=np.abs(t12[3]),
        uncorrected=np.abs(d["divZ"] - sum(t12[:3])),
        fd_error=d["fd_error"],
        extra={"q": q, "m": m},
    )
    return rep11, rep12
