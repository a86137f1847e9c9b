"""Matrix inequalities behind the control of the boundary term.

* weighted trace bound: for ``A = diag(l_i)``, ``l_i > 0``,
  ``2 Tr(BAC) <= (L/l)^2 Tr(B B^T) + l^2 Tr(C C^T)`` with ``L = max l_i``,
  ``l = min l_i``;
* frame bound: ``Tr(BE) <= c(p) Tr(B B^T) + Tr(E^2)/2`` with
  ``c(p) = L^2 / (2 l^2)``, ``L = max(p-1, 1)``, ``l = min(p-1, 1)``, and the
  intermediate ``l^2 Tr(C C^T) <= Tr(E^2)``;
* gradient-direction bound: ``Tr(E^2) >= (E w).(E^T w)`` for
  ``w = grad v / |grad v|``, whose gap equals
  ``sum_{i>=2, k} l_i l_k c_ik^2`` in a frame with ``w`` along the first axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import TestField, eval_jet2
from .params import EqParams
from .tensors import anisotropy_decomposition, build_frame, rotated_coefficients


@dataclass
class InequalityReport:
    name: str
    lhs: np.ndarray
    rhs: np.ndarray
    rtol: float = 1e-12
    gap_residual: float = 0.0  # for identities accompanying the inequality
    gap_tol: float = 1e-9

    @property
    def slack(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def violations(self) -> int:
        margin = self.rtol * (np.abs(self.lhs) + np.abs(self.rhs))
        return int(np.sum(self.lhs > self.rhs + margin))

    @property
    def samples(self) -> int:
        return int(self.lhs.size)

    @property
    def min_gap(self) -> float:
        return float(np.min(self.slack)) if self.lhs.size else 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.gap_residual <= self.gap_tol


def frame_constant(p: float) -> float:
    """``c(p) = max(p-1,1)^2 / (2 min(p-1,1)^2)``."""
    lo, hi = min(p - 1.0, 1.0), max(p - 1.0, 1.0)
    return hi**2 / (2.0 * lo**2)


def check_weighted_trace_bound(A_diag, B, C, rtol: float = 1e-12) -> InequalityReport:
    """Batched check of ``2 Tr(BAC) <= (L/l)^2 |B|^2 + l^2 |C|^2``."""
    A_diag = np.asarray(A_diag, dtype=float)
    if np.any(A_diag <= 0):
        raise ValueError("diagonal entries must be positive")
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    L = A_diag.max(axis=-1)
    l = A_diag.min(axis=-1)
    lhs = 2.0 * np.einsum("...ij,...j,...ji->...", B, A_diag, C)
    rhs = (L / l) ** 2 * np.sum(B * B, axis=(-2, -1)) + l**2 * np.sum(C * C, axis=(-2, -1))
    return InequalityReport("weighted-trace-bound", np.atleast_1d(lhs), np.atleast_1d(rhs), rtol)


def random_trace_triples(count: int, rng: np.random.Generator, n_range=(2, 6), lam_range=(0.1, 10.0)):
    """Yield ``(A_diag, B, C)`` batches grouped by dimension."""
    dims = rng.integers(n_range[0], n_range[1] + 1, size=count)
    for n in np.unique(dims):
        k = int(np.sum(dims == n))
        A = rng.uniform(*lam_range, size=(k, n))
        yield A, rng.normal(size=(k, n, n)), rng.normal(size=(k, n, n))


def check_frame_bound(
    params: EqParams, field: TestField, points, B, rtol: float = 1e-12
) -> tuple[InequalityReport, InequalityReport]:
    """``Tr(BE) <= c Tr(BB^T) + Tr(E^2)/2`` and ``l^2 Tr(CC^T) <= Tr(E^2)``.

    ``B`` is a batch of matrices, one per point.
    """
    jet = eval_jet2(field, params, points)
    frame = build_frame(params, jet)
    dec = anisotropy_decomposition(params, jet, frame)
    B = np.asarray(B, dtype=float)
    c = frame_constant(params.p)
    lhs = np.einsum("bij,bji->b", B, frame.E)
    rhs = c * np.sum(B * B, axis=(-2, -1)) + 0.5 * frame.trE2
    main = InequalityReport("frame-bound", lhs, rhs, rtol)
    inter = InequalityReport(
        "frame-coefficient-bound",
        dec.lambda_min**2 * np.sum(dec.C * dec.C, axis=(-2, -1)),
        frame.trE2,
        rtol,
    )
    return main, inter


def check_gradient_direction_bound(
    params: EqParams, field: TestField, points, rtol: float = 1e-12, gap_tol: float = 1e-9
) -> InequalityReport:
    """``Tr(E^2) >= (E w).(E^T w)`` plus the rotated-frame gap formula."""
    jet = eval_jet2(field, params, points)
    frame = build_frame(params, jet)
    w = frame.grad / np.linalg.norm(frame.grad, axis=-1, keepdims=True)
    Ew = np.einsum("bij,bj->bi", frame.E, w)
    wE = np.einsum("bk,bki->bi", w, frame.E)
    proj = np.einsum("bi,bi->b", Ew, wE)
    C_rot, eigs = rotated_coefficients(params, jet, frame)
    weights = eigs[:, None] * eigs[None, :]
    full = np.sum(weights * C_rot**2, axis=(-2, -1))
    gap = np.sum((weights * C_rot**2)[:, 1:, :], axis=(-2, -1))
    scale = np.maximum(np.abs(frame.trE2) + np.abs(proj), 1e-300)
    gap_residual = np.abs((frame.trE2 - proj) - gap) / scale
    full_residual = np.abs(frame.trE2 - full) / scale
    rep = InequalityReport(
        "gradient-direction-bound",
        proj,
        frame.trE2,
        rtol,
        gap_residual=float(max(gap_residual.max(), full_residual.max())) if gap.size else 0.0,
        gap_tol=gap_tol,
    )
    return rep
