"""Adaptive Simpson and tensor Gauss-Legendre quadrature."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import QuadratureError

VecFunc = Callable[[np.ndarray], np.ndarray]


def sphere_area(n: int) -> float:
    """Area of the unit sphere in ``R^n``, ``2 pi^(n/2) / Gamma(n/2)``."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _simpson_pass(f: VecFunc, a, b, fa, fb, fm, whole, eps, max_depth):
    """Level-synchronous adaptive Simpson over a batch of intervals."""
    total = 0.0
    evals = 0
    depth = 0
    while a.size:
        if depth > max_depth:
            raise QuadratureError(f"adaptive Simpson exceeded depth {max_depth}")
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flr = f(np.concatenate([lm, rm]))
        evals += flr.size
        flm, frm = flr[: a.size], flr[a.size :]
        h = b - a
        left = h / 12.0 * (fa + 4.0 * flm + fm)
        right = h / 12.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        done = np.abs(delta) <= 15.0 * eps
        total += float(np.sum((left + right + delta / 15.0)[done]))
        keep = ~done
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        fa_new = np.concatenate([fa[keep], fm[keep]])
        fb_new = np.concatenate([fm[keep], fb[keep]])
        fm = np.concatenate([flm[keep], frm[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        eps = np.concatenate([eps[keep], eps[keep]]) / 2.0
        fa, fb = fa_new, fb_new
        depth += 1
    return total, evals


def adaptive_simpson(
    f: VecFunc,
    a: float,
    b: float,
    rtol: float = 1e-9,
    atol: float = 0.0,
    max_depth: int = 60,
    initial: int = 32,
) -> float:
    """Integrate a vectorized ``f`` over ``[a, b]``.

    The interval is first cut into ``initial`` panels; the tolerance
    ``max(atol, rtol |I|)`` (with ``I`` from the coarse pass) is shared
    between panels and halved at every bisection.  If the refined value moves
    the relative target by more than a factor of two the pass is repeated
    with the corrected target.
    """
    if b == a:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, rtol, atol, max_depth, initial)
    edges = np.linspace(a, b, initial + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    vals = f(np.concatenate([lo, mid, hi[-1:]]))
    fa = vals[:initial]
    fm = vals[initial : 2 * initial]
    fb = np.concatenate([fa[1:], vals[-1:]])
    whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
    coarse = float(np.sum(whole))
    target = max(atol, rtol * abs(coarse))
    if target == 0.0:
        target = np.finfo(float).tiny
    for _ in range(2):
        eps = np.full(initial, target / initial)
        value, _ = _simpson_pass(f, lo.copy(), hi.copy(), fa, fb, fm, whole, eps, max_depth)
        refined = max(atol, rtol * abs(value))
        if refined >= target / 2.0 or refined == 0.0:
            return value
        target = refined
    return value


def gauss_legendre_box(f: VecFunc, lo, hi, nodes: int):
    """Tensor-product Gauss-Legendre rule on the box ``prod [lo_i, hi_i]``.

    ``f`` receives points of shape ``(m, d)`` and returns ``(m,)`` or
    ``(m, c)``; the result is a float or an array of ``c`` integrals.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    d = lo.size
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (hi - lo)
    center = 0.5 * (hi + lo)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1) * half + center
    wgrid = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrid], axis=-1), axis=-1) * np.prod(half)
    vals = f(pts)
    if vals.ndim == 1:
        return float(np.sum(weights * vals))
    return np.einsum("m,m...->...", weights, vals)
