"""Power-law slope estimation."""

from __future__ import annotations

import numpy as np


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need at least two (x, y) pairs of matching shape")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit requires positive data")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def geometric_ladder(start: float, ratio: float, count: int) -> np.ndarray:
    return start * ratio ** np.arange(count, dtype=float)
