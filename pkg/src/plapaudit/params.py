"""Equation parameters ``(n, p)`` and the constants derived from them."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError


def derived_constants(n: int, p: float) -> tuple[float, float, float]:
    """Return ``(a, b, p_star)`` for dimension ``n`` and exponent ``p``."""
    a = (p - 1.0) / p * n
    b = (p / (n - p)) ** (p - 1.0)
    p_star = n * p / (n - p)
    return a, b, p_star


@dataclass(frozen=True)
class EqParams:
    """Dimension ``n`` and exponent ``p`` of the critical p-Laplace equation.

    ``a`` and ``b`` are the coefficients of the source term of the transformed
    equation, ``p_star`` is the Sobolev exponent.
    """

    n: int
    p: float
    a: float = field(init=False)
    b: float = field(init=False)
    p_star: float = field(init=False)

    def __post_init__(self):
        n, p = self.n, self.p
        if int(n) != n or n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
        if not (1.0 < p < n):
            raise DomainError(f"need 1 < p < n, got n={n}, p={p}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "p", float(p))
        a, b, p_star = derived_constants(self.n, self.p)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "p_star", p_star)

    @property
    def k(self) -> float:
        """Growth exponent ``p/(p-1)`` of the transformed bubble."""
        return self.p / (self.p - 1.0)

    @property
    def decay(self) -> float:
        """Far-field decay exponent ``(n-p)/(p-1)`` of the bubble."""
        return (self.n - self.p) / (self.p - 1.0)

    @property
    def transform_exponent(self) -> float:
        """``-p/(n-p)``, the power taking ``u`` to ``v``."""
        return -self.p / (self.n - self.p)
