"""Exception types raised by the audit routines."""


class DomainError(ValueError):
    """Parameters outside the range where the equation or a formula is defined."""


class CriticalPointError(ValueError):
    """Pointwise tensor requested where the gradient (numerically) vanishes."""


class IllConditionedError(ArithmeticError):
    """Finite-difference error indicator exceeds the requested tolerance."""


class AdmissibilityError(ValueError):
    """Perturbation exponent outside its admissible window."""


class BlowDownError(RuntimeError):
    """Shooting trajectory reached zero before the target radius."""


class StepFailureError(RuntimeError):
    """Adaptive step control could not meet the tolerance."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge."""
