"""Verification toolkit for the critical p-Laplace equation.

Checks the explicit bubble family, the pointwise identities of the rigidity
tensor built from the transformed solution, the matrix inequalities that
control it, radial shooting, integral growth estimates and the exponent
bookkeeping of the decay argument.
"""

from .bubbles import Bubble
from .params import EqParams

__version__ = "0.1.0"

__all__ = ["Bubble", "EqParams", "__version__"]
