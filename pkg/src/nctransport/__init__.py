"""Symbolic-numeric calculus for non-tracial free probability at desk scale.

Truncated non-commutative power series over N generators, the modular-group
machinery of quasi-free states, q-deformed moment evaluation by pairing
enumeration, a contraction-mapping transport solver, and the reduction of
q-deformed Araki-Woods states to undeformed transport problems.
"""

from .errors import NCTransportError
from .modular import ModularContext, apply_sigma, build_context, matrix_power
from .moments import Law, MomentOracle
from .ncpoly import NCPoly, generators, quadratic_potential
from .tensor import TensorMatrix, TensorPoly
from .transport import TransportConfig, TransportSolution, solve_transport

__all__ = [
    "NCTransportError",
    "ModularContext",
    "build_context",
    "matrix_power",
    "apply_sigma",
    "NCPoly",
    "generators",
    "quadratic_potential",
    "TensorPoly",
    "TensorMatrix",
    "MomentOracle",
    "Law",
    "TransportConfig",
    "TransportSolution",
    "solve_transport",
]

__version__ = "0.1.0"
