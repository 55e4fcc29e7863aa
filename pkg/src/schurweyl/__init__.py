"""Numerical tools for commutants of matrix algebras, the generalized
Schur-Weyl duality on tensor powers, and symmetry reductions of multi-copy
quantum measurements."""

from .algebra import (MatrixAlgebra, block_decompose, commutant, diagonal_algebra, full_algebra,
                      generate_algebra, scalars)
from .duality import build_lpm, verify_duality, verify_restricted_duality
from .matcore import DEFAULT_TOL, Tolerance

__version__ = "0.1.0"
