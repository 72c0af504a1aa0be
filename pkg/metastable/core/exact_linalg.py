"""
Dense linear solves for small blocks: exact over the rationals, or float64
with a residual check.
"""

import logging
from fractions import Fraction
from typing import Sequence

import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from metastable.core.errors import SingularSystem

logger = logging.getLogger(__name__)


def _to_qq(value) -> object:
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def _from_qq(element) -> Fraction:
    rational = QQ.to_sympy(element)
    return Fraction(int(rational.p), int(rational.q))


def solve_rational(
    matrix: Sequence[Sequence[Fraction]],
    rhs: Sequence[Sequence[Fraction]],
) -> list[list[Fraction]]:
    """
    Solve A X = B exactly over QQ.

    Args:
        matrix: Square n x n rational matrix (rows)
        rhs: n x m right-hand sides (rows)

    Returns:
        n x m solution as Fractions

    Raises:
        SingularSystem: A is not invertible
    """
    n = len(matrix)
    m = len(rhs[0]) if n else 0
    if n == 0 or m == 0:
        return [[] for _ in range(n)]
    A = DomainMatrix([[_to_qq(x) for x in row] for row in matrix], (n, n), QQ)
    B = DomainMatrix([[_to_qq(x) for x in row] for row in rhs], (n, m), QQ)
    try:
        X = A.lu_solve(B)
    except (DMNonInvertibleMatrixError, ZeroDivisionError) as e:
        raise SingularSystem(f"Singular {n}x{n} rational system") from e
    return [[_from_qq(x) for x in row] for row in X.to_list()]


def solve_float(matrix: np.ndarray, rhs: np.ndarray, residual: float = 1e-10) -> np.ndarray:
    """
    Solve A X = B in float64 and check the relative residual.

    Raises:
        SingularSystem: Singular matrix or residual above `residual`
    """
    try:
        X = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"Singular {matrix.shape[0]}x{matrix.shape[0]} float system") from e
    scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
    error = float(np.abs(matrix @ X - rhs).max(initial=0.0)) / scale
    if error > residual:
        raise SingularSystem(f"Residual {error:.3e} exceeds {residual:.1e}")
    return X
