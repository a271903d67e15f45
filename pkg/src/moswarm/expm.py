"""Matrix exponential by scaling and squaring."""

import numpy as np

from .errors import NumericError

#: Number of Taylor terms kept after scaling.
TAYLOR_TERMS = 18
#: The input is scaled by 2**-k until its 1-norm drops to this bound.
SCALED_NORM_BOUND = 0.5


def matrix_exponential(m):
    """Return ``exp(m)`` for a square real matrix.

    The matrix is scaled by ``2**-k`` so that its 1-norm is at most
    :data:`SCALED_NORM_BOUND`, the exponential of the scaled matrix is
    approximated by an 18-term Taylor polynomial, and the result is squared
    ``k`` times.

    Parameters
    ----------
    m : array_like, shape (d, d)

    Returns
    -------
    numpy.ndarray, shape (d, d)

    Raises
    ------
    NumericError
        If ``m`` contains NaN or infinite entries.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix exponential of a non-finite matrix")

    norm = np.abs(a).sum(axis=0).max() if a.size else 0.0
    k = 0
    while norm / 2.0**k > SCALED_NORM_BOUND:
        k += 1
    a = a / 2.0**k

    d = a.shape[0]
    result = np.eye(d)
    term = np.eye(d)
    for n in range(1, TAYLOR_TERMS + 1):
        term = term @ a / n
        result = result + term

    for _ in range(k):
        result = result @ result
    return result

