"""Dense symmetric linear-algebra primitives shared by the numerical modules.

All Gram-style matrices handled here are of the form I + sum_s a_s a_s^T, so
they are symmetric positive definite by construction.  Everything is plain
numpy: matrices are (d, d) float64 arrays stored fully (both triangles).
"""

import numpy as np

# Eigenvalues at or below this are treated as numerically singular.
EIG_FLOOR = 1e-12


class SingularMatrixError(ValueError):
    """Raised when a matrix that must be positive definite is not."""


def rank1_update(V, a):
    """Return V + a a^T.

    The outer product of a vector with itself is exactly symmetric in
    floating point, so symmetry of the result is bit-exact whenever V is
    symmetric.
    """
    V = np.asarray(V, dtype=float)
    a = np.asarray(a, dtype=float)
    if V.shape != (a.size, a.size):
        raise ValueError(f"dimension mismatch: V is {V.shape}, a has {a.size} entries")
    return V + np.outer(a, a)


def sym_eig(V):
    """Eigendecomposition of a symmetric matrix, with a positive-definite check.

    Returns (w, Q) with V = Q diag(w) Q^T.  Raises SingularMatrixError if any
    eigenvalue is at or below EIG_FLOOR.
    """
    V = np.asarray(V, dtype=float)
    w, Q = np.linalg.eigh(V)
    if w[0] <= EIG_FLOOR:
        raise SingularMatrixError(f"matrix is numerically singular (min eigenvalue {w[0]:.3e})")
    return w, Q


def inv_and_inv_sqrt(V):
    """Return (V^-1, V^-1/2) via a symmetric eigendecomposition.

    Both outputs are symmetrized explicitly so downstream code can rely on
    exact symmetry; (V^-1/2)^2 reconstructs V^-1 to within eigensolver error.
    """
    w, Q = sym_eig(V)
    V_inv = (Q / w) @ Q.T
    V_inv_sqrt = (Q / np.sqrt(w)) @ Q.T
    V_inv = 0.5 * (V_inv + V_inv.T)
    V_inv_sqrt = 0.5 * (V_inv_sqrt + V_inv_sqrt.T)
    return V_inv, V_inv_sqrt


def mahalanobis(a, V_inv):
    """The norm ||a||_{V^-1} = sqrt(a^T V^-1 a).

    Tiny negative quadratic forms (roundoff on PSD matrices) are clamped to
    zero; anything below -1e-12 indicates a genuinely indefinite input.
    """
    a = np.asarray(a, dtype=float)
    q = float(a @ (V_inv @ a))
    if q < -1e-12:
        raise ValueError(f"negative quadratic form {q:.3e}: matrix not PSD")
    return np.sqrt(max(q, 0.0))


def weighted_norm(x, V):
    """The norm ||x||_V = sqrt(x^T V x) for PSD V."""
    x = np.asarray(x, dtype=float)
    q = float(x @ (V @ x))
    if q < -1e-12:
        raise ValueError(f"negative quadratic form {q:.3e}: matrix not PSD")
    return np.sqrt(max(q, 0.0))
