"""Dense complex linear-algebra kernels for detection-sized problems.

Everything here operates on plain ``numpy`` arrays of ``complex128``:
vectors are 1-D, matrices 2-D, dense. Sizes are a few hundred at most, so
no sparse or blocked paths. Backed by numpy/scipy (BLAS/LAPACK) behind
small wrappers that validate shapes and translate failures into the
package's exception types.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .exceptions import NotSpdError, ShapeError, SingularPreconditionerError

__all__ = [
    "gram_and_matched_filter",
    "dl_split",
    "lower_triangular_solve",
    "conj_transpose_solve",
    "exact_solve",
    "is_hermitian",
]


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"{name} must be a 2-D array, got shape {a.shape}")
    return a


def _as_vector(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 1 or a.shape[0] < 1:
        raise ShapeError(f"{name} must be a 1-D array, got shape {a.shape}")
    return a


def is_hermitian(a: np.ndarray, rtol: float = 1e-12) -> bool:
    """Check a(i,j) == conj(a(j,i)) up to a relative tolerance."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(float(np.max(np.abs(a))), 1.0)
    return bool(np.max(np.abs(a - a.conj().T)) <= rtol * scale)


def gram_and_matched_filter(h: np.ndarray, y: np.ndarray, rho: float = 0.0):
    """Form the regularized Gram matrix and matched-filter output.

    Returns ``(a, b)`` with ``a = h^H h + rho I`` (Hermitian N x N) and
    ``b = h^H y``. The channel must be tall or square (M >= N); the
    underdetermined case is rejected.
    """
    h = _as_matrix(h, "h")
    y = _as_vector(y, "y")
    m, n = h.shape
    if m < n:
        raise ShapeError(f"channel must have M >= N, got {m} x {n}")
    if y.shape[0] != m:
        raise ShapeError(f"y has length {y.shape[0]}, expected {m}")
    if rho < 0:
        raise ValueError(f"rho must be nonnegative, got {rho}")
    a = h.conj().T @ h
    if rho:
        a = a + rho * np.eye(n)
    b = h.conj().T @ y
    return a, b


def dl_split(a: np.ndarray):
    """Split a Hermitian matrix into its diagonal and strict lower triangle.

    Returns ``(d, l)`` where ``d`` is the real 1-D diagonal and ``l`` the
    strictly-lower-triangular part, so that ``diag(d) + l + l^H == a`` for
    Hermitian ``a``.
    """
    a = _as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"dl_split needs a square matrix, got {a.shape}")
    d = np.real(np.diag(a)).copy()
    l = np.tril(a, -1)
    return d, l


def lower_triangular_solve(t: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Solve ``t z = r`` for lower-triangular ``t`` by forward substitution.

    O(N^2) work; never forms the inverse. A zero diagonal entry raises
    :class:`SingularPreconditionerError`.
    """
    t = _as_matrix(t, "t")
    r = np.asarray(r, dtype=np.complex128)
    if t.shape[0] != t.shape[1]:
        raise ShapeError(f"triangular solve needs a square matrix, got {t.shape}")
    if r.shape[0] != t.shape[0]:
        raise ShapeError(f"rhs has length {r.shape[0]}, expected {t.shape[0]}")
    if np.any(np.diag(t) == 0):
        raise SingularPreconditionerError("triangular factor has a zero diagonal entry")
    return scipy.linalg.solve_triangular(t, r, lower=True)


def conj_transpose_solve(t: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Solve ``t^H z = r`` given the lower-triangular ``t`` (back substitution)."""
    t = _as_matrix(t, "t")
    r = np.asarray(r, dtype=np.complex128)
    if t.shape[0] != t.shape[1] or r.shape[0] != t.shape[0]:
        raise ShapeError("conj_transpose_solve dimension mismatch")
    if np.any(np.diag(t) == 0):
        raise SingularPreconditionerError("triangular factor has a zero diagonal entry")
    return scipy.linalg.solve_triangular(t, r, lower=True, trans="C")


def exact_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` for Hermitian positive-definite ``a`` via Cholesky.

    Used for the exact linear baselines and as a reference oracle for the
    iterative solvers. Raises :class:`NotSpdError` when the factorization
    fails.
    """
    a = _as_matrix(a, "a")
    b = _as_vector(b, "b")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"exact_solve needs a square matrix, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"rhs has length {b.shape[0]}, expected {a.shape[0]}")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotSpdError("matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, b)
