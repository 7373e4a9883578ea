"""Small dense factorizations: LU with partial pivoting and Householder QR.

Sized for desk-scale problems (n up to ~100). numpy arrays are used only as
containers; the elimination and reflection loops are explicit so results do
not depend on which BLAS numpy was built against.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "SingularMatrixError",
    "lu_factor",
    "lu_solve",
    "solve",
    "householder_qr",
    "qr_least_squares",
]


class SingularMatrixError(np.linalg.LinAlgError):
    pass


def lu_factor(A) -> tuple[np.ndarray, np.ndarray]:
    """Factor ``P A = L U``; returns the packed LU matrix and the row permutation."""
    LU = np.array(A, dtype=float, copy=True)
    n, n2 = LU.shape
    if n != n2:
        raise ValueError("lu_factor needs a square matrix")
    piv = np.arange(n)
    for j in range(n):
        p = j + int(np.argmax(np.abs(LU[j:, j])))
        if LU[p, j] == 0.0:
            raise SingularMatrixError(f"zero pivot in column {j}")
        if p != j:
            LU[[j, p]] = LU[[p, j]]
            piv[[j, p]] = piv[[p, j]]
        for i in range(j + 1, n):
            LU[i, j] /= LU[j, j]
            LU[i, j + 1 :] -= LU[i, j] * LU[j, j + 1 :]
    return LU, piv


def lu_solve(factors: tuple[np.ndarray, np.ndarray], b) -> np.ndarray:
    LU, piv = factors
    n = LU.shape[0]
    y = np.array(b, dtype=float)[piv]
    for i in range(n):
        for j in range(i):
            y[i] -= LU[i, j] * y[j]
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n):
            y[i] -= LU[i, j] * y[j]
        y[i] = y[i] / LU[i, i]
    return y


def solve(A, b) -> np.ndarray:
    return lu_solve(lu_factor(A), b)


def householder_qr(A) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR of an ``n x m`` matrix (n >= m) by Householder reflections."""
    R = np.array(A, dtype=float, copy=True)
    n, m = R.shape
    if n < m:
        raise ValueError("householder_qr needs at least as many rows as columns")
    Q = np.eye(n)
    for j in range(m):
        v = _reflector(R[j:, j])
        if v is None:
            continue
        R[j:, j:] -= 2.0 * np.outer(v, v @ R[j:, j:])
        Q[:, j:] -= 2.0 * np.outer(Q[:, j:] @ v, v)
    return Q[:, :m], np.triu(R[:m, :])


def _reflector(x: np.ndarray):
    alpha = float(np.sqrt(x @ x))
    if alpha == 0.0:
        return None
    v = x.copy()
    v[0] += alpha if x[0] >= 0.0 else -alpha
    return v / np.sqrt(v @ v)


def qr_least_squares(F, w, rcond: float = 1e-12) -> tuple[np.ndarray, int]:
    """Minimize ``||w - F g||_2`` by Householder QR.

    Columns are kept left to right; a column whose diagonal entry in R falls
    below ``rcond`` times the largest kept diagonal is treated as dependent and
    it and every column after it are dropped (their coefficients are zero).
    Returns ``(g, rank)``.
    """
    F = np.array(F, dtype=float, copy=True)
    r = np.array(w, dtype=float, copy=True)
    n, m = F.shape
    if n < m:
        raise ValueError("more columns than rows")
    rank = 0
    diag_max = 0.0
    for j in range(m):
        v = _reflector(F[j:, j])
        if v is not None:
            F[j:, j:] -= 2.0 * np.outer(v, v @ F[j:, j:])
            r[j:] -= 2.0 * v * (v @ r[j:])
        d = abs(F[j, j])
        if d == 0.0 or d <= rcond * max(diag_max, d):
            break
        diag_max = max(diag_max, d)
        rank += 1
    g = np.zeros(m)
    for i in range(rank - 1, -1, -1):
        g[i] = (r[i] - F[i, i + 1 : rank] @ g[i + 1 : rank]) / F[i, i]
    return g, rank
