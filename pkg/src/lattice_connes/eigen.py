"""Cyclic Jacobi eigensolver for dense Hermitian matrices."""

from __future__ import annotations

import math

import numpy as np


class ConvergenceError(RuntimeError):
    pass


def _off(a: np.ndarray) -> float:
    # masked, not ||a||^2 - ||diag||^2: the difference cancels catastrophically
    return float(np.linalg.norm(a[~np.eye(a.shape[0], dtype=bool)]))


def jacobi_eigh(a, tol: float = 1e-13, max_sweeps: int = 100, vectors: bool = True):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first removes the phase of ``a[p, q]`` with a diagonal
    unitary and then applies the real symmetric Jacobi rotation, so the
    combined 2x2 transformation is

        W = [[c, s], [-s e^{-i phi}, c e^{-i phi}]],   a[p, q] = |a[p, q]| e^{i phi}.

    Parameters
    ----------
    a : (n, n) array_like
        Hermitian matrix; only used through its Hermitian part.
    tol : float
        Sweeps stop once the off-diagonal Frobenius mass is below
        ``tol * ||a||_F``.
    max_sweeps : int
    vectors : bool
        Also accumulate eigenvectors.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    v : ndarray, optional
        Unitary matrix whose columns are the matching eigenvectors.
    """
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(a))
    threshold = tol * scale

    for _ in range(max_sweeps):
        if _off(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                z = a[p, q]
                r = abs(z)
                if r == 0.0 or r <= 1e-300:
                    continue
                app, aqq = a[p, p].real, a[q, q].real
                # rotation too small to change the diagonal at working precision
                if r < 1e-18 * (abs(app) + abs(aqq)):
                    a[p, q] = a[q, p] = 0.0
                    continue
                e = z / r
                theta = (aqq - app) / (2.0 * r)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ec = e.conjugate()
                w = np.array([[c, s], [-s * ec, c * ec]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ w
                a[idx, :] = w.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * r
                a[q, q] = aqq + t * r
                if vectors:
                    v[:, idx] = v[:, idx] @ w
    else:
        if _off(a) > threshold:
            raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    evals = np.diag(a).real
    order = np.argsort(evals, kind="stable")
    if vectors:
        return evals[order], v[:, order]
    return evals[order]
