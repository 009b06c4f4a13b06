"""One-sided (Hestenes) Jacobi SVD for small complex matrices.

Each rotation diagonalises a 2x2 block of the Gram matrix A^H A, so a sweep
is a cyclic Jacobi step on A^H A carried out on the columns of A. Working on
A itself keeps small singular values accurate, which squaring would not.
"""

from __future__ import annotations

import numpy as np

CONV_TOL = 1e-14
MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    pass


def _complete_basis(cols: np.ndarray, m: int) -> np.ndarray:
    """Extend orthonormal columns (m x r) to an m x m unitary."""
    basis = [c for c in cols.T]
    for e in np.eye(m, dtype=complex):
        if len(basis) == m:
            break
        v = e.copy()
        for _ in range(2):
            for b in basis:
                v -= np.vdot(b, v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    return np.array(basis).T


def jacobi_svd(a, tol: float = CONV_TOL, max_sweeps: int = MAX_SWEEPS):
    """Return ``(U, s, V)`` with ``a = U[:, :k] @ diag(s) @ V[:, :k].conj().T``.

    ``U`` and ``V`` are square unitaries, ``s`` has ``k = min(m, n)`` entries
    in descending order.
    """
    a = np.array(a, dtype=complex)
    m, n = a.shape
    if m < n:
        v, s, u = jacobi_svd(a.conj().T, tol, max_sweeps)
        return u, s, v

    w = a.copy()
    v = np.eye(n, dtype=complex)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = np.vdot(w[:, p], w[:, p]).real
                beta = np.vdot(w[:, q], w[:, q]).real
                gamma = np.vdot(w[:, p], w[:, q])
                g = abs(gamma)
                if g <= tol * np.sqrt(alpha * beta) or g == 0.0:
                    continue
                rotated = True
                phase = gamma / g
                zeta = (beta - alpha) / (2.0 * g)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s_ = c * t
                wq = w[:, q] * np.conj(phase)
                wp = w[:, p].copy()
                w[:, p] = c * wp - s_ * wq
                w[:, q] = s_ * wp + c * wq
                vq = v[:, q] * np.conj(phase)
                vp = v[:, p].copy()
                v[:, p] = c * vp - s_ * vq
                v[:, q] = s_ * vp + c * vq
        if not rotated:
            break
    else:
        raise ConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")

    s = np.linalg.norm(w, axis=0)
    order = np.argsort(-s, kind="stable")
    s, w, v = s[order], w[:, order], v[:, order]
    scale = s[0] if len(s) and s[0] > 0 else 1.0
    keep = s > 1e-15 * scale
    u_cols = w[:, keep] / s[keep]
    u = _complete_basis(u_cols, m)
    s = np.where(keep, s, 0.0)
    return u, s, v
