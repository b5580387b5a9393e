"""Dense Hermitian eigensolver (cyclic Jacobi) for small spin Hamiltonians.

The solver accepts a single matrix of shape (n, n) or a stack of shape
(m, n, n); stacked input diagonalizes every matrix in lockstep with
vectorized rotations, which is what makes dense field-grid scans cheap.
"""

from __future__ import annotations

import numpy as np

OFF_DIAGONAL_TOL = 1e-12
MAX_SWEEPS = 40
HERMITICITY_TOL = 1e-10


def _off_diagonal_norm(a: np.ndarray) -> np.ndarray:
    # Summed directly over off-diagonal entries: computing it as
    # total - diagonal cancels catastrophically near convergence.
    off2 = np.abs(a) ** 2
    n = a.shape[-1]
    idx = np.arange(n)
    off2[..., idx, idx] = 0.0
    return np.sqrt(off2.sum(axis=(-2, -1)))


def jacobi_eigh(h, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS):
    """Full spectral decomposition of Hermitian ``h`` by cyclic Jacobi rotations.

    Parameters
    ----------
    h : array_like, shape (n, n) or (m, n, n)
        Hermitian matrix or stack of Hermitian matrices.
    tol : float
        Convergence threshold on the off-diagonal Frobenius norm,
        relative to the matrix norm.
    max_sweeps : int
        Upper bound on full cyclic sweeps.

    Returns
    -------
    w : ndarray, shape (n,) or (m, n)
        Eigenvalues in ascending order.
    v : ndarray, shape (n, n) or (m, n, n)
        Unitary eigenvector matrices, columns matching ``w``.

    Raises
    ------
    ValueError
        If the input is not square or not Hermitian within 1e-10 relative.
    RuntimeError
        If the sweep budget is exhausted before convergence.
    """
    a = np.asarray(h, dtype=complex)
    single = a.ndim == 2
    if single:
        a = a[None]
    if a.ndim != 3 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {np.shape(h)}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix has non-finite entries")

    scale = np.sqrt((np.abs(a) ** 2).sum(axis=(-2, -1)))
    herm_defect = np.sqrt((np.abs(a - np.conj(np.swapaxes(a, -2, -1))) ** 2).sum(axis=(-2, -1)))
    if np.any(herm_defect > HERMITICITY_TOL * np.maximum(scale, 1.0)):
        raise ValueError("matrix is not Hermitian within 1e-10 relative tolerance")
    a = (a + np.conj(np.swapaxes(a, -2, -1))) / 2.0

    m, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=complex), (m, n, n)).copy()
    safe_scale = np.where(scale == 0.0, 1.0, scale)

    converged = False
    for _ in range(max_sweeps):
        if np.all(_off_diagonal_norm(a) <= tol * safe_scale):
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = a[:, p, q]
                aa = np.abs(alpha)
                active = aa > 0.0
                if not np.any(active):
                    continue
                gap = a[:, q, q].real - a[:, p, p].real
                tau = np.where(active, gap / np.where(active, 2.0 * aa, 1.0), 0.0)
                tau = np.clip(tau, -1e150, 1e150)
                # smaller-angle root of t^2 + 2 tau t - 1 = 0, |theta| <= pi/4
                t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ph = np.where(active, alpha / np.where(active, aa, 1.0), 1.0)
                sph = (s * ph)[:, None]
                c_ = c[:, None]
                # unitary J: J[p,p]=J[q,q]=c, J[p,q]=s*ph, J[q,p]=-s*conj(ph)
                rp = a[:, p, :].copy()
                rq = a[:, q, :].copy()
                a[:, p, :] = c_ * rp - sph * rq
                a[:, q, :] = np.conj(sph) * rp + c_ * rq
                cp = a[:, :, p].copy()
                cq = a[:, :, q].copy()
                a[:, :, p] = c_ * cp - np.conj(sph) * cq
                a[:, :, q] = sph * cp + c_ * cq
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = c_ * vp - np.conj(sph) * vq
                v[:, :, q] = sph * vp + c_ * vq
    if not converged and np.any(_off_diagonal_norm(a) > tol * safe_scale):
        raise RuntimeError(f"Jacobi sweeps did not converge within {max_sweeps} sweeps")

    w = np.einsum("mii->mi", a).real
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    if single:
        return w[0], v[0]
    return w, v
