"""Dense SVD and the thresholding operators built on it."""

from dataclasses import dataclass

import numpy as np

__all__ = ["SvdResult", "SvdError", "svd", "soft_threshold", "svt", "sigma_extremes",
           "nuclear_norm"]


class SvdError(np.linalg.LinAlgError):
    """LAPACK failed to converge."""


@dataclass
class SvdResult:
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.s) @ self.v.conj().T


def svd(m):
    """Economy SVD ``m = u @ diag(s) @ v^H`` with a deterministic phase.

    In every left singular vector the entry of largest magnitude (first one on
    ties) is made real and nonnegative; the same phase is applied to the
    matching right vector so the product is unchanged.  A zero matrix yields
    identity-like ``u`` and ``v``.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"svd expects a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("svd input has non-finite entries")
    rows, cols = m.shape
    k = min(rows, cols)
    if not np.any(m):
        return SvdResult(np.eye(rows, k, dtype=m.dtype), np.zeros(k), np.eye(cols, k, dtype=m.dtype))
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdError(f"SVD did not converge for a {m.shape} matrix") from exc
    v = vh.conj().T
    pivot = np.argmax(np.abs(u), axis=0)
    lead = u[pivot, np.arange(k)]
    phase = np.where(lead == 0, 1.0, lead / np.where(lead == 0, 1.0, np.abs(lead)))
    u = u * phase.conj()
    v = v * phase.conj()
    return SvdResult(u, s, v)


def soft_threshold(x, lam):
    """Componentwise ``sign(x) * max(|x| - lam, 0)``."""
    if lam < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam}")
    x = np.asarray(x)
    if lam == 0:
        return x.copy()
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def svt(m, lam):
    """Singular value thresholding ``U max(S - lam, 0) V^H``.

    Accepts a stack of matrices ``(..., rows, cols)``, real or complex; each
    matrix is thresholded independently.
    """
    if lam < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam}")
    m = np.asarray(m)
    if lam == 0:
        return m.copy()
    rows, cols = m.shape[-2:]
    if min(rows, cols) == 1:
        # rank <= 1: shrink the single singular value, i.e. the Euclidean norm
        norm = np.linalg.norm(m, axis=(-2, -1), keepdims=True)
        scale = np.maximum(1.0 - lam / np.where(norm > 0, norm, 1.0), 0.0)
        return m * scale
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdError(f"SVD did not converge for a {m.shape} stack") from exc
    s = np.maximum(s - lam, 0.0)
    return (u * s[..., None, :]) @ vh


def nuclear_norm(m):
    """Sum of singular values; stacks are summed over all matrices."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def sigma_extremes(m):
    """Smallest nonzero and largest singular value of ``m``.

    A singular value counts as zero below ``max(rows, cols) * eps * sigma_max``.
    """
    m = np.asarray(m)
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        raise ValueError("sigma_extremes of an all-zero matrix")
    tol = max(m.shape) * np.finfo(float).eps * s[0]
    nz = s[s > tol]
    return float(nz[-1]), float(s[0])
