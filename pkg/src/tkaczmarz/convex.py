"""Strongly convex regularizers, their conjugate gradients and Bregman distances.

Every regularizer here is ``h(x) + 0.5 * ||x||_F^2`` with a convex ``h``, so it
is 1-strongly convex and the gradient of its conjugate is the proximal map
of ``h``.

Tensor nuclear norm and DFT scaling
-----------------------------------
:func:`tnn` is the plain sum of nuclear norms of the (unnormalised) Fourier
frontal slices.  With that definition the prox of ``lam * tnn`` would
threshold the Fourier slices at ``lam * n3``.  The ``tensor_tnn_elastic``
regularizer instead uses

    f(X) = lam * tnn(X) / n3 + 0.5 * ||X||_F^2,

whose conjugate gradient is singular tube thresholding at ``lam`` (every
Fourier slice thresholded at ``lam``).  Under this scaling

    D_f(X, W) = (1/n3) * sum_j D_{f_M}(F(X)_j, F(W)_j),

with ``f_M = lam * ||.||_* + 0.5 * ||.||_F^2`` on each Fourier slice.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import nuclear_norm, soft_threshold, svt
from .tensor_core import (as_tensor, fft_tubes, half_spectrum_weights, ifft_tubes, inner,
                          irfft_tubes, rfft_tubes)

__all__ = ["Regularizer", "TSvd", "f_value", "grad_conj", "grad_conj_fourier", "f_conj_value",
           "bregman", "tsvd", "stt", "tnn"]

KINDS = ("squared_fro", "elastic_l1", "matrix_nuclear_elastic", "tensor_tnn_elastic")


@dataclass(frozen=True)
class Regularizer:
    kind: str
    lam: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")

    @classmethod
    def squared_fro(cls):
        return cls("squared_fro")

    @classmethod
    def elastic_l1(cls, lam):
        return cls("elastic_l1", float(lam))

    @classmethod
    def nuclear(cls, lam):
        return cls("matrix_nuclear_elastic", float(lam))

    @classmethod
    def tnn(cls, lam):
        return cls("tensor_tnn_elastic", float(lam))

    @property
    def spectral(self):
        """True if the conjugate gradient acts slice-wise in the Fourier domain."""
        return self.kind in ("squared_fro", "tensor_tnn_elastic")


def _as_matrix(x):
    x = np.asarray(x)
    if x.ndim == 3 and x.shape[2] == 1:
        return x[:, :, 0]
    if x.ndim != 2:
        raise ValueError(f"matrix regularizer needs a matrix or an n3=1 tensor, got {x.shape}")
    return x


def f_value(r, x):
    x = np.asarray(x)
    quad = 0.5 * float(np.vdot(x, x).real)
    if r.kind == "squared_fro":
        return quad
    if r.kind == "elastic_l1":
        return r.lam * float(np.abs(x).sum()) + quad
    if r.kind == "matrix_nuclear_elastic":
        return r.lam * nuclear_norm(_as_matrix(x)) + quad
    x = as_tensor(x)
    return r.lam * tnn(x) / x.shape[2] + quad


def grad_conj(r, z):
    """``grad f*(z)``, i.e. the prox of the non-quadratic part of ``f``."""
    z = np.asarray(z)
    if r.kind == "squared_fro":
        return z.copy()
    if r.kind == "elastic_l1":
        return soft_threshold(z, r.lam)
    if r.kind == "matrix_nuclear_elastic":
        return svt(_as_matrix(z), r.lam).reshape(z.shape)
    return stt(z, r.lam).reshape(z.shape)


def grad_conj_fourier(r, zh):
    """:func:`grad_conj` applied to a half spectrum ``(h, n2, k)`` of tube FFTs."""
    if r.kind == "squared_fro":
        return zh.copy()
    if r.kind == "tensor_tnn_elastic":
        return svt(zh, r.lam)
    raise ValueError(f"{r.kind} does not act slice-wise in the Fourier domain")


def f_conj_value(r, z):
    """``f*(z)`` via ``<z, x> - f(x)`` at ``x = grad f*(z)``."""
    x = grad_conj(r, z)
    return inner(z, x) - f_value(r, x)


def bregman(r, z, y):
    """``D_{f,z}(x, y)`` with ``x = grad f*(z)``, written as ``f(y) + f*(z) - <z, y>``."""
    z, y = np.asarray(z), np.asarray(y)
    if z.shape != y.shape:
        raise ValueError(f"bregman shape mismatch {z.shape} vs {y.shape}")
    return f_value(r, y) + f_conj_value(r, z) - inner(z, y)


@dataclass
class TSvd:
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def tsvd(x):
    """Full t-SVD ``x = u * s * v^T`` from per-frequency SVDs of ``F(x)``.

    Only frequencies ``0..n3//2`` are decomposed; the others are filled with
    conjugates so the inverse transforms of ``u, s, v`` are real.
    """
    x = as_tensor(x)
    n1, n2, n3 = x.shape
    xf = fft_tubes(x)
    uf = np.empty((n1, n1, n3), dtype=complex)
    sf = np.zeros((n1, n2, n3), dtype=complex)
    vf = np.empty((n2, n2, n3), dtype=complex)
    k = min(n1, n2)
    for j in range(n3 // 2 + 1):
        sl = xf[:, :, j]
        if j == 0 or 2 * j == n3:
            sl = sl.real
        u, s, vh = np.linalg.svd(sl, full_matrices=True)
        uf[:, :, j] = u
        sf[np.arange(k), np.arange(k), j] = s
        vf[:, :, j] = vh.conj().T
        if 0 < j and 2 * j != n3:
            uf[:, :, n3 - j] = u.conj()
            sf[:, :, n3 - j] = sf[:, :, j]
            vf[:, :, n3 - j] = vh.T
    return TSvd(ifft_tubes(uf), ifft_tubes(sf), ifft_tubes(vf))


def stt(x, tau):
    """Singular tube thresholding: every Fourier frontal slice goes through ``svt``."""
    x = as_tensor(x)
    n3 = x.shape[2]
    if n3 == 1:
        return svt(x[:, :, 0], tau)[:, :, None]
    return irfft_tubes(svt(rfft_tubes(x), tau), n3)


def tnn(x):
    """Sum of nuclear norms of all ``n3`` Fourier frontal slices."""
    x = as_tensor(x)
    s = np.linalg.svd(rfft_tubes(x), compute_uv=False)
    return float(half_spectrum_weights(x.shape[2]) @ s.sum(axis=1))


def tnn_fourier(xh, n3):
    """:func:`tnn` of the tensor whose half spectrum is ``xh``."""
    s = np.linalg.svd(xh, compute_uv=False)
    return float(half_spectrum_weights(n3) @ s.sum(axis=1))
