"""Linear constraint sets ``{constraint_i(X) = b_i}`` split into Kaczmarz blocks.

Each set knows how to evaluate a block residual and add the matching adjoint
increment in whatever representation is cheapest for the regularizer at hand.
That representation is hidden behind a small *engine* object built by
:meth:`workspace`; the solver loop only talks to engines.

Kinds
-----
``tensor_slices``   horizontal slices ``A(i) * X = B(i)`` of a t-product system
``vector_rows``     rows of ``A x = b`` (tensor slices with ``n3 = K = 1``)
``matrix_rows``     rows of ``A X = B`` (tensor slices with ``n3 = 1``)
``matrix_entries``  ``<A_i, X> = b_i``
``masked_entries``  ``X[p, q] = I[p, q]`` for ``(p, q)`` in a mask
"""

import numpy as np

from . import convex
from .tensor_core import (as_tensor, half_spectrum_weights, irfft_tubes, rfft_tubes, tprod,
                          transpose_t)

__all__ = ["SliceConstraints", "EntryConstraints", "MaskedConstraints", "tensor_slices",
           "vector_rows", "matrix_rows", "matrix_entries", "masked_entries"]


def _sel(idx):
    """Turn a block of indices into a slice when possible so numpy returns views."""
    if idx.size == 1:
        i = int(idx[0])
        return slice(i, i + 1)
    if idx[-1] - idx[0] == idx.size - 1 and np.all(np.diff(idx) == 1):
        return slice(int(idx[0]), int(idx[-1]) + 1)
    return idx


class _Constraints:
    kind = None
    n3 = 1

    def _set_noise(self, noise):
        if noise is not None:
            noise = np.asarray(noise, dtype=float)
            if noise.shape != self.rhs.shape:
                raise ValueError(f"noise shape {noise.shape} does not match rhs {self.rhs.shape}")
        self.noise = noise

    def _check_norms(self):
        if np.any(self.norms2 <= 0):
            bad = int(np.flatnonzero(self.norms2 <= 0)[0])
            raise ValueError(f"constraint {bad} has zero norm")

    def epsilon(self):
        """``max_i ||E(i)|| / ||A(i)||`` for the attached noise (0 without noise)."""
        if self.noise is None:
            return 0.0
        e = self.noise.reshape(self.n, -1)
        return float(np.max(np.sqrt(np.sum(e * e, axis=1) / self.norms2)))

    def with_noise(self, noise):
        other = object.__new__(type(self))
        other.__dict__.update(self.__dict__)
        other._set_noise(noise)
        return other

    def rhs_used(self, noisy):
        if noisy and self.noise is not None:
            return self.rhs + self.noise
        return self.rhs

    def residual_norm(self, x, noisy=False):
        return float(np.linalg.norm((self.apply(x) - self.rhs_used(noisy)).ravel()))


class SliceConstraints(_Constraints):
    """Horizontal slices of ``A * X = B`` with ``A`` of shape ``(N1, N2, N3)``."""

    kind = "tensor_slices"

    def __init__(self, a, b, noise=None, x_shape=None, rhs_shape=None):
        a, b = as_tensor(np.asarray(a, dtype=float)), as_tensor(np.asarray(b, dtype=float))
        if a.shape[0] != b.shape[0] or a.shape[2] != b.shape[2]:
            raise ValueError(f"incompatible A {a.shape} and B {b.shape}")
        self.a, self.b = a, b
        self.n, self.n2, self.n3 = a.shape
        self.k = b.shape[1]
        self.norms2 = np.einsum("ijk,ijk->i", a, a)
        self._check_norms()
        self.x_shape = x_shape or (self.n2, self.k, self.n3)
        self.rhs_shape = rhs_shape or b.shape
        self.rhs = b.reshape(self.rhs_shape)
        self._set_noise(noise)
        self._ah = None

    @property
    def ahat(self):
        if self._ah is None:
            self._ah = rfft_tubes(self.a)
        return self._ah

    def apply(self, x):
        x = as_tensor(np.asarray(x).reshape(self.n2, self.k, self.n3))
        return tprod(self.a, x).reshape(self.rhs_shape)

    def adjoint(self, y):
        y = np.asarray(y).reshape(self.n, self.k, self.n3)
        return tprod(transpose_t(self.a), y).reshape(self.x_shape)

    def workspace(self, reg, noisy=False):
        rhs = as_tensor(self.rhs_used(noisy).reshape(self.n, self.k, self.n3))
        if self.n3 == 1:
            return _MatrixEngine(self, reg, rhs)
        if reg.spectral:
            return _FourierEngine(self, reg, rhs)
        return _SpatialEngine(self, reg, rhs)


class _MatrixEngine:
    """``n3 = 1``: plain real matrix algebra, ``X`` is ``(N2, K)``."""

    def __init__(self, cons, reg, rhs):
        self.cons, self.reg = cons, reg
        self.a = cons.a[:, :, 0]
        self.b = rhs[:, :, 0]
        self.norms2 = cons.norms2

    def zeros(self):
        return np.zeros((self.cons.n2, self.cons.k))

    def residual(self, idx, x):
        s = _sel(idx)
        return self.b[s] - self.a[s] @ x

    def gain(self, idx, r):
        return float(np.sum(np.sum(r * r, axis=1) / self.norms2[idx]))

    def add_adjoint(self, z, idx, r, coef):
        s = _sel(idx)
        z += self.a[s].T @ (coef[:, None] * r)

    def full_residual(self, x):
        return self.b - self.a @ x

    def add_full_adjoint(self, z, r, t):
        z += t * (self.a.T @ r)

    def prox(self, z):
        return convex.grad_conj(self.reg, z)

    def norm(self, w):
        return float(np.linalg.norm(w))

    def to_user(self, w):
        return w.reshape(self.cons.x_shape)


class _FourierEngine:
    """Half-spectrum engine: ``X`` is kept as ``(h, N2, K)`` tube FFTs."""

    def __init__(self, cons, reg, rhs):
        self.cons, self.reg = cons, reg
        self.n3 = cons.n3
        self.ah = cons.ahat
        self.bh = rfft_tubes(rhs)
        self.w = half_spectrum_weights(self.n3)[:, None, None] / self.n3
        self.norms2 = cons.norms2

    def zeros(self):
        return np.zeros((self.ah.shape[0], self.cons.n2, self.cons.k), dtype=complex)

    def residual(self, idx, x):
        s = _sel(idx)
        return self.bh[:, s, :] - self.ah[:, s, :] @ x

    def gain(self, idx, r):
        per = np.sum(self.w * (r.real ** 2 + r.imag ** 2), axis=(0, 2))
        return float(np.sum(per / self.norms2[idx]))

    def add_adjoint(self, z, idx, r, coef):
        s = _sel(idx)
        z += np.conj(np.swapaxes(self.ah[:, s, :], 1, 2)) @ (coef[None, :, None] * r)

    def full_residual(self, x):
        return self.bh - self.ah @ x

    def add_full_adjoint(self, z, r, t):
        z += t * (np.conj(np.swapaxes(self.ah, 1, 2)) @ r)

    def prox(self, z):
        return convex.grad_conj_fourier(self.reg, z)

    def norm(self, w):
        return float(np.sqrt(np.sum(self.w * (w.real ** 2 + w.imag ** 2))))

    def to_user(self, w):
        return irfft_tubes(w, self.n3).reshape(self.cons.x_shape)


class _SpatialEngine:
    """Real tensors with FFT-based t-products, for regularizers that are not slice-wise."""

    def __init__(self, cons, reg, rhs):
        self.cons, self.reg = cons, reg
        self.a = cons.a
        self.at = transpose_t(cons.a)
        self.b = rhs
        self.norms2 = cons.norms2

    def zeros(self):
        return np.zeros((self.cons.n2, self.cons.k, self.cons.n3))

    def residual(self, idx, x):
        s = _sel(idx)
        return self.b[s] - tprod(self.a[s], x)

    def gain(self, idx, r):
        return float(np.sum(np.sum(r * r, axis=(1, 2)) / self.norms2[idx]))

    def add_adjoint(self, z, idx, r, coef):
        s = _sel(idx)
        z += tprod(transpose_t(self.a[s]), coef[:, None, None] * r)

    def full_residual(self, x):
        return self.b - tprod(self.a, x)

    def add_full_adjoint(self, z, r, t):
        z += t * tprod(self.at, r)

    def prox(self, z):
        return convex.grad_conj(self.reg, z)

    def norm(self, w):
        return float(np.linalg.norm(w))

    def to_user(self, w):
        return w.reshape(self.cons.x_shape)


class EntryConstraints(_Constraints):
    """``<A_i, X> = b_i`` for a stack of measurement matrices ``A_i``."""

    kind = "matrix_entries"

    def __init__(self, mats, values, noise=None):
        mats = np.asarray(mats, dtype=float)
        if mats.ndim != 3:
            raise ValueError(f"expected a stack of matrices, got shape {mats.shape}")
        self.mats = mats
        self.n = mats.shape[0]
        self.x_shape = mats.shape[1:]
        self.rhs = np.asarray(values, dtype=float).reshape(self.n)
        self.norms2 = np.einsum("mij,mij->m", mats, mats)
        self._check_norms()
        self._set_noise(noise)

    def apply(self, x):
        return np.einsum("mij,ij->m", self.mats, np.asarray(x).reshape(self.x_shape))

    def adjoint(self, y):
        return np.einsum("m,mij->ij", np.asarray(y), self.mats)

    def workspace(self, reg, noisy=False):
        return _EntryEngine(self, reg, self.rhs_used(noisy))


class _EntryEngine:
    def __init__(self, cons, reg, rhs):
        self.cons, self.reg, self.b = cons, reg, rhs
        self.norms2 = cons.norms2

    def zeros(self):
        return np.zeros(self.cons.x_shape)

    def residual(self, idx, x):
        s = _sel(idx)
        return self.b[s] - np.einsum("mij,ij->m", self.cons.mats[s], x)

    def gain(self, idx, r):
        return float(np.sum(r * r / self.norms2[idx]))

    def add_adjoint(self, z, idx, r, coef):
        s = _sel(idx)
        z += np.einsum("m,mij->ij", coef * r, self.cons.mats[s])

    def full_residual(self, x):
        return self.b - self.cons.apply(x)

    def add_full_adjoint(self, z, r, t):
        z += t * self.cons.adjoint(r)

    def prox(self, z):
        return convex.grad_conj(self.reg, z)

    def norm(self, w):
        return float(np.linalg.norm(w))

    def to_user(self, w):
        return w


class MaskedConstraints(_Constraints):
    """Known entries ``X[p, q] = values`` on an index set (all ``P_pq`` have unit norm)."""

    kind = "masked_entries"

    def __init__(self, shape, rows, cols, values, noise=None):
        self.x_shape = tuple(shape)
        self.rows = np.asarray(rows, dtype=np.intp)
        self.cols = np.asarray(cols, dtype=np.intp)
        self.n = self.rows.size
        if self.n == 0:
            raise ValueError("empty mask")
        flat = np.ravel_multi_index((self.rows, self.cols), self.x_shape)
        if np.unique(flat).size != self.n:
            raise ValueError("masked entries must be unique")
        self.rhs = np.asarray(values, dtype=float).reshape(self.n)
        self.norms2 = np.ones(self.n)
        self._set_noise(noise)

    def apply(self, x):
        return np.asarray(x)[self.rows, self.cols]

    def adjoint(self, y):
        z = np.zeros(self.x_shape)
        np.add.at(z, (self.rows, self.cols), y)
        return z

    def workspace(self, reg, noisy=False):
        return _MaskEngine(self, reg, self.rhs_used(noisy))


class _MaskEngine:
    def __init__(self, cons, reg, rhs):
        self.cons, self.reg, self.b = cons, reg, rhs
        self.norms2 = cons.norms2

    def zeros(self):
        return np.zeros(self.cons.x_shape)

    def residual(self, idx, x):
        s = _sel(idx)
        return self.b[s] - x[self.cons.rows[s], self.cons.cols[s]]

    def gain(self, idx, r):
        return float(np.sum(r * r))

    def add_adjoint(self, z, idx, r, coef):
        s = _sel(idx)
        np.add.at(z, (self.cons.rows[s], self.cons.cols[s]), coef * r)

    def full_residual(self, x):
        return self.b - x[self.cons.rows, self.cons.cols]

    def add_full_adjoint(self, z, r, t):
        np.add.at(z, (self.cons.rows, self.cons.cols), t * r)

    def prox(self, z):
        return convex.grad_conj(self.reg, z)

    def norm(self, w):
        return float(np.linalg.norm(w))

    def to_user(self, w):
        return w


def tensor_slices(a, b, noise=None):
    return SliceConstraints(a, b, noise)


def vector_rows(a, b, noise=None):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    return SliceConstraints(a[:, :, None], b[:, None, None], noise,
                            x_shape=(a.shape[1],), rhs_shape=(a.shape[0],))


def matrix_rows(a, b, noise=None):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return SliceConstraints(a[:, :, None], b[:, :, None], noise,
                            x_shape=(a.shape[1], b.shape[1]), rhs_shape=b.shape)


def matrix_entries(mats, values, noise=None):
    return EntryConstraints(mats, values, noise)


def masked_entries(image, mask, noise=None):
    """Constraints fixing ``image`` on the ``True`` pixels of ``mask`` (row-major order)."""
    image = np.asarray(image, dtype=float)
    rows, cols = np.nonzero(np.asarray(mask, dtype=bool))
    return MaskedConstraints(image.shape, rows, cols, image[rows, cols], noise)
