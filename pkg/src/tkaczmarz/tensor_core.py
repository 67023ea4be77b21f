"""Third-order tensors under the t-product.

Tensors are plain ``numpy`` arrays of shape ``(n1, n2, n3)``.  Element
``(i, j, k)`` lives in frontal slice ``k``; when flattened for storage the
layout is frontal-slice-major with column-major slices, i.e.
``a.ravel(order="F")``.

Two routes to the t-product are provided: :func:`tprod_naive` materialises
the block circulant matrix and is meant as a reference, :func:`tprod_fft`
multiplies frequency slices after a tube-wise FFT and is what the solvers use.

The DFT is unnormalised in the forward direction and the inverse carries the
``1/n3`` factor, the same convention as ``numpy.fft``.
"""

import numpy as np

__all__ = [
    "as_tensor",
    "identity",
    "bcirc",
    "unfold",
    "fold",
    "squeeze",
    "transpose_t",
    "tprod_naive",
    "tprod_fft",
    "tprod",
    "fft_tubes",
    "ifft_tubes",
    "rfft_tubes",
    "irfft_tubes",
    "half_spectrum_weights",
    "inner",
    "fro_norm",
    "horizontal_slice",
    "circ",
]

# Imaginary residue allowed after an inverse tube transform, relative to the
# norm of the real part.
IMAG_TOL = 1e-8


class ConsistencyError(RuntimeError):
    """An inverse tube FFT left a non-negligible imaginary part."""


def as_tensor(a):
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None, None]
    elif a.ndim == 2:
        a = a[:, :, None]
    elif a.ndim != 3:
        raise ValueError(f"expected an array of order <= 3, got shape {a.shape}")
    return a


def identity(n, n3):
    """Identity tensor: first frontal slice is ``eye(n)``, the others vanish."""
    e = np.zeros((n, n, n3))
    e[:, :, 0] = np.eye(n)
    return e


def bcirc(a):
    """Block circulant matrix of ``a``; block ``(p, q)`` is slice ``(p - q) mod n3``."""
    a = as_tensor(a)
    n1, n2, n3 = a.shape
    out = np.empty((n1 * n3, n2 * n3), dtype=a.dtype)
    for p in range(n3):
        for q in range(n3):
            out[p * n1:(p + 1) * n1, q * n2:(q + 1) * n2] = a[:, :, (p - q) % n3]
    return out


def unfold(a):
    a = as_tensor(a)
    n1, n2, n3 = a.shape
    return np.transpose(a, (2, 0, 1)).reshape(n1 * n3, n2)


def fold(m, n1, n3):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != n1 * n3:
        raise ValueError(f"cannot fold a {m.shape} matrix into n1={n1}, n3={n3}")
    return np.transpose(m.reshape(n3, n1, m.shape[1]), (1, 2, 0))


def squeeze(a):
    """Drop every dimension of length one (``3x1x1`` becomes a 3-vector)."""
    return np.squeeze(np.asarray(a))


def transpose_t(a):
    """Tensor transpose: transpose each slice, reverse the order of slices 2..n3."""
    a = as_tensor(a)
    order = (-np.arange(a.shape[2])) % a.shape[2]
    return np.transpose(a, (1, 0, 2))[:, :, order]


def _check_conformable(a, c):
    if a.shape[1] != c.shape[0] or a.shape[2] != c.shape[2]:
        raise ValueError(f"t-product dimension mismatch: {a.shape} * {c.shape}")


def tprod_naive(a, c):
    """Reference t-product ``fold(bcirc(a) @ unfold(c))``."""
    a, c = as_tensor(a), as_tensor(c)
    _check_conformable(a, c)
    return fold(bcirc(a) @ unfold(c), a.shape[0], a.shape[2])


def fft_tubes(a):
    return np.fft.fft(as_tensor(a), axis=2)


def ifft_tubes(x):
    """Inverse tube transform; the result must be real up to ``IMAG_TOL``."""
    y = np.fft.ifft(x, axis=2)
    _check_real(y)
    return np.ascontiguousarray(y.real)


def rfft_tubes(a):
    """Non-redundant half of the tube spectrum, frequency-major: ``(h, n1, n2)``.

    ``h = n3 // 2 + 1``; the remaining frequencies are complex conjugates.
    """
    a = as_tensor(a)
    return np.ascontiguousarray(np.moveaxis(np.fft.rfft(a, axis=2), 2, 0))


def irfft_tubes(xh, n3):
    """Inverse of :func:`rfft_tubes`.

    The zero frequency (and the Nyquist one for even ``n3``) must be real for
    the half spectrum to describe a real tensor; a residue there means a bug
    upstream, so it raises instead of being dropped.
    """
    edges = [xh[0]]
    if n3 % 2 == 0 and xh.shape[0] > 1:
        edges.append(xh[-1])
    for e in edges:
        _check_real(e)
    return np.fft.irfft(np.moveaxis(xh, 0, 2), n=n3, axis=2)


def _check_real(y):
    if not np.iscomplexobj(y):
        return
    scale = np.linalg.norm(y.real)
    resid = np.linalg.norm(y.imag)
    if resid > IMAG_TOL * max(scale, 1.0):
        raise ConsistencyError(
            f"imaginary residue {resid:.3e} after inverse tube FFT (real norm {scale:.3e})")


def half_spectrum_weights(n3):
    """Multiplicity of each rfft frequency inside the full spectrum."""
    w = np.full(n3 // 2 + 1, 2.0)
    w[0] = 1.0
    if n3 % 2 == 0:
        w[-1] = 1.0
    return w


def tprod_fft(a, c):
    """t-product through frequency-slice products.

    Only the ``n3 // 2 + 1`` non-redundant frequencies are multiplied.
    """
    a, c = as_tensor(a), as_tensor(c)
    _check_conformable(a, c)
    n3 = a.shape[2]
    if n3 == 1:
        return (a[:, :, 0] @ c[:, :, 0])[:, :, None]
    prod = rfft_tubes(a) @ rfft_tubes(c)
    return irfft_tubes(prod, n3)


tprod = tprod_fft


def inner(a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"inner product of mismatched shapes {a.shape} and {b.shape}")
    return float(np.vdot(a, b).real)


def fro_norm(a):
    return float(np.linalg.norm(np.asarray(a).ravel()))


def horizontal_slice(a, i):
    """The ``1 x n2 x n3`` slice ``a(i, :, :)`` (0-based ``i``)."""
    a = as_tensor(a)
    if not 0 <= i < a.shape[0]:
        raise IndexError(f"slice {i} out of range for n1={a.shape[0]}")
    return a[i:i + 1]


def circ(v):
    """Circulant matrix whose first column is ``v``."""
    v = np.asarray(v).ravel()
    n = v.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return v[idx]
