"""Problem generators, the convolution operator as a t-product, and image metrics."""

import numpy as np

from .tensor_core import circ, irfft_tubes, rfft_tubes, tprod

__all__ = ["gen_sparse_problem", "gen_checkerboard", "gen_lowrank_tensor_problem",
           "kernel_to_tensor", "image_to_tensor", "tensor_to_image", "frames_to_tensor",
           "tensor_to_frames", "pad_symmetric", "crop", "gaussian_kernel", "convolve_full",
           "blur_symmetric", "embed_observation", "psnr", "relerr", "ssim_global",
           "synthetic_house", "synthetic_sequence", "PSNR_CAP", "I_MAX"]

I_MAX = 255.0
# returned by psnr for identical images
PSNR_CAP = 300.0


def gen_sparse_problem(m, n, s, seed):
    """Gaussian ``A`` (m x n), ``s``-sparse ``x`` with N(1, 1) nonzeros, ``b = A x``."""
    if not 0 <= s <= n:
        raise ValueError(f"sparsity {s} must lie in [0, {n}]")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    x = np.zeros(n)
    support = rng.choice(n, s, replace=False)
    x[support] = rng.normal(1.0, 1.0, s)
    return a, x, a @ x


def gen_checkerboard(size=128, tile=16, box=None, i_max=I_MAX):
    """Two-level checkerboard and the mask of known pixels.

    ``box = (row, col, height, width)`` is the missing rectangle; ``None``
    keeps every pixel.
    """
    if size % tile:
        raise ValueError(f"tile {tile} does not divide size {size}")
    cells = np.arange(size) // tile
    image = i_max * ((cells[:, None] + cells[None, :]) % 2).astype(float)
    mask = np.ones((size, size), dtype=bool)
    if box is not None:
        r, c, h, w = box
        if r < 0 or c < 0 or h < 0 or w < 0 or r + h > size or c + w > size:
            raise ValueError(f"box {box} is outside a {size}x{size} image")
        mask[r:r + h, c:c + w] = False
    return image, mask


def _truncate_tubal(x, r):
    n3 = x.shape[2]
    xh = rfft_tubes(x)
    u, s, vh = np.linalg.svd(xh, full_matrices=False)
    s[:, r:] = 0
    xh = (u * s[:, None, :]) @ vh
    # keep the self-conjugate frequencies exactly real
    xh[0] = xh[0].real
    if n3 % 2 == 0 and xh.shape[0] > 1:
        xh[-1] = xh[-1].real
    return irfft_tubes(xh, n3)


def gen_lowrank_tensor_problem(n1, n2, k, n3, r, seed):
    """Gaussian ``A`` and a Gaussian ``X`` cut to tubal rank ``r``; ``B = A * X``."""
    if not 1 <= r <= min(n2, k):
        raise ValueError(f"tubal rank {r} must lie in [1, {min(n2, k)}]")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n1, n2, n3))
    x = rng.standard_normal((n2, k, n3))
    if r < min(n2, k):
        x = _truncate_tubal(x, r)
    return a, x, tprod(a, x)


def kernel_to_tensor(h, m1, n1):
    """t-product operator of 2-D convolution with ``h`` for ``m1 x n1`` images.

    ``h`` is zero padded to ``m x n`` with ``m = m1 + m2 - 1``,
    ``n = n1 + n2 - 1``; frontal slice ``i`` is the circulant of row ``i``.
    For an ``m x n`` image ``X``, ``A * image_to_tensor(X)`` is the circular
    convolution of ``X`` with the padded kernel, which equals the full linear
    convolution when ``X`` is supported on its top-left ``m1 x n1`` block.
    """
    h = np.asarray(h, dtype=float)
    m2, n2 = h.shape
    m, n = m1 + m2 - 1, n1 + n2 - 1
    hp = np.zeros((m, n))
    hp[:m2, :n2] = h
    a = np.empty((n, n, m))
    for i in range(m):
        a[:, :, i] = circ(hp[i])
    return a, m, n


def image_to_tensor(x):
    """``T[j, 0, i] = X[i, j]``: rows of the image become frontal slices."""
    x = np.asarray(x, dtype=float)
    return np.ascontiguousarray(x.T[:, None, :])


def tensor_to_image(t):
    return np.ascontiguousarray(np.asarray(t)[:, 0, :].T)


def frames_to_tensor(frames):
    """``(p, m, n)`` frame stack to the ``n x p x m`` tensor sharing one kernel."""
    return np.ascontiguousarray(np.transpose(np.asarray(frames, dtype=float), (2, 0, 1)))


def tensor_to_frames(t):
    return np.ascontiguousarray(np.transpose(np.asarray(t), (1, 2, 0)))


def pad_symmetric(image, p):
    """Mirror padding by ``p`` pixels on every side, boundary pixel repeated."""
    image = np.asarray(image, dtype=float)
    if p < 0 or p >= min(image.shape):
        raise ValueError(f"pad width {p} must lie in [0, {min(image.shape)})")
    return np.pad(image, p, mode="symmetric")


def crop(image, p):
    image = np.asarray(image)
    if p == 0:
        return image.copy()
    return image[p:-p, p:-p].copy()


def gaussian_kernel(size=9, sigma=2.0):
    if size % 2 == 0:
        raise ValueError("kernel size must be odd")
    ax = np.arange(size) - size // 2
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2 * sigma ** 2))
    return g / g.sum()


def convolve_full(x, h):
    """Full linear 2-D convolution via zero-padded FFTs."""
    x, h = np.asarray(x, dtype=float), np.asarray(h, dtype=float)
    shape = (x.shape[0] + h.shape[0] - 1, x.shape[1] + h.shape[1] - 1)
    return np.fft.irfft2(np.fft.rfft2(x, shape) * np.fft.rfft2(h, shape), shape)


def blur_symmetric(image, h):
    """Same-size blur of ``image`` by an odd kernel with mirrored boundaries."""
    m2, n2 = h.shape
    if m2 != n2 or m2 % 2 == 0:
        raise ValueError("blur kernel must be square with odd size")
    c = m2 // 2
    full = convolve_full(np.pad(np.asarray(image, dtype=float), c, mode="symmetric"), h)
    rows, cols = np.shape(image)
    return full[m2 - 1:m2 - 1 + rows, n2 - 1:n2 - 1 + cols]


def embed_observation(y, m, n, offset):
    """Place an observed image inside an ``m x n`` zero canvas at ``(offset, offset)``."""
    out = np.zeros((m, n))
    out[offset:offset + y.shape[0], offset:offset + y.shape[1]] = y
    return out


def psnr(x, ref, i_max=I_MAX):
    """``20 log10(i_max / ||x - ref||_F)``, capped at :data:`PSNR_CAP` for identical images."""
    x, ref = np.asarray(x, dtype=float), np.asarray(ref, dtype=float)
    if x.shape != ref.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {ref.shape}")
    err = float(np.linalg.norm((x - ref).ravel()))
    if err == 0:
        return PSNR_CAP
    return min(20.0 * np.log10(i_max / err), PSNR_CAP)


def relerr(x, ref):
    x, ref = np.asarray(x, dtype=float), np.asarray(ref, dtype=float)
    nref = float(np.linalg.norm(ref.ravel()))
    if nref == 0:
        raise ValueError("relative error against a zero reference")
    return float(np.linalg.norm((x - ref).ravel())) / nref


def ssim_global(x, ref, i_max=I_MAX):
    """SSIM from whole-image means, variances and covariance."""
    x, ref = np.asarray(x, dtype=float).ravel(), np.asarray(ref, dtype=float).ravel()
    if x.shape != ref.shape:
        raise ValueError("shape mismatch")
    c1, c2 = (0.01 * i_max) ** 2, (0.03 * i_max) ** 2
    mx, my = x.mean(), ref.mean()
    vx, vy = x.var(), ref.var()
    cov = np.mean((x - mx) * (ref - my))
    return float((2 * mx * my + c1) * (2 * cov + c2) / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2)))


def synthetic_house(size=256):
    """Piecewise smooth grayscale scene (sky gradient, house, roof, windows, door, lawn)."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    img = 170 + 60 * yy
    img[yy > 0.78] = 90 + 30 * np.sin(24 * xx[yy > 0.78])
    body = (xx > 0.22) & (xx < 0.78) & (yy > 0.45) & (yy <= 0.78)
    img[body] = 200
    roof = (yy > 0.2) & (yy <= 0.45) & (np.abs(xx - 0.5) < (yy - 0.2) * 1.3)
    img[roof] = 70
    for x0 in (0.3, 0.58):
        win = (xx > x0) & (xx < x0 + 0.12) & (yy > 0.52) & (yy < 0.62)
        img[win] = 40
        img[win & ((np.abs(xx - x0 - 0.06) < 0.006) | (np.abs(yy - 0.57) < 0.006))] = 230
    door = (xx > 0.45) & (xx < 0.55) & (yy > 0.62) & (yy <= 0.78)
    img[door] = 110
    chimney = (xx > 0.64) & (xx < 0.7) & (yy > 0.22) & (yy < 0.36)
    img[chimney] = 120
    return np.clip(img, 0, I_MAX)


def synthetic_sequence(frames=12, size=64):
    """Short grayscale clip: a bright disc drifting over a smooth background."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    out = np.empty((frames, size, size))
    for f in range(frames):
        cx = 0.3 + 0.4 * f / max(frames - 1, 1)
        disc = (xx - cx) ** 2 + (yy - 0.5) ** 2 < 0.03
        frame = 60 + 80 * xx * yy + 40 * np.cos(6 * yy)
        frame[disc] = 230
        frame[(np.abs(xx - 0.5) < 0.04) & (yy > 0.7)] = 20
        out[f] = frame
    return np.clip(out, 0, I_MAX)
