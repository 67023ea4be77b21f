"""Randomized property checks of the tensor algebra and the regularizers.

``run_selftest`` returns a list of ``(name, passed, worst)`` rows.  The tube
transform used by the Fourier checks can be swapped through ``fft`` so a
deliberately broken normalization shows up as a failure.
"""

import numpy as np

from . import convex
from .linalg import svt
from .tensor_core import (fro_norm, inner, rfft_tubes, tprod, tprod_naive, transpose_t)

TOL = 1e-10


def _dims(rng, hi=6):
    return [int(v) for v in rng.integers(1, hi + 1, 4)]


def _scaled(err, *scales):
    return err / (1.0 + max(scales))


def check_tprod_oracle(rng):
    n1, n2, k, n3 = _dims(rng, 8)
    a, c = rng.standard_normal((n1, n2, n3)), rng.standard_normal((n2, k, n3))
    ref = tprod_naive(a, c)
    return _scaled(fro_norm(tprod(a, c) - ref), fro_norm(ref))


def check_adjoint(rng):
    n1, n2, k, n3 = _dims(rng)
    a, c = rng.standard_normal((n1, n2, n3)), rng.standard_normal((n2, k, n3))
    b = rng.standard_normal((n1, k, n3))
    lhs, rhs = inner(tprod(a, c), b), inner(c, tprod(transpose_t(a), b))
    return _scaled(abs(lhs - rhs), abs(lhs))


def check_norm_bound(rng):
    n1, n2, k, n3 = _dims(rng)
    a, c = rng.standard_normal((n1, n2, n3)), rng.standard_normal((n2, k, n3))
    excess = fro_norm(tprod(a, c)) - np.sqrt(n3) * fro_norm(a) * fro_norm(c)
    return max(excess, 0.0)


def check_fourier_factorization(rng, fft=None):
    fft = fft or (lambda t: np.fft.fft(t, axis=2))
    n1, n2, k, n3 = _dims(rng)
    a, c = rng.standard_normal((n1, n2, n3)), rng.standard_normal((n2, k, n3))
    fa, fc, fp = fft(a), fft(c), fft(tprod_naive(a, c))
    worst = 0.0
    for j in range(n3):
        prod = fa[:, :, j] @ fc[:, :, j]
        worst = max(worst, _scaled(np.linalg.norm(prod - fp[:, :, j]), np.linalg.norm(fp[:, :, j])))
    return worst


def check_slice_additivity(rng):
    n1, n2, k, n3 = _dims(rng)
    a, x = rng.standard_normal((n1, n2, n3)), rng.standard_normal((n2, k, n3))
    total = sum(fro_norm(tprod(a[i:i + 1], x)) ** 2 for i in range(n1))
    whole = fro_norm(tprod(a, x)) ** 2
    return _scaled(abs(total - whole), whole)


def check_stt_slices(rng):
    n1, n2, _, n3 = _dims(rng)
    x = rng.standard_normal((n1, n2, n3))
    tau = float(rng.uniform(0, 2))
    got = rfft_tubes(convex.stt(x, tau))
    want = svt(rfft_tubes(x), tau)
    return _scaled(np.linalg.norm(got - want), np.linalg.norm(want))


def check_bregman_additivity(rng):
    n1, n2, _, n3 = _dims(rng)
    lam = float(rng.uniform(0, 1))
    r = convex.Regularizer.tnn(lam)
    z, y = rng.standard_normal((n1, n2, n3)), rng.standard_normal((n1, n2, n3))
    d = convex.bregman(r, z, y)
    fz, fy = np.fft.fft(z, axis=2), np.fft.fft(y, axis=2)
    parts = 0.0
    for j in range(n3):
        zj, yj = fz[:, :, j], fy[:, :, j]
        xj = svt(zj, lam)
        fm = lambda m: lam * np.sum(np.linalg.svd(m, compute_uv=False)) + 0.5 * np.vdot(m, m).real
        parts += fm(yj) - fm(xj) - np.vdot(zj, yj - xj).real
    return _scaled(abs(d - parts / n3), abs(d))


CHECKS = [
    ("t-product fft == block circulant", check_tprod_oracle),
    ("adjoint identity", check_adjoint),
    ("norm bound sqrt(n3)|A||X|", check_norm_bound),
    ("per-frequency factorization", check_fourier_factorization),
    ("horizontal slice norm additivity", check_slice_additivity),
    ("stt == per-slice svt", check_stt_slices),
    ("bregman additivity over frequencies", check_bregman_additivity),
]


def run_selftest(seed=0, trials=100, fft=None):
    rng = np.random.default_rng(seed)
    rows = []
    for name, check in CHECKS:
        worst = 0.0
        for _ in range(trials):
            if check is check_fourier_factorization:
                err = check(rng, fft)
            else:
                err = check(rng)
            worst = max(worst, err)
        rows.append((name, bool(worst <= TOL), worst))
    return rows


def corrupted_fft(t):
    """Tube FFT with a spurious ``1/sqrt(n3)`` factor (negative control)."""
    return np.fft.fft(t, axis=2) / np.sqrt(t.shape[2])
