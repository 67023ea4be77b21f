"""Experiment families as dataclass configs plus runners.

Every runner returns an :class:`ExperimentResult` holding the solver trace,
a flat dict of summary metrics and any images worth saving.
"""

from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import apps
from .constraints import masked_entries, tensor_slices, vector_rows
from .convex import Regularizer
from .solvers import DEFAULT_SEED, ControlSequence, SolveConfig, linbreg, solve

__all__ = ["SparseConfig", "InpaintConfig", "TensorConfig", "DeblurConfig", "VideoConfig",
           "ExperimentResult", "FAMILIES", "run", "make_sequence"]


@dataclass
class SparseConfig:
    m: int = 200
    n: int = 1000
    sparsity: int = 10
    lam: float = 5.0
    step: float = 40.0
    solver: str = "kaczmarz"
    sequence: str = "cyclic"
    batch_size: int = 1
    max_iters: int = 200000
    trace_every: int = 1000
    tol: float = 0.0
    seed: int = DEFAULT_SEED


@dataclass
class InpaintConfig:
    size: int = 128
    tile: int = 16
    box_row: int = 24
    box_col: int = 12
    box_height: int = 80
    box_width: int = 104
    i_max: float = 1.0
    lam: float = 1500.0
    step: float = 9.0
    solver: str = "kaczmarz"
    sequence: str = "cyclic"
    batch_size: int = 2000
    max_iters: int = 1000
    trace_every: int = 50
    tol: float = 0.0
    seed: int = DEFAULT_SEED


@dataclass
class TensorConfig:
    n1: int = 200
    n2: int = 100
    k: int = 100
    n3: int = 100
    rank: int = 2
    regularizer: str = "squared_fro"
    lam: float = 1.0
    step: float = 1.0
    safe_step: bool = False
    solver: str = "kaczmarz"
    sequence: str = "cyclic"
    batch_size: int = 1
    max_iters: int = 2000
    trace_every: int = 100
    track_residual: bool = False
    tol: float = 0.0
    seed: int = DEFAULT_SEED


@dataclass
class DeblurConfig:
    size: int = 64
    kernel_size: int = 9
    sigma: float = 2.0
    # None: kernel half width + 10
    pad: Optional[int] = None
    lam: float = 0.1
    # t = 1 leaves the stable range of the slice-normalized update for a
    # Gaussian blur (see README); 0.005 is the largest step that stays stable
    step: float = 0.005
    safe_step: bool = False
    solver: str = "kaczmarz"
    sequence: str = "cyclic"
    batch_size: int = 80
    max_iters: int = 1000
    trace_every: int = 50
    tol: float = 0.0
    seed: int = DEFAULT_SEED


@dataclass
class VideoConfig(DeblurConfig):
    frames: int = 12
    kernel_size: int = 5
    lam: float = 0.01
    batch_size: int = 60


@dataclass
class ExperimentResult:
    trace: object
    metrics: dict
    images: dict = field(default_factory=dict)


def make_sequence(kind, cons, seed):
    """Control sequence of the given kind; random kinds draw from ``seed + 1``."""
    if kind == "cyclic":
        return ControlSequence.cyclic(cons.n)
    if kind == "uniform_random":
        return ControlSequence.uniform(cons.n, seed + 1)
    if kind == "weighted_random":
        return ControlSequence.weighted(cons.norms2, seed + 1)
    raise ValueError(f"sequence {kind!r} is not available from a config")


def _solve(cfg, cons, reg, reference, **extra):
    scfg = SolveConfig(step=cfg.step, max_iters=cfg.max_iters, tol=cfg.tol,
                       batch_size=cfg.batch_size, trace_every=cfg.trace_every,
                       reference=reference, **extra)
    if cfg.solver == "linbreg":
        return linbreg(cons, reg, scfg)
    if cfg.solver != "kaczmarz":
        raise ValueError(f"unknown solver {cfg.solver!r}")
    return solve(cons, reg, make_sequence(cfg.sequence, cons, cfg.seed), scfg)


def run_sparse(cfg):
    a, x, b = apps.gen_sparse_problem(cfg.m, cfg.n, cfg.sparsity, cfg.seed)
    cons = vector_rows(a, b)
    tr = _solve(cfg, cons, Regularizer.elastic_l1(cfg.lam), x, track_bregman=False)
    return ExperimentResult(tr, {"rel_err": apps.relerr(tr.x, x), "iterations": tr.iterations})


def run_inpaint(cfg):
    box = (cfg.box_row, cfg.box_col, cfg.box_height, cfg.box_width)
    img, mask = apps.gen_checkerboard(cfg.size, cfg.tile, box, cfg.i_max)
    cons = masked_entries(img, mask)
    tr = _solve(cfg, cons, Regularizer.nuclear(cfg.lam), img, track_bregman=False)
    metrics = {"psnr": apps.psnr(tr.x, img, cfg.i_max), "ssim": apps.ssim_global(tr.x, img, cfg.i_max),
               "rel_err": apps.relerr(tr.x, img), "known": int(mask.sum()),
               "iterations": tr.iterations}
    observed = np.where(mask, img, 0.0)
    return ExperimentResult(tr, metrics, {"original": img, "observed": observed,
                                          "recovered": np.clip(tr.x, 0, cfg.i_max)})


def _regularizer(name, lam):
    if name == "squared_fro":
        return Regularizer.squared_fro()
    if name == "tnn":
        return Regularizer.tnn(lam)
    raise ValueError(f"unknown tensor regularizer {name!r}")


def run_tensor(cfg):
    a, x, b = apps.gen_lowrank_tensor_problem(cfg.n1, cfg.n2, cfg.k, cfg.n3, cfg.rank, cfg.seed)
    cons = tensor_slices(a, b)
    tr = _solve(cfg, cons, _regularizer(cfg.regularizer, cfg.lam), x, safe_step=cfg.safe_step,
                track_residual=cfg.track_residual, track_bregman=False)
    return ExperimentResult(tr, {"rel_err": apps.relerr(tr.x, x), "iterations": tr.iterations})


def pad_width(cfg):
    return cfg.kernel_size // 2 + 10 if cfg.pad is None else cfg.pad


def deblur_frames(blurry, h, cfg):
    """Deblur a ``(p, rows, cols)`` stack sharing kernel ``h``; returns (frames, trace)."""
    p = pad_width(cfg)
    padded = np.stack([apps.pad_symmetric(f, p) for f in blurry])
    m1, n1 = padded.shape[1:]
    a, m, n = apps.kernel_to_tensor(h, m1, n1)
    off = h.shape[0] // 2
    canvas = np.stack([apps.embed_observation(f, m, n, off) for f in padded])
    cons = tensor_slices(a, apps.frames_to_tensor(canvas))
    tr = _solve(cfg, cons, Regularizer.tnn(cfg.lam), None, safe_step=cfg.safe_step,
                track_bregman=False)
    frames = apps.tensor_to_frames(tr.x)[:, :m1, :n1]
    rec = np.stack([np.maximum(apps.crop(f, p), 0.0) for f in frames])
    return rec, tr


def run_deblur(cfg):
    img = apps.synthetic_house(cfg.size)
    h = apps.gaussian_kernel(cfg.kernel_size, cfg.sigma)
    blurry = apps.blur_symmetric(img, h)
    rec, tr = deblur_frames(blurry[None], h, cfg)
    rec = rec[0]
    metrics = {"psnr_blurry": apps.psnr(blurry, img), "psnr": apps.psnr(rec, img),
               "ssim_blurry": apps.ssim_global(blurry, img), "ssim": apps.ssim_global(rec, img),
               "iterations": tr.iterations}
    return ExperimentResult(tr, metrics, {"original": img, "blurry": np.clip(blurry, 0, 255),
                                          "recovered": np.clip(rec, 0, 255)})


def run_video(cfg):
    clip = apps.synthetic_sequence(cfg.frames, cfg.size)
    h = apps.gaussian_kernel(cfg.kernel_size, cfg.sigma)
    blurry = np.stack([apps.blur_symmetric(f, h) for f in clip])
    rec, tr = deblur_frames(blurry, h, cfg)
    metrics = {"rel_err_blurry": apps.relerr(blurry, clip), "rel_err": apps.relerr(rec, clip),
               "psnr_blurry": apps.psnr(blurry, clip), "psnr": apps.psnr(rec, clip),
               "iterations": tr.iterations}
    images = {}
    for i in range(min(4, cfg.frames)):
        images[f"blurry_{i}"] = np.clip(blurry[i], 0, 255)
        images[f"recovered_{i}"] = np.clip(rec[i], 0, 255)
    return ExperimentResult(tr, metrics, images)


FAMILIES = {
    "sparse": (SparseConfig, run_sparse),
    "inpaint": (InpaintConfig, run_inpaint),
    "tensor": (TensorConfig, run_tensor),
    "deblur": (DeblurConfig, run_deblur),
    "video": (VideoConfig, run_video),
}


def run(family, cfg):
    return FAMILIES[family][1](cfg)


def config_fields(cls):
    return {f.name: f for f in fields(cls)}
