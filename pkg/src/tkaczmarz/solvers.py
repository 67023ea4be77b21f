"""Regularized Kaczmarz iterations and the linearized Bregman baseline.

One step on the constraint block ``T`` reads

    Z <- Z + t * sum_{i in T} A(i)^T * (B(i) - A(i) * X) / ||A(i)||^2
    X <- grad f*(Z)

starting from ``Z = 0``.  ``|T| = 1`` is the plain method; larger blocks
accumulate every increment at the same ``X`` and apply the prox once.
"""

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import convex
from .tensor_core import as_tensor, inner

__all__ = ["ControlSequence", "SolveConfig", "SolveTrace", "DivergenceError", "solve",
           "solve_noisy", "solve_batched", "linbreg", "compute_beta", "dual_value",
           "DEFAULT_SEED"]

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240917
SEQUENCE_KINDS = ("cyclic", "uniform_random", "weighted_random", "custom_prob", "explicit_list")
TRACE_COLUMNS = ("iter", "index", "residual", "rel_change", "rel_err", "bregman")

# indices are drawn this many at a time
_CHUNK = 4096


class DivergenceError(FloatingPointError):
    """The iterate became non-finite; ``trace`` holds everything recorded so far."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


@dataclass
class ControlSequence:
    """Schedule of constraint indices ``i(k)`` (0-based).

    Random kinds use numpy's PCG64 generator seeded with ``seed``.  Batches
    of size ``b`` are consecutive chunks of the natural order for ``cyclic``,
    consecutive chunks of the repeated list for ``explicit_list``, and
    i.i.d. draws without replacement inside each batch for the random kinds.
    """

    kind: str
    n: int
    seed: int = DEFAULT_SEED
    probs: Optional[np.ndarray] = None
    order: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in SEQUENCE_KINDS:
            raise ValueError(f"unknown control sequence {self.kind!r}")
        if self.n < 1:
            raise ValueError("a control sequence needs at least one index")
        if self.kind in ("weighted_random", "custom_prob"):
            p = np.asarray(self.probs, dtype=float)
            if p.shape != (self.n,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ValueError("probabilities must be n nonnegative numbers summing to 1")
            self.probs = p
        if self.kind == "explicit_list":
            o = np.asarray(self.order, dtype=np.intp).ravel()
            if o.size == 0 or o.min() < 0 or o.max() >= self.n:
                raise ValueError("explicit index list is empty or out of range")
            self.order = o

    @classmethod
    def cyclic(cls, n):
        return cls("cyclic", n)

    @classmethod
    def uniform(cls, n, seed=DEFAULT_SEED):
        return cls("uniform_random", n, seed)

    @classmethod
    def weighted(cls, norms2, seed=DEFAULT_SEED):
        """Index ``j`` with probability ``norms2[j] / sum(norms2)``."""
        w = np.asarray(norms2, dtype=float)
        return cls("weighted_random", w.size, seed, probs=w / w.sum())

    @classmethod
    def custom(cls, probs, seed=DEFAULT_SEED):
        p = np.asarray(probs, dtype=float)
        return cls("custom_prob", p.size, seed, probs=p)

    @classmethod
    def explicit(cls, order, n=None):
        o = np.asarray(order, dtype=np.intp).ravel()
        return cls("explicit_list", int(n if n is not None else o.max() + 1), order=o)

    def batches(self, b=1):
        """Endless iterator over index arrays of length ``b``."""
        if not 1 <= b:
            raise ValueError(f"batch size must be positive, got {b}")
        if self.kind in ("cyclic", "explicit_list"):
            return self._periodic(b)
        if b > self.n:
            raise ValueError(f"batch size {b} exceeds the {self.n} constraints")
        return self._random(b)

    def _periodic(self, b):
        base = np.arange(self.n) if self.kind == "cyclic" else self.order
        period = base.size
        # b * period indices hold a whole number of batches
        stream = np.tile(base, b).reshape(period, b)
        while True:
            yield from stream

    def _random(self, b):
        rng = np.random.default_rng(self.seed)
        uniform = self.kind == "uniform_random"
        if b == 1:
            cdf = None if uniform else np.cumsum(self.probs)
            while True:
                if uniform:
                    idx = rng.integers(0, self.n, _CHUNK)
                else:
                    idx = np.searchsorted(cdf, rng.random(_CHUNK), side="right")
                    np.minimum(idx, self.n - 1, out=idx)
                yield from idx.reshape(-1, 1)
        while True:
            yield rng.choice(self.n, b, replace=False, p=None if uniform else self.probs)

    def take(self, count, b=1):
        it = self.batches(b)
        return np.array([next(it) for _ in range(count)])


@dataclass
class SolveConfig:
    step: float = 1.0
    max_iters: int = 1000
    tol: float = 0.0
    batch_size: int = 1
    trace_every: int = 10
    reference: Optional[np.ndarray] = None
    # None: enforce t < 2 alpha / N3 for tensor problems (n3 > 1) only
    safe_step: Optional[bool] = None
    track_residual: bool = True
    track_bregman: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.max_iters < 1 or self.batch_size < 1 or self.trace_every < 1:
            raise ValueError("max_iters, batch_size and trace_every must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")

    def describe(self):
        d = {k: v for k, v in asdict(self).items() if k != "reference"}
        d["reference"] = self.reference is not None
        return d


@dataclass
class SolveTrace:
    iters: list = field(default_factory=list)
    index: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    rel_change: list = field(default_factory=list)
    rel_err: list = field(default_factory=list)
    bregman: list = field(default_factory=list)
    # sum_i ||B(i) - A(i)*X||^2 / ||A(i)||^2 over the block used in the step that produced the record
    step_gain: list = field(default_factory=list)
    x: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    stop_reason: str = ""
    iterations: int = 0
    wall_time: float = 0.0
    epsilon: float = 0.0
    warnings: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def column(self, name):
        return np.asarray(getattr(self, name), dtype=float)

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in zip(self.iters, self.index, self.residual, self.rel_change, self.rel_err,
                       self.bregman):
            w.writerow([row[0], row[1]] + [repr(float(v)) for v in row[2:]])
        return buf.getvalue()

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())

    def manifest(self):
        return {"stop_reason": self.stop_reason, "iterations": self.iterations,
                "wall_time": self.wall_time, "epsilon": self.epsilon,
                "warnings": list(self.warnings), "config": self.config}

    def write_manifest(self, path, **extra):
        m = self.manifest()
        m.update(extra)
        with open(path, "w") as fh:
            json.dump(m, fh, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _check_step(cons, reg, cfg, trace):
    bound = 2.0 * reg.alpha / cons.n3
    safe = cons.n3 > 1 if cfg.safe_step is None else cfg.safe_step
    if cfg.step >= bound:
        msg = f"step {cfg.step} is not below 2*alpha/N3 = {bound:g}; no convergence guarantee"
        if safe:
            raise ValueError(msg)
        trace.warnings.append(msg)
        log.warning(msg)


class _Recorder:
    """Collects trace rows; all norms are measured in the engine's domain."""

    def __init__(self, cons, reg, ws, cfg, trace):
        self.cons, self.reg, self.ws, self.cfg, self.trace = cons, reg, ws, cfg, trace
        self.ref = None
        self.ref_norm = np.nan
        if cfg.reference is not None:
            self.ref = np.asarray(cfg.reference, dtype=float).reshape(cons.x_shape)
            self.ref_norm = float(np.linalg.norm(self.ref))

    def record(self, k, index, x, z, x_prev, gain):
        ws, t = self.ws, self.trace
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"non-finite iterate at iteration {k}", t)
        t.iters.append(k)
        t.index.append(index)
        t.step_gain.append(gain)
        if self.cfg.track_residual:
            t.residual.append(ws.norm(ws.full_residual(x)))
        else:
            t.residual.append(np.nan)
        if x_prev is None:
            rc = np.nan
        else:
            nx = ws.norm(x_prev)
            rc = ws.norm(x - x_prev) / nx if nx > 0 else np.inf
        t.rel_change.append(rc)
        if self.ref is None:
            t.rel_err.append(np.nan)
            t.bregman.append(np.nan)
            return rc
        xu = ws.to_user(x)
        t.rel_err.append(float(np.linalg.norm(xu - self.ref)) / self.ref_norm
                         if self.ref_norm > 0 else float(np.linalg.norm(xu)))
        if self.cfg.track_bregman:
            t.bregman.append(convex.bregman(self.reg, ws.to_user(z), self.ref))
        else:
            t.bregman.append(np.nan)
        return rc


def _run(cons, reg, batches, cfg, noisy, mode):
    trace = SolveTrace(config=cfg.describe())
    trace.config["mode"] = mode
    trace.config["regularizer"] = asdict(reg)
    trace.epsilon = cons.epsilon() if noisy else 0.0
    if mode == "kaczmarz":
        _check_step(cons, reg, cfg, trace)
    ws = cons.workspace(reg, noisy)
    rec = _Recorder(cons, reg, ws, cfg, trace)
    z = ws.zeros()
    x = ws.prox(z)
    t0 = time.perf_counter()
    rec.record(0, -1, x, z, None, np.nan)
    t = cfg.step
    inv_norms = cfg.step / ws.norms2
    trace.stop_reason = "max_iters"
    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, cfg.max_iters + 1):
            recording = k % cfg.trace_every == 0 or k == cfg.max_iters
            if mode == "kaczmarz":
                idx = next(batches)
                r = ws.residual(idx, x)
                gain = ws.gain(idx, r) if recording else np.nan
                ws.add_adjoint(z, idx, r, inv_norms[idx])
                first = int(idx[0])
            else:
                r = ws.full_residual(x)
                gain = np.nan
                ws.add_full_adjoint(z, r, t)
                first = -1
            x_prev = x
            x = ws.prox(z)
            if recording:
                rc = rec.record(k, first, x, z, x_prev, gain)
                if cfg.tol > 0 and rc < cfg.tol:
                    trace.stop_reason = "tol"
                    break
    trace.iterations = k
    trace.wall_time = time.perf_counter() - t0
    trace.x = ws.to_user(x)
    trace.z = ws.to_user(z)
    return trace


def solve(constraints, reg, seq, cfg):
    """Regularized Kaczmarz with index blocks of size ``cfg.batch_size`` drawn from ``seq``."""
    return _run(constraints, reg, seq.batches(cfg.batch_size), cfg, False, "kaczmarz")


def solve_noisy(constraints, reg, seq, cfg):
    """As :func:`solve` but against ``B + E`` for the noise ``E`` attached to the constraints."""
    if constraints.noise is None:
        raise ValueError("solve_noisy needs constraints with attached noise")
    return _run(constraints, reg, seq.batches(cfg.batch_size), cfg, True, "kaczmarz")


def solve_batched(constraints, reg, batches, cfg):
    """Kaczmarz with an explicit block schedule.

    ``batches`` is a :class:`ControlSequence` (chunked by ``cfg.batch_size``)
    or any iterable of index arrays.
    """
    if isinstance(batches, ControlSequence):
        it = batches.batches(cfg.batch_size)
    else:
        it = (np.atleast_1d(np.asarray(b, dtype=np.intp)) for b in batches)
    return _run(constraints, reg, it, cfg, constraints.noise is not None, "kaczmarz")


def linbreg(constraints, reg, cfg):
    """Linearized Bregman: ``Z += t A^T (B - A X)``, ``X = grad f*(Z)`` on the full system."""
    return _run(constraints, reg, None, cfg, constraints.noise is not None, "linbreg")


# share of a slice's spectral energy below which a frequency counts as inactive
def _inactive_threshold(n3):
    return (n3 * np.finfo(float).eps) ** 2


def compute_beta(a, t):
    """``min_{i,j} t r_ij (1 - t r_ij)`` with ``r_ij = ||F(A(i))_j||^2 / ||F(A(i))||^2``.

    Frequencies carrying no energy of a slice (``r_ij`` numerically zero) are
    skipped since they never enter that slice's update.
    """
    a = as_tensor(np.asarray(a, dtype=float))
    n3 = a.shape[2]
    if not 0 < t < min(2.0 / n3, 1.0):
        raise ValueError(f"t must lie in (0, min(2/N3, 1)), got {t}")
    e = np.sum(np.abs(np.fft.fft(a, axis=2)) ** 2, axis=1)
    tot = e.sum(axis=1, keepdims=True)
    if np.any(tot == 0):
        raise ValueError("zero horizontal slice")
    r = e / tot
    r = r[r > _inactive_threshold(n3)]
    return float(np.min(t * r * (1 - t * r)))


def dual_value(constraints, reg, y):
    """``g(Y) = f*(A^T * Y) - <Y, B>``."""
    y = np.asarray(y, dtype=float)
    rhs = constraints.rhs
    if y.shape != rhs.shape:
        raise ValueError(f"dual variable shape {y.shape} does not match {rhs.shape}")
    return convex.f_conj_value(reg, constraints.adjoint(y)) - inner(y, rhs)
