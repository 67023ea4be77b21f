"""Sparse recovery: RelErr per full pass for cyclic RK and LinBreg."""

import dataclasses

import numpy as np

from tkaczmarz.experiments import SparseConfig, run_sparse
from tkaczmarz.solvers import DivergenceError

from _common import parser, save_trace_csv


def main():
    p = parser(__doc__)
    p.add_argument("--passes", type=int, default=1000)
    p.add_argument("--linbreg-step", type=float, default=None,
                   help="default 1.9 / ||A||_2^2")
    args = p.parse_args()
    cfg = SparseConfig(max_iters=200 * args.passes, trace_every=200)
    if args.seed is not None:
        cfg.seed = args.seed
    rk = run_sparse(cfg).trace
    from tkaczmarz.apps import gen_sparse_problem
    a, _, _ = gen_sparse_problem(cfg.m, cfg.n, cfg.sparsity, cfg.seed)
    step = args.linbreg_step or 1.9 / np.linalg.norm(a, 2) ** 2
    lcfg = dataclasses.replace(cfg, solver="linbreg", step=step, max_iters=args.passes, trace_every=1)
    try:
        lb = run_sparse(lcfg).trace.rel_err
    except DivergenceError as exc:
        print(f"linbreg diverged: {exc}")
        lb = exc.trace.rel_err
    n = min(len(rk.rel_err), len(lb))
    path = save_trace_csv(args.out, "fig1_sparse", {"pass": range(n), "rk": rk.rel_err[:n],
                                                     "linbreg": lb[:n]})
    print(f"rk final {rk.rel_err[-1]:.3e}  linbreg final {lb[-1]:.3e}  -> {path}")


if __name__ == "__main__":
    main()
