"""Deblur the synthetic house scene; sweeps batch sizes."""

import dataclasses
import os

from tkaczmarz.experiments import DeblurConfig, run_deblur
from tkaczmarz.solvers import DivergenceError

from _common import parser, save_images


def main():
    p = parser(__doc__)
    p.add_argument("--step", type=float, default=DeblurConfig.step)
    p.add_argument("--batches", type=int, nargs="+", default=[20, 40, 80])
    args = p.parse_args()
    for b in args.batches:
        cfg = DeblurConfig(step=args.step, batch_size=b)
        try:
            res = run_deblur(cfg)
        except DivergenceError as exc:
            print(f"b={b}: diverged ({exc})")
            continue
        m = res.metrics
        print(f"b={b}: psnr {m['psnr_blurry']:.2f} -> {m['psnr']:.2f}  "
              f"ssim {m['ssim_blurry']:.4f} -> {m['ssim']:.4f}")
        save_images(os.path.join(args.out, f"deblur_b{b}"), res.images)


if __name__ == "__main__":
    main()
