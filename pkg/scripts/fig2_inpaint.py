"""Checkerboard inpainting with blocked RK and LinBreg; writes PGMs and PSNR."""

import dataclasses
import os

from tkaczmarz.experiments import InpaintConfig, run_inpaint

from _common import parser, save_images


def main():
    p = parser(__doc__)
    p.add_argument("--box", type=int, nargs=4, default=None, metavar=("ROW", "COL", "H", "W"))
    p.add_argument("--iters", type=int, default=1000)
    args = p.parse_args()
    cfg = InpaintConfig(max_iters=args.iters)
    if args.box:
        cfg = dataclasses.replace(cfg, box_row=args.box[0], box_col=args.box[1],
                                  box_height=args.box[2], box_width=args.box[3])
    rk = run_inpaint(cfg)
    lb = run_inpaint(dataclasses.replace(cfg, solver="linbreg", step=1.0, batch_size=1))
    save_images(os.path.join(args.out, "fig2_rk"), rk.images, cfg.i_max)
    save_images(os.path.join(args.out, "fig2_linbreg"), {"recovered": lb.images["recovered"]}, cfg.i_max)
    print(f"known {rk.metrics['known']}  RK psnr {rk.metrics['psnr']:.2f}  "
          f"linbreg psnr {lb.metrics['psnr']:.2f}")


if __name__ == "__main__":
    main()
