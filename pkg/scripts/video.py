"""Deblur a synthetic frame sequence with one shared kernel."""

import os

from tkaczmarz.experiments import VideoConfig, run_video

from _common import parser, save_images


def main():
    p = parser(__doc__)
    p.add_argument("--frames", type=int, default=VideoConfig.frames)
    args = p.parse_args()
    res = run_video(VideoConfig(frames=args.frames))
    m = res.metrics
    print(f"relerr {m['rel_err_blurry']:.4f} -> {m['rel_err']:.4f}  "
          f"psnr {m['psnr_blurry']:.2f} -> {m['psnr']:.2f}")
    save_images(os.path.join(args.out, "video"), res.images)


if __name__ == "__main__":
    main()
