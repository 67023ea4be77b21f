import argparse
import os

from tkaczmarz import serialization


def parser(desc):
    p = argparse.ArgumentParser(description=desc)
    p.add_argument("--out", default="figures")
    p.add_argument("--seed", type=int, default=None)
    return p


def save_trace_csv(out, name, columns):
    """Write aligned columns (dict of equal-length lists) as a csv."""
    os.makedirs(out, exist_ok=True)
    keys = list(columns)
    path = os.path.join(out, f"{name}.csv")
    with open(path, "w") as fh:
        fh.write(",".join(keys) + "\n")
        for row in zip(*(columns[k] for k in keys)):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def save_images(out, images, i_max=255.0):
    os.makedirs(out, exist_ok=True)
    for name, img in images.items():
        serialization.write_pgm(os.path.join(out, f"{name}.pgm"), serialization.to_pixels(img, i_max))
