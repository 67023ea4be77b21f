"""Tensor files, grayscale PGM images and run-directory records.

TKZ1 layout: the magic ``b"TKZ1"``, three little-endian uint64 dimensions,
then little-endian float64 values in frontal-slice-major order with
column-major slices (``a.ravel(order="F")``).
"""

import json

import numpy as np

from .tensor_core import as_tensor

__all__ = ["save_tensor", "load_tensor", "load_tensor_text", "save_tensor_text", "write_pgm",
           "read_pgm", "to_pixels", "write_json"]

MAGIC = b"TKZ1"


def save_tensor(path, a):
    a = as_tensor(np.asarray(a, dtype=float))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.asarray(a.shape, dtype="<u8").tobytes())
        fh.write(a.ravel(order="F").astype("<f8").tobytes())


def load_tensor(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a TKZ1 file")
    if len(raw) < 28:
        raise ValueError(f"{path}: truncated header")
    dims = tuple(int(d) for d in np.frombuffer(raw, dtype="<u8", count=3, offset=4))
    count = dims[0] * dims[1] * dims[2]
    if len(raw) != 28 + 8 * count:
        raise ValueError(f"{path}: expected {count} values, found {(len(raw) - 28) / 8:g}")
    data = np.frombuffer(raw, dtype="<f8", offset=28).astype(float)
    return data.reshape(dims, order="F")


def load_tensor_text(path):
    """Dims on the first line, then whitespace-separated values in TKZ1 order."""
    with open(path) as fh:
        tokens = fh.read().split()
    dims = [int(t) for t in tokens[:3]]
    vals = np.array([float(t) for t in tokens[3:]])
    if vals.size != dims[0] * dims[1] * dims[2]:
        raise ValueError(f"{path}: dims {dims} need {np.prod(dims)} values, got {vals.size}")
    return vals.reshape(dims, order="F")


def save_tensor_text(path, a):
    a = as_tensor(np.asarray(a, dtype=float))
    with open(path, "w") as fh:
        fh.write(" ".join(str(d) for d in a.shape) + "\n")
        fh.write("\n".join(repr(float(v)) for v in a.ravel(order="F")) + "\n")


def to_pixels(image, i_max=255.0, maxval=255):
    """Scale ``[0, i_max]`` intensities to integer levels ``0..maxval``."""
    x = np.clip(np.asarray(image, dtype=float) / i_max, 0.0, 1.0) * maxval
    return np.rint(x).astype(np.uint16 if maxval > 255 else np.uint8)


def write_pgm(path, pixels, maxval=None, binary=True):
    """Write integer pixels as P5 (binary) or P2 (plain); 16-bit samples are big-endian."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 2 or not np.issubdtype(pixels.dtype, np.integer):
        raise ValueError("PGM needs a 2-D integer array")
    if maxval is None:
        maxval = 255 if pixels.max(initial=0) <= 255 else 65535
    if not 0 < maxval < 65536 or pixels.min(initial=0) < 0 or pixels.max(initial=0) > maxval:
        raise ValueError(f"pixel values outside [0, {maxval}]")
    rows, cols = pixels.shape
    header = f"{'P5' if binary else 'P2'}\n{cols} {rows}\n{maxval}\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        if binary:
            fh.write(pixels.astype(">u2" if maxval > 255 else "u1").tobytes())
        else:
            lines = (" ".join(str(int(v)) for v in row) for row in pixels)
            fh.write(("\n".join(lines) + "\n").encode())


def read_pgm(path):
    """Read P2/P5; returns ``(pixels, maxval)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos)
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    magic, cols, rows, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    if magic == b"P5":
        dtype = ">u2" if maxval > 255 else "u1"
        data = np.frombuffer(raw, dtype=dtype, count=rows * cols, offset=pos + 1)
    elif magic == b"P2":
        data = np.array(raw[pos:].split()[:rows * cols], dtype=np.int64)
    else:
        raise ValueError(f"{path}: unsupported PGM magic {magic!r}")
    out = data.reshape(rows, cols).astype(np.uint16 if maxval > 255 else np.uint8)
    return out, maxval


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_plain)
        fh.write("\n")


def _plain(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")
