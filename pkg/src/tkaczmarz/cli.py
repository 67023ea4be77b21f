"""Command-line entry point.

    tkaczmarz {sparse,inpaint,tensor,deblur,video} [--config FILE] [--seed N]
              [--out DIR] [--set key=value ...]
    tkaczmarz selftest [--seed N] [--trials N] [--corrupt-fft]

Config files are INI style; keys live in a section named after the family
(or ``[experiment]``).  Unknown keys are rejected.  Each run writes
``config.ini`` (fully resolved), ``manifest.json``, ``trace.csv`` and, for
image families, PGM images into the output directory.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import configparser
import dataclasses
import json
import os
import sys
import typing

import numpy as np

from . import experiments, serialization
from .selftest import corrupted_fft, run_selftest
from .solvers import DivergenceError
from .tensor_core import ConsistencyError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


def _coerce(name, ftype, text):
    text = text.strip()
    origin = typing.get_origin(ftype)
    if origin is typing.Union:
        args = [a for a in typing.get_args(ftype) if a is not type(None)]
        if text.lower() in ("", "none"):
            return None
        ftype = args[0]
    try:
        if ftype is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if ftype is int:
            return int(text)
        if ftype is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None


def resolve_config(family, config_path=None, overrides=(), seed=None):
    cls = experiments.FAMILIES[family][0]
    hints = typing.get_type_hints(cls)
    values = {}
    if config_path:
        cp = configparser.ConfigParser()
        try:
            with open(config_path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
        for section in cp.sections():
            if section not in (family, "experiment"):
                raise ConfigError(f"unknown section [{section}]")
            values.update(cp[section])
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown keys for {family}: {', '.join(unknown)}")
    kwargs = {k: _coerce(k, hints[k], v) for k, v in values.items()}
    if seed is not None:
        kwargs["seed"] = seed
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def write_resolved(path, family, cfg):
    cp = configparser.ConfigParser()
    cp[family] = {k: "none" if v is None else str(v) for k, v in dataclasses.asdict(cfg).items()}
    with open(path, "w") as fh:
        cp.write(fh)


def run_family(family, cfg, out):
    os.makedirs(out, exist_ok=True)
    write_resolved(os.path.join(out, "config.ini"), family, cfg)
    res = experiments.run(family, cfg)
    res.trace.to_csv(os.path.join(out, "trace.csv"))
    manifest = res.trace.manifest()
    manifest.update(family=family, seed=cfg.seed, metrics=res.metrics,
                    experiment=dataclasses.asdict(cfg))
    serialization.write_json(os.path.join(out, "manifest.json"), manifest)
    i_max = getattr(cfg, "i_max", 255.0)
    for name, img in res.images.items():
        serialization.write_pgm(os.path.join(out, f"{name}.pgm"),
                                serialization.to_pixels(img, i_max))
    return res


def _error(kind, exc, code):
    print(json.dumps({"error": kind, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def _format_metrics(metrics):
    parts = []
    for k, v in metrics.items():
        parts.append(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}")
    return " ".join(parts)


def build_parser():
    p = argparse.ArgumentParser(prog="tkaczmarz", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for fam in experiments.FAMILIES:
        s = sub.add_parser(fam, help=f"run the {fam} experiment")
        s.add_argument("--config", help="INI config file")
        s.add_argument("--seed", type=int)
        s.add_argument("--out", default=os.path.join("runs", fam))
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    s = sub.add_parser("selftest", help="randomized property checks")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--corrupt-fft", action="store_true",
                   help="scale the tube FFT wrongly; the factorization check must fail")
    return p


def cmd_selftest(args):
    rows = run_selftest(args.seed, args.trials, corrupted_fft if args.corrupt_fft else None)
    width = max(len(r[0]) for r in rows)
    for name, ok, worst in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  worst={worst:.3e}")
    return EXIT_OK if all(r[1] for r in rows) else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest(args)
    try:
        cfg = resolve_config(args.command, args.config, args.set, args.seed)
        res = run_family(args.command, cfg, args.out)
    except ConfigError as exc:
        return _error("config", exc, EXIT_CONFIG)
    except (DivergenceError, ConsistencyError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        return _error("numerical", exc, EXIT_NUMERIC)
    except ValueError as exc:
        return _error("config", exc, EXIT_CONFIG)
    print(f"{args.command}: {_format_metrics(res.metrics)}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
