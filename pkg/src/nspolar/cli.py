"""Command-line entry point: ``nspolar <experiment> [--config FILE] [--field VALUE ...]``.

Every ExperimentConfig field has a flag (underscores become dashes).  Values
come from the dataclass defaults, then the config file, then the flags.  The
config file is INI-style with one ``[experiment]`` section of ``key = value``
lines; list-valued keys take comma-separated values, e.g.

    [experiment]
    seed = 7
    Rw = 25, 35
    frames = 20000

Exit status is 0 when every check passes, 1 when any check fails and 2 for
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import os
import sys

from . import bench

SECTION = "experiment"
_SKIP = ("kind",)


def _field_types():
    defaults = {}
    for f in dataclasses.fields(bench.ExperimentConfig):
        if f.name in _SKIP:
            continue
        d = f.default
        if f.name == "seed":
            defaults[f.name] = int
        elif isinstance(d, bool):
            defaults[f.name] = bool
        elif isinstance(d, tuple):
            elem = type(d[0]) if d else str
            defaults[f.name] = (tuple, elem)
        else:
            defaults[f.name] = type(d)
    return defaults


def _parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def convert(name, text, types=None):
    """Parse the string ``text`` for config field ``name``."""
    types = types or _field_types()
    if name not in types:
        raise ValueError(f"unknown config key {name!r}")
    t = types[name]
    if isinstance(t, tuple):
        parts = [p.strip() for p in str(text).split(",") if p.strip()]
        return tuple(_scalar(t[1], p) for p in parts)
    return _scalar(t, text)


def _scalar(t, text):
    if t is bool:
        return _parse_bool(text)
    if t is int:
        return int(float(text)) if "e" in str(text).lower() else int(text)
    return t(str(text).strip())


def read_config_file(path):
    """Return the ``[experiment]`` section as converted values."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read(path)
    if not cp.has_section(SECTION):
        raise ValueError(f"{path}: missing [{SECTION}] section")
    types = _field_types()
    out = {}
    for key, value in cp.items(SECTION):
        out[key] = convert(key, value, types)
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="nspolar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="kind", required=True)
    types = _field_types()
    for kind in bench.EXPERIMENTS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", help="INI file with an [experiment] section")
        for name in types:
            sp.add_argument("--" + name.replace("_", "-"), dest=name, default=None, metavar="VALUE")
    return p


def make_config(kind, config_path=None, overrides=None) -> bench.ExperimentConfig:
    values = read_config_file(config_path) if config_path else {}
    values.pop("kind", None)
    types = _field_types()
    for name, text in (overrides or {}).items():
        if text is not None:
            values[name] = convert(name, text, types)
    if "seed" not in values:
        raise ValueError("a seed is required (--seed or seed = ... in the config file)")
    return bench.ExperimentConfig(kind=kind, **values)


def _print(rows, checks, out):
    for r in rows:
        out.write(
            f"{r.scenario:>12} {r.mode:>13} {r.sweep_name}={r.sweep_value:<8g} "
            f"BER={r.ber:.4e} FER={r.fer:.4e} frames={r.frames}\n"
        )
    for c in checks:
        out.write(f"[{'PASS' if c.passed else 'FAIL'}] {c.name} {c.detail}\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("kind", "config")}
    try:
        cfg = make_config(args.kind, args.config, overrides)
    except (ValueError, FileNotFoundError, TypeError) as exc:
        sys.stderr.write(f"nspolar: configuration error: {exc}\n")
        return 2
    parent = os.path.dirname(cfg.out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    rows, checks = bench.run_and_write(cfg)
    _print(rows, checks, sys.stdout)
    sys.stdout.write(f"wrote {cfg.out}.csv and {cfg.out}.manifest.txt\n")
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
