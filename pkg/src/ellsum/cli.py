"""``ellsum`` command line: parse flags and an optional JSON config, run, report."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .kernel import Precision
from .suite import DEFAULT_TOLERANCES, FORMATS, MODES, SuiteConfig, run_suite

CONFIG_KEYS = ("mode", "n", "N", "draws", "seed", "tolerances", "eps_trunc", "out", "format",
               "deterministic_sum", "p0", "timing")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("argv", message)


def _int_list(key, raw):
    if isinstance(raw, int) and not isinstance(raw, bool):
        return (raw,)
    if isinstance(raw, list):
        items = raw
    else:
        items = [x for x in str(raw).split(",") if x.strip()]
    try:
        return tuple(int(x) for x in items)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a comma-separated integer list, got {raw!r}") from None


def _int(key, raw):
    try:
        if isinstance(raw, bool):
            raise ValueError
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected an integer, got {raw!r}") from None


def _float(key, raw):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {raw!r}") from None


def _switch(key, raw):
    if isinstance(raw, bool):
        return raw
    if raw in ("on", "off"):
        return raw == "on"
    raise ConfigError(key, f"expected on or off, got {raw!r}")


def _parse_tol(items):
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError("tol", f"expected <check>=<value>, got {item!r}")
        out[name.strip()] = _float(name.strip(), value)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ellsum", description="Seeded numerical verification of the BC_n elliptic summation "
                                            "formula and the identities behind it.")
    ap.add_argument("--config", help="JSON file with default settings; flags override it")
    ap.add_argument("--mode", choices=MODES + ("all",))
    ap.add_argument("--n", help="comma list of dimensions, e.g. 1,2,3")
    ap.add_argument("--N", help="comma list of truncation levels, e.g. 0,1,2")
    ap.add_argument("--draws", help="random parameter sets per (n, N) cell")
    ap.add_argument("--seed", help="64-bit master seed")
    ap.add_argument("--tol", action="append", default=[], metavar="CHECK=VALUE",
                    help="override one tolerance (repeatable); checks: " + ", ".join(DEFAULT_TOLERANCES))
    ap.add_argument("--eps-trunc", dest="eps_trunc", help="truncation tolerance of infinite products")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--deterministic-sum", dest="deterministic_sum", choices=("on", "off"),
                    help="on: plain ordered sums (default); off: compensated sums")
    ap.add_argument("--p0", action="store_const", const=True, default=None,
                    help="force p = 0 in summation draws")
    ap.add_argument("--timing", action="store_const", const=True, default=None,
                    help="add wall times to records (reports are then not reproducible)")
    return ap


def _load_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level of the config file must be an object")
    for key in data:
        if key not in CONFIG_KEYS:
            raise ConfigError(key, f"unknown config key {key!r}")
    return data


def parse_config(argv=None) -> SuiteConfig:
    """Merge defaults, the optional ``--config`` file and flags into a ``SuiteConfig``."""
    args = build_parser().parse_args(argv)
    settings = _load_file(args.config) if args.config else {}
    tolerances = dict(settings.get("tolerances", {}))
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances", "expected an object of check -> value")
    for key in ("mode", "n", "N", "draws", "seed", "eps_trunc", "out", "format", "deterministic_sum",
                "p0", "timing"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    tolerances.update(_parse_tol(args.tol))

    kw = {}
    if "mode" in settings:
        kw["mode"] = settings["mode"]
    if "n" in settings:
        kw["n_range"] = _int_list("n", settings["n"])
    if "N" in settings:
        kw["N_range"] = _int_list("N", settings["N"])
    if "draws" in settings:
        kw["draws"] = _int("draws", settings["draws"])
    if "seed" in settings:
        kw["seed"] = _int("seed", settings["seed"])
    if "format" in settings:
        kw["format"] = settings["format"]
    if "out" in settings:
        kw["output_path"] = settings["out"]
    kw["p_zero"] = bool(settings.get("p0", False))
    kw["timing"] = bool(settings.get("timing", False))
    prec = {}
    if "eps_trunc" in settings:
        prec["eps_trunc"] = _float("eps_trunc", settings["eps_trunc"])
    if "deterministic_sum" in settings:
        prec["compensated"] = not _switch("deterministic_sum", settings["deterministic_sum"])
    try:
        kw["precision"] = Precision(**prec)
    except ValueError as exc:
        raise ConfigError("eps_trunc", str(exc)) from None
    tols = dict(DEFAULT_TOLERANCES)
    for key, value in tolerances.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(key, f"unknown check name {key!r}")
        tols[key] = _float(key, value)
    kw["tolerances"] = tols
    return SuiteConfig(**kw)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        report = run_suite(cfg)
    except ConfigError as exc:
        print(f"ellsum: configuration error [{exc.key}]: {exc}", file=sys.stderr)
        return 2
    text = report.render()
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    s = report.summary
    print(f"ellsum: {s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped "
          f"(max residual {s['max_residual']})", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
