"""Command line front end: ``lattice-connes {distances,verify,sweep}``.

Configuration comes from an optional JSON file and a few flag overrides.
Exit codes: 0 success, 1 failed check or computation, 2 configuration error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (SingularLinkError, check_nonsingular, link_from_json, link_to_json,
                      random_link, unit_link)
from .checks import run_suite
from .distance import (Method, MetricError, PairError, closed_form_distance, distance_table,
                       saturating_function, sub_lattice)
from .lattice import LatticeError, LatticeSpec
from .optimize import OptimizerConfig, make_solver
from .spectral import Family, build_dirac

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("lattice_connes")

DEFAULTS = {
    "lattice": {"topology": "open", "sites": 5},
    "link": "unit",
    "operator_family": "dm",
    "wilson_r": 1.0,
    "methods": ["closed", "numerical"],
    "output": {"format": "csv"},
    "tolerance": {},
    "verify": {"sites": 8, "seeds": 50, "seed": 0},
    "sweep": {"parameter": "sites", "values": [2, 3, 4, 5, 6], "pair": [0, -1]},
}


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


@dataclass
class LinkSource:
    kind: str  # "unit" | "values" | "random"
    values: np.ndarray | None = None
    seed: int = 0
    amplitude_range: tuple = (0.5, 2.0)
    phase_range: tuple = (-np.pi, np.pi)

    def build(self, spec: LatticeSpec) -> np.ndarray:
        if self.kind == "unit":
            return unit_link(spec)
        if self.kind == "random":
            return random_link(spec, np.random.default_rng(self.seed),
                               self.amplitude_range, self.phase_range)
        if self.values.size != spec.sites:
            raise ConfigError("link.values", f"has {self.values.size} entries, lattice has "
                              f"{spec.sites} sites")
        try:
            check_nonsingular(self.values, spec)
        except SingularLinkError as exc:
            raise ConfigError("link.values", f"singular link at index {exc.index}") from exc
        return self.values


@dataclass
class RunConfig:
    lattice: LatticeSpec
    link: LinkSource
    family: Family = Family.DM
    wilson_r: float = 1.0
    methods: list = field(default_factory=lambda: [Method.CLOSED, Method.NUMERICAL])
    out: Path | None = None
    fmt: str = "csv"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    verify_sites: int = 8
    verify_seeds: int = 50
    verify_seed: int = 0
    sweep: dict = field(default_factory=dict)


def _get(record, key, where, kind=None, default=None):
    if not isinstance(record, dict):
        raise ConfigError(where, f"expected an object, got {type(record).__name__}")
    value = record.get(key, default)
    if kind is not None and value is not None and not isinstance(value, kind):
        raise ConfigError(f"{where}.{key}", f"expected {getattr(kind, '__name__', kind)}, "
                          f"got {type(value).__name__}")
    return value


def _parse_link(raw) -> LinkSource:
    if raw == "unit":
        return LinkSource("unit")
    if not isinstance(raw, dict):
        raise ConfigError("link", 'expected "unit", {"values": [...]} or {"random": {...}}')
    if "values" in raw:
        try:
            return LinkSource("values", link_from_json(raw["values"]))
        except ValueError as exc:
            raise ConfigError("link.values", str(exc)) from None
    if "random" in raw:
        r = raw["random"]
        seed = _get(r, "seed", "link.random", int, 0)
        amp = _get(r, "amplitude_range", "link.random", list, [0.5, 2.0])
        phase = _get(r, "phase_range", "link.random", list, [-np.pi, np.pi])
        if len(amp) != 2 or not 0 < amp[0] <= amp[1]:
            raise ConfigError("link.random.amplitude_range", "expected [lo, hi] with 0 < lo <= hi")
        if len(phase) != 2 or not phase[0] < phase[1]:
            raise ConfigError("link.random.phase_range", "expected [lo, hi] with lo < hi")
        return LinkSource("random", seed=seed, amplitude_range=tuple(amp),
                          phase_range=tuple(phase))
    raise ConfigError("link", f"unknown link source keys {sorted(raw)}")


def parse_config(raw: dict) -> RunConfig:
    """Build a :class:`RunConfig` from a decoded JSON object."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    known = set(DEFAULTS)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError("config", f"unknown fields {sorted(unknown)}")
    merged = copy.deepcopy(DEFAULTS)
    merged.update(raw)

    try:
        lattice = LatticeSpec.from_record(merged["lattice"])
    except LatticeError as exc:
        raise ConfigError("lattice", str(exc)) from None
    link = _parse_link(merged["link"])
    try:
        family = Family.parse(merged["operator_family"])
    except ValueError as exc:
        raise ConfigError("operator_family", str(exc)) from None
    methods_raw = merged["methods"]
    if not isinstance(methods_raw, list) or not methods_raw:
        raise ConfigError("methods", "expected a non-empty list")
    try:
        methods = [Method.parse(m) for m in methods_raw]
    except ValueError as exc:
        raise ConfigError("methods", str(exc)) from None
    if family is not Family.DM and methods != [Method.NUMERICAL]:
        if "methods" in raw:
            raise ConfigError("methods", f"only 'numerical' is available for the "
                              f"{family.value} family")
        methods = [Method.NUMERICAL]

    output = merged["output"]
    fmt = _get(output, "format", "output", str, "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format", f"expected 'csv' or 'json', got {fmt!r}")
    path = _get(output, "path", "output", str)

    tol = merged["tolerance"]
    opt_fields = {"optimizer": "tol", "max_iters": "max_iters", "algorithm": "algorithm",
                  "fast_path": "fast_path", "eigensolver": "eigensolver"}
    unknown = set(_get({"t": tol}, "t", "tolerance", dict) or {}) - set(opt_fields)
    if unknown:
        raise ConfigError("tolerance", f"unknown fields {sorted(unknown)}")
    try:
        optimizer = OptimizerConfig(**{opt_fields[k]: v for k, v in tol.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError("tolerance", str(exc)) from None

    ver = merged["verify"]
    verify_sites = _get(ver, "sites", "verify", int, 8)
    verify_seeds = _get(ver, "seeds", "verify", int, 50)
    verify_seed = _get(ver, "seed", "verify", int, 0)
    if verify_sites < 2 or verify_seeds < 1:
        raise ConfigError("verify", "needs sites >= 2 and seeds >= 1")

    sweep = dict(DEFAULTS["sweep"], **_get(merged, "sweep", "config", dict))
    if sweep["parameter"] not in ("sites", "scale", "phase"):
        raise ConfigError("sweep.parameter", "expected 'sites', 'scale' or 'phase'")
    if not isinstance(sweep["values"], list) or not sweep["values"]:
        raise ConfigError("sweep.values", "expected a non-empty list")
    pair = sweep["pair"]
    if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(p, int) for p in pair)):
        raise ConfigError("sweep.pair", "expected two integer site indices")

    return RunConfig(lattice, link, family, float(merged["wilson_r"]), methods,
                     Path(path) if path else None, fmt, optimizer,
                     verify_sites, verify_seeds, verify_seed, sweep)


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def apply_overrides(raw: dict, args) -> dict:
    raw = copy.deepcopy(raw)
    if args.lattice is not None or args.sites is not None or args.window_pad is not None:
        lat = dict(raw.get("lattice", DEFAULTS["lattice"]))
        if args.lattice is not None:
            lat["topology"] = args.lattice
        if args.sites is not None:
            lat["sites"] = args.sites
        if args.window_pad is not None:
            lat["window_pad"] = args.window_pad
        raw["lattice"] = lat
    if args.seed is not None:
        link = raw.get("link", "unit")
        if isinstance(link, dict) and "values" in link:
            raise ConfigError("--seed", "link values are given inline; a seed has no effect")
        rnd = dict(link.get("random", {})) if isinstance(link, dict) else {}
        rnd["seed"] = args.seed
        raw["link"] = {"random": rnd}
        raw["verify"] = dict(raw.get("verify", {}), seed=args.seed)
    if args.family is not None:
        raw["operator_family"] = args.family
    if args.methods is not None:
        raw["methods"] = args.methods.split(",")
    if args.out is not None or args.format is not None:
        out = dict(raw.get("output", {}))
        if args.out is not None:
            out["path"] = args.out
        if args.format is not None:
            out["format"] = args.format
        raw["output"] = out
    return raw


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, name: str, text: str, stdout) -> None:
    if cfg.out is None:
        (stdout or sys.stdout).write(f"# {name}\n{text}")
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / name).write_text(text)


def _relative_deviation(a: np.ndarray, b: np.ndarray) -> dict:
    off = ~np.eye(a.shape[0], dtype=bool)
    rel = np.abs(a[off] - b[off]) / np.maximum(np.abs(b[off]), 1e-300)
    return {"max": float(rel.max(initial=0.0)), "mean": float(rel.mean()) if rel.size else 0.0}


def cmd_distances(cfg: RunConfig, stdout=None) -> int:
    omega = cfg.link.build(cfg.lattice)
    tables = {}
    for method in cfg.methods:
        tables[method] = distance_table(omega, cfg.lattice, method, cfg.family,
                                        cfg=cfg.optimizer, wilson_r=cfg.wilson_r)
    for method, table in tables.items():
        if cfg.fmt == "csv":
            _emit(cfg, f"distances_{method.value}.csv", table.to_csv(), stdout)
        else:
            _emit(cfg, f"distances_{method.value}.json",
                  _dump_json({"schema_version": SCHEMA_VERSION, **table.to_json()}), stdout)

    deviations = []
    methods = list(tables)
    for a in range(len(methods)):
        for b in range(a + 1, len(methods)):
            ma, mb = methods[a], methods[b]
            dev = _relative_deviation(tables[ma].values, tables[mb].values)
            deviations.append({"methods": [ma.value, mb.value], **dev})
    summary = {
        "schema_version": SCHEMA_VERSION,
        "lattice": cfg.lattice.to_record(),
        "operator_family": cfg.family.value,
        "link": link_to_json(omega),
        "deviation": deviations,
        "unconverged": {m.value: t.meta["unconverged"] for m, t in tables.items()
                        if "unconverged" in t.meta},
    }
    _emit(cfg, "summary.json", _dump_json(summary), stdout)
    return EXIT_FAIL if summary["unconverged"] else EXIT_OK


def cmd_verify(cfg: RunConfig, stdout=None) -> int:
    # a link given in the config must at least be usable
    cfg.link.build(cfg.lattice)
    opt = cfg.optimizer
    results = run_suite(cfg.verify_sites, cfg.verify_seeds, cfg.verify_seed,
                        OptimizerConfig(tol=opt.tol, max_iters=opt.max_iters,
                                        algorithm=opt.algorithm, fast_path=False,
                                        eigensolver=opt.eigensolver))
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        note = " (expected non-additivity)" if r.expected_failure else ""
        print(f"{status} {r.name}: margin {r.margin:.3e} tol {r.tolerance:.0e}{note}",
              file=sys.stderr)
    report = {
        "schema_version": SCHEMA_VERSION,
        "sites": cfg.verify_sites,
        "seeds": cfg.verify_seeds,
        "base_seed": cfg.verify_seed,
        "passed": all(r.passed for r in results),
        "checks": [r.to_json() for r in results],
    }
    _emit(cfg, "verify.json", _dump_json(report), stdout)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _resolve(n: int, k: int) -> int:
    site = k + n if k < 0 else k
    if not 0 <= site < n:
        raise ConfigError("sweep.pair", f"site {k} out of range for {n} sites")
    return site


def sweep_rows(cfg: RunConfig) -> tuple[list[str], list[list[float]]]:
    param = cfg.sweep["parameter"]
    rows = []
    base_spec = cfg.lattice
    for value in cfg.sweep["values"]:
        spec = base_spec
        if param == "sites":
            if int(value) != value:
                raise ConfigError("sweep.values", f"site count {value!r} is not an integer")
            try:
                spec = LatticeSpec(base_spec.topology, int(value), base_spec.window_pad)
            except LatticeError as exc:
                raise ConfigError("sweep.values", str(exc)) from None
        omega = cfg.link.build(spec)
        if param == "scale":
            if not value > 0:
                raise ConfigError("sweep.values", f"scale {value!r} must be positive")
            omega = value * omega
        elif param == "phase":
            # fixed per-link directions, one common magnitude
            direction = np.random.default_rng(cfg.link.seed).uniform(-1.0, 1.0, spec.sites)
            omega = np.abs(omega) * np.exp(1j * value * direction)
        i, j = (_resolve(spec.sites, k) for k in cfg.sweep["pair"])
        row = [value]
        for method in cfg.methods:
            if method is Method.CLOSED:
                row.append(closed_form_distance(omega, spec, i, j))
            elif method is Method.SATURATING:
                f = saturating_function(omega, spec, i, j) if i != j else np.zeros(spec.sites)
                row.append(abs(f[j] - f[i]))
            else:
                sub_w, sub_spec, off = sub_lattice(omega, spec, i, j)
                D = build_dirac(cfg.family, sub_spec, sub_w if cfg.family is Family.DM else None,
                                cfg.wilson_r)
                row.append(make_solver(D, cfg.optimizer).solve(i - off, j - off).value)
        rows.append(row)
    return [param] + [m.value for m in cfg.methods], rows


def cmd_sweep(cfg: RunConfig, stdout=None) -> int:
    header, rows = sweep_rows(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for value, *dists in rows:
        label = value if isinstance(value, int) else repr(float(value))
        w.writerow([label] + [repr(float(x)) for x in dists])
    _emit(cfg, f"sweep_{header[0]}.csv", buf.getvalue(), stdout)
    return EXIT_OK


COMMANDS = {"distances": cmd_distances, "verify": cmd_verify, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lattice-connes",
        description="Connes distances on one-dimensional lattices with link-variable "
                    "Dirac operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("distances", "distance tables for every requested method"),
                        ("verify", "run the invariant suite"),
                        ("sweep", "distance of one pair while varying a parameter")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", nargs="?", help="JSON run configuration")
        p.add_argument("--lattice", help="topology: open, cyclic or line")
        p.add_argument("--sites", type=int, help="number of sites")
        p.add_argument("--window-pad", type=int, help="window padding for the line topology")
        p.add_argument("--seed", type=int, help="random link (and verify) seed")
        p.add_argument("--family", help="operator family: dm, naive or wilson")
        p.add_argument("--methods", help="comma separated: closed,numerical,saturating")
        p.add_argument("--out", help="output directory (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="table format")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(apply_overrides(load_config(args.config), args))
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PairError, MetricError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
