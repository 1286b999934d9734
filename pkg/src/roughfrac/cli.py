"""Configuration-driven verification suites.

A suite is an INI document with one section per check invocation:

    [suite]
    out = reports

    [check:mean-gap]
    check = campanato_mean_gap
    n = 1
    b = log
    p = 1
    lambda = 0

`roughfrac run suite.ini` executes every check, writes one JSON report per
check plus summary.csv and run.log, and exits 0 only if no check failed
(1 on any failing verdict, 2 on execution errors).  Reports are
byte-identical across reruns; run-specific metadata is confined to the
JSON "meta" block and run.log.
"""

from __future__ import annotations

import argparse
import configparser
import datetime
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import (ExponentSet, builtin_catalog, resolve_weight,
                      _parse_number, REGIMES)
from .geometry import LogGrid, log_grid
from .operators import OperatorConfig
from .report import CheckReport, report_json_text, summary_csv_text
from . import checks as _checks


class ConfigError(ValueError):
    """Configuration problem, annotated with section and key."""

    def __init__(self, section: str, key: str, message: str):
        super().__init__(f"[{section}] {key}: {message}")
        self.section = section
        self.key = key


# --------------------------------------------------------------------------
# Section access helpers
# --------------------------------------------------------------------------

class _Section:
    def __init__(self, name: str, items: dict):
        self.name = name
        self._items = dict(items)
        self._used = set()

    def _raw(self, key, default=None, required=False):
        self._used.add(key)
        if key in self._items:
            return self._items[key]
        if required:
            raise ConfigError(self.name, key, "required key is missing")
        return default

    def number(self, key, default=None, required=False):
        raw = self._raw(key, required=required)
        if raw is None:
            return default
        try:
            return _parse_number(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(self.name, key, f"not a number: {raw!r} ({exc})")

    def integer(self, key, default=None, required=False):
        val = self.number(key, required=required)
        if val is None:
            return default
        if val != int(val):
            raise ConfigError(self.name, key, f"expected an integer, got {val!r}")
        return int(val)

    def text(self, key, default=None, required=False):
        raw = self._raw(key, required=required)
        return default if raw is None else raw.strip()

    def numbers(self, key, default=None, required=False):
        raw = self._raw(key, required=required)
        if raw is None:
            return default
        raw = raw.strip()
        if not raw:
            return ()
        try:
            return tuple(_parse_number(v) for v in raw.split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(self.name, key, f"not a number list: {raw!r} ({exc})")

    def names(self, key, default=None, required=False):
        raw = self._raw(key, required=required)
        if raw is None:
            return default
        return tuple(v.strip() for v in raw.split(",") if v.strip())

    def check_unused(self):
        unknown = set(self._items) - self._used
        if unknown:
            raise ConfigError(self.name, sorted(unknown)[0],
                              "unknown key for this check")


def _grid_from(sec: _Section, prefix: str, default: LogGrid | None) -> LogGrid | None:
    rmin = sec.number(f"{prefix}rmin")
    rmax = sec.number(f"{prefix}rmax")
    count = sec.integer(f"{prefix}count")
    if rmin is None and rmax is None and count is None:
        return default
    if rmin is None or rmax is None or count is None:
        raise ConfigError(sec.name, f"{prefix}rmin",
                          f"grid needs all of {prefix}rmin/{prefix}rmax/{prefix}count")
    try:
        return log_grid(rmin, rmax, count)
    except ValueError as exc:
        raise ConfigError(sec.name, f"{prefix}rmin", str(exc))


def _dimension(sec: _Section) -> int:
    n = sec.integer("n", default=1)
    if n not in (1, 2):
        raise ConfigError(sec.name, "n", f"dimension must be 1 or 2, got {n}")
    return n


def _exponents(sec: _Section, n: int) -> ExponentSet:
    alpha = sec.number("alpha", required=True)
    s = sec.number("s", required=True)
    p = sec.number("p", required=True)
    p_list = sec.numbers("p_i", default=())
    lambda_list = sec.numbers("lambda_i", default=tuple(0.0 for _ in p_list))
    regime = sec.text("regime", default=REGIMES[0])
    if regime not in REGIMES:
        raise ConfigError(sec.name, "regime",
                          f"unknown regime {regime!r}; expected one of {REGIMES}")
    q = sec.number("q")
    q1 = sec.number("q1")
    try:
        if q is None and q1 is None:
            return ExponentSet.from_integrability(n, alpha, s, p, p_list,
                                                  lambda_list, regime)
        if q is None or q1 is None:
            raise ValueError("give both q and q1, or neither")
        return ExponentSet(n=n, alpha=alpha, s=s, p=p, p_list=p_list,
                           q=q, q1=q1, lambda_list=lambda_list, regime=regime)
    except ValueError as exc:
        raise ConfigError(sec.name, "p", str(exc))


def _operator(sec: _Section, n: int, catalog) -> OperatorConfig:
    kernel_id = sec.text("kernel", default="one")
    alpha = sec.number("alpha", required=True)
    try:
        kernel = catalog.kernel(kernel_id)
        return OperatorConfig(kernel, alpha)
    except (KeyError, ValueError) as exc:
        raise ConfigError(sec.name, "kernel", str(exc))


def _weight(sec: _Section, key: str):
    name = sec.text(key, required=True)
    try:
        return resolve_weight(name)
    except KeyError as exc:
        raise ConfigError(sec.name, key, str(exc))


def _function(sec: _Section, key: str, catalog, required=True, default=None):
    name = sec.text(key, default=default, required=required)
    try:
        return catalog.function(name)
    except KeyError as exc:
        raise ConfigError(sec.name, key, str(exc))


def _symbols(sec: _Section, key: str, catalog, required=True):
    names = sec.names(key, required=required)
    try:
        return tuple(catalog.symbol(v) for v in names)
    except KeyError as exc:
        raise ConfigError(sec.name, key, str(exc))


def _x0(sec: _Section, n: int):
    vals = sec.numbers("x0", default=tuple(0.0 for _ in range(n)))
    if len(vals) != n:
        raise ConfigError(sec.name, "x0", f"expected {n} coordinates, got {len(vals)}")
    return np.asarray(vals, dtype=float)


# --------------------------------------------------------------------------
# Check registry
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckEntry:
    build: object          # (_Section) -> zero-arg runner returning CheckReport
    description: str
    keys: dict


def _build_size_condition(sec: _Section):
    n = _dimension(sec)
    catalog = builtin_catalog(n)
    cfg = _operator(sec, n, catalog)
    f = _function(sec, "f", catalog)
    tol = sec.number("tol", default=1e-6)
    ceiling = sec.number("ceiling", default=3.0)
    return lambda: _checks.check_size_condition(cfg, f, tol=tol, ceiling=ceiling)


def _build_lebesgue(sec: _Section):
    n = _dimension(sec)
    catalog = builtin_catalog(n)
    cfg = _operator(sec, n, catalog)
    exps = _exponents(sec, n)
    names = sec.names("f_family", default=("gaussian", "unit_ball"))
    try:
        family = [catalog.function(v) for v in names]
    except KeyError as exc:
        raise ConfigError(sec.name, "f_family", str(exc))
    ceiling = sec.number("ceiling", default=3.0)
    return lambda: _checks.check_lebesgue_boundedness(cfg, exps, family,
                                                      ceiling=ceiling)


def _build_kernel_shell(sec: _Section):
    n = _dimension(sec)
    catalog = builtin_catalog(n)
    kernel_id = sec.text("kernel", default="one")
    try:
        kernel = catalog.kernel(kernel_id)
    except KeyError as exc:
        raise ConfigError(sec.name, "kernel", str(exc))
    s = sec.number("s", required=True)
    grid = _grid_from(sec, "", _checks.DEFAULT_SHELL_GRID)
    x0 = _x0(sec, n)
    ceiling = sec.number("ceiling", default=3.0)
    return lambda: _checks.check_kernel_shell_bound(kernel, s, x0, grid,
                                                    ceiling=ceiling)


def _build_campanato(which):
    def build(sec: _Section):
        n = _dimension(sec)
        catalog = builtin_catalog(n)
        try:
            b = catalog.symbol(sec.text("b", required=True))
        except KeyError as exc:
            raise ConfigError(sec.name, "b", str(exc))
        p = sec.number("p", required=True)
        lam = sec.number("lambda", default=0.0)
        grid = _grid_from(sec, "", _checks.DEFAULT_PAIR_GRID)
        x0 = _x0(sec, n)
        ceiling = sec.number("ceiling", default=3.0)
        fn = {
            "a": _checks.check_campanato_cross_mean,
            "b": _checks.check_campanato_mean_gap,
            "c": _checks.check_campanato_scaled_oscillation,
        }[which]
        return lambda: fn(b, p, lam, x0, grid, ceiling=ceiling)
    return build


def _build_local_bound(commutator: bool):
    def build(sec: _Section):
        n = _dimension(sec)
        catalog = builtin_catalog(n)
        cfg = _operator(sec, n, catalog)
        exps = _exponents(sec, n)
        f = _function(sec, "f", catalog)
        grid = _grid_from(sec, "", _checks.DEFAULT_LOCAL_GRID)
        x0 = _x0(sec, n)
        ceiling = sec.number("ceiling", default=3.0)
        if commutator:
            symbols = _symbols(sec, "b", catalog)
            if len(symbols) != exps.m:
                raise ConfigError(sec.name, "b",
                                  f"expected {exps.m} symbols for m={exps.m}, "
                                  f"got {len(symbols)}")
            return lambda: _checks.check_commutator_local_bound(
                cfg, exps, symbols, f, x0, grid, ceiling=ceiling)
        return lambda: _checks.check_local_operator_bound(
            cfg, exps, f, x0, grid, ceiling=ceiling)
    return build


def _build_weight_pair(vanishing: bool):
    def build(sec: _Section):
        n = _dimension(sec)
        exps = _exponents(sec, n)
        phi1 = _weight(sec, "phi1")
        phi2 = _weight(sec, "phi2")
        grid = _grid_from(sec, "", _checks.DEFAULT_WEIGHT_GRID)
        x0 = _x0(sec, n)
        ceiling = sec.number("ceiling", default=3.0)
        if vanishing:
            return lambda: _checks.check_weight_pair_vanishing(
                exps, phi1, phi2, x0, grid, ceiling=ceiling)
        return lambda: _checks.check_weight_pair_condition(
            exps, phi1, phi2, x0, grid, ceiling=ceiling)
    return build


def _build_end_to_end(vanishing: bool):
    def build(sec: _Section):
        n = _dimension(sec)
        catalog = builtin_catalog(n)
        cfg = _operator(sec, n, catalog)
        exps = _exponents(sec, n)
        f = _function(sec, "f", catalog)
        symbols = _symbols(sec, "b", catalog)
        if len(symbols) != exps.m:
            raise ConfigError(sec.name, "b",
                              f"expected {exps.m} symbols for m={exps.m}, "
                              f"got {len(symbols)}")
        phi1 = _weight(sec, "phi1")
        phi2 = _weight(sec, "phi2")
        x0 = _x0(sec, n)
        ceiling = sec.number("ceiling", default=3.0)
        if vanishing:
            grid = _grid_from(sec, "", _checks.DEFAULT_DEEP_GRID)
            return lambda: _checks.check_vanishing_implication(
                cfg, exps, symbols, f, phi1, phi2, x0, grid, ceiling=ceiling)
        grid = _grid_from(sec, "", None)
        return lambda: _checks.check_morrey_boundedness(
            cfg, exps, symbols, f, phi1, phi2, x0, grid, ceiling=ceiling)
    return build


_EXP_KEYS = {
    "alpha": "operator order, in (0, n)",
    "s": "sphere integrability index of the kernel, > 1",
    "p": "input Lebesgue exponent",
    "p_i": "comma list of symbol exponents (may be empty for m = 0)",
    "lambda_i": "comma list of Campanato orders (default zeros)",
    "regime": f"one of {REGIMES}",
    "q": "optional; checked against 1/q = sum(1/p_i) + 1/p when given",
    "q1": "optional; checked against 1/q1 = 1/q - alpha/n when given",
}
_GRID_KEYS = {"rmin/rmax/count": "log grid override (all three together)"}

CHECKS = {
    "size_condition": CheckEntry(
        _build_size_condition,
        "Pointwise domination of the operator by its absolute-value majorant "
        "outside the support (fitted constant must stay below 1 + tol).",
        {"n": "dimension", "kernel": "kernel id", "alpha": "operator order",
         "f": "test function id", "tol": "slack on the unit constant"}),
    "lebesgue_boundedness": CheckEntry(
        _build_lebesgue,
        "Global L_q -> L_q1 norm inequality over a function family and its "
        "dilates.",
        {"n": "dimension", "kernel": "kernel id",
         "f_family": "comma list of test function ids", **_EXP_KEYS}),
    "kernel_shell_bound": CheckEntry(
        _build_kernel_shell,
        "L_s norm of the kernel on balls against the sphere norm times "
        "|B(x0,2t)|^(1/s).",
        {"n": "dimension", "kernel": "kernel id", "s": "integrability index",
         "x0": "ball center", **_GRID_KEYS}),
    "campanato_cross_mean": CheckEntry(
        _build_campanato("a"),
        "Scaled oscillation about the mean over a second ball, against the "
        "log factor times the Campanato norm.",
        {"n": "dimension", "b": "symbol id", "p": "exponent",
         "lambda": "Campanato order", "x0": "center", **_GRID_KEYS}),
    "campanato_mean_gap": CheckEntry(
        _build_campanato("b"),
        "Gap of ball means over radius pairs, against the log factor.",
        {"n": "dimension", "b": "symbol id", "p": "exponent",
         "lambda": "Campanato order", "x0": "center", **_GRID_KEYS}),
    "campanato_scaled_oscillation": CheckEntry(
        _build_campanato("c"),
        "Unnormalized oscillation norm against the log factor times "
        "r^(n/p + n*lambda).",
        {"n": "dimension", "b": "symbol id", "p": "exponent",
         "lambda": "Campanato order", "x0": "center", **_GRID_KEYS}),
    "local_operator_bound": CheckEntry(
        _build_local_bound(False),
        "Local norm of the plain operator on B(x0,r) against the tail "
        "integral of input norms (input/output pair (q, q1); use m = 0).",
        {"n": "dimension", "kernel": "kernel id", "f": "test function id",
         "x0": "center", **_EXP_KEYS, **_GRID_KEYS}),
    "commutator_local_bound": CheckEntry(
        _build_local_bound(True),
        "Local norm of the multilinear commutator against the log-weighted "
        "tail integral times the product of Campanato norms.",
        {"n": "dimension", "kernel": "kernel id", "f": "test function id",
         "b": "comma list of symbol ids", "x0": "center",
         **_EXP_KEYS, **_GRID_KEYS}),
    "weight_pair_condition": CheckEntry(
        _build_weight_pair(False),
        "Tail condition coupling (phi1, phi2) with the essential infimum "
        "factor.",
        {"n": "dimension", "phi1": "weight id", "phi2": "weight id",
         "x0": "center", **_EXP_KEYS, **_GRID_KEYS}),
    "weight_pair_vanishing": CheckEntry(
        _build_weight_pair(True),
        "The three vanishing-theorem weight conditions (tail bound, log "
        "limit, delta-tail finiteness).",
        {"n": "dimension", "phi1": "weight id", "phi2": "weight id",
         "x0": "center", **_EXP_KEYS, **_GRID_KEYS}),
    "morrey_boundedness": CheckEntry(
        _build_end_to_end(False),
        "End-to-end commutator boundedness between the weighted spaces over "
        "a dilation family.",
        {"n": "dimension", "kernel": "kernel id", "f": "test function id",
         "b": "comma list of symbol ids", "phi1": "weight id",
         "phi2": "weight id", "x0": "center", **_EXP_KEYS, **_GRID_KEYS}),
    "vanishing_implication": CheckEntry(
        _build_end_to_end(True),
        "Vanishing input profile implies vanishing commutator output "
        "profile.",
        {"n": "dimension", "kernel": "kernel id", "f": "test function id",
         "b": "comma list of symbol ids", "phi1": "weight id",
         "phi2": "weight id", "x0": "center", **_EXP_KEYS, **_GRID_KEYS}),
}


# --------------------------------------------------------------------------
# Suite parsing and execution
# --------------------------------------------------------------------------

@dataclass
class CheckInvocation:
    identifier: str
    check_name: str
    runner: object


@dataclass
class SuiteConfig:
    invocations: list
    out_dir: str = "reports"
    threads: int = 1
    seed: int | None = None
    warnings: list = field(default_factory=list)


def parse_config(text: str) -> SuiteConfig:
    """Parse and fully validate a suite document (exponent couplings and
    catalog references included); raises ConfigError with section/key
    diagnostics."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<document>", "<syntax>", str(exc))

    out_dir = "reports"
    threads = 1
    seed = None
    if cp.has_section("suite"):
        sec = _Section("suite", dict(cp.items("suite")))
        out_dir = sec.text("out", default="reports")
        threads = sec.integer("threads", default=1)
        seed = sec.integer("seed", default=None)
        sec.check_unused()

    invocations = []
    warnings = []
    for name in cp.sections():
        if name == "suite":
            continue
        if not name.startswith("check:"):
            raise ConfigError(name, "<section>",
                              "sections must be [suite] or [check:<id>]")
        identifier = name[len("check:"):].strip()
        if not identifier:
            raise ConfigError(name, "<section>", "empty check identifier")
        if any(inv.identifier == identifier for inv in invocations):
            raise ConfigError(name, "<section>",
                              f"duplicate check id {identifier!r}")
        sec = _Section(name, dict(cp.items(name)))
        check_name = sec.text("check", required=True)
        entry = CHECKS.get(check_name)
        if entry is None:
            raise ConfigError(name, "check",
                              f"unknown check {check_name!r}; known: "
                              + ", ".join(sorted(CHECKS)))
        runner = entry.build(sec)
        sec.check_unused()
        invocations.append(CheckInvocation(identifier, check_name, runner))
    if not invocations:
        warnings.append("configuration defines no checks")
    return SuiteConfig(invocations, out_dir=out_dir, threads=threads,
                       seed=seed, warnings=warnings)


def run_suite(suite: SuiteConfig, out_dir: str | None = None,
              threads: int | None = None, log=print) -> int:
    """Run all checks, write reports, and return the exit status
    (0 all passed/warned, 1 some check failed, 2 execution error)."""
    target = Path(out_dir or suite.out_dir)
    workers = threads or suite.threads
    for w in suite.warnings:
        log(f"warning: {w}")
    try:
        target.mkdir(parents=True, exist_ok=True)
        probe = target / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        log(f"error: output directory not writable: {exc}")
        return 2

    def run_one(inv: CheckInvocation):
        try:
            return inv.runner(), None
        except Exception:
            return None, traceback.format_exc()

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, suite.invocations))
    else:
        outcomes = [run_one(inv) for inv in suite.invocations]

    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    meta = {"created_utc": stamp, "roughfrac_version": __version__}
    rows = []
    log_lines = [f"roughfrac {__version__} run at {stamp}"]
    any_fail = False
    any_error = False
    for inv, (rep, error) in zip(suite.invocations, outcomes):
        if error is not None:
            any_error = True
            rows.append(f"{inv.identifier},{inv.check_name},,,error")
            log_lines.append(f"{inv.identifier}: ERROR\n{error}")
            log(f"{inv.identifier}: error (see run.log)")
            continue
        try:
            (target / f"{inv.identifier}.json").write_text(
                report_json_text(rep, meta))
        except OSError as exc:
            log(f"error: cannot write report: {exc}")
            return 2
        rows.append(f"{inv.identifier},{rep.check_name},"
                    f"{rep.fitted_constant!r},{rep.stability_ratio!r},"
                    f"{rep.verdict}")
        log_lines.append(f"{inv.identifier}: {rep.verdict} "
                         f"(fitted={rep.fitted_constant:.6g}, "
                         f"stability={rep.stability_ratio:.6g})")
        log(f"{inv.identifier}: {rep.verdict}")
        if rep.failed:
            any_fail = True
    header = "id,check,fitted_constant,stability_ratio,verdict"
    try:
        (target / "summary.csv").write_text(
            "\n".join([header] + rows) + "\n")
        (target / "run.log").write_text("\n".join(log_lines) + "\n")
    except OSError as exc:
        log(f"error: cannot write summary: {exc}")
        return 2
    if any_error:
        return 2
    return 1 if any_fail else 0


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        suite = parse_config(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        suite.seed = args.seed
    return run_suite(suite, out_dir=args.out, threads=args.threads)


def _cmd_list_catalog(args) -> int:
    catalog = builtin_catalog(args.n)
    print(f"catalog for dimension n = {args.n}")
    print("kernels:   " + ", ".join(sorted(catalog.kernels)))
    print("functions: " + ", ".join(sorted(catalog.functions)))
    print("symbols:   " + ", ".join(sorted(catalog.symbols))
          + "  (also const:<value>)")
    print("weights:   power:<a>, powerlog:<a>,<c>, one, logtail")
    return 0


def _cmd_describe(args) -> int:
    entry = CHECKS.get(args.name)
    if entry is None:
        print(f"error: unknown check {args.name!r}; known: "
              + ", ".join(sorted(CHECKS)), file=sys.stderr)
        return 2
    print(f"{args.name}: {entry.description}")
    print("keys:")
    for key, help_text in entry.keys.items():
        print(f"  {key:14s} {help_text}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="roughfrac",
        description="Numerical verification suites for rough-kernel "
                    "fractional operators on local Morrey spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a suite configuration")
    p_run.add_argument("config", help="path to the INI suite document")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--threads", type=int, default=None,
                       help="parallel check execution")
    p_run.add_argument("--seed", type=int, default=None,
                       help="seed for sample-point jitter (off by default)")
    p_run.set_defaults(fn=_cmd_run)

    p_list = sub.add_parser("list-catalog", help="list catalog entry ids")
    p_list.add_argument("--n", type=int, default=1, choices=(1, 2))
    p_list.set_defaults(fn=_cmd_list_catalog)

    p_desc = sub.add_parser("describe-check",
                            help="describe a check and its config keys")
    p_desc.add_argument("name")
    p_desc.set_defaults(fn=_cmd_describe)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
