"""Command-line front end.

Each subcommand reads one JSON config (``--config``), applies ``--set key=value``
overrides and writes CSV to ``--out`` (stdout when omitted). Outputs depend only
on the config, the flags and ``--seed``.

Exit codes: 0 success, 2 configuration error, 3 cap or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import engine as en
from . import geometry as geo
from . import infotheory as it
from .noise import NoiseModel

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

PARAM_KEYS = {
    "N", "R", "delta", "kappa_mode", "eps_slack", "T", "lambda", "lam", "alpha", "eta",
    "max_retries", "cap",
}
COMMAND_KEYS = {
    "curves": {"model", "rate_grid", "kappa_mode", "empirical"},
    "simulate": PARAM_KEYS | {"model", "strategy", "trials", "T_grid"},
    "sweep": PARAM_KEYS | {"model", "strategy", "trials"},
    "trajectories": {"N", "M", "delta", "kappa_mode", "grid_w", "grid_v", "cap", "ns"},
}
SWEEP_AXES = ("strategy", "N", "R", "T")
KEY_COLUMNS = ("strategy", "kappa_mode", "N", "R", "delta", "T", "lambda", "alpha", "trials", "seed")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def config_error(field, msg):
    return CliError(f"config error: {field}: {msg}", EXIT_CONFIG)


# ---- configuration -------------------------------------------------------------------------


def parse_override(text):
    if "=" not in text:
        raise config_error("--set", f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_config(path, overrides, command):
    cfg = {}
    if path:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read config: {exc}", EXIT_RUNTIME) from exc
        except json.JSONDecodeError as exc:
            raise config_error("config", f"invalid JSON ({exc})") from exc
        if not isinstance(cfg, dict):
            raise config_error("config", "top level must be an object")
    for text in overrides or ():
        key, value = parse_override(text)
        cfg[key] = value
    unknown = sorted(set(cfg) - COMMAND_KEYS[command])
    if unknown:
        raise config_error(unknown[0], f"unknown key for {command}")
    return cfg


def model_from(cfg):
    mdef = cfg.get("model")
    if mdef is None:
        raise config_error("model", "required")
    try:
        return NoiseModel.from_dict(mdef)
    except (ValueError, KeyError, TypeError) as exc:
        raise config_error("model", str(exc)) from exc


def _number(cfg, key, kind=float):
    if key not in cfg or cfg[key] is None:
        return None
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise config_error(key, f"expected a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise config_error(key, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def params_from(cfg, model, seed=0):
    kw = dict(
        N=_number(cfg, "N", int),
        model=model,
        delta=_number(cfg, "delta"),
        R=_number(cfg, "R"),
        seed=seed,
    )
    if kw["N"] is None:
        raise config_error("N", "required")
    for key, name, kind in [
        ("eps_slack", "eps_slack", float), ("T", "T", float), ("alpha", "alpha", float),
        ("eta", "eta", float), ("max_retries", "max_retries", int), ("cap", "cap", int),
    ]:
        value = _number(cfg, key, kind)
        if value is not None:
            kw[name] = value
    lam = _number(cfg, "lambda") if "lambda" in cfg else _number(cfg, "lam")
    if lam is not None:
        kw["lam"] = lam
    if "kappa_mode" in cfg:
        kw["kappa_mode"] = cfg["kappa_mode"]
    try:
        return en.SearchParams(**kw)
    except en.ConfigError as exc:
        raise config_error(exc.field, str(exc).split(": ", 1)[1]) from exc


def rate_grid_from(cfg):
    grid = cfg.get("rate_grid", [])
    if isinstance(grid, dict):
        try:
            grid = np.linspace(float(grid["start"]), float(grid["stop"]), int(grid["num"])).tolist()
        except (KeyError, TypeError, ValueError) as exc:
            raise config_error("rate_grid", "expected a list or {start, stop, num}") from exc
    if not isinstance(grid, list) or not all(isinstance(r, (int, float)) for r in grid):
        raise config_error("rate_grid", "expected a list of rates")
    return [float(r) for r in grid]


def trials_from(cfg):
    trials = _number(cfg, "trials", int)
    if trials is None:
        raise config_error("trials", "required")
    if trials < 1:
        raise config_error("trials", "must be positive")
    return trials


def require_seed(args):
    if args.seed is None:
        raise config_error("--seed", f"required for {args.command}")
    if not 0 <= args.seed < 2**64:
        raise config_error("--seed", "must be an unsigned 64-bit integer")
    return args.seed


def kappa_of(cfg):
    mode = cfg.get("kappa_mode", en.KNOWN)
    if mode not in (en.KNOWN, en.UNKNOWN):
        raise config_error("kappa_mode", f"must be {en.KNOWN!r} or {en.UNKNOWN!r}")
    return 1.0 if mode == en.KNOWN else 0.5


# ---- output --------------------------------------------------------------------------------


def emit(text, out):
    """Write ``text`` to ``out`` atomically, or to stdout."""
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_RUNTIME) from exc


def note(msg):
    print(msg, file=sys.stderr)


# ---- commands ------------------------------------------------------------------------------


def cmd_curves(args, cfg):
    model = model_from(cfg)
    grid = rate_grid_from(cfg)
    kappa = kappa_of(cfg)
    empirical = None
    path = args.empirical or cfg.get("empirical")
    if path:
        try:
            with open(path, newline="") as fh:
                found = [c for c in it.read_curves_csv(fh) if c.curve_id == "decision_feedback_empirical"]
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}", EXIT_RUNTIME) from exc
        except (KeyError, ValueError) as exc:
            raise config_error("empirical", f"not a curves CSV ({exc})") from exc
        if not found:
            raise config_error("empirical", "no decision_feedback_empirical rows")
        empirical = found[0]
    try:
        curves = it.curve_bundle(model, grid, empirical=empirical, kappa=kappa)
    except ValueError as exc:
        raise config_error("rate_grid", str(exc)) from exc
    buf = io.StringIO()
    it.write_curves_csv(curves, buf)
    emit(buf.getvalue(), args.out)
    note(f"wrote {len(curves)} curves on {len(grid)} rates")


def summary_line(s):
    return (
        f"{s.strategy} N={s.N} R={s.R:.4f} delta={s.delta:.3g}: eps_hat={s.eps_hat:.4f} "
        f"[{s.ci_lo:.4f}, {s.ci_hi:.4f}] over {s.trials} trials, mean tau={s.mean_tau:.2f}"
    )


def cmd_simulate(args, cfg):
    seed = require_seed(args)
    model = model_from(cfg)
    params = params_from(cfg, model, seed)
    strategy = cfg.get("strategy", "nonadaptive")
    trials = trials_from(cfg)
    if "T_grid" in cfg:
        T_grid = cfg["T_grid"]
        if not isinstance(T_grid, list) or not T_grid or any(not isinstance(t, (int, float)) or t < 0 for t in T_grid):
            raise config_error("T_grid", "expected a non-empty list of non-negative thresholds")
        validate(strategy, params)
        curve = run_guarded(lambda: en.empirical_forney_curve(params, T_grid, trials, seed))
        buf = io.StringIO()
        it.write_curves_csv([curve], buf)
        emit(buf.getvalue(), args.out)
        for info in curve.meta["points"]:
            flag = " (unreliable)" if info["unreliable"] else ""
            note(f"T={info['T']:.4f}: declared {info['declared']}, errors {info['errors']}{flag}")
        return
    validate(strategy, params)
    stats = run_guarded(lambda: en.monte_carlo(strategy, params, trials, seed, args.workers))
    buf = io.StringIO()
    en.write_stats_csv([stats], buf)
    emit(buf.getvalue(), args.out)
    note(summary_line(stats))


def validate(strategy, params):
    try:
        en.validate_strategy(strategy, params)
    except en.ConfigError as exc:
        raise config_error(exc.field, str(exc).split(": ", 1)[1]) from exc


def run_guarded(fn):
    try:
        return fn()
    except geo.CapExceeded as exc:
        raise CliError(f"cap exceeded: {exc.count} trajectories > cap {exc.cap}", EXIT_RUNTIME) from exc
    except MemoryError as exc:
        raise CliError("out of memory", EXIT_RUNTIME) from exc


def _as_list(value):
    return value if isinstance(value, list) else [value]


def sweep_cells(cfg, model, seed):
    """All (strategy, params) cells of the Cartesian product, validated up front."""
    axes = {k: _as_list(cfg.get(k, "nonadaptive" if k == "strategy" else None)) for k in SWEEP_AXES}
    if axes["R"] == [None]:
        axes.pop("R")
    base = {k: v for k, v in cfg.items() if k not in SWEEP_AXES}
    names = list(axes)
    cells = []
    for combo in itertools.product(*(axes[k] for k in names)):
        point = dict(base, **{k: v for k, v in zip(names, combo) if v is not None})
        strategy = point.pop("strategy")
        params = params_from(point, model, seed)
        validate(strategy, params)
        cells.append((strategy, params))
    return cells


def cell_key(strategy, params, trials, seed):
    T, lam, alpha = en.reported_settings(strategy, params)
    f = it.fmt_float
    return (strategy, params.kappa_mode, str(params.N), f(params.R), f(params.delta), f(T), f(lam), f(alpha),
            str(trials), str(seed))


def row_key(row):
    return tuple(row[c] for c in KEY_COLUMNS)


def sort_key(key):
    strategy, mode, N, R, delta, T, lam, alpha, trials, seed = key
    return (strategy, mode, int(N), float(R), float(T), float(lam), float(alpha), int(trials), int(seed))


def read_existing(path):
    if not path or path == "-" or not os.path.exists(path):
        return {}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != en.CSV_COLUMNS:
                raise config_error("--out", "existing file is not a sweep CSV")
            return {row_key(r): [r[c] for c in en.CSV_COLUMNS] for r in reader}
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_RUNTIME) from exc


def render_rows(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(en.CSV_COLUMNS)
    for key in sorted(rows, key=sort_key):
        w.writerow(rows[key])
    return buf.getvalue()


def cmd_sweep(args, cfg):
    seed = require_seed(args)
    model = model_from(cfg)
    trials = trials_from(cfg)
    cells = sweep_cells(cfg, model, seed)
    rows = read_existing(args.out)
    done = len(rows)
    ran = 0
    for strategy, params in cells:
        key = cell_key(strategy, params, trials, seed)
        if key in rows:
            continue
        stats = run_guarded(lambda: en.monte_carlo(strategy, params, trials, seed, args.workers))
        rows[key] = stats.row()
        ran += 1
        note(summary_line(stats))
        if args.out not in (None, "-"):
            # rewrite after every cell so an interrupted sweep can resume
            emit(render_rows(rows), args.out)
        if args.stop_after is not None and ran >= args.stop_after:
            break
    if args.out in (None, "-"):
        emit(render_rows(rows), args.out)
    note(f"{len(cells)} cells, {done} already present, {ran} run")


def cmd_trajectories(args, cfg):
    N = _number(cfg, "N", int)
    if N is None or N < 1:
        raise config_error("N", "required positive integer")
    M = _number(cfg, "M", int)
    if M is None:
        delta = _number(cfg, "delta")
        if delta is None:
            raise config_error("M", "give M or delta")
        if not 0 < delta < 1:
            raise config_error("delta", "must lie in (0, 1)")
        M = geo.bins_for_resolution(N, delta)
    if M < 1:
        raise config_error("M", "must be positive")
    mode = cfg.get("kappa_mode", en.UNKNOWN)
    if mode not in (en.KNOWN, en.UNKNOWN):
        raise config_error("kappa_mode", f"must be {en.KNOWN!r} or {en.UNKNOWN!r}")
    cap = _number(cfg, "cap", int) or geo.DEFAULT_CAP
    grid_w, grid_v = _number(cfg, "grid_w"), _number(cfg, "grid_v")
    if (grid_w is None) != (grid_v is None) and mode == en.UNKNOWN:
        raise config_error("grid_v" if grid_v is None else "grid_w", "grid_w and grid_v go together")
    ns = cfg.get("ns")
    if ns is not None and (not isinstance(ns, list) or not all(isinstance(n, int) and n >= 1 for n in ns)):
        raise config_error("ns", "expected a list of positive integers")

    def build():
        if mode == en.KNOWN:
            return geo.enumerate_trajectories(N, M, velocities=[0.0], cap=cap)
        return geo.enumerate_trajectories(N, M, grid_w, grid_v, cap=cap)

    table = run_guarded(build)
    buf = io.StringIO()
    geo.write_table_csv(table, buf)
    emit(buf.getvalue(), args.out)
    if mode == en.KNOWN or N < 3:
        exponent = math.nan
    else:
        exponent = geo.growth_exponent(M, N, ns)
    print(f"trajectories N={N} M={M} count={len(table)} patterns={table.n_patterns} growth_exponent={exponent:.3f}")


COMMANDS = {
    "curves": cmd_curves,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "trajectories": cmd_trajectories,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="targetsearch", description="Noisy search for a moving target")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "curves": "error exponent curves to CSV",
        "simulate": "Monte Carlo run for one parameter point",
        "sweep": "Cartesian sweep over strategy, N, R and T",
        "trajectories": "enumerate trajectory codeword indices",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output CSV (default stdout)")
        p.add_argument("--seed", type=int, help="master seed (required for simulate and sweep)")
        p.add_argument("--workers", type=int, default=1, help="worker processes for trials")
        p.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE",
                       help="override a config key (value parsed as JSON when possible)")
        if name == "curves":
            p.add_argument("--empirical", help="curves CSV with decision_feedback_empirical rows to merge")
        if name == "sweep":
            p.add_argument("--stop-after", type=int, help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise config_error("--workers", "must be at least 1")
        cfg = load_config(args.config, args.overrides, args.command)
        COMMANDS[args.command](args, cfg)
    except CliError as exc:
        print(f"targetsearch: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
