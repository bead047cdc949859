"""Command-line front end: ``mile estimate | simulate | check``.

Input formats
-------------
Panels (static, rank, dyn) use a long CSV with header ``i,t,y[,x_1..x_K]``,
one row per individual and period; the panel must be balanced.  IV data use
a wide CSV with header ``y1,y2,z_1..z_K``.  A JSON sidecar (``--config``, or
``<input>.json`` when present) carries the known IV covariance ``sigma`` and
optional settings (``tol``, ``R`` for the rank model).

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

from .errors import DomainError, EstimationError, MileError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
MODELS = ("static", "rank", "iv", "dyn")
DESIGNS = ("table1", "table2", "table3", "table4", "table5")


class InputError(Exception):
    """Malformed user input; reported with exit code 2."""


def _read_csv(path: str) -> tuple[list[str], list[tuple[int, list[float]]]]:
    if not os.path.isfile(path):
        raise InputError(f"{path}: no such file")
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}:1: empty file") from None
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise InputError(f"{path}:{line}: non-numeric field") from None
            if not all(np.isfinite(vals)):
                raise InputError(f"{path}:{line}: non-finite value")
            rows.append((line, vals))
    if not rows:
        raise InputError(f"{path}: no data rows")
    return header, rows


def _x_columns(header: list[str], fixed: list[str], prefix: str, path: str) -> list[int]:
    if header[: len(fixed)] != fixed:
        raise InputError(f"{path}:1: header must start with {','.join(fixed)}")
    rest = header[len(fixed):]
    want = [f"{prefix}_{k + 1}" for k in range(len(rest))]
    if rest != want:
        raise InputError(f"{path}:1: expected columns {','.join(want) or '(none)'} after "
                         f"{','.join(fixed)}, got {','.join(rest)}")
    return list(range(len(fixed), len(header)))


def read_panel(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse a balanced long-format panel CSV into ``y`` (N x T) and ``x`` (N x T x K)."""
    header, rows = _read_csv(path)
    xcols = _x_columns(header, ["i", "t", "y"], "x", path)
    cells: dict = {}
    for line, v in rows:
        if v[0] != int(v[0]) or v[1] != int(v[1]):
            raise InputError(f"{path}:{line}: i and t must be integers")
        key = (int(v[0]), int(v[1]))
        if key in cells:
            raise InputError(f"{path}:{line}: duplicate (i, t) = {key}")
        cells[key] = (line, v)
    ids = sorted({k[0] for k in cells})
    times = sorted({k[1] for k in cells})
    if len(cells) != len(ids) * len(times):
        for i in ids:
            for t in times:
                if (i, t) not in cells:
                    raise InputError(f"{path}: unbalanced panel, missing (i, t) = ({i}, {t})")
    y = np.empty((len(ids), len(times)))
    x = np.empty((len(ids), len(times), len(xcols)))
    for a, i in enumerate(ids):
        for b, t in enumerate(times):
            v = cells[(i, t)][1]
            y[a, b] = v[2]
            x[a, b, :] = [v[c] for c in xcols]
    return y, x


def read_iv(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a wide IV CSV into ``y1``, ``y2`` and ``Z``."""
    header, rows = _read_csv(path)
    zcols = _x_columns(header, ["y1", "y2"], "z", path)
    if not zcols:
        raise InputError(f"{path}:1: at least one instrument column z_1 is required")
    arr = np.array([v for _, v in rows])
    return arr[:, 0], arr[:, 1], arr[:, zcols]


def _load_config(args) -> dict:
    path = args.config
    if path is None:
        guess = os.path.splitext(args.input)[0] + ".json"
        path = guess if os.path.isfile(guess) else None
    if path is None:
        return {}
    if not os.path.isfile(path):
        raise InputError(f"{path}: no such file")
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(cfg, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return cfg


def _estimate(model: str, args, cfg: dict):
    from . import dyn_panel, iv_model, rank_transform, static_panel

    tol = cfg.get("tol")
    if model == "iv":
        if "sigma" not in cfg:
            raise InputError("the iv model needs the known covariance 'sigma' (2 x 2) in the JSON config")
        try:
            sigma = np.array(cfg["sigma"], dtype=float)
        except (TypeError, ValueError):
            raise InputError("config 'sigma' must be a 2 x 2 numeric array") from None
        y1, y2, z = read_iv(args.input)
        data = iv_model.IVData(y1, y2, z, sigma)
        w = iv_model.wishart_stat_iv(data)
        kw = {} if tol is None else {"tol": float(tol)}
        return iv_model.mile_iv(w, data.Sigma, **kw)
    y, x = read_panel(args.input)
    if model == "dyn":
        if x.shape[2]:
            raise InputError(f"{args.input}: the dyn model takes no regressors")
        kw = {} if tol is None else {"tol": float(tol)}
        return dyn_panel.mile_dyn(dyn_panel.DynPanelData(y), **kw)
    if model == "static":
        return static_panel.estimate_static(static_panel.StaticPanelData(y, x))
    if not x.shape[2]:
        raise InputError(f"{args.input}: the rank model needs regressors x_1..x_K")
    r = int(cfg.get("R", args.draws))
    kw = {} if tol is None else {"tol": float(tol)}
    rng = np.random.default_rng(args.seed)
    return rank_transform.estimate_rank(rank_transform.RankData(y, x), r, rng, **kw)


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_estimate(args) -> int:
    cfg = _load_config(args)
    report = _estimate(args.model, args, cfg)
    _write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from . import montecarlo as mc

    if args.design in DESIGNS and not os.path.isfile(args.design):
        design = mc.bundled_design(args.design)
    else:
        if not os.path.isfile(args.design):
            raise InputError(f"{args.design}: no such file (bundled designs: {', '.join(DESIGNS)})")
        try:
            design = mc.McDesign.from_json(args.design)
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.design}:{exc.lineno}: invalid JSON ({exc.msg})") from None
        except (TypeError, ValueError) as exc:
            raise InputError(f"{args.design}: {exc}") from None
    over = {}
    if args.reps is not None:
        over["reps"] = args.reps
    if args.seed is not None:
        over["seed"] = args.seed
    if args.N:
        over["N_list"] = tuple(args.N)
    if args.T:
        over["T_list"] = tuple(args.T)
    if args.estimators:
        over["estimators"] = tuple(args.estimators)
    if over:
        design = dataclasses.replace(design, **over)
    results = mc.run_design(design, threads=max(1, args.threads))
    _write(mc.render_table(results, args.format, design.estimators), args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    from .checks import run_checks

    results = run_checks(args.seed if args.seed is not None else 0)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mile", description="Maximum invariant likelihood estimation.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="estimate a model from a CSV file")
    e.add_argument("--model", required=True, choices=MODELS)
    e.add_argument("--input", required=True, help="data CSV")
    e.add_argument("--config", help="JSON sidecar (default: <input>.json if present)")
    e.add_argument("--output", help="write the JSON report here instead of stdout")
    e.add_argument("--seed", type=int, default=0, help="seed for the rank model's draws")
    e.add_argument("--draws", type=int, default=2000, help="ordered samples per individual (rank model)")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="run a Monte Carlo design")
    s.add_argument("--design", required=True, help="design JSON or a bundled name (table1..table5)")
    s.add_argument("--output", help="write the table here instead of stdout")
    s.add_argument("--format", choices=("csv", "markdown"), default="csv")
    s.add_argument("--seed", type=int, help="override the design's master seed")
    s.add_argument("--reps", type=int, help="override the number of replications")
    s.add_argument("--N", type=int, nargs="+", help="override the N grid")
    s.add_argument("--T", type=int, nargs="+", help="override the T grid")
    s.add_argument("--estimators", nargs="+", help="override the estimator list")
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="run the fast self-check suite")
    c.add_argument("--seed", type=int, help="seed for the randomized checks")
    c.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MileError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except np.linalg.LinAlgError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
