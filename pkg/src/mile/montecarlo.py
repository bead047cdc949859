"""Reproducible Monte Carlo harness for the dynamic-panel designs.

Each replication draws its own generator from ``SeedSequence([seed, N, T, r])``
so results do not depend on scheduling, and cells are reduced in fixed
replication order.  Output is byte-identical for a given design whatever
the number of worker processes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .comparators import ahn_schmidt, arellano_bond, bcols
from .dyn_panel import mile_dyn, simulate_dyn
from .errors import DomainError, MileError

ESTIMATORS = ("mile", "bcols", "ab", "as")
EFFECTS = ("random_normal", "nonconvergent")
ERRORS = ("normal", "chisq")
FAILURE_FLAG_SHARE = 0.05
UNAVAILABLE = "*"
SKIPPED = "**"


@dataclass(frozen=True)
class McDesign:
    """Simulation design.

    Attributes
    ----------
    rho_star, sigma_star2 : float
        True autoregressive coefficient and error variance.
    effects : {'random_normal', 'nonconvergent'}
        ``eta_i ~ N(0, effects_variance)`` or ``eta_i = sigma* sqrt(N)``.
    errors : {'normal', 'chisq'}
        Standard normal or centred chi-square(1) errors, variance one.
    N_list, T_list : tuple of int
    reps : int
    estimators : tuple of str
        Subset of ``mile``, ``bcols``, ``ab``, ``as``.
    seed : int
        Master seed.
    skip_gmm_from_T : int or None
        AB and AS are skipped (rendered ``**``) for ``T`` at or above this.
    effects_variance : float
    """

    rho_star: float
    N_list: tuple
    T_list: tuple
    reps: int
    seed: int
    sigma_star2: float = 1.0
    effects: str = "random_normal"
    errors: str = "normal"
    estimators: tuple = ESTIMATORS
    skip_gmm_from_T: int | None = 25
    effects_variance: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "N_list", tuple(int(n) for n in self.N_list))
        object.__setattr__(self, "T_list", tuple(int(t) for t in self.T_list))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if not isinstance(self.reps, (int, np.integer)) or isinstance(self.reps, bool) or self.reps < 1:
            raise DomainError("reps must be a positive integer")
        if not self.N_list or not self.T_list:
            raise DomainError("N and T lists must be non-empty")
        if min(self.N_list) < 1 or min(self.T_list) < 1:
            raise DomainError("all N and T must be >= 1")
        if self.effects not in EFFECTS:
            raise DomainError(f"effects must be one of {EFFECTS}")
        if self.errors not in ERRORS:
            raise DomainError(f"errors must be one of {ERRORS}")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad or not self.estimators:
            raise DomainError(f"estimators must be a non-empty subset of {ESTIMATORS}")
        if not self.sigma_star2 > 0 or not self.effects_variance >= 0:
            raise DomainError("variances must be positive")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise DomainError("seed must be a 64-bit non-negative integer")

    @classmethod
    def from_dict(cls, d: dict) -> "McDesign":
        known = {"rho_star", "sigma_star2", "effects", "errors", "N", "T", "reps",
                 "estimators", "seed", "skip_gmm_from_T", "effects_variance"}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown design keys: {sorted(extra)}")
        try:
            kw = dict(rho_star=float(d["rho_star"]), N_list=d["N"], T_list=d["T"],
                      reps=d["reps"], seed=d["seed"])
        except KeyError as exc:
            raise DomainError(f"design is missing key {exc.args[0]!r}") from None
        for key in ("sigma_star2", "effects", "errors", "skip_gmm_from_T", "effects_variance"):
            if key in d:
                kw[key] = d[key]
        if "estimators" in d:
            kw["estimators"] = tuple(d["estimators"])
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "McDesign":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def status(self, est: str, T: int) -> str | None:
        """``'*'`` if undefined at this ``T``, ``'**'`` if skipped, else None."""
        if est in ("ab", "as"):
            if T < 3:
                return UNAVAILABLE
            if self.skip_gmm_from_T is not None and T >= self.skip_gmm_from_T:
                return SKIPPED
        return None


def bundled_design(name: str) -> McDesign:
    """Load one of the shipped designs ``table1`` .. ``table5``."""
    ref = resources.files("mile") / "designs" / f"{name}.json"
    if not ref.is_file():
        raise DomainError(f"no bundled design named {name!r}")
    return McDesign.from_dict(json.loads(ref.read_text(encoding="utf-8")))


@dataclass
class EstimatorSummary:
    mean: float
    mse: float
    n_failed: int
    status: str | None = None


@dataclass
class McCellResult:
    """Per-estimator mean and MSE of ``rho_hat`` over successful replications."""

    N: int
    T: int
    stats: dict = field(default_factory=dict)
    wall_time: float = 0.0
    reps: int = 0

    def flagged(self) -> list[str]:
        return [e for e, s in self.stats.items()
                if s.status is None and s.n_failed > FAILURE_FLAG_SHARE * self.reps]


def replication_rng(seed: int, N: int, T: int, r: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(N), int(T), int(r)])))


def _one_rep(design: McDesign, N: int, T: int, r: int, active: tuple) -> list[float]:
    rng = replication_rng(design.seed, N, T, r)
    if design.effects == "random_normal":
        sd = math.sqrt(design.effects_variance)

        def effects(g, n):
            return sd * g.standard_normal(n)
    else:
        effects = math.sqrt(design.sigma_star2) * math.sqrt(N)
    data = simulate_dyn(N, T, design.rho_star, design.sigma_star2, effects, design.errors, rng)
    out = []
    for est in active:
        try:
            if est == "mile":
                v = mile_dyn(data, std_errors=False).theta.rho
            elif est == "bcols":
                v = bcols(data.Y).rho
            elif est == "ab":
                v = arellano_bond(data.Y).rho
            else:
                v = ahn_schmidt(data.Y).rho
            v = float(v) if math.isfinite(v) else float("nan")
        except (MileError, np.linalg.LinAlgError, FloatingPointError):
            v = float("nan")
        out.append(v)
    return out


def _rep_block(args) -> list[list[float]]:
    design, N, T, lo, hi, active = args
    return [_one_rep(design, N, T, r, active) for r in range(lo, hi)]


def _blocks(reps: int, workers: int) -> list[tuple[int, int]]:
    k = max(1, min(reps, 4 * workers))
    edges = np.linspace(0, reps, k + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_cell(design: McDesign, N: int, T: int, *, threads: int = 1, executor=None) -> McCellResult:
    """Run ``design.reps`` replications at ``(N, T)`` and aggregate.

    Replication ``r`` (1-based) uses the generator seeded by
    ``(seed, N, T, r)``.  Failed fits are counted and excluded.
    """
    start = time.perf_counter()
    active = tuple(e for e in design.estimators if design.status(e, T) is None)
    rows: list[list[float]] = []
    if active:
        jobs = [(design, N, T, lo + 1, hi + 1, active) for lo, hi in _blocks(design.reps, threads)]
        if executor is not None:
            for block in executor.map(_rep_block, jobs):
                rows.extend(block)
        elif threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as ex:
                for block in ex.map(_rep_block, jobs):
                    rows.extend(block)
        else:
            for job in jobs:
                rows.extend(_rep_block(job))
    arr = np.array(rows, dtype=float).reshape(len(rows), len(active))
    res = McCellResult(N=N, T=T, reps=design.reps)
    for est in design.estimators:
        st = design.status(est, T)
        if st is not None:
            res.stats[est] = EstimatorSummary(float("nan"), float("nan"), 0, st)
            continue
        col = arr[:, active.index(est)]
        ok = col[np.isfinite(col)]
        n_failed = int(col.size - ok.size)
        if ok.size:
            mean = float(np.mean(ok))
            mse = float(np.mean((ok - design.rho_star) ** 2))
        else:
            mean = mse = float("nan")
        res.stats[est] = EstimatorSummary(mean, mse, n_failed)
    res.wall_time = time.perf_counter() - start
    return res


def run_design(design: McDesign, *, threads: int = 1) -> list[McCellResult]:
    """All cells, ``T`` in the outer loop and ``N`` in the inner loop."""
    cells = [(t, n) for t in design.T_list for n in design.N_list]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return [run_cell(design, n, t, threads=threads, executor=ex) for t, n in cells]
    return [run_cell(design, n, t) for t, n in cells]


def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else f"{x:.6g}"


def _table_rows(results: list[McCellResult], estimators: tuple) -> tuple[list[str], list[list[str]]]:
    header = ["T", "N"]
    for e in estimators:
        header += [f"mean_{e}", f"mse_{e}", f"failed_{e}"]
    header.append("flag")
    rows = []
    for cell in results:
        row = [str(cell.T), str(cell.N)]
        for e in estimators:
            s = cell.stats.get(e)
            if s is None:
                row += ["", "", ""]
            elif s.status is not None:
                row += [s.status, s.status, s.status]
            else:
                row += [_fmt(s.mean), _fmt(s.mse), str(s.n_failed)]
        flagged = cell.flagged()
        row.append(";".join(f"failures>{int(FAILURE_FLAG_SHARE * 100)}%:{e}" for e in flagged))
        rows.append(row)
    return header, rows


def render_table(results: list[McCellResult], fmt: str = "csv",
                 estimators: tuple | None = None) -> str:
    """Render cells as CSV or a markdown table.

    Columns are ``T, N`` then ``mean_<est>, mse_<est>, failed_<est>`` per
    estimator and a final ``flag`` column naming estimators with more than
    5% failed replications.  Numbers use six significant digits.
    """
    if fmt not in ("csv", "markdown"):
        raise DomainError(f"unknown format {fmt!r}; use 'csv' or 'markdown'")
    if estimators is None:
        estimators = tuple(results[0].stats) if results else ESTIMATORS
    header, rows = _table_rows(results, tuple(estimators))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"
