"""Monte-Carlo sweeps over sequence length and the report files they produce.

Each (algorithm, N, trial) cell runs independently with a seed derived by
hashing ``(base_seed, N, trial)``. The algorithm is left out of the hash so
that all algorithms in a cell see the same random draws and adding an
algorithm never changes anyone else's seed.

Report layout (``emit_report``)::

    results.csv            algorithm,N,trial,seed,mse,iters,wall_ms
    summary.json           aggregates keyed by algorithm then N
    plotdata_<name>.csv    N,<alg>_mean,<alg>_stderr,...

Floats are written with ``repr`` so they round-trip exactly. ``wall_ms`` is
left empty unless timing was requested; wall-clock numbers would otherwise
make reruns differ byte-wise.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import statistics
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .crew import ALGORITHMS, design
from .exceptions import ConfigError, CrewError
from .scenario import ScenarioConfig, _build

RESULTS_HEADER = ["algorithm", "N", "trial", "seed", "mse", "iters", "wall_ms"]


class SweepFailed(CrewError):
    """Every cell of a sweep raised."""

    def __init__(self, table: "ResultsTable"):
        super().__init__("all sweep cells failed")
        self.table = table


@dataclass(frozen=True)
class SweepConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    Ns: tuple = (25, 50, 100)
    algorithms: tuple = ("crew_onebit", "crew_cyclic", "can_mmf")
    trials: int = 20
    name: str = "sweep"
    emit_plot_data: bool = True
    record_timing: bool = False

    def __post_init__(self):
        if isinstance(self.scenario, dict):
            object.__setattr__(self, "scenario", ScenarioConfig.from_dict(self.scenario))
        object.__setattr__(self, "Ns", tuple(int(n) for n in self.Ns))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.Ns or any(n < 1 for n in self.Ns):
            raise ConfigError("Ns must be a nonempty list of positive integers")
        if not self.algorithms:
            raise ConfigError("algorithms must be nonempty")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm(s) {bad}; choose from {sorted(ALGORITHMS)}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.name or any(c in self.name for c in "/\\"):
            raise ConfigError("name must be a plain file-name fragment")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SweepConfig":
        return _build(cls, data, "sweep")

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["Ns"], d["algorithms"] = list(self.Ns), list(self.algorithms)
        return d

    def replace(self, **changes) -> "SweepConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Row:
    algorithm: str
    N: int
    trial: int
    seed: int
    mse: float
    iters: int
    wall_ms: Optional[float] = None
    error: Optional[str] = None


@dataclass
class ResultsTable:
    rows: list
    aggregates: dict
    config: Optional[SweepConfig] = None

    @property
    def errors(self) -> list:
        return [r for r in self.rows if r.error is not None]


def cell_seed(base_seed: int, N: int, trial: int) -> int:
    h = hashlib.blake2b(f"{base_seed}:{N}:{trial}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def aggregate(rows) -> dict:
    """Mean and standard error of the final MSE per (algorithm, N)."""
    cells: dict = {}
    for r in rows:
        cells.setdefault(r.algorithm, {}).setdefault(r.N, []).append(r)
    out: dict = {}
    for alg in sorted(cells):
        out[alg] = {}
        for n in sorted(cells[alg]):
            vals = [r.mse for r in cells[alg][n] if r.error is None]
            k = len(vals)
            mean = math.fsum(vals) / k if k else None
            stderr = statistics.stdev(vals) / math.sqrt(k) if k > 1 else None
            out[alg][n] = {"mean": mean, "stderr": stderr, "count": k,
                           "failed": len(cells[alg][n]) - k}
    return out


def run_cell(scenario: ScenarioConfig, algorithm: str, N: int, trial: int,
             record_timing: bool = False) -> Row:
    seed = cell_seed(scenario.seed, N, trial)
    sc = scenario.replace(N=N, seed=seed)
    t0 = time.perf_counter()
    try:
        out = design(algorithm, sc)
    except Exception as exc:  # a failed cell is recorded, not fatal
        return Row(algorithm, N, trial, seed, math.nan, -1, None,
                   f"{type(exc).__name__}: {exc}")
    wall = (time.perf_counter() - t0) * 1e3 if record_timing else None
    return Row(algorithm, N, trial, seed, float(out.final_mse), int(out.iterations), wall)


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(config: SweepConfig, jobs: int = 1) -> ResultsTable:
    """Run every (algorithm, N, trial) cell; rows come back sorted.

    Raises :class:`SweepFailed` only when every cell failed.
    """
    cells = [(config.scenario, alg, n, trial, config.record_timing)
             for alg in config.algorithms for n in config.Ns for trial in range(config.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell_args, cells, chunksize=1))
    else:
        rows = [_run_cell_args(c) for c in cells]
    rows.sort(key=lambda r: (r.algorithm, r.N, r.trial))
    table = ResultsTable(rows, aggregate(rows), config)
    if rows and all(r.error is not None for r in rows):
        raise SweepFailed(table)
    return table


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def results_csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for r in rows:
        w.writerow([r.algorithm, r.N, r.trial, r.seed, _fmt(r.mse), r.iters, _fmt(r.wall_ms)])
    return buf.getvalue()


def plotdata_csv_text(aggregates, algorithms, Ns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["N"]
    for a in algorithms:
        header += [f"{a}_mean", f"{a}_stderr"]
    w.writerow(header)
    for n in Ns:
        line = [n]
        for a in algorithms:
            cell = aggregates.get(a, {}).get(n, {})
            line += [_fmt(cell.get("mean")), _fmt(cell.get("stderr"))]
        w.writerow(line)
    return buf.getvalue()


def summary_dict(table: ResultsTable) -> dict:
    cfg = table.config
    return {
        "name": cfg.name if cfg else None,
        "config": cfg.to_dict() if cfg else None,
        "aggregates": {alg: {str(n): v for n, v in per.items()}
                       for alg, per in table.aggregates.items()},
        "errors": [{"algorithm": r.algorithm, "N": r.N, "trial": r.trial, "error": r.error}
                   for r in table.errors],
    }


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(table: ResultsTable, out_dir, name: Optional[str] = None,
                emit_plot_data: Optional[bool] = None) -> list:
    """Write ``results.csv``, ``summary.json`` and the plot-data CSV.

    The directory is created and probed for writability before anything is
    written; each file is replaced atomically. Returns the written paths.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK | os.X_OK):
        raise PermissionError(f"output directory {out} is not writable")
    cfg = table.config
    name = name or (cfg.name if cfg else "sweep")
    if emit_plot_data is None:
        emit_plot_data = cfg.emit_plot_data if cfg else True
    algorithms = list(cfg.algorithms) if cfg else sorted(table.aggregates)
    Ns = list(cfg.Ns) if cfg else sorted({n for per in table.aggregates.values() for n in per})

    written = []
    path = out / "results.csv"
    _atomic_write(path, results_csv_text(table.rows))
    written.append(path)
    path = out / "summary.json"
    _atomic_write(path, json.dumps(summary_dict(table), indent=2, sort_keys=True) + "\n")
    written.append(path)
    if emit_plot_data:
        path = out / f"plotdata_{name}.csv"
        _atomic_write(path, plotdata_csv_text(table.aggregates, algorithms, Ns))
        written.append(path)
    return written


def read_results_csv(path) -> list:
    """Parse a ``results.csv`` back into rows."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for rec in reader:
            mse = float(rec["mse"])
            iters = int(rec["iters"])
            rows.append(Row(rec["algorithm"], int(rec["N"]), int(rec["trial"]), int(rec["seed"]),
                            mse, iters, float(rec["wall_ms"]) if rec["wall_ms"] else None,
                            "failed" if iters < 0 else None))
    return rows
