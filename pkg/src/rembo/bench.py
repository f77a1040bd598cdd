"""Replicated kernel comparison on embedded Hartmann6, with a CLI front end.

Each replication draws one random embedding shared by every kernel under
comparison, so the kernels face identical geometry and differ only in
how they measure distance.  Artifacts: one JSON trace per run, a
combined CSV of optimality gaps, and a JSON summary of per-kernel gap
statistics.  Individual run failures become nan-gap rows; the benchmark
keeps going and the CLI signals an excessive failure rate through its
exit code.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from rembo.kernels import DistanceMode
from rembo.objectives import embed_objective
from rembo.optimizer import RunConfig, Seeds, run

KERNEL_CHOICES = tuple(m.value for m in DistanceMode)  # kY, kX, kPsi

# per-ingredient seed streams derived from the base seed; embeddings use
# base_seed + rep directly so the pairing across kernels is obvious
_DESIGN_OFFSET = 100_000
_ACQ_OFFSET = 200_000
_AXES_OFFSET = 300_000

_FAILURE_RATE_LIMIT = 0.10


@dataclass(frozen=True)
class BenchmarkConfig:
    """Benchmark settings; defaults are the desk-scale comparison.

    Replication r of every kernel uses embedding seed ``base_seed + r``.
    ``n_init`` and ``ei_budget`` fall through to the per-run defaults
    (10*d and 2000*d) when left as None.
    """

    D: int = 25
    d: int = 6
    budget: int = 120
    n_reps: int = 20
    kernels: tuple = KERNEL_CHOICES
    base_seed: int = 0
    out_dir: str = "rembo_bench_out"
    parallel: int | None = None
    y_box: float | str = "sqrt_d"
    family: str = "matern52"
    n_init: int | None = None
    ei_budget: int | None = None

    def __post_init__(self):
        if self.n_reps < 1:
            raise ValueError(f"n_reps must be >= 1, got {self.n_reps}")
        kernels = tuple(self.kernels)
        if not kernels:
            raise ValueError("kernels must be a nonempty subset of " + ",".join(KERNEL_CHOICES))
        bad = [k for k in kernels if k not in KERNEL_CHOICES]
        if bad:
            raise ValueError(f"unknown kernels {bad}; choose from {','.join(KERNEL_CHOICES)}")
        if len(set(kernels)) != len(kernels):
            raise ValueError(f"duplicate kernels in {kernels}")
        object.__setattr__(self, "kernels", kernels)
        if self.parallel is None:
            object.__setattr__(self, "parallel", os.cpu_count() or 1)
        if self.parallel < 1:
            raise ValueError(f"parallel must be >= 1, got {self.parallel}")

    def to_dict(self) -> dict:
        return {
            "D": self.D, "d": self.d, "budget": self.budget,
            "n_reps": self.n_reps, "kernels": list(self.kernels),
            "base_seed": self.base_seed, "out_dir": str(self.out_dir),
            "parallel": self.parallel, "y_box": self.y_box,
            "family": self.family, "n_init": self.n_init,
            "ei_budget": self.ei_budget,
        }


def _run_config(cfg: BenchmarkConfig, kernel: str, rep: int) -> RunConfig:
    seeds = Seeds(
        embedding=cfg.base_seed + rep,
        design=cfg.base_seed + _DESIGN_OFFSET + rep,
        acquisition=cfg.base_seed + _ACQ_OFFSET + rep,
    )
    return RunConfig(
        D=cfg.D, d=cfg.d, budget=cfg.budget, family=cfg.family, mode=kernel,
        n_init=cfg.n_init, y_box=cfg.y_box, seeds=seeds, ei_budget=cfg.ei_budget,
    )


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _worker(task: dict) -> dict:
    """Execute one run, write its trace, and report a gap row."""
    kernel, rep = task["kernel"], task["rep"]
    row = {"kernel": kernel, "rep": rep, "seed": task["run_config"]["seeds"]["embedding"],
           "gap": float("nan"), "evals": 0, "wall_ms": 0.0}
    try:
        cfg = RunConfig.from_dict(task["run_config"])
        objective = embed_objective("hartmann6", D=cfg.D, axes_seed=task["axes_seed"])
        record = run(cfg, objective)
        _write_atomic(
            Path(task["out_dir"]) / f"run_{kernel}_{rep:03d}.json",
            json.dumps(record.to_dict()),
        )
        row["evals"] = record.n_evals
        row["wall_ms"] = record.wall_time_s * 1000.0
        if record.status == "ok":
            row["gap"] = record.gap
        else:
            print(f"run {kernel} rep {rep} failed: {record.error}", file=sys.stderr)
    except Exception as exc:  # a lost run must not sink the benchmark
        print(f"run {kernel} rep {rep} failed: {exc}", file=sys.stderr)
    return row


def _summary_from_rows(rows: list[dict]) -> dict:
    """Per-kernel gap statistics (type-7 quantiles) over the finite rows."""
    stats = {}
    kernels = []
    for row in rows:
        if row["kernel"] not in kernels:
            kernels.append(row["kernel"])
    n_failed = sum(1 for row in rows if not np.isfinite(row["gap"]))
    for kernel in kernels:
        gaps = np.array([row["gap"] for row in rows
                         if row["kernel"] == kernel and np.isfinite(row["gap"])])
        if gaps.size == 0:
            continue
        q = np.quantile(gaps, [0.0, 0.25, 0.5, 0.75, 1.0])
        stats[kernel] = {
            "min": float(q[0]), "q1": float(q[1]), "median": float(q[2]),
            "q3": float(q[3]), "max": float(q[4]),
            "mean": float(np.mean(gaps)), "count": int(gaps.size),
        }
    if not stats:
        raise ValueError("no finite gaps to summarize")
    return {"stats": stats, "rows": rows, "n_runs": len(rows), "n_failed": n_failed}


def summarize(gap_files) -> dict:
    """Combine one or more gap CSVs into a summary; fails on empty input."""
    rows = []
    for path in gap_files:
        with open(path, newline="") as fh:
            for raw in csv.DictReader(fh):
                rows.append({
                    "kernel": raw["kernel"], "rep": int(raw["rep"]),
                    "seed": int(raw["seed"]), "gap": float(raw["gap"]),
                    "evals": int(raw["evals"]), "wall_ms": float(raw["wall_ms"]),
                })
    if not rows:
        raise ValueError("no gap rows found in input files")
    return _summary_from_rows(rows)


def _write_gap_csv(path: Path, rows: list[dict]) -> None:
    lines = [["kernel", "rep", "seed", "gap", "evals", "wall_ms"]]
    for row in rows:
        lines.append([row["kernel"], row["rep"], row["seed"],
                      repr(float(row["gap"])), row["evals"], repr(float(row["wall_ms"]))])
    out = []
    for line in lines:
        out.append(",".join(str(v) for v in line))
    _write_atomic(path, "\n".join(out) + "\n")


def run_benchmark(config: BenchmarkConfig) -> dict:
    """Run the full grid, write artifacts under out_dir, return the summary.

    Raises ValueError for configs that cannot produce a single valid run;
    individual mid-benchmark failures only mark rows as failed.
    """
    # probe the composed configs up front so impossible settings fail
    # before any worker starts
    for kernel in config.kernels:
        _run_config(config, kernel, 0)
    embed_objective("hartmann6", D=config.D, axes_seed=config.base_seed + _AXES_OFFSET)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [
        {
            "kernel": kernel,
            "rep": rep,
            "run_config": _run_config(config, kernel, rep).to_dict(),
            "axes_seed": config.base_seed + _AXES_OFFSET + rep,
            "out_dir": str(out_dir),
        }
        for kernel in config.kernels
        for rep in range(config.n_reps)
    ]
    if config.parallel == 1:
        rows = [_worker(t) for t in tasks]
    else:
        with Pool(processes=config.parallel) as pool:
            rows = pool.map(_worker, tasks)

    _write_gap_csv(out_dir / "gaps.csv", rows)
    summary = _summary_from_rows(rows)
    summary["config"] = config.to_dict()
    _write_atomic(out_dir / "summary.json", json.dumps(summary, indent=2))
    return summary


_FLAG_TO_FIELD = {
    "dim_high": "D", "dim_low": "d", "budget": "budget", "reps": "n_reps",
    "kernels": "kernels", "seed": "base_seed", "out": "out_dir",
    "parallel": "parallel", "ybox": "y_box",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rembo-bench",
        description="Replicated kernel comparison on the embedded Hartmann6 objective.",
    )
    p.add_argument("--dim-high", type=int, help="ambient dimension D")
    p.add_argument("--dim-low", type=int, help="embedding dimension d")
    p.add_argument("--budget", type=int, help="objective evaluations per run")
    p.add_argument("--reps", type=int, help="replications per kernel")
    p.add_argument("--kernels", help="comma-separated subset of " + ",".join(KERNEL_CHOICES))
    p.add_argument("--seed", type=int, help="base seed; replication r embeds with seed+r")
    p.add_argument("--out", help="output directory")
    p.add_argument("--parallel", type=int, help="worker processes (default: all cores)")
    p.add_argument("--ybox", help="box half-width: sqrt_d, gamma, or a positive number")
    p.add_argument("--config", help="JSON file of BenchmarkConfig fields; flags override it")
    return p


def _config_from_args(args: argparse.Namespace) -> BenchmarkConfig:
    merged = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        valid = set(BenchmarkConfig().to_dict())
        unknown = set(data) - valid
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        merged.update(data)
    for flag, fieldname in _FLAG_TO_FIELD.items():
        value = getattr(args, flag)
        if value is not None:
            merged[fieldname] = value
    if "kernels" in merged and isinstance(merged["kernels"], str):
        merged["kernels"] = tuple(k.strip() for k in merged["kernels"].split(",") if k.strip())
    if "kernels" in merged:
        merged["kernels"] = tuple(merged["kernels"])
    if "y_box" in merged and isinstance(merged["y_box"], str):
        try:
            merged["y_box"] = float(merged["y_box"])
        except ValueError:
            pass  # symbolic sqrt_d / gamma, validated downstream
    return BenchmarkConfig(**merged)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        summary = run_benchmark(config)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    for kernel, s in summary["stats"].items():
        print(f"{kernel}: median gap {s['median']:.4f} "
              f"(q1 {s['q1']:.4f}, q3 {s['q3']:.4f}, n={s['count']})")
    print(f"artifacts in {config.out_dir}")
    if summary["n_failed"] > _FAILURE_RATE_LIMIT * summary["n_runs"]:
        print(f"{summary['n_failed']}/{summary['n_runs']} runs failed", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
