#!/usr/bin/env python3
"""Render error-versus-time figures from an experiment trace CSV.

One image per model found in the trace: the mean Frobenius error across runs
(with a +-1 std band when there are multiple runs), the always-valid bound,
and one marker series per checkpointed comparator column. Infinite bounds are
clipped to the axis top. Axes are log-log unless --linear is passed.

Usage: render.py --trace trace.csv --out figs/ [--linear]
"""

from __future__ import annotations

import argparse
import csv
import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

REQUIRED_COLUMNS = ("model", "run", "t", "refit", "frob_error", "lambda_t",
                    "S_t", "pbar_t", "av_bound")
CHECKPOINT_PREFIX = "hoeffding_f"


def _parse_cell(text: str) -> float:
    if text == "":
        return math.nan
    if text == "inf":
        return math.inf
    return float(text)


def load_trace(trace_path):
    """Parse the trace into {model: {column: 2-D array indexed [run, t]}}.

    Raises ValueError naming every missing schema column.
    """
    with open(trace_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"trace is missing required columns: {missing}")
        checkpoint_cols = [c for c in header if c.startswith(CHECKPOINT_PREFIX)]
        records = defaultdict(list)
        for row in reader:
            records[row["model"]].append(row)

    value_cols = ["frob_error", "av_bound"] + checkpoint_cols
    out = {}
    for model, rows in records.items():
        runs = sorted({int(r["run"]) for r in rows})
        times = sorted({int(r["t"]) for r in rows})
        run_pos = {r: i for i, r in enumerate(runs)}
        t_pos = {t: i for i, t in enumerate(times)}
        grids = {c: np.full((len(runs), len(times)), math.nan) for c in value_cols}
        for row in rows:
            i, j = run_pos[int(row["run"])], t_pos[int(row["t"])]
            for c in value_cols:
                grids[c][i, j] = _parse_cell(row[c])
        out[model] = {"t": np.asarray(times, dtype=float), "runs": runs,
                      "grids": grids, "checkpoint_cols": checkpoint_cols}
    return out


def _mean_over_runs(grid: np.ndarray) -> np.ndarray:
    """Mean across runs; all-nan columns stay nan, any inf dominates."""
    with np.errstate(invalid="ignore"):
        masked = np.ma.masked_invalid(grid)
        means = masked.mean(axis=0).filled(math.nan)
    has_inf = np.isposinf(grid).any(axis=0)
    means[has_inf] = math.inf
    return means


def render(trace_path, out_dir, linear: bool = False) -> dict:
    """Render one figure per model; returns per-model image paths and the
    plotted series names."""
    data = load_trace(trace_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for model, block in data.items():
        t = block["t"]
        grids = block["grids"]
        error_grid = grids["frob_error"]
        mean_error = _mean_over_runs(error_grid)
        bound = _mean_over_runs(grids["av_bound"])

        finite_pool = [mean_error[np.isfinite(mean_error)],
                       bound[np.isfinite(bound)]]
        for col in block["checkpoint_cols"]:
            vals = _mean_over_runs(grids[col])
            finite_pool.append(vals[np.isfinite(vals)])
        finite_all = np.concatenate([v for v in finite_pool if v.size]) \
            if any(v.size for v in finite_pool) else np.array([1.0])
        top = float(finite_all.max()) * (2.0 if not linear else 1.2) \
            if finite_all.size else 1.0
        top = max(top, 1e-12)

        fig, ax = plt.subplots(figsize=(7, 5))
        series = []

        if len(block["runs"]) > 1:
            std = np.ma.masked_invalid(error_grid).std(axis=0).filled(0.0)
            lo = np.clip(mean_error - std, 1e-300 if not linear else None, None)
            ax.fill_between(t, lo, mean_error + std, alpha=0.2, color="C0",
                            linewidth=0)
        ax.plot(t, np.minimum(mean_error, top), color="C0", label="frob_error")
        series.append("frob_error")

        ax.plot(t, np.minimum(bound, top), color="C1", label="av_bound")
        series.append("av_bound")

        for k, col in enumerate(block["checkpoint_cols"]):
            vals = _mean_over_runs(grids[col])
            mask = ~np.isnan(vals)
            ax.plot(t[mask], np.minimum(vals[mask], top), linestyle="none",
                    marker="o^sdv*"[k % 6], markersize=5, color=f"C{k + 2}",
                    label=col)
            series.append(col)

        if not linear:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_ylim(top=top)
        ax.set_xlabel("t")
        ax.set_ylabel("Frobenius error")
        ax.set_title(model)
        ax.legend()
        fig.tight_layout()
        image_path = out / f"{model}.png"
        fig.savefig(image_path, dpi=150)
        plt.close(fig)
        results[model] = {"image": str(image_path), "series": series}
    return results


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trace", required=True, help="trace CSV path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--linear", action="store_true",
                        help="linear axes instead of log-log")
    args = parser.parse_args(argv)
    results = render(args.trace, args.out, linear=args.linear)
    for model, info in results.items():
        print(f"{model}: {info['image']} ({len(info['series'])} series)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
