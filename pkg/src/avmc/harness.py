"""Experiment runner: the online loop (sample, update statistics, schedule,
refit, bound) over independent runs, with per-step CSV traces and a JSON
summary, plus the Monte Carlo tail-validation driver.

Determinism contract: a fixed ``(seed, config)`` pair produces byte-identical
outputs. Per-run generators are derived from the master seed with the run
index as spawn key, so results do not depend on scheduling.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ._backend import BACKEND
from . import bounds as bounds_mod
from .concentration import (validate_subexponential_tail, validate_subgaussian_tail)
from .models import (SUB_GAUSSIAN, ModelSpec, binomial_model, curvature_bounds,
                     gaussian_model, noise_class, poisson_model)
from .regularization import BoundConfig, lambda_schedule
from .solver import SolverConfig, fit_from_counts
from .stream import generate_target, next_index, observe

HARNESS_MODELS = ("gaussian", "binomial", "poisson")
DEFAULT_SCALES = {"gaussian": 10.0, "binomial": 1.0, "poisson": 1.0}

# defaults shared by the validation CLI; thresholds chosen so every
# theoretical bound is at most 0.5 on the 2x2 grid
DEFAULT_SUBGAUSSIAN_GRID = ((6.9, 2.0), (8.5, 2.0), (9.8, 4.0), (12.2, 4.0),
                            (14.0, 8.0), (17.0, 8.0), (20.5, 8.0), (24.0, 12.0))
DEFAULT_SUBEXPONENTIAL_GRID = ((75.0, 1.0), (100.0, 1.0), (96.0, 2.0), (130.0, 2.0),
                               (120.0, 4.0), (150.0, 4.0), (140.0, 6.0), (170.0, 6.0))


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "gaussian"
    d1: int = 5
    d2: int = 5
    rank: int = 1
    scale: float | None = None          # default 10 for gaussian, 1 otherwise
    gamma: float | None = None          # default: the generation scale
    sigma: float = 1.0                  # gaussian observation scale
    trials: int = 1                     # binomial trial count
    alpha: float = 0.01
    horizon: int = 2000
    runs: int = 20
    seed: int = 0
    checkpoints: tuple[int, ...] = (5, 20, 500)
    refit_every_until: int = 50
    refit_growth: float = 1.05
    solver_max_iters: int = 500
    solver_rel_tol: float = 1e-8
    workers: int = 1

    def __post_init__(self):
        if self.model not in HARNESS_MODELS:
            raise ValueError(f"model must be one of {HARNESS_MODELS}, got {self.model!r}")
        if self.horizon < 1 or self.runs < 1:
            raise ValueError("horizon and runs must be at least 1")
        if not 1 <= self.rank <= min(self.d1, self.d2):
            raise ValueError("rank must lie in [1, min(d1, d2)]")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        for f in self.checkpoints:
            if not 1 <= f <= self.horizon:
                raise ValueError(f"checkpoint count {f} does not fit the horizon")
        if self.refit_growth <= 1.0:
            raise ValueError("refit_growth must exceed 1")
        object.__setattr__(self, "checkpoints", tuple(int(f) for f in self.checkpoints))

    @property
    def effective_scale(self) -> float:
        return DEFAULT_SCALES[self.model] if self.scale is None else self.scale

    @property
    def effective_gamma(self) -> float:
        return self.effective_scale if self.gamma is None else self.gamma

    def model_spec(self) -> ModelSpec:
        gamma = self.effective_gamma
        if self.model == "gaussian":
            return gaussian_model(self.sigma, gamma)
        if self.model == "binomial":
            return binomial_model(self.trials, gamma)
        return poisson_model(gamma)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        data.pop("out", None)
        if "checkpoints" in data:
            data["checkpoints"] = tuple(data["checkpoints"])
        return cls(**data)


@dataclass(frozen=True)
class RunResult:
    run: int
    covered: bool
    final_error: float
    refits: int
    rows: list = field(repr=False, default_factory=list)


def _run_seed(master_seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(run,)))


def _next_refit(t: int, cfg: ExperimentConfig) -> int:
    if t < cfg.refit_every_until:
        return t + 1
    return max(t + 1, int(math.floor(t * cfg.refit_growth)))


def _format(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return repr(float(value))


def run_single(cfg: ExperimentConfig, run: int) -> RunResult:
    """One independent run of the online loop; returns trace rows and the
    uniform-coverage indicator."""
    rng = _run_seed(cfg.seed, run)
    model = cfg.model_spec()
    gamma = cfg.effective_gamma
    target = generate_target(cfg.d1, cfg.d2, cfg.rank, cfg.effective_scale, rng,
                             gamma=gamma)
    noise = noise_class(model)
    bound_cfg = BoundConfig(cfg.alpha, cfg.d1, cfg.d2, noise)
    l_gamma, _ = curvature_bounds(model)
    solver_cfg = SolverConfig(max_iters=cfg.solver_max_iters,
                              rel_tol=cfg.solver_rel_tol)
    checkpoint_sets = {f: set(bounds_mod.checkpoint_times(cfg.horizon, f).tolist())
                       for f in cfg.checkpoints}

    counts = np.zeros((cfg.d1, cfg.d2))
    ysums = np.zeros((cfg.d1, cfg.d2))
    row_counts = np.zeros(cfg.d1, dtype=np.int64)
    col_counts = np.zeros(cfg.d2, dtype=np.int64)
    theta_hat = np.zeros((cfg.d1, cfg.d2))
    next_refit = 1
    refits = 0
    covered = True
    rows_out = []
    err = float(np.linalg.norm(theta_hat - target.theta_star))

    for t in range(1, cfg.horizon + 1):
        idx = next_index(cfg.d1, cfg.d2, rng)
        y = observe(target, idx, model, rng)
        counts[idx] += 1.0
        ysums[idx] += y
        row_counts[idx[0]] += 1
        col_counts[idx[1]] += 1

        s_t = max(row_counts.max(), col_counts.max()) / t
        pbar_t = counts.min() / t
        lambda_t = lambda_schedule(bound_cfg, s_t, t)

        refit_now = t >= next_refit
        if refit_now:
            theta_hat = fit_from_counts(counts, ysums, t, lambda_t, gamma, model,
                                        solver_cfg, init=theta_hat)
            err = float(np.linalg.norm(theta_hat - target.theta_star))
            refits += 1
            next_refit = _next_refit(t, cfg)

        bound_t = bounds_mod.risk_bound(bound_cfg, cfg.rank, pbar_t, l_gamma, s_t, t)
        if err >= bound_t:
            covered = False

        cells = [cfg.model, str(run), str(t), "1" if refit_now else "0",
                 _format(err), _format(lambda_t), _format(s_t), _format(pbar_t),
                 _format(bound_t)]
        for f in cfg.checkpoints:
            if t in checkpoint_sets[f]:
                hb = bounds_mod.hoeffding_checkpoint_bound(
                    bound_cfg, f, t, cfg.horizon, cfg.rank, pbar_t, l_gamma, s_t)
                cells.append(_format(hb))
            else:
                cells.append("")
        rows_out.append(",".join(cells))

    return RunResult(run, covered, err, refits, rows_out)


def _run_single_star(args) -> RunResult:
    return run_single(*args)


def trace_header(cfg: ExperimentConfig) -> str:
    return ",".join(["model", "run", "t", "refit", "frob_error", "lambda_t",
                     "S_t", "pbar_t", "av_bound"]
                    + [f"hoeffding_f{f}" for f in cfg.checkpoints])


@dataclass(frozen=True)
class ExperimentResult:
    trace_path: Path
    summary_path: Path
    coverage_rate: float
    per_run_coverage: tuple[bool, ...]


def run_experiment(cfg: ExperimentConfig, out_dir) -> ExperimentResult:
    """Run all configured runs, write ``trace.csv`` and ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    jobs = [(cfg, run) for run in range(cfg.runs)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_single_star, jobs))
    else:
        results = [run_single(cfg, run) for run in range(cfg.runs)]
    results.sort(key=lambda r: r.run)

    trace_path = out / "trace.csv"
    with open(trace_path, "w", newline="\n") as fh:
        fh.write(trace_header(cfg) + "\n")
        for result in results:
            fh.write("\n".join(result.rows) + "\n")

    coverage = tuple(r.covered for r in results)
    rate = sum(coverage) / len(coverage)
    summary = {
        "config": {**asdict(cfg),
                   "scale": cfg.effective_scale, "gamma": cfg.effective_gamma,
                   "checkpoints": list(cfg.checkpoints)},
        "backend": BACKEND,
        "seeds": {"master": cfg.seed,
                  "per_run_spawn_keys": [[r] for r in range(cfg.runs)]},
        "coverage": {"per_run": list(coverage), "rate": rate},
        "final_errors": [r.final_error for r in results],
        "refits_per_run": [r.refits for r in results],
        "elapsed_seconds": time.perf_counter() - started,
    }
    summary_path = out / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ExperimentResult(trace_path, summary_path, rate, coverage)


@dataclass(frozen=True)
class ValidationConfig:
    trials: int = 10000
    d1: int = 2
    d2: int = 2
    horizon: int = 64
    sigma: float = 1.0
    lambda_se: float = 1.5
    x_max: float = 1.0
    seed: int = 0
    matrix_source: str = "elementary"
    subgaussian_grid: tuple = DEFAULT_SUBGAUSSIAN_GRID
    subexponential_grid: tuple = DEFAULT_SUBEXPONENTIAL_GRID

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        grids = []
        for grid in (self.subgaussian_grid, self.subexponential_grid):
            grids.append(tuple((float(t), float(w)) for t, w in grid))
        object.__setattr__(self, "subgaussian_grid", grids[0])
        object.__setattr__(self, "subexponential_grid", grids[1])

    @classmethod
    def from_json(cls, path) -> "ValidationConfig":
        with open(path) as fh:
            data = json.load(fh)
        data.pop("out", None)
        return cls(**data)


def run_validation(cfg: ValidationConfig, out_dir) -> Path:
    """Validate both tails over their grids; write ``validation.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    sections = []

    points = [validate_subgaussian_tail(cfg.trials, cfg.d1, cfg.d2, cfg.horizon,
                                        cfg.sigma, thr, w, rng,
                                        matrix_source=cfg.matrix_source,
                                        x_max=cfg.x_max)
              for thr, w in cfg.subgaussian_grid]
    sections.append({"noise_kind": "sub_gaussian",
                     "tail_params": {"sigma": cfg.sigma, "d1": cfg.d1, "d2": cfg.d2,
                                     "horizon": cfg.horizon,
                                     "matrix_source": cfg.matrix_source},
                     "points": [p.to_dict() for p in points]})

    points = [validate_subexponential_tail(cfg.trials, cfg.d1, cfg.d2, cfg.horizon,
                                           cfg.lambda_se, cfg.x_max, thr, w, rng,
                                           matrix_source=cfg.matrix_source)
              for thr, w in cfg.subexponential_grid]
    sections.append({"noise_kind": "sub_exponential",
                     "tail_params": {"lambda": cfg.lambda_se, "x_max": cfg.x_max,
                                     "d1": cfg.d1, "d2": cfg.d2,
                                     "horizon": cfg.horizon,
                                     "matrix_source": cfg.matrix_source},
                     "points": [p.to_dict() for p in points]})

    report = {
        "backend": BACKEND,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "sections": sections,
        "elapsed_seconds": time.perf_counter() - started,
    }
    path = out / "validation.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def default_config_for(model: str, **overrides) -> ExperimentConfig:
    """The standard 5x5 rank-1 configuration for a model family."""
    return replace(ExperimentConfig(model=model), **overrides)
