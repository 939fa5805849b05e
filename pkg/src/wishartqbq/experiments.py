"""Experiment runners behind the CLI.

Each run ``r`` of an experiment owns two RNG streams derived from the base
seed: stream ``2r`` generates the problem instance (matrices, start point)
and stream ``2r + 1`` drives the sampling (Wishart draws or SGD functions).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._rng import RngSeed
from .errors import ConfigError
from .matgen import SpdMatrix, random_constrained_psd, random_spd, random_symmetric
from .moments import (
    empirical_qbq_path,
    expected_qbq,
    expected_qbq_eigen,
    expected_qbq_kronecker,
    relative_error,
    second_moment,
)
from .quadmodel import QuadraticModel
from .sgd import Method, SgdConfig, normalized_start, run_both
from .wishart import WishartParams

__all__ = [
    "ConvergenceRow",
    "Experiment",
    "ExperimentConfig",
    "MomentCheck",
    "build_sgd_setup",
    "loglog_slope",
    "moment_check",
    "moment_convergence",
    "moment_convergence_errors",
    "run_seeds",
    "sgd_compare",
    "summarize_convergence",
    "tail_variance",
    "asgd_wins",
]

DEFAULT_GRID = (1, 10, 100, 1000, 10_000, 100_000)
CHECK_THRESHOLD = 1e-10


class Experiment(str, enum.Enum):
    MOMENT_CONVERGENCE = "moment_convergence"
    SGD_COMPARE = "sgd_compare"
    MOMENT_CHECK = "moment_check"


def run_seeds(seed, runs):
    """Instance seeds for `runs` runs; the sampling stream is the next id."""
    return [RngSeed(seed, 2 * r) for r in range(runs)]


def _sampling_stream(s: RngSeed):
    return s.stream(s.stream_id + 1)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    n: int = 10
    k: int = 3
    seeds: list = field(default_factory=lambda: run_seeds(42, 10))
    sample_grid: tuple = DEFAULT_GRID
    sgd: Optional[SgdConfig] = None
    output_path: Optional[str] = None
    norm: float = 1.0
    cond: float = 5.0
    identity: bool = False

    def __post_init__(self):
        object.__setattr__(self, "experiment", Experiment(self.experiment))
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        grid = tuple(int(m) for m in self.sample_grid)
        if self.experiment is Experiment.MOMENT_CONVERGENCE:
            if not grid:
                raise ConfigError("sample grid is empty")
            if grid[0] < 1 or any(a >= b for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"sample grid must be strictly increasing positive counts, got {list(grid)}")
        object.__setattr__(self, "sample_grid", grid)
        if self.experiment is Experiment.SGD_COMPARE and self.sgd is None:
            raise ConfigError("sgd_compare needs an SGD configuration")


@dataclass(frozen=True)
class ConvergenceRow:
    m: int
    mean_rel_err: float
    std_rel_err: float


def moment_convergence_errors(cfg: ExperimentConfig):
    """Relative spectral-norm errors of the nested Monte Carlo estimate.

    Returns an array of shape ``(len(cfg.seeds), len(cfg.sample_grid))``.
    """
    errs = np.empty((len(cfg.seeds), len(cfg.sample_grid)))
    for i, s in enumerate(cfg.seeds):
        g = s.generator()
        b = random_symmetric(cfg.n, g)
        params = WishartParams(random_spd(cfg.n, g), cfg.k)
        exact = expected_qbq_eigen(params, b).value
        path = empirical_qbq_path(params, b, cfg.sample_grid, _sampling_stream(s))
        errs[i] = [relative_error(est, exact) for est in path]
    return errs


def summarize_convergence(grid, errs):
    """Mean and population standard deviation across runs, per grid point."""
    return [
        ConvergenceRow(int(m), float(col.mean()), float(col.std()))
        for m, col in zip(grid, np.asarray(errs).T)
    ]


def moment_convergence(cfg: ExperimentConfig):
    return summarize_convergence(cfg.sample_grid, moment_convergence_errors(cfg))


def loglog_slope(x, y):
    """Least-squares slope of ``log10(y)`` against ``log10(x)``."""
    return float(np.polyfit(np.log10(x), np.log10(y), 1)[0])


def build_sgd_setup(n, norm, cond, rng):
    """Random instance: SPD scale, constrained PSD ``A``, unit-norm start."""
    scale = random_spd(n, rng)
    a = random_constrained_psd(n, norm, cond, rng)
    x0 = normalized_start(n, rng)
    return QuadraticModel(a, scale), x0


def sgd_compare(cfg: ExperimentConfig):
    """Coupled SGD/ASGD runs, one fresh instance per seed.

    Returns a list with one ``{Method: RunOutput}`` dict per seed.
    """
    out = []
    for s in cfg.seeds:
        model, x0 = build_sgd_setup(cfg.n, cfg.norm, cfg.cond, s.generator())
        run_cfg = SgdConfig(
            step_length=cfg.sgd.step_length,
            max_iters=cfg.sgd.max_iters,
            record_stride=cfg.sgd.record_stride,
            seed=_sampling_stream(s),
            log_checkpoints=cfg.sgd.log_checkpoints,
        )
        out.append(run_both(model, x0, run_cfg))
    return out


def tail_variance(values, fraction=0.1):
    """Sample variance of the last `fraction` of `values` (at least two points)."""
    values = np.asarray(values)
    tail = values[-max(2, int(round(fraction * len(values)))):]
    return float(np.var(tail, ddof=1))


def asgd_wins(runs):
    """Per-seed verdict: ASGD ends lower on both norms and fluctuates less."""
    verdicts = []
    for r in runs:
        sgd, asgd = r[Method.SGD], r[Method.ASGD]
        verdicts.append(
            asgd.records[-1].grad_norm <= sgd.records[-1].grad_norm
            and asgd.records[-1].dist_opt <= sgd.records[-1].dist_opt
            and tail_variance(asgd.column("grad_norm")) < tail_variance(sgd.column("grad_norm"))
        )
    return verdicts


@dataclass(frozen=True)
class MomentCheck:
    seed: RngSeed
    values: dict
    max_path_err: float
    second_moment_err: float

    @property
    def passed(self):
        return max(self.max_path_err, self.second_moment_err) <= CHECK_THRESHOLD


def _frob_rel(a, b):
    den = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / den) if den > 0 else float(np.linalg.norm(a - b))


def moment_check(cfg: ExperimentConfig):
    """Evaluate every closed-form path on one instance per seed."""
    results = []
    for s in cfg.seeds:
        if cfg.identity:
            scale, b = SpdMatrix.identity(cfg.n), np.eye(cfg.n)
        else:
            g = s.generator()
            b = random_symmetric(cfg.n, g)
            scale = random_spd(cfg.n, g)
        params = WishartParams(scale, cfg.k)
        values = {
            "algebraic": expected_qbq(params, b).value,
            "eigen": expected_qbq_eigen(params, b).value,
            "kronecker": expected_qbq_kronecker(params, b).value,
        }
        names = list(values)
        worst = max(
            _frob_rel(values[p], values[q]) for i, p in enumerate(names) for q in names[i + 1:]
        )
        sm = _frob_rel(
            second_moment(params).value, expected_qbq(params, np.eye(cfg.n)).value
        )
        results.append(MomentCheck(s, values, worst, sm))
    return results
