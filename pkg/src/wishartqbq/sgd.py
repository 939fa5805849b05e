"""Plain and averaged SGD on the random quadratic objective.

Iteration ``k`` (1-based) draws one function ``f_k``, evaluates its gradient
at the previous iterate and steps::

    x^k = x^{k-1} - gamma * grad f_k(x^{k-1})

ASGD reports the running mean ``xbar^k = (x^1 + ... + x^k) / k`` of that same
sequence, with ``xbar^0 = x^0``. Both methods are advanced in one pass over a
shared draw stream, so for a given seed they see identical functions and the
underlying SGD iterates are bit-identical.

Metrics are recorded at multiples of ``record_stride``, at roughly
log-spaced checkpoints, and at the final iteration. The noise of a method at
iteration ``k`` is ``grad f_k - grad f`` evaluated at that method's previous
reported point.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ._rng import RngLike, RngSeed, as_generator
from .errors import DivergenceError, InvalidParameterError
from .matgen import SpdMatrix
from .quadmodel import QuadraticModel, StochasticDraw, noise_covariance, sample_functions

__all__ = [
    "DIVERGENCE_BOUND",
    "Method",
    "RunOutput",
    "SgdConfig",
    "TrajectoryRecord",
    "normalized_start",
    "noise_metrics",
    "record_points",
    "run_asgd",
    "run_both",
    "run_sgd",
]

DIVERGENCE_BOUND = 1e12
_BLOCK = 4096


class Method(str, enum.Enum):
    SGD = "sgd"
    ASGD = "asgd"


@dataclass(frozen=True)
class SgdConfig:
    """Run settings.

    ``step_length`` may be zero (a frozen run); negative steps are rejected.
    ``keep_history`` stores every reported iterate, which is only sensible
    at small ``max_iters``.
    """

    step_length: float = 1e-3
    max_iters: int = 100_000
    record_stride: int = 1000
    seed: RngSeed = field(default_factory=lambda: RngSeed(0))
    log_checkpoints: bool = True
    keep_history: bool = False

    def __post_init__(self):
        if not np.isfinite(self.step_length) or self.step_length < 0:
            raise InvalidParameterError(f"step length must be finite and non-negative, got {self.step_length!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise InvalidParameterError(f"record_stride must be a positive integer, got {self.record_stride!r}")


@dataclass(frozen=True)
class TrajectoryRecord:
    iter: int
    grad_norm: float
    dist_opt: float
    noise_mean_err: float
    cov_dist: float


@dataclass(frozen=True)
class RunOutput:
    method: Method
    records: list
    final_x: np.ndarray
    history: Optional[np.ndarray] = None

    def column(self, name):
        """Metric `name` across records as an array."""
        return np.array([getattr(r, name) for r in self.records])


def normalized_start(n, rng: RngLike):
    """Standard normal vector scaled to unit Euclidean norm."""
    x = as_generator(rng).standard_normal(int(n))
    return x / np.linalg.norm(x)


def record_points(max_iters, stride, log_checkpoints=True):
    """Sorted iteration indices at which metrics are captured."""
    pts = set(range(stride, max_iters + 1, stride))
    pts.add(max_iters)
    if log_checkpoints:
        decades = np.log10(max_iters)
        pts.update(int(v) for v in np.unique(np.round(10 ** np.arange(0, decades, 0.1))))
    return np.array(sorted(p for p in pts if 1 <= p <= max_iters), dtype=np.int64)


def noise_metrics(model: QuadraticModel, x_hist_point, running_noise_mean, scale: SpdMatrix):
    """Distance of the noise statistics from their values at the optimum.

    Returns
    -------
    noise_mean_err : float
        ``||running_noise_mean||_2``; the exact noise mean is zero.
    cov_dist : float
        ``||Cov(xi) - Sigma||_2`` with the covariance at `x_hist_point` taken
        from the closed form.
    """
    mean_err = float(np.linalg.norm(running_noise_mean))
    cov = noise_covariance(model, x_hist_point).cov
    return mean_err, float(np.linalg.norm(cov - scale.entries, 2))


def _draw_stream(model, cfg, draws):
    if draws is not None:
        for d in draws:
            yield np.asarray(d.a_vec, dtype=float), np.asarray(d.b_vec, dtype=float)
        return
    g = cfg.seed.generator()
    done = 0
    while done < cfg.max_iters:
        size = min(_BLOCK, cfg.max_iters - done)
        a, b = sample_functions(model, g, size)
        yield from zip(a, b)
        done += size


def run_both(model: QuadraticModel, x0, cfg: SgdConfig, draws: Optional[Iterable[StochasticDraw]] = None):
    """Run SGD and ASGD over one shared draw stream.

    Parameters
    ----------
    model : QuadraticModel
    x0 : (n,) array_like
        Starting point.
    cfg : SgdConfig
    draws : iterable of StochasticDraw, optional
        Replaces the seeded draw stream; must yield at least
        ``cfg.max_iters`` items. Used to inject deterministic functions.

    Returns
    -------
    dict
        ``{Method.SGD: RunOutput, Method.ASGD: RunOutput}``.

    Raises
    ------
    DivergenceError
        If ``||x^k||_2`` exceeds :data:`DIVERGENCE_BOUND`.
    """
    x = np.array(x0, dtype=float)
    n = model.dim
    if x.shape != (n,):
        raise InvalidParameterError(f"start point has shape {x.shape}, expected {(n,)}")
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("start point must be finite")
    h = model.cached_hessian
    gamma = float(cfg.step_length)
    bound2 = DIVERGENCE_BOUND**2
    rec_at = record_points(cfg.max_iters, cfg.record_stride, cfg.log_checkpoints)
    next_rec = 0

    xbar = x.copy()
    # running sums of gradients and of the points they were taken at
    g_sum, x_sum = np.zeros(n), np.zeros(n)
    gb_sum, xb_sum = np.zeros(n), np.zeros(n)
    records = {Method.SGD: [], Method.ASGD: []}
    hist = hist_bar = None
    if cfg.keep_history:
        hist = np.empty((cfg.max_iters + 1, n))
        hist_bar = np.empty((cfg.max_iters + 1, n))
        hist[0] = hist_bar[0] = x

    stream = _draw_stream(model, cfg, draws)
    for k in range(1, cfg.max_iters + 1):
        try:
            a, b = next(stream)
        except StopIteration:
            raise InvalidParameterError(f"draw source exhausted after {k - 1} iterations") from None
        g = a * (a @ x) + b
        g_sum += g
        x_sum += x
        gb_sum += a * (a @ xbar) + b
        xb_sum += xbar
        x = x - gamma * g
        if x @ x > bound2 or not np.isfinite(x).all():
            raise DivergenceError(k, float(np.linalg.norm(x)))
        xbar = xbar + (x - xbar) / k
        if hist is not None:
            hist[k] = x
            hist_bar[k] = xbar
        if next_rec < len(rec_at) and k == rec_at[next_rec]:
            next_rec += 1
            for method, point, gs, xs in (
                (Method.SGD, x, g_sum, x_sum),
                (Method.ASGD, xbar, gb_sum, xb_sum),
            ):
                mean_err, cov_dist = noise_metrics(model, point, (gs - h @ xs) / k, model.scale)
                records[method].append(
                    TrajectoryRecord(
                        iter=k,
                        grad_norm=float(np.linalg.norm(h @ point)),
                        dist_opt=float(np.linalg.norm(point)),
                        noise_mean_err=mean_err,
                        cov_dist=cov_dist,
                    )
                )
    return {
        Method.SGD: RunOutput(Method.SGD, records[Method.SGD], x, hist),
        Method.ASGD: RunOutput(Method.ASGD, records[Method.ASGD], xbar, hist_bar),
    }


def run_sgd(model: QuadraticModel, x0, cfg: SgdConfig, draws=None) -> RunOutput:
    """Plain SGD; metrics are taken at the last iterate."""
    return run_both(model, x0, cfg, draws)[Method.SGD]


def run_asgd(model: QuadraticModel, x0, cfg: SgdConfig, draws=None) -> RunOutput:
    """Averaged SGD; metrics are taken at the running mean of the SGD iterates."""
    return run_both(model, x0, cfg, draws)[Method.ASGD]
