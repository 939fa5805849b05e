"""Central Wishart sampling.

``Q ~ W_n(Sigma, k)`` is drawn as the sum of ``k`` outer products ``r r^T`` of
independent ``N(0, Sigma)`` vectors. Gaussian vectors are produced as
``L z`` with ``L`` the Cholesky factor of ``Sigma``.

The sample layout is fixed: one Wishart draw consumes a ``(k, n)`` block of
standard normals from the stream, and a batch of ``m`` draws consumes an
``(m, k, n)`` block. Consecutive batches therefore replay exactly the same
matrices as a single large batch, which the Monte Carlo estimators rely on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rng import RngLike, as_generator
from .errors import InvalidDimensionError, InvalidParameterError
from .matgen import SpdMatrix

__all__ = [
    "WishartParams",
    "WishartSample",
    "sample_gaussian_vector",
    "sample_wishart",
    "sample_wishart_many",
    "transform_sample",
]


@dataclass(frozen=True)
class WishartParams:
    scale: SpdMatrix
    dof: int

    def __post_init__(self):
        if not isinstance(self.scale, SpdMatrix):
            object.__setattr__(self, "scale", SpdMatrix(self.scale))
        if int(self.dof) != self.dof or self.dof < 1:
            raise InvalidParameterError(f"degrees of freedom must be a positive integer, got {self.dof!r}")
        object.__setattr__(self, "dof", int(self.dof))

    @property
    def dim(self):
        return self.scale.dim

    def mean(self):
        """First moment ``k * Sigma``."""
        return self.dof * self.scale.entries


@dataclass(frozen=True)
class WishartSample:
    """One Wishart draw.

    ``draws`` holds the ``k`` underlying Gaussian vectors as rows of a
    ``(k, n)`` array when requested, else ``None``.
    """

    q: np.ndarray
    draws: Optional[np.ndarray] = None


def sample_gaussian_vector(scale: SpdMatrix, rng: RngLike, size=None):
    """Draw from ``N(0, scale)``.

    Returns a single ``(n,)`` vector when `size` is None, else an array of
    shape ``(size, n)``.
    """
    g = as_generator(rng)
    n = scale.dim
    shape = (n,) if size is None else (int(size), n)
    return g.standard_normal(shape) @ scale.chol.T


def _outer_sum(r):
    # r: (..., k, n) -> (..., n, n); elementwise loop over k keeps the result exactly symmetric
    return np.einsum("...ki,...kj->...ij", r, r)


def sample_wishart(params: WishartParams, rng: RngLike, keep_draws=False) -> WishartSample:
    g = as_generator(rng)
    r = g.standard_normal((params.dof, params.dim)) @ params.scale.chol.T
    return WishartSample(q=_outer_sum(r), draws=r if keep_draws else None)


def sample_wishart_many(params: WishartParams, rng: RngLike, size):
    """Draw `size` independent Wishart matrices as a ``(size, n, n)`` array.

    Uses the same stream layout as repeated :func:`sample_wishart` calls.
    """
    g = as_generator(rng)
    z = g.standard_normal((int(size), params.dof, params.dim))
    return _outer_sum(z @ params.scale.chol.T)


def transform_sample(sample, c):
    """Congruence ``c^T q c`` of a Wishart draw by a full-column-rank `c`.

    Parameters
    ----------
    sample : WishartSample or (n, n) array_like
    c : (n, m) array_like
        Must have rank ``m``; checked as smallest singular value greater
        than ``1e-10`` times the largest.

    Returns
    -------
    (m, m) ndarray
    """
    q = sample.q if isinstance(sample, WishartSample) else np.asarray(sample, dtype=float)
    c = np.asarray(c, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    if c.ndim != 2 or c.shape[0] != q.shape[-1]:
        raise InvalidDimensionError(f"transform of shape {c.shape} does not match sample dimension {q.shape[-1]}")
    if c.shape[1] > c.shape[0]:
        raise InvalidParameterError("transform has more columns than rows and cannot have full column rank")
    s = np.linalg.svd(c, compute_uv=False)
    if s[0] == 0 or s[-1] <= 1e-10 * s[0]:
        raise InvalidParameterError("transform does not have full column rank")
    return c.T @ q @ c
