"""Random quadratic functions and the noise of their stochastic gradients.

Each draw ``r, b ~ N(0, Sigma)`` (independent) defines

    f_l(x) = 0.5 * (a^T x)^2 + b^T x,   a = A r,

whose expectation is ``f(x) = 0.5 x^T A Sigma A^T x``. The gradient noise
``xi = grad f_l(x) - grad f(x)`` has mean zero and covariance

    Cov(xi) = A E(Q B Q) A^T + Sigma - A Sigma B Sigma A^T,

with ``B = A^T x x^T A`` and ``Q ~ W_n(Sigma, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import RngLike, as_generator
from .errors import InvalidDimensionError, InvalidParameterError
from .matgen import SpdMatrix, symmetrize
from .moments import SpecialCase, expected_qbq_special
from .wishart import WishartParams

__all__ = [
    "NoiseMoments",
    "QuadraticModel",
    "StochasticDraw",
    "noise",
    "noise_covariance",
    "sample_function",
    "sample_functions",
    "stochastic_gradient",
    "stochastic_value",
    "true_gradient",
    "true_value",
]


class QuadraticModel:
    """Fixed invertible ``A`` and scale ``Sigma`` of the random quadratic family.

    The Hessian ``A Sigma A^T`` of the limit objective is computed once and
    cached as ``cached_hessian``.
    """

    __slots__ = ("a_mat", "scale", "cached_hessian", "_params1")

    def __init__(self, a_mat, scale):
        a = np.array(a_mat, dtype=float)
        if not isinstance(scale, SpdMatrix):
            scale = SpdMatrix(scale)
        n = scale.dim
        if a.shape != (n, n):
            raise InvalidDimensionError(f"A has shape {a.shape}, expected {(n, n)}")
        sv = np.linalg.svd(a, compute_uv=False)
        if sv[0] == 0 or sv[-1] <= 1e-12 * sv[0]:
            raise InvalidParameterError("A must be nonsingular")
        a.setflags(write=False)
        hess = symmetrize(a @ scale.entries @ a.T)
        hess.setflags(write=False)
        object.__setattr__(self, "a_mat", a)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "cached_hessian", hess)
        object.__setattr__(self, "_params1", WishartParams(scale, 1))

    def __setattr__(self, name, value):
        raise AttributeError("QuadraticModel is immutable")

    @property
    def dim(self):
        return self.scale.dim


@dataclass(frozen=True)
class StochasticDraw:
    a_vec: np.ndarray
    b_vec: np.ndarray


@dataclass(frozen=True)
class NoiseMoments:
    mean: np.ndarray
    cov: np.ndarray


def _check_x(model, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise InvalidParameterError(f"point has shape {x.shape}, expected {(model.dim,)}")
    return x


def _check_draw(model, draw):
    if draw.a_vec.shape != (model.dim,) or draw.b_vec.shape != (model.dim,):
        raise InvalidParameterError("draw dimension does not match the model")


def sample_functions(model: QuadraticModel, rng: RngLike, size):
    """Draw `size` functions at once.

    Returns ``(a, b)``, two ``(size, n)`` arrays. Each function consumes a
    ``(2, n)`` block of standard normals (``r`` then ``b``), so a batch
    replays exactly what `size` calls of :func:`sample_function` would.
    """
    g = as_generator(rng)
    z = g.standard_normal((int(size), 2, model.dim)) @ model.scale.chol.T
    return z[:, 0] @ model.a_mat.T, z[:, 1]


def sample_function(model: QuadraticModel, rng: RngLike) -> StochasticDraw:
    a, b = sample_functions(model, rng, 1)
    return StochasticDraw(a[0], b[0])


def stochastic_value(draw: StochasticDraw, x):
    """``f_l(x) = 0.5 (a^T x)^2 + b^T x``."""
    x = np.asarray(x, dtype=float)
    return 0.5 * np.dot(draw.a_vec, x) ** 2 + np.dot(draw.b_vec, x)


def true_value(model: QuadraticModel, x):
    x = _check_x(model, x)
    return 0.5 * x @ model.cached_hessian @ x


def stochastic_gradient(model: QuadraticModel, draw: StochasticDraw, x):
    """``a (a^T x) + b``."""
    x = _check_x(model, x)
    _check_draw(model, draw)
    return draw.a_vec * np.dot(draw.a_vec, x) + draw.b_vec


def true_gradient(model: QuadraticModel, x):
    x = _check_x(model, x)
    return model.cached_hessian @ x


def noise(model: QuadraticModel, draw: StochasticDraw, x):
    return stochastic_gradient(model, draw, x) - true_gradient(model, x)


def noise_covariance(model: QuadraticModel, x) -> NoiseMoments:
    """Exact mean and covariance of the gradient noise at `x`.

    Uses the ``k = 1`` closed form ``E(QBQ) = tr(B Sigma) Sigma + 2 Sigma B Sigma``.
    """
    x = _check_x(model, x)
    a = model.a_mat
    s = model.scale.entries
    u = a.T @ x
    b = np.outer(u, u)
    eqbq = expected_qbq_special(model._params1, b, SpecialCase.K_ONE).value
    cov = a @ eqbq @ a.T + s - a @ (s @ b @ s) @ a.T
    return NoiseMoments(mean=np.zeros(model.dim), cov=symmetrize(cov))
