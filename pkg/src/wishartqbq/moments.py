r"""Expected value of the Wishart quadratic form ``E(QBQ)``.

For ``Q ~ W_n(Sigma, k)`` and symmetric ``B``,

.. math::

    E(QBQ) = k\,\mathrm{tr}(B\Sigma)\,\Sigma + (k^2 + k)\,\Sigma B \Sigma.

Three independent routes to this matrix are provided:

* :func:`expected_qbq` evaluates the closed form directly.
* :func:`expected_qbq_eigen` works in the eigenbasis ``Sigma = U D U^T``,
  where the single-outer-product moment becomes a Hadamard product with
  ``diag(D) diag(D)^T``.
* :func:`expected_qbq_kronecker` builds the ``n^2 x n^2`` fourth-moment
  matrix ``E(Q (x) Q)`` with the commutation matrix and applies it to
  ``vec(B)``.

:func:`empirical_qbq` is the Monte Carlo estimator the closed forms are
checked against. ``vec`` stacks columns throughout.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._rng import RngLike, as_generator
from .errors import CaseMismatchError, InvalidDimensionError, InvalidParameterError, SizeCapError
from .matgen import symmetrize
from .wishart import WishartParams, sample_wishart_many

__all__ = [
    "CommutationMatrix",
    "MomentResult",
    "SpecialCase",
    "build_commutation",
    "empirical_qbq",
    "empirical_qbq_path",
    "expected_qbq",
    "expected_qbq_eigen",
    "expected_qbq_kronecker",
    "expected_qbq_special",
    "mat",
    "relative_error",
    "second_moment",
    "vec",
]

KRONECKER_MAX_DIM = 50
_CHUNK = 8192


@dataclass(frozen=True)
class MomentResult:
    value: np.ndarray
    path: str

    def __array__(self, dtype=None, copy=None):
        return self.value if dtype is None else self.value.astype(dtype)


class SpecialCase(str, enum.Enum):
    K_ONE = "k_one"
    SIGMA_SCALAR_IDENTITY = "sigma_scalar_identity"


@dataclass(frozen=True)
class CommutationMatrix:
    n: int
    entries: np.ndarray

    def __matmul__(self, other):
        return self.entries @ other


def vec(m):
    """Stack the columns of `m` into one vector."""
    return np.asarray(m).reshape(-1, order="F")


def mat(v, n):
    """Inverse of :func:`vec` for an ``n x n`` matrix."""
    return np.asarray(v).reshape((n, n), order="F")


def relative_error(estimate, exact, ord=2):
    """``||exact - estimate|| / ||exact||``; spectral norm by default."""
    exact = np.asarray(exact)
    return np.linalg.norm(exact - np.asarray(estimate), ord) / np.linalg.norm(exact, ord)


def _check_b(params: WishartParams, b):
    b = np.asarray(b, dtype=float)
    n = params.dim
    if b.shape != (n, n):
        raise InvalidParameterError(f"B has shape {b.shape}, expected {(n, n)}")
    return b


def expected_qbq(params: WishartParams, b) -> MomentResult:
    """Closed form ``k tr(B Sigma) Sigma + (k^2 + k) Sigma B Sigma``."""
    b = _check_b(params, b)
    s = params.scale.entries
    k = params.dof
    sbs = s @ b @ s
    value = k * np.trace(b @ s) * s + (k * k + k) * sbs
    return MomentResult(symmetrize(value), "algebraic")


def expected_qbq_eigen(params: WishartParams, b) -> MomentResult:
    """Eigenbasis evaluation using the cached ``Sigma = U D U^T``.

    With ``Bt = U^T B U`` and ``d = diag(D)``, one outer product contributes
    ``U [2 (d d^T) o Bt + tr(Bt D) D] U^T``; the ``k^2 - k`` cross terms
    between independent outer products each contribute ``Sigma B Sigma``.
    """
    b = _check_b(params, b)
    u, d = params.scale.eig_u, params.scale.eig_d
    s = params.scale.entries
    k = params.dof
    bt = u.T @ b @ u
    inner = 2.0 * np.outer(d, d) * bt + np.diag(np.dot(np.diag(bt), d) * d)
    value = k * (u @ inner @ u.T) + (k * k - k) * (s @ b @ s)
    return MomentResult(symmetrize(value), "eigen")


def build_commutation(n) -> CommutationMatrix:
    """Permutation matrix ``K`` with ``K @ vec(M) == vec(M.T)``."""
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {n!r}")
    n = int(n)
    idx = np.arange(n * n)
    # vec index of entry (i, j) is i + j*n; transposing sends it to j + i*n
    i, j = idx % n, idx // n
    k = np.zeros((n * n, n * n))
    k[j + i * n, idx] = 1.0
    return CommutationMatrix(n, k)


def fourth_moment_kron(params: WishartParams):
    """``E(Q (x) Q) = k^2 S(x)S + k vec(S) vec(S)^T + k K (S(x)S)``."""
    s = params.scale.entries
    k = params.dof
    ss = np.kron(s, s)
    vs = vec(s)
    return k * k * ss + k * np.outer(vs, vs) + k * (build_commutation(params.dim) @ ss)


def expected_qbq_kronecker(params: WishartParams, b, max_dim=KRONECKER_MAX_DIM) -> MomentResult:
    """``mat(E(Q (x) Q) vec(B))``.

    Memory grows as ``n^4``; dimensions above `max_dim` raise
    :class:`SizeCapError`.
    """
    b = _check_b(params, b)
    n = params.dim
    if n > max_dim:
        raise SizeCapError(f"Kronecker path limited to n <= {max_dim}, got n = {n}")
    value = mat(fourth_moment_kron(params) @ vec(b), n)
    return MomentResult(symmetrize(value), "kronecker")


def second_moment(params: WishartParams) -> MomentResult:
    """``E(Q^2) = (k^2 + k) Sigma^2 + k tr(Sigma) Sigma``."""
    s = params.scale.entries
    k = params.dof
    value = (k * k + k) * (s @ s) + k * np.trace(s) * s
    return MomentResult(symmetrize(value), "algebraic")


def _scalar_identity_level(s, rtol=1e-12):
    sigma2 = np.mean(np.diag(s))
    if sigma2 <= 0 or np.linalg.norm(s - sigma2 * np.eye(len(s))) > rtol * np.linalg.norm(s):
        return None
    return sigma2


def expected_qbq_special(params: WishartParams, b, case) -> MomentResult:
    """Simplified closed forms.

    ``k_one``
        Requires ``k == 1``: ``tr(B Sigma) Sigma + 2 Sigma B Sigma``.
    ``sigma_scalar_identity``
        Requires ``Sigma == sigma^2 I`` (relative tolerance 1e-12):
        ``sigma^4 [(k^2 + k) B + k tr(B) I]``, which is
        ``sigma^4 [2B + tr(B) I]`` for ``k == 1``.

    Raises
    ------
    CaseMismatchError
        If the inputs do not satisfy the requested case.
    """
    case = SpecialCase(case)
    b = _check_b(params, b)
    s = params.scale.entries
    k = params.dof
    if case is SpecialCase.K_ONE:
        if k != 1:
            raise CaseMismatchError(f"k_one formula needs k = 1, got k = {k}")
        value = np.trace(b @ s) * s + 2.0 * (s @ b @ s)
    else:
        sigma2 = _scalar_identity_level(s)
        if sigma2 is None:
            raise CaseMismatchError("scale matrix is not a multiple of the identity")
        value = sigma2 * sigma2 * ((k * k + k) * b + k * np.trace(b) * np.eye(len(b)))
    return MomentResult(symmetrize(value), case.value)


def empirical_qbq_path(params: WishartParams, b, grid, rng: RngLike, chunk=_CHUNK):
    """Nested Monte Carlo estimates of ``E(QBQ)`` along a growing sample stream.

    The estimate at ``grid[i]`` reuses every sample behind ``grid[i - 1]``,
    so the whole path costs ``max(grid)`` draws. Running sums are kept in
    extended precision.

    Parameters
    ----------
    params : WishartParams
    b : (n, n) array_like
    grid : sequence of int
        Strictly increasing positive sample counts.
    rng : RngSeed or numpy.random.Generator

    Returns
    -------
    list of ndarray
        One ``(n, n)`` estimate per grid point.
    """
    b = _check_b(params, b)
    grid = [int(m) for m in grid]
    if not grid or grid[0] < 1 or any(a >= c for a, c in zip(grid, grid[1:])):
        raise InvalidParameterError(f"sample grid must be strictly increasing positive counts, got {grid}")
    g = as_generator(rng)
    n = params.dim
    total = np.zeros((n, n), dtype=np.longdouble)
    done = 0
    out = []
    for target in grid:
        while done < target:
            size = min(chunk, target - done)
            q = sample_wishart_many(params, g, size)
            total += (q @ b @ q).sum(axis=0)
            done += size
        out.append(symmetrize((total / target).astype(float)))
    return out


def empirical_qbq(params: WishartParams, b, m, rng: RngLike) -> MomentResult:
    """``(1/m) sum_i Q_i B Q_i`` over `m` independent Wishart draws."""
    if int(m) != m or m < 1:
        raise InvalidParameterError(f"sample count must be a positive integer, got {m!r}")
    return MomentResult(empirical_qbq_path(params, b, [m], rng)[0], "empirical")
