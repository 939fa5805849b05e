"""Seeded random matrices and symmetric eigendecomposition.

Symmetric matrices are plain ``ndarray`` objects that are symmetric by
construction. Scale matrices are wrapped in :class:`SpdMatrix`, which
validates positive definiteness once and caches the eigendecomposition and
Cholesky factor for reuse.
"""
from __future__ import annotations

import numpy as np

from ._rng import RngLike, as_generator
from .errors import InvalidDimensionError, InvalidParameterError, NumericalFailureError

__all__ = [
    "SpdMatrix",
    "eigendecompose",
    "random_constrained_psd",
    "random_orthogonal",
    "random_spd",
    "random_symmetric",
    "symmetrize",
]

SYMMETRY_RTOL = 1e-12


def _check_dim(n):
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def symmetrize(m):
    """Return ``(m + m.T) / 2``, which is exactly symmetric in floating point."""
    m = np.asarray(m, dtype=float)
    return (m + m.T) / 2


def _as_symmetric(m, name="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidDimensionError(f"{name} must be square, got shape {m.shape}")
    scale = max(np.linalg.norm(m), np.finfo(float).tiny)
    if np.linalg.norm(m - m.T) > SYMMETRY_RTOL * scale:
        raise InvalidParameterError(f"{name} is not symmetric")
    return symmetrize(m)


def eigendecompose(m):
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    m : (n, n) array_like
        Symmetric matrix.

    Returns
    -------
    u : (n, n) ndarray
        Orthogonal matrix whose columns are eigenvectors.
    d : (n,) ndarray
        Eigenvalues sorted in descending order, so that
        ``m == u @ np.diag(d) @ u.T`` up to roundoff.

    Raises
    ------
    InvalidParameterError
        If `m` is not symmetric.
    NumericalFailureError
        If LAPACK fails to converge or returns non-finite values.
    """
    m = _as_symmetric(m)
    if not np.all(np.isfinite(m)):
        raise NumericalFailureError("matrix has non-finite entries")
    try:
        d, u = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigendecomposition failed: {exc}") from exc
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(u))):
        raise NumericalFailureError("eigendecomposition returned non-finite values")
    order = np.argsort(d)[::-1]
    return u[:, order], d[order]


class SpdMatrix:
    """Symmetric positive definite matrix with cached factorizations.

    Attributes
    ----------
    entries : (n, n) ndarray
        The matrix itself, exactly symmetric.
    eig_u : (n, n) ndarray
        Orthogonal eigenvector matrix.
    eig_d : (n,) ndarray
        Positive eigenvalues, descending.
    chol : (n, n) ndarray
        Lower Cholesky factor ``L`` with ``L @ L.T == entries``.

    All arrays are read-only.
    """

    __slots__ = ("entries", "eig_u", "eig_d", "chol")

    def __init__(self, entries):
        m = _as_symmetric(entries, "scale matrix")
        u, d = eigendecompose(m)
        if d[-1] <= 0:
            raise InvalidParameterError(
                f"matrix is not positive definite (smallest eigenvalue {d[-1]:.3e})"
            )
        try:
            chol = np.linalg.cholesky(m)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError(f"Cholesky factorization failed: {exc}") from exc
        object.__setattr__(self, "entries", _frozen(m))
        object.__setattr__(self, "eig_u", _frozen(u))
        object.__setattr__(self, "eig_d", _frozen(d))
        object.__setattr__(self, "chol", _frozen(chol))

    def __setattr__(self, name, value):
        raise AttributeError("SpdMatrix is immutable")

    @classmethod
    def identity(cls, n, sigma2=1.0):
        """``sigma2 * I_n``."""
        return cls(sigma2 * np.eye(_check_dim(n)))

    @property
    def dim(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim}, eig_range=[{self.eig_d[-1]:.3g}, {self.eig_d[0]:.3g}])"


def random_symmetric(n, rng: RngLike):
    """``(M + M.T) / 2`` for ``M`` with i.i.d. standard normal entries."""
    n = _check_dim(n)
    g = as_generator(rng)
    return symmetrize(g.standard_normal((n, n)))


def random_spd(n, rng: RngLike):
    """Gram matrix ``G G^T + 1e-6 n I`` of a standard normal ``G``."""
    n = _check_dim(n)
    g = as_generator(rng)
    gm = g.standard_normal((n, n))
    return SpdMatrix(symmetrize(gm @ gm.T + 1e-6 * n * np.eye(n)))


def random_orthogonal(n, rng: RngLike):
    """Haar-distributed orthogonal matrix from the QR factorization of a Gaussian matrix."""
    n = _check_dim(n)
    g = as_generator(rng)
    q, r = np.linalg.qr(g.standard_normal((n, n)))
    # sign fix makes the distribution Haar and the result unique
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def random_constrained_psd(n, norm, cond, rng: RngLike):
    """Symmetric PSD matrix with prescribed spectral norm and condition number.

    The spectrum contains `norm` and ``norm / cond`` exactly; the remaining
    ``n - 2`` eigenvalues are uniform on ``[norm / cond, norm]``. The
    eigenbasis is a random orthogonal matrix.

    Parameters
    ----------
    n : int
        Dimension, at least 2.
    norm : float
        Largest eigenvalue (equal to the spectral norm).
    cond : float
        Ratio of largest to smallest eigenvalue, at least 1.
    rng : RngSeed or numpy.random.Generator

    Returns
    -------
    (n, n) ndarray
    """
    n = _check_dim(n)
    if n < 2:
        raise InvalidDimensionError(f"need n >= 2 to fix both extreme eigenvalues, got {n}")
    if not np.isfinite(norm) or norm <= 0:
        raise InvalidParameterError(f"norm must be positive, got {norm!r}")
    if not np.isfinite(cond) or cond < 1:
        raise InvalidParameterError(f"condition number must be >= 1, got {cond!r}")
    g = as_generator(rng)
    lo = norm / cond
    eigs = np.concatenate(([norm, lo], g.uniform(lo, norm, size=n - 2)))
    u = random_orthogonal(n, g)
    return symmetrize((u * eigs) @ u.T)
