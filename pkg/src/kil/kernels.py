"""Finitely smooth translation-invariant kernels and their Gram matrices.

Each family carries the Sobolev index ``tau`` of its native space, i.e.
the exponent with which the Fourier transform of the radial profile
decays like ``(1 + |w|^2)^(-tau)``:

=================  =====================================  ============
family             profile ``phi(r)``, ``r = |x-z|/sigma``  tau
=================  =====================================  ============
wendland-hat       ``max(1 - r, 0)``  (d = 1 only)           1
matern-half        ``exp(-r)``                              (d+1)/2
matern-three-half  ``(1 + sqrt(3) r) exp(-sqrt(3) r)``      (d+3)/2
=================  =====================================  ============

``sigma`` rescales constants only and leaves ``tau`` unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DuplicateCenters, NumericalFailure

_SQRT3 = np.sqrt(3.0)


def _hat(r):
    return np.maximum(1.0 - r, 0.0)


def _matern_half(r):
    return np.exp(-r)


def _matern_three_half(r):
    return (1.0 + _SQRT3 * r) * np.exp(-_SQRT3 * r)


_PROFILES = {
    "wendland-hat": _hat,
    "matern-half": _matern_half,
    "matern-three-half": _matern_three_half,
}

FAMILIES = tuple(_PROFILES)


@dataclass(frozen=True)
class Kernel:
    family: str
    sigma: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if self.family not in _PROFILES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; choose from {', '.join(FAMILIES)}"
            )
        if not self.sigma > 0:
            raise ValueError("shape parameter sigma must be positive")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        # the truncated power max(1-r, 0) is positive definite on R^1 only
        if self.family == "wendland-hat" and self.dim != 1:
            raise ValueError("wendland-hat is only positive definite for d = 1")

    @classmethod
    def parse(cls, text: str, dim: int = 1) -> "Kernel":
        """Parse ``"family:sigma"``; ``sigma`` defaults to 1."""
        family, _, sigma = text.strip().partition(":")
        try:
            return cls(family.strip(), float(sigma) if sigma else 1.0, dim)
        except ValueError as exc:
            raise ValueError(f"bad kernel descriptor {text!r}: {exc}") from None

    @property
    def descriptor(self) -> str:
        return f"{self.family}:{self.sigma!r}"

    @property
    def tau(self) -> float:
        if self.family == "wendland-hat":
            return 1.0
        if self.family == "matern-half":
            return (self.dim + 1) / 2
        return (self.dim + 3) / 2

    def profile(self, r):
        return _PROFILES[self.family](np.asarray(r, dtype=float) / self.sigma)

    def __call__(self, X, Z) -> np.ndarray:
        """Kernel matrix ``k(x_i, z_j)`` for point arrays ``X`` and ``Z``."""
        X = _points(X, self.dim)
        Z = _points(Z, self.dim)
        return self.profile(cdist(X, Z))

    def eval(self, x, z) -> float:
        return float(self(x, z)[0, 0])

    def diag(self, X) -> np.ndarray:
        return np.full(len(_points(X, self.dim)), float(self.profile(0.0)))


def _points(X, dim):
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X[:, None] if dim == 1 else X.reshape(-1, dim)
    return X


def gram(kernel: Kernel, X) -> np.ndarray:
    """Kernel matrix ``A[i, j] = k(x_i, x_j)``, exactly symmetric.

    Raises :class:`DuplicateCenters` if two centers coincide.
    """
    X = _points(X, kernel.dim)
    dist = cdist(X, X)
    if len(X) > 1:
        off = dist[np.triu_indices(len(X), 1)]
        if off.min() <= 0.0:
            raise DuplicateCenters("gram matrix needs pairwise distinct centers")
    A = np.triu(kernel.profile(dist))
    return A + np.triu(A, 1).T


def min_eigenvalue(A) -> float:
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise NumericalFailure("matrix has non-finite entries")
    return float(np.linalg.eigvalsh(A)[0])
