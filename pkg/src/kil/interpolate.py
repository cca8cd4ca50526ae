"""Kernel interpolation, ridge-regularized interpolation and L2 errors.

A *field* is any callable mapping an ``(m, d)`` point array to ``m``
values.  Closed-form targets, :class:`Interpolant` objects, spectral
reconstructions and density images all qualify.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import EvaluationFailure, IllConditioned
from .geometry import Region, quadrature
from .kernels import Kernel, _points, gram


@dataclass(frozen=True, eq=False)
class Interpolant:
    """``s(x) = sum_j coefficients[j] * k(x, centers[j])``."""

    kernel: Kernel
    centers: np.ndarray
    coefficients: np.ndarray
    ridge: float = 0.0

    def __post_init__(self):
        if len(self.centers) != len(self.coefficients):
            raise ValueError("one coefficient per center required")

    def __call__(self, points) -> np.ndarray:
        return self.kernel(points, self.centers) @ self.coefficients

    evaluate = __call__

    def native_norm_sq(self) -> float:
        """``alpha^T A alpha``, the squared native-space norm."""
        a = self.coefficients
        return float(a @ gram(self.kernel, self.centers) @ a)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kernel": self.kernel.descriptor,
                "dim": self.kernel.dim,
                "ridge": self.ridge,
                "centers": self.centers.tolist(),
                "coefficients": self.coefficients.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Interpolant":
        data = json.loads(text)
        kernel = Kernel.parse(data["kernel"], dim=data["dim"])
        return cls(
            kernel,
            np.asarray(data["centers"], dtype=float).reshape(-1, kernel.dim),
            np.asarray(data["coefficients"], dtype=float),
            float(data["ridge"]),
        )


def fit(kernel: Kernel, X, values, ridge: float = 0.0) -> Interpolant:
    """Solve ``(A_X + ridge * I) alpha = values`` by Cholesky.

    No jitter is added: if the factorization breaks down,
    :class:`IllConditioned` is raised and the caller should pass a
    positive ``ridge``.
    """
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    X = _points(X, kernel.dim)
    values = np.asarray(values, dtype=float).ravel()
    if len(values) != len(X):
        raise ValueError(f"got {len(values)} values for {len(X)} centers")
    A = gram(kernel, X)
    if ridge:
        A[np.diag_indices_from(A)] += ridge
    try:
        factor = cho_factor(A, lower=True, check_finite=True)
    except LinAlgError:
        raise IllConditioned(
            f"Cholesky failed on a {len(X)}x{len(X)} kernel system; set ridge > 0"
        ) from None
    alpha = cho_solve(factor, values)
    return Interpolant(kernel, X, alpha, float(ridge))


def interpolate(kernel: Kernel, X, f, ridge: float = 0.0) -> Interpolant:
    """Fit to the values of field ``f`` at the centers ``X``."""
    X = _points(X, kernel.dim)
    return fit(kernel, X, f(X), ridge)


def l2_error(f, g, region: Region, quad_level: int) -> float:
    """Midpoint-rule approximation of ``||f - g||_{L2(region)}``."""
    nodes, weights = quadrature(region, quad_level)
    return l2_error_on(f, g, nodes, weights)


def l2_error_on(f, g, nodes, weights) -> float:
    diff = field_values(f, nodes) - field_values(g, nodes)
    return float(np.sqrt(weights @ diff**2))


def field_values(field, nodes) -> np.ndarray:
    """Evaluate ``field`` at ``nodes``, rejecting non-finite values."""
    vals = np.asarray(field(nodes), dtype=float).ravel()
    bad = ~np.isfinite(vals)
    if bad.any():
        node = nodes[np.argmax(bad)]
        raise EvaluationFailure(f"non-finite field value at node {node}", node=node)
    return vals
