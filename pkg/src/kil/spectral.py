"""Discretized Mercer expansion of the kernel integral operator.

The integral operator ``(T v)(x) = int k(x, z) v(z) dz`` is discretized
with the midpoint rule of :func:`kil.geometry.quadrature`.  The weighted
matrix ``B = W^{1/2} K W^{1/2}`` is symmetric, so its eigenpairs give a
real nonnegative spectrum and eigenfunctions that are orthonormal in the
discrete inner product ``sum_m w_m f(t_m) g(t_m)``.

Power-space norms

    ||f||_theta^2 = sum_j <f, phi_j>^2 / lambda_j^theta

and power kernels ``k^(theta)(x, z) = sum_j lambda_j^theta phi_j(x) phi_j(z)``
are defined *inside* this truncated model.  Eigenfunctions are extended
off the nodes by the Nystrom formula
``phi_j(x) = lambda_j^{-1} sum_m w_m k(x, t_m) phi_j(t_m)``.
"""
from __future__ import annotations

import hashlib
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BelowPowerThreshold, EvaluationFailure, NotPositive, ZeroField
from .geometry import Region, quadrature
from .kernels import Kernel, _points

logger = logging.getLogger(__name__)

CACHE_ENV = "KIL_CACHE_DIR"


@dataclass(frozen=True, eq=False)
class SpectralModel:
    kernel: Kernel
    region: Region
    quad_level: int
    nodes: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray  # descending, all > drop_tol * eigenvalues[0]
    phi: np.ndarray  # phi[j, m] = phi_j(t_m)
    drop_tol: float = 1e-12

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    @property
    def tau(self) -> float:
        return self.kernel.tau

    @property
    def power_threshold(self) -> float:
        """Smallest admissible power-kernel exponent, ``d / (2 tau)``."""
        return self.kernel.dim / (2 * self.kernel.tau)

    def eigenfunctions(self, points) -> np.ndarray:
        """``(J, m)`` table of Nystrom-extended eigenfunctions at ``points``."""
        x = _points(points, self.kernel.dim)
        K = self.kernel(x, self.nodes) * self.weights
        return (self.phi @ K.T) / self.eigenvalues[:, None]

    def eigenfunction(self, j: int):
        """The ``j``-th eigenfunction (0-based) as a field."""
        return lambda points: self.eigenfunctions(points)[j]

    def coefficients(self, f) -> np.ndarray:
        """Discrete L2 coefficients ``c_j = sum_m w_m f(t_m) phi_j(t_m)``."""
        vals = np.asarray(f(self.nodes), dtype=float).ravel()
        if not np.all(np.isfinite(vals)):
            m = int(np.argmax(~np.isfinite(vals)))
            raise EvaluationFailure(
                f"non-finite field value at node {self.nodes[m]}", node=self.nodes[m]
            )
        return self.phi @ (self.weights * vals)

    def reconstruct(self, coeffs):
        """The truncated field ``sum_j coeffs[j] phi_j``."""
        coeffs = np.asarray(coeffs, dtype=float)
        return lambda points: coeffs @ self.eigenfunctions(points)

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".npz")
        os.close(fd)
        np.savez(
            tmp,
            kernel=self.kernel.descriptor,
            dim=self.kernel.dim,
            region=self.region.descriptor,
            quad_level=self.quad_level,
            drop_tol=self.drop_tol,
            nodes=self.nodes,
            weights=self.weights,
            eigenvalues=self.eigenvalues,
            phi=self.phi,
        )
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "SpectralModel":
        with np.load(path) as data:
            return cls(
                kernel=Kernel.parse(str(data["kernel"]), dim=int(data["dim"])),
                region=Region.parse(str(data["region"])),
                quad_level=int(data["quad_level"]),
                nodes=data["nodes"],
                weights=data["weights"],
                eigenvalues=data["eigenvalues"],
                phi=data["phi"],
                drop_tol=float(data["drop_tol"]),
            )


def nystrom(kernel: Kernel, region: Region, quad_level: int, drop_tol: float = 1e-12) -> SpectralModel:
    """Symmetric Nystrom discretization of the integral operator."""
    if quad_level < 3:
        raise ValueError("quad_level must be >= 3")
    if kernel.dim != region.dim:
        raise ValueError("kernel and region dimensions differ")
    nodes, weights = quadrature(region, quad_level)
    sw = np.sqrt(weights)
    B = kernel(nodes, nodes) * np.outer(sw, sw)
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    top = evals[0]
    if top <= 0 or evals[-1] < -1e-10 * top:
        raise NotPositive(
            f"discretized operator has eigenvalue {evals[-1]:.3e} (largest {top:.3e})"
        )
    keep = evals > drop_tol * top
    evals, evecs = evals[keep], evecs[:, keep]
    # sign convention: first entry of non-negligible size is positive
    scale = np.abs(evecs).max(axis=0)
    first = np.argmax(np.abs(evecs) > 1e-8 * scale, axis=0)
    signs = np.sign(evecs[first, np.arange(evecs.shape[1])])
    evecs = evecs * signs
    phi = (evecs / sw[:, None]).T
    logger.debug("nystrom %s on %s: kept %d of %d modes", kernel.descriptor,
                 region.descriptor, keep.sum(), len(keep))
    return SpectralModel(kernel, region, quad_level, nodes, weights,
                         np.ascontiguousarray(evals), np.ascontiguousarray(phi), drop_tol)


def cached_nystrom(kernel: Kernel, region: Region, quad_level: int,
                   drop_tol: float = 1e-12, cache_dir=None) -> SpectralModel:
    """:func:`nystrom`, reusing a model stored under ``cache_dir``.

    ``cache_dir`` defaults to the ``KIL_CACHE_DIR`` environment variable;
    with neither set, nothing is cached.
    """
    cache_dir = cache_dir or os.environ.get(CACHE_ENV)
    if not cache_dir:
        return nystrom(kernel, region, quad_level, drop_tol)
    key = f"{kernel.descriptor}|{kernel.dim}|{region.descriptor}|{quad_level}|{drop_tol!r}"
    path = Path(cache_dir) / (hashlib.sha256(key.encode()).hexdigest()[:24] + ".npz")
    if path.exists():
        return SpectralModel.load(path)
    model = nystrom(kernel, region, quad_level, drop_tol)
    model.save(path)
    return model


def power_norm_coeffs(model: SpectralModel, coeffs, theta: float) -> float:
    coeffs = np.asarray(coeffs, dtype=float)
    return float(np.sqrt(np.sum(coeffs**2 / model.eigenvalues**theta)))


def power_inner_coeffs(model: SpectralModel, c, d, theta: float) -> float:
    return float(np.sum(np.asarray(c) * np.asarray(d) / model.eigenvalues**theta))


def power_norm(model: SpectralModel, f, theta: float) -> float:
    """Power-space norm of the field ``f`` in the truncated model."""
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    return power_norm_coeffs(model, model.coefficients(f), theta)


def power_inner(model: SpectralModel, f, g, theta: float) -> float:
    return power_inner_coeffs(model, model.coefficients(f), model.coefficients(g), theta)


def apply_T_nodes(kernel: Kernel, nodes, weights, v):
    """``x -> sum_m w_m k(x, t_m) v(t_m)`` for given quadrature nodes.

    ``v`` is sampled once at the nodes; midpoint nodes avoid the region
    boundary, so densities with integrable boundary singularities work.
    """
    vals = np.asarray(v(nodes), dtype=float).ravel()
    if not np.all(np.isfinite(vals)):
        m = int(np.argmax(~np.isfinite(vals)))
        raise EvaluationFailure(f"non-finite density at node {nodes[m]}", node=nodes[m])
    wv = weights * vals

    def Tv(points):
        return kernel(points, nodes) @ wv

    return Tv


def apply_T(model: SpectralModel, v):
    """Quadrature image of ``v`` under the integral operator (not truncated)."""
    return apply_T_nodes(model.kernel, model.nodes, model.weights, v)


def power_kernel_eval(model: SpectralModel, theta: float, x, z) -> np.ndarray:
    """Matrix ``k^(theta)(x_i, z_j)`` of the truncated power kernel."""
    if theta <= model.power_threshold:
        raise BelowPowerThreshold(
            f"power kernel needs theta > d/(2 tau) = {model.power_threshold:g}, got {theta:g}"
        )
    px = model.eigenfunctions(x)
    pz = model.eigenfunctions(z)
    return (px.T * model.eigenvalues**theta) @ pz


def check_generalized_reproducing(model: SpectralModel, theta1: float, theta2: float, x, z) -> float:
    """Absolute residual of ``<k1(., x), k1(., z)>_{theta2} = k^(2 theta1 - theta2)(x, z)``.

    ``k1 = k^(theta1)`` is tabulated at the nodes and projected back onto
    the eigenbasis by quadrature, so the check exercises the discrete
    orthonormality of the model rather than only the algebra.
    """
    target = 2 * theta1 - theta2
    if target <= model.power_threshold:
        raise BelowPowerThreshold(
            f"need 2*theta1 - theta2 > d/(2 tau) = {model.power_threshold:g}, got {target:g}"
        )
    lam = model.eigenvalues
    px = model.eigenfunctions(x)[:, 0]
    pz = model.eigenfunctions(z)[:, 0]
    kx_nodes = (lam**theta1 * px) @ model.phi
    kz_nodes = (lam**theta1 * pz) @ model.phi
    cx = model.phi @ (model.weights * kx_nodes)
    cz = model.phi @ (model.weights * kz_nodes)
    lhs = power_inner_coeffs(model, cx, cz, theta2)
    rhs = float(np.sum(lam**target * px * pz))
    return abs(lhs - rhs)


def bernstein_ratio(model: SpectralModel, u, theta: float, q: float) -> float:
    """``||u||_theta * q**(theta * tau) / ||u||_0`` for a trial function ``u``."""
    upper = 2 - model.power_threshold
    if not 0 <= theta < upper:
        raise ValueError(f"theta must lie in [0, {upper:g})")
    c = model.coefficients(u)
    weak = power_norm_coeffs(model, c, 0.0)
    if weak == 0.0:
        raise ZeroField("trial function vanishes at every quadrature node")
    return power_norm_coeffs(model, c, theta) * q ** (theta * model.tau) / weak


def bernstein_constant(model: SpectralModel, X, theta: float) -> float:
    """Largest Bernstein ratio over all trial functions centered at ``X``.

    The coefficient vectors of ``span{k(., x) : x in X}`` fill the column
    space of ``C[j, i] = lambda_j phi_j(x_i)``; with an orthonormal basis
    ``Q`` of that space the supremum of ``||u||_theta / ||u||_0`` is the
    spectral norm of ``diag(lambda**(-theta/2)) Q``.
    """
    X = _points(X, model.kernel.dim)
    q = 0.5 * float(np.min(np.linalg.norm(X[:, None] - X[None], axis=-1)
                           + np.diag(np.full(len(X), np.inf))))
    C = model.eigenvalues[:, None] * model.eigenfunctions(X)
    Q, _ = np.linalg.qr(C)
    scaled = Q * model.eigenvalues[:, None] ** (-theta / 2)
    return float(np.linalg.norm(scaled, 2)) * q ** (theta * model.tau)
