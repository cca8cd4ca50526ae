"""Density functions assembled from approximant coefficients on shifted grids.

For level ``n`` and an offset ``b`` in the sub-grid
``(2**-n / nb) * {0, ..., nb-1}**d`` one approximant is fitted on the
shifted grid set ``Z_n + b``.  The coefficient at center ``z + b``,
scaled by ``2**(n*d)``, is the density value on cell ``z`` at offset
``b``.  Outside ``Z_n + [0, 2**-n)**d`` the density is zero.

The image of the density under the integral operator is evaluated as the
average of the ``nb**d`` shifted approximants, which is exactly the
Riemann sum of ``int k(x, y) D(y) dy`` over the stored sub-samples.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import Region, grid_set
from .interpolate import interpolate
from .kernels import Kernel, _points


def offsets(n: int, nb: int, dim: int) -> np.ndarray:
    """The ``nb**dim`` sub-grid offsets inside ``[0, 2**-n)**dim``."""
    step = 2.0 ** -n / nb
    return np.array(list(itertools.product(range(nb), repeat=dim)), dtype=float) * step


@dataclass(frozen=True, eq=False)
class DensityField:
    level: int
    region: Region
    kernel: Kernel
    nb: int
    corners: np.ndarray  # Z_n, shape (K, d)
    offsets: np.ndarray  # shape (nb**d, d)
    values: np.ndarray  # values[i, j]: offset i, corner j
    approximants: tuple  # one Interpolant per offset
    ridge: float = 0.0

    @property
    def method(self) -> str:
        return "ridge" if self.ridge > 0 else "interpolation"

    @property
    def cell_side(self) -> float:
        return 2.0 ** -self.level

    def __call__(self, points) -> np.ndarray:
        """Nearest-sub-sample lookup; zero outside the grid cells."""
        x = _points(points, self.kernel.dim)
        side = self.cell_side
        cell = np.floor(x / side)
        corner = cell * side
        local = np.clip(np.rint((x - corner) / (side / self.nb)), 0, self.nb - 1).astype(int)
        # row-major offset index, matching itertools.product ordering
        off_idx = np.ravel_multi_index(local.T, (self.nb,) * self.kernel.dim)
        lookup = {tuple(c): j for j, c in enumerate(np.rint(self.corners / side).astype(int))}
        out = np.zeros(len(x))
        for i, c in enumerate(cell.astype(int)):
            j = lookup.get(tuple(c))
            if j is not None:
                out[i] = self.values[off_idx[i], j]
        return out

    def to_csv(self) -> str:
        """Rows ``(x..., corner..., offset..., value)``."""
        d = self.kernel.dim
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            [f"x{i}" for i in range(d)]
            + [f"corner{i}" for i in range(d)]
            + [f"offset{i}" for i in range(d)]
            + ["value"]
        )
        rows = []
        for i, b in enumerate(self.offsets):
            for j, z in enumerate(self.corners):
                rows.append((tuple(z + b), tuple(z), tuple(b), self.values[i, j]))
        rows.sort()
        for x, z, b, v in rows:
            writer.writerow([repr(float(t)) for t in (*x, *z, *b, v)])
        return buf.getvalue()


def build_density(f, kernel: Kernel, region: Region, n: int, nb: int, ridge: float = 0.0) -> DensityField:
    """Fit ``nb**d`` approximants on shifted copies of ``Z_n`` and collect densities."""
    if nb < 1:
        raise ValueError("nb must be >= 1")
    corners = grid_set(region, n)
    offs = offsets(n, nb, region.dim)
    scale = 2.0 ** (n * region.dim)
    approximants = []
    values = np.empty((len(offs), len(corners)))
    for i, b in enumerate(offs):
        s = interpolate(kernel, corners + b, f, ridge)
        approximants.append(s)
        values[i] = scale * s.coefficients
    return DensityField(n, region, kernel, nb, corners, offs, values, tuple(approximants), ridge)


def apply_T_density(D: DensityField):
    """Field ``x -> mean_b s_{f, Z_n + b}(x)``, the image of ``D`` under T."""
    approximants = D.approximants
    weight = 1.0 / len(approximants)

    def TD(points):
        total = 0.0
        for s in approximants:
            total = total + s(points)
        return weight * total

    return TD


def density_l2_norm(D: DensityField) -> float:
    """Riemann sum ``sqrt(sum_{z,b} 2**(-n d) / nb**d * D(z, b)**2)``."""
    cell = D.cell_side ** D.kernel.dim / len(D.offsets)
    return float(np.sqrt(cell * np.sum(D.values**2)))
