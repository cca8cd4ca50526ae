"""Regions, dyadic grid sets and the geometric quantities of a point set.

Point sets are plain ``(m, d)`` float arrays throughout the package.

Grid sets are built on the dyadic lattice ``2**-n * Z**d``: a lattice
point ``z`` belongs to the grid set of level ``n`` iff the closed cube
``z + [0, 2**-n]**d`` lies inside the region.  Because all lattice
coordinates are dyadic rationals they are exact in binary floating point,
so nestedness across levels holds bit for bit.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyGrid, TooFewPoints

# absolute slack for boundary comparisons; lattice points sitting exactly on
# the boundary must count as inside
_EPS = 1e-12

KINDS = ("interval", "box", "disk", "lshape")


@dataclass(frozen=True)
class Region:
    """A bounded region of one of a few parametric shapes.

    ``params`` layout per kind:

    ========  ==========================================================
    interval  ``(a, b)``
    box       ``(c_1, ..., c_d, s_1, ..., s_d)`` corner and side lengths
    disk      ``(c_1, ..., c_d, r)`` center and radius (a ball for d != 2)
    lshape    ``(x0, y0, s)`` square ``[x0, x0+s] x [y0, y0+s]`` with the
              open upper-right quadrant removed
    ========  ==========================================================
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if not all(math.isfinite(v) for v in p):
            raise ValueError("region parameters must be finite")
        if self.kind == "interval":
            if len(p) != 2 or not p[0] < p[1]:
                raise ValueError("interval needs a < b")
        elif self.kind == "box":
            if len(p) < 2 or len(p) % 2 or min(p[len(p) // 2:]) <= 0:
                raise ValueError("box needs d corner coordinates and d positive sides")
        elif self.kind == "disk":
            if len(p) < 2 or p[-1] <= 0:
                raise ValueError("disk needs a center and a positive radius")
        elif self.kind == "lshape":
            if len(p) != 3 or p[2] <= 0:
                raise ValueError("lshape needs x0, y0 and a positive side")

    @classmethod
    def parse(cls, text: str) -> "Region":
        """Parse a descriptor such as ``"interval:0,1"`` or ``"disk:0,0,0.83"``."""
        kind, sep, rest = text.strip().partition(":")
        if not sep or not rest:
            raise ValueError(f"malformed region descriptor {text!r}")
        try:
            params = tuple(float(v) for v in rest.split(","))
        except ValueError:
            raise ValueError(f"malformed region descriptor {text!r}") from None
        return cls(kind.strip(), params)

    @property
    def descriptor(self) -> str:
        return f"{self.kind}:" + ",".join(repr(v) for v in self.params)

    @property
    def dim(self) -> int:
        if self.kind == "interval":
            return 1
        if self.kind == "box":
            return len(self.params) // 2
        if self.kind == "disk":
            return len(self.params) - 1
        return 2

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(self.params)
        if self.kind == "interval":
            return p[:1], p[1:]
        if self.kind == "box":
            d = self.dim
            return p[:d], p[:d] + p[d:]
        if self.kind == "disk":
            return p[:-1] - p[-1], p[:-1] + p[-1]
        return p[:2], p[:2] + p[2]

    @property
    def volume(self) -> float:
        p = self.params
        if self.kind == "interval":
            return p[1] - p[0]
        if self.kind == "box":
            return float(np.prod(p[self.dim:]))
        if self.kind == "disk":
            d, r = self.dim, p[-1]
            return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r ** d
        return 0.75 * p[2] ** 2

    def contains(self, points) -> np.ndarray:
        """Membership mask for an ``(m, d)`` array (closed region)."""
        x = _as_points(points, self.dim)
        lo, hi = self.bounding_box()
        in_box = np.all((x >= lo - _EPS) & (x <= hi + _EPS), axis=1)
        if self.kind in ("interval", "box"):
            return in_box
        if self.kind == "disk":
            c, r = np.asarray(self.params[:-1]), self.params[-1]
            return np.linalg.norm(x - c, axis=1) <= r + _EPS
        cut = np.asarray(self.params[:2]) + 0.5 * self.params[2]
        return in_box & ~np.all(x > cut + _EPS, axis=1)

    def contains_cube(self, corners, side: float) -> np.ndarray:
        """Mask of lower corners ``z`` with ``z + [0, side]**d`` inside the region."""
        z = _as_points(corners, self.dim)
        lo, hi = self.bounding_box()
        in_box = np.all((z >= lo - _EPS) & (z + side <= hi + _EPS), axis=1)
        if self.kind in ("interval", "box"):
            return in_box
        if self.kind == "disk":
            # convex: the cube is inside iff all 2**d corners are
            ok = np.ones(len(z), dtype=bool)
            for offs in itertools.product((0.0, side), repeat=self.dim):
                ok &= self.contains(z + np.asarray(offs))
            return ok
        # the removed quadrant is open, so touching its faces is fine
        cut = np.asarray(self.params[:2]) + 0.5 * self.params[2]
        clear = np.any(z + side <= cut + _EPS, axis=1)
        return in_box & clear


def _as_points(points, dim: int) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, dim) if dim > 1 else x[:, None]
    if x.ndim != 2 or x.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {x.shape}")
    return x


def _lattice(region: Region, spacing: float) -> np.ndarray:
    lo, hi = region.bounding_box()
    axes = [
        np.arange(math.floor(a / spacing), math.ceil(b / spacing) + 1) * spacing
        for a, b in zip(lo, hi)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sort_lex(points: np.ndarray) -> np.ndarray:
    order = np.lexsort(points.T[::-1])
    return points[order]


def grid_set(region: Region, n: int) -> np.ndarray:
    """Lattice points ``z`` of spacing ``2**-n`` whose cube fits in ``region``.

    The result is sorted lexicographically.  Raises :class:`EmptyGrid` if
    no cube fits.
    """
    if n < 1:
        raise ValueError("level n must be >= 1")
    side = 2.0 ** -n
    cand = _lattice(region, side)
    pts = cand[region.contains_cube(cand, side)]
    if len(pts) == 0:
        raise EmptyGrid(f"no cube of side 2^-{n} fits into {region.descriptor}")
    return sort_lex(pts)


def separation_distance(X) -> float:
    """Half the smallest pairwise Euclidean distance."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(X) < 2:
        raise TooFewPoints("separation distance needs at least two points")
    dist, _ = cKDTree(X).query(X, k=2)
    return 0.5 * float(dist[:, 1].min())


def probe_points(region: Region, probe_level: int) -> np.ndarray:
    """Lattice points of spacing ``2**-probe_level`` lying in ``region``."""
    cand = _lattice(region, 2.0 ** -probe_level)
    return cand[region.contains(cand)]


def fill_distance(X, region: Region, probe_level: int) -> float:
    """Largest distance from a probe point of ``region`` to its nearest point of ``X``.

    The supremum over the region is approximated by the probe lattice of
    spacing ``2**-probe_level``; the probe sets are nested, so the value
    is nondecreasing in ``probe_level``.
    """
    X = _as_points(X, region.dim)
    if len(X) == 0:
        raise TooFewPoints("fill distance needs at least one point")
    probes = probe_points(region, probe_level)
    dist, _ = cKDTree(X).query(probes, k=1)
    return float(dist.max())


@dataclass(frozen=True)
class GeometrySummary:
    q: float
    h: float

    @property
    def rho(self) -> float:
        return self.h / self.q


def uniformity(X, region: Region, probe_level: int) -> GeometrySummary:
    return GeometrySummary(
        q=separation_distance(X), h=fill_distance(X, region, probe_level)
    )


def quadrature(region: Region, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite midpoint rule on the cells of ``grid_set(region, level)``.

    Returns ``(nodes, weights)``; every weight equals ``2**(-level*d)``.
    Nodes sit at cell centers and so never touch the region boundary.
    """
    if level < 1:
        raise ValueError("quadrature level must be >= 1")
    side = 2.0 ** -level
    nodes = grid_set(region, level) + 0.5 * side
    weights = np.full(len(nodes), side ** region.dim)
    return nodes, weights
