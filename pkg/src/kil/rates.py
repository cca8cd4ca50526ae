"""Refinement studies, convergence-exponent fits and regime classification.

A study interpolates a target on the grid sets ``Z_n`` (or seeded
jittered copies of them) for a range of levels, measures the L2 error
against one fixed quadrature, and fits ``log e_n = log c + beta log h_n``.
The exponent is mapped to a smoothness index ``theta = beta / tau`` and to
one of four regimes:

* ``escaping``          beta <= tau
* ``superconvergence``  tau < beta <= 2 tau
* ``saturated``         beta > 2 tau
* ``exact``             every error below the floor, no fit
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InsufficientData
from .geometry import Region, fill_distance, grid_set, quadrature, separation_distance
from .interpolate import field_values, interpolate
from .kernels import Kernel, _points
from .spectral import apply_T_nodes

ERROR_FLOOR = 1e-12
THETA_CAP = 2.0
# relative slack on regime boundaries so that round-off in an exact
# power law does not flip the classification
_BOUNDARY_RTOL = 1e-9


@dataclass(frozen=True)
class Target:
    """A parsed target descriptor bound to a kernel and a quadrature.

    ``tv-power`` targets are images of ``z -> z_0**p`` under the
    quadrature-discretized integral operator, so they depend on the
    study's quadrature level.
    """

    descriptor: str
    field: object = field(compare=False, repr=False)
    is_zero: bool = False

    def __call__(self, points):
        return self.field(points)


def make_target(descriptor: str, kernel: Kernel, region: Region, quad_level: int) -> Target:
    """Resolve a target descriptor.

    Recognized forms: ``abs-power:gamma[,c1,...,cd]`` (``|x - c|**gamma``,
    ``c`` defaults to ``1/sqrt(2)`` in every coordinate),
    ``tv-power:p``, ``kernel-translate:x1[,...,xd]``, ``exp``,
    ``sin:omega`` and ``zero``.
    """
    name, _, rest = descriptor.strip().partition(":")
    args = [float(v) for v in rest.split(",")] if rest else []
    d = region.dim

    if name == "zero":
        return Target(descriptor, lambda x: np.zeros(len(_points(x, d))), is_zero=True)
    if name == "exp":
        return Target(descriptor, lambda x: np.exp(_points(x, d).sum(axis=1)))
    if name == "sin":
        if len(args) != 1:
            raise ValueError("sin target needs one frequency")
        (omega,) = args
        return Target(descriptor, lambda x: np.sin(omega * _points(x, d).sum(axis=1)))
    if name == "abs-power":
        if not args:
            raise ValueError("abs-power target needs an exponent")
        gamma = args[0]
        center = np.asarray(args[1:] or [1 / math.sqrt(2)] * d)
        if len(center) != d:
            raise ValueError("abs-power center has the wrong dimension")
        return Target(
            descriptor,
            lambda x: np.linalg.norm(_points(x, d) - center, axis=1) ** gamma,
        )
    if name == "kernel-translate":
        x0 = np.asarray(args).reshape(1, d)
        return Target(descriptor, lambda x: kernel(x, x0)[:, 0])
    if name == "tv-power":
        if len(args) != 1:
            raise ValueError("tv-power target needs one exponent")
        (p,) = args
        nodes, weights = quadrature(region, quad_level)
        Tv = apply_T_nodes(kernel, nodes, weights, lambda z: _points(z, d)[:, 0] ** p)
        return Target(descriptor, Tv)
    raise ValueError(f"unknown target {descriptor!r}")


@dataclass(frozen=True)
class Sample:
    n: int
    num_points: int
    q: float
    h: float
    l2_error: float
    linf_error: float

    @property
    def rho(self) -> float:
        return self.h / self.q


def jittered_grid(region: Region, n: int, rng, amount: float = 0.25) -> np.ndarray:
    """Cell centers of ``Z_n`` moved by up to ``amount * 2**-n`` per coordinate."""
    side = 2.0 ** -n
    base = grid_set(region, n) + 0.5 * side
    return base + rng.uniform(-amount, amount, size=base.shape) * side


def refinement_study(target, kernel: Kernel, region: Region, n_range, ridge: float = 0.0,
                     quad_level_offset: int = 3, points: str = "grid", seed: int = 0) -> list[Sample]:
    """Errors of kernel approximants along a refinement sequence.

    ``n_range`` is an iterable of levels.  The quadrature level is
    ``max(n_range) + quad_level_offset`` for every level of the study.
    ``points`` is ``"grid"`` for ``Z_n`` or ``"jittered"`` for seeded
    perturbations of its cell centers.
    """
    levels = sorted(set(int(n) for n in n_range))
    if not levels:
        raise ValueError("empty n_range")
    nodes, weights = quadrature(region, levels[-1] + quad_level_offset)
    rng = np.random.default_rng(seed)
    truth = field_values(target, nodes)
    out = []
    for n in levels:
        if points == "grid":
            X = grid_set(region, n)
        elif points == "jittered":
            X = jittered_grid(region, n, rng)
        else:
            raise ValueError(f"unknown point family {points!r}")
        s = interpolate(kernel, X, target, ridge)
        approx = field_values(s, nodes)
        out.append(Sample(
            n=n,
            num_points=len(X),
            q=separation_distance(X) if len(X) > 1 else float("nan"),
            h=fill_distance(X, region, n + 4),
            l2_error=float(np.sqrt(weights @ (truth - approx) ** 2)),
            linf_error=float(np.max(np.abs(truth - approx))),
        ))
    return out


@dataclass(frozen=True)
class RateFit:
    samples: tuple
    beta: float
    stderr: float
    intercept: float
    tau: float
    regime: str

    @property
    def theta_hat(self) -> float:
        return self.beta / self.tau

    @property
    def exact(self) -> bool:
        return self.regime == "exact"


def regime_of(beta: float, tau: float) -> str:
    if beta <= tau * (1 + _BOUNDARY_RTOL):
        return "escaping"
    if beta <= 2 * tau * (1 + _BOUNDARY_RTOL):
        return "superconvergence"
    return "saturated"


def fit_rate(samples, tau: float) -> RateFit:
    """Least-squares slope of ``log e`` against ``log h``.

    ``samples`` may be :class:`Sample` objects or ``(h, e)`` pairs.
    Samples with error below :data:`ERROR_FLOOR` are dropped; if all are
    below it the fit reports regime ``exact`` with ``beta = nan``.
    """
    pairs = [(s.h, s.l2_error) if isinstance(s, Sample) else (float(s[0]), float(s[1]))
             for s in samples]
    if pairs and all(e < ERROR_FLOOR for _, e in pairs):
        return RateFit(tuple(samples), math.nan, math.nan, math.nan, tau, "exact")
    usable = [(h, e) for h, e in pairs if e >= ERROR_FLOOR]
    if len(usable) < 3:
        raise InsufficientData(f"need at least 3 samples above the error floor, got {len(usable)}")
    x = np.log([h for h, _ in usable])
    y = np.log([e for _, e in usable])
    xm = x - x.mean()
    beta = float(xm @ (y - y.mean()) / (xm @ xm))
    intercept = float(y.mean() - beta * x.mean())
    resid = y - (intercept + beta * x)
    dof = len(x) - 2
    stderr = float(np.sqrt(resid @ resid / dof / (xm @ xm)))
    return RateFit(tuple(samples), beta, stderr, intercept, tau, regime_of(beta, tau))


@dataclass(frozen=True)
class Report:
    beta: float
    stderr: float
    theta_hat: float
    theta_capped: float
    regime: str
    statement: str
    flags: tuple = ()

    def as_dict(self) -> dict:
        out = asdict(self)
        out["flags"] = list(self.flags)
        return out


def classify(fit: RateFit, tau: float | None = None, target_is_zero: bool = False) -> Report:
    """Translate a fitted rate into a smoothness statement.

    The inferred membership is ``f in H_theta for all theta < beta / tau``
    with the bound capped at 2.  A nonzero target whose exponent exceeds
    ``2 tau`` by more than three standard errors is flagged, since no
    nonzero function can converge faster than ``h**(2 tau)`` for every
    quasi-uniform sequence.
    """
    tau = fit.tau if tau is None else tau
    if fit.exact:
        return Report(math.nan, math.nan, math.nan, math.nan, "exact",
                      "all errors below floor; exact reproduction, no rate inferred")
    theta = fit.beta / tau
    capped = min(theta, THETA_CAP)
    regime = regime_of(fit.beta, tau)
    statement = f"f in H_theta for all theta < {capped:.4g}"
    if regime == "superconvergence" and math.isclose(fit.beta, 2 * tau, abs_tol=3 * fit.stderr + 1e-12):
        statement += " (superconvergence boundary)"
    flags = []
    if not target_is_zero and fit.beta > 2 * tau * (1 + _BOUNDARY_RTOL) + 3 * fit.stderr:
        flags.append("saturation anomaly: only f = 0 converges faster than h^(2 tau); inspect experiment")
    return Report(fit.beta, fit.stderr, theta, capped, regime, statement, tuple(flags))
