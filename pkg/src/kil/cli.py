"""Command line front end.

Usage::

    kil rates --kernel wendland-hat:1.0 --region interval:0,1 \\
        --target tv-power:-0.45 --n 3..7 --output out/

Every option can also come from a flat ``key=value`` file passed with
``--config``; command-line flags win over file values.  Exit codes: 0 on
success, 2 on invalid input, 3 on numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import density as dens
from . import rates, spectral
from .errors import KernelLabError, NumericalFailure
from .geometry import Region, grid_set, quadrature, separation_distance
from .interpolate import Interpolant, fit, interpolate
from .kernels import Kernel, gram, min_eigenvalue

logger = logging.getLogger("kil")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def parse_levels(text: str) -> list[int]:
    """``"3..7"`` -> ``[3, 4, 5, 6, 7]``; ``"3,4,5"`` and ``"5"`` as lists."""
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..")
        levels = list(range(int(lo), int(hi) + 1))
    else:
        levels = [int(v) for v in text.split(",") if v.strip()]
    if not levels or min(levels) < 1:
        raise ValueError(f"bad level list {text!r}")
    return levels


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


_COMMON = {
    "kernel": (str, "wendland-hat:1.0", "kernel descriptor family:sigma"),
    "region": (str, "interval:0,1", "region descriptor, e.g. interval:0,1 or disk:0,0,0.83"),
    "seed": (int, 0, "random seed"),
    "output": (str, ".", "output directory"),
}

OPTIONS = {
    "rates": {
        "target": (str, "tv-power:-0.45", "target descriptor"),
        "n": (parse_levels, "3..7", "levels, e.g. 3..7 or 3,4,5"),
        "ridge": (float, 0.0, "ridge parameter (0 = interpolation)"),
        "quad_offset": (int, 3, "quadrature level minus the largest n"),
        "points": (str, "grid", "grid or jittered"),
    },
    "density": {
        "target": (str, "tv-power:-0.45", "target descriptor"),
        "n": (parse_levels, "3,4,5", "levels"),
        "nb": (int, 8, "offset sub-grid resolution per axis"),
        "ridge": (float, 0.0, "ridge parameter"),
        "quad_level": (int, 10, "quadrature level for targets and errors"),
    },
    "spectrum": {
        "quad_level": (int, 8, "Nystrom quadrature level"),
        "drop_tol": (float, 1e-12, "relative eigenvalue cutoff"),
        "j_range": (parse_levels, "3..30", "indices used in the decay fit"),
    },
    "bernstein": {
        "n": (parse_levels, "2..6", "levels"),
        "theta": (parse_floats, "0.6,1.0,1.3", "power exponents"),
        "trials": (int, 5, "random trial functions per level"),
        "trial": (str, "nodal", "nodal (random data) or coefficient (random alpha)"),
        "quad_level": (int, 10, "Nystrom quadrature level"),
    },
    "gram": {
        "n": (parse_levels, "2..7", "levels"),
    },
    "interp": {
        "target": (str, "exp", "target descriptor"),
        "n": (parse_levels, "4", "level of the grid set"),
        "ridge": (float, 0.0, "ridge parameter"),
        "quad_level": (int, 8, "evaluation nodes level"),
    },
}


def _spec(command):
    return {**_COMMON, **OPTIONS[command]}


def read_config(path) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kil", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in OPTIONS:
        p = sub.add_parser(command)
        p.add_argument("--config", help="key=value file with option defaults")
        for key, (_, default, help_) in _spec(command).items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                           help=f"{help_} (default: {default})")
    return parser


def resolve(command: str, args: argparse.Namespace) -> dict:
    spec = _spec(command)
    raw = read_config(args.config) if args.config else {}
    unknown = sorted(set(raw) - set(spec))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    cfg = {}
    for key, (conv, default, _) in spec.items():
        value = getattr(args, key)
        if value is None:
            value = raw.get(key, default)
        try:
            cfg[key] = conv(value)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad value for {key}: {value!r} ({exc})") from None
    return cfg


def _config_line(cfg: dict) -> str:
    parts = []
    for key in sorted(cfg):
        if key == "output":
            continue
        value = cfg[key]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        parts.append(f"{key}={value}")
    return "# config: " + " ".join(parts) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: Path, header, rows, cfg) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    write_atomic(path, buf.getvalue() + _config_line(cfg))


def write_json(path: Path, payload) -> None:
    write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _setup(cfg):
    region = Region.parse(cfg["region"])
    kernel = Kernel.parse(cfg["kernel"], dim=region.dim)
    return kernel, region, Path(cfg["output"])


def cmd_rates(cfg) -> dict:
    kernel, region, out = _setup(cfg)
    levels = cfg["n"]
    quad_level = max(levels) + cfg["quad_offset"]
    target = rates.make_target(cfg["target"], kernel, region, quad_level)
    samples = rates.refinement_study(target, kernel, region, levels, cfg["ridge"],
                                     cfg["quad_offset"], cfg["points"], cfg["seed"])
    fitted = rates.fit_rate(samples, kernel.tau)
    report = rates.classify(fitted, kernel.tau, target.is_zero)
    write_csv(out / "rates.csv",
              ["n", "num_points", "q", "h", "rho", "l2_error", "linf_error"],
              [(s.n, s.num_points, s.q, s.h, s.rho, s.l2_error, s.linf_error) for s in samples],
              cfg)
    flags = list(report.flags)
    if fitted.exact:
        flags.append("exact: errors below floor, beta undefined")
    summary = {
        "kernel": kernel.descriptor,
        "region": region.descriptor,
        "target": cfg["target"],
        "tau": kernel.tau,
        "beta": fitted.beta,
        "stderr": fitted.stderr,
        "theta_hat": report.theta_capped,
        "theta_raw": report.theta_hat,
        "regime": report.regime,
        "statement": report.statement,
        "flags": flags,
    }
    write_json(out / "rates.json", summary)
    return summary


def cmd_density(cfg) -> dict:
    kernel, region, out = _setup(cfg)
    target = rates.make_target(cfg["target"], kernel, region, cfg["quad_level"])
    nodes, weights = quadrature(region, cfg["quad_level"])
    truth = target(nodes)
    rows = []
    for n in cfg["n"]:
        D = dens.build_density(target, kernel, region, n, cfg["nb"], cfg["ridge"])
        write_atomic(out / f"density_n{n}.csv", D.to_csv() + _config_line(cfg))
        err = float(np.sqrt(weights @ (truth - dens.apply_T_density(D)(nodes)) ** 2))
        rows.append((n, len(D.corners), err, dens.density_l2_norm(D)))
    write_csv(out / "density_summary.csv", ["n", "num_points", "l2_error_TD", "density_l2_norm"],
              rows, cfg)
    return {"levels": [r[0] for r in rows], "l2_error_TD": [r[2] for r in rows],
            "density_l2_norm": [r[3] for r in rows]}


def decay_slope(eigenvalues, j_range) -> float:
    j = np.asarray([i for i in j_range if i <= len(eigenvalues)], dtype=float)
    if len(j) < 2:
        raise ValueError("j_range exceeds the number of retained eigenvalues")
    lam = np.asarray(eigenvalues)[j.astype(int) - 1]
    return float(np.polyfit(np.log(j), np.log(lam), 1)[0])


def cmd_spectrum(cfg) -> dict:
    kernel, region, out = _setup(cfg)
    model = spectral.cached_nystrom(kernel, region, cfg["quad_level"], cfg["drop_tol"])
    slope = decay_slope(model.eigenvalues, cfg["j_range"])
    write_csv(out / "spectrum.csv", ["j", "lambda"],
              [(j + 1, lam) for j, lam in enumerate(model.eigenvalues)], cfg)
    summary = {"kernel": kernel.descriptor, "region": region.descriptor,
               "quad_level": cfg["quad_level"], "retained": model.size,
               "decay_slope": slope, "predicted_slope": -2 * kernel.tau / kernel.dim}
    write_json(out / "spectrum.json", summary)
    return summary


def trial_function(kernel, X, rng, kind: str):
    """Random element of ``span{k(., x) : x in X}``."""
    if kind == "nodal":
        return fit(kernel, X, rng.standard_normal(len(X)))
    if kind == "coefficient":
        return Interpolant(kernel, X, rng.standard_normal(len(X)))
    raise ValueError(f"unknown trial kind {kind!r}")


def bernstein_table(model, region, levels, thetas, trials, kind, seed):
    """Rows ``(n, theta, trial, q, ratio)`` plus worst-case rows with trial ``-1``."""
    kernel = model.kernel
    rows = []
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        for n in levels:
            X = grid_set(region, n)
            q = separation_distance(X)
            u = trial_function(kernel, X, rng, kind)
            for theta in thetas:
                rows.append((n, theta, trial, q, spectral.bernstein_ratio(model, u, theta, q)))
    for n in levels:
        X = grid_set(region, n)
        q = separation_distance(X)
        for theta in thetas:
            rows.append((n, theta, -1, q, spectral.bernstein_constant(model, X, theta)))
    return rows


def cmd_bernstein(cfg) -> dict:
    kernel, region, out = _setup(cfg)
    model = spectral.cached_nystrom(kernel, region, cfg["quad_level"])
    rows = bernstein_table(model, region, cfg["n"], cfg["theta"], cfg["trials"],
                           cfg["trial"], cfg["seed"])
    write_csv(out / "bernstein.csv", ["n", "theta", "trial", "q", "ratio"], rows, cfg)
    spread = {}
    for theta in cfg["theta"]:
        for trial in range(-1, cfg["trials"]):
            vals = [r[4] for r in rows if r[1] == theta and r[2] == trial]
            spread.setdefault(repr(theta), {})[str(trial)] = max(vals) / min(vals)
    summary = {"kernel": kernel.descriptor, "region": region.descriptor,
               "max_over_min": spread}
    write_json(out / "bernstein.json", summary)
    return summary


def cmd_gram(cfg) -> dict:
    kernel, region, out = _setup(cfg)
    rows = []
    for n in cfg["n"]:
        X = grid_set(region, n)
        rows.append((n, len(X), separation_distance(X), min_eigenvalue(gram(kernel, X))))
    q = np.array([r[2] for r in rows])
    lam = np.array([r[3] for r in rows])
    slope = float(np.polyfit(np.log(q), np.log(lam), 1)[0])
    write_csv(out / "gram.csv", ["n", "num_points", "q", "lambda_min"], rows, cfg)
    expo = 2 * kernel.tau - kernel.dim
    summary = {"kernel": kernel.descriptor, "region": region.descriptor,
               "fitted_exponent": slope, "predicted_exponent": expo,
               "min_scaled_lambda": float(np.min(lam * q ** -expo))}
    write_json(out / "gram.json", summary)
    return summary


def cmd_interp(cfg) -> dict:
    kernel, region, out = _setup(cfg)
    (n,) = cfg["n"][:1]
    target = rates.make_target(cfg["target"], kernel, region, cfg["quad_level"])
    X = grid_set(region, n)
    s = interpolate(kernel, X, target, cfg["ridge"])
    nodes, _ = quadrature(region, cfg["quad_level"])
    fx, sx = target(nodes), s(nodes)
    d = region.dim
    write_csv(out / "interp.csv", [f"x{i}" for i in range(d)] + ["f", "s"],
              [(*p, a, b) for p, a, b in zip(nodes, fx, sx)], cfg)
    write_atomic(out / "interpolant.json", s.to_json() + "\n")
    return {"num_centers": len(X), "max_abs_error": float(np.max(np.abs(fx - sx)))}


COMMANDS = {
    "rates": cmd_rates,
    "density": cmd_density,
    "spectrum": cmd_spectrum,
    "bernstein": cmd_bernstein,
    "gram": cmd_gram,
    "interp": cmd_interp,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args.command, args)
        summary = COMMANDS[args.command](cfg)
    except NumericalFailure as exc:
        print(f"kil: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (KernelLabError, ValueError, OSError) as exc:
        print(f"kil: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(summary, indent=2, sort_keys=True, default=_json_default))
    return EXIT_OK


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj).__name__)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
