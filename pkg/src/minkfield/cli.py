"""Command-line front end.

Every invocation is turned into an :class:`ExperimentConfig` (either from
flags or from a JSON file given with ``--config``), validated strictly, and
run.  Artifacts are written atomically to ``output_dir`` together with a
``.meta.json`` sidecar holding the fully resolved configuration.

Exit codes: 0 success, 1 verification or numerical failure, 2 bad input.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import _streams, gaussian, geometry, poisson, verify
from .gaussian import NotPositiveDefiniteError

COMMANDS = ("body", "simulate-gauss", "simulate-poisson", "verify", "constants")
DEFAULT_BUDGETS = {"n_paths": 10_000, "n_samples": 100_000, "grid": None}
CONFIG_FIELDS = {"command", "spec", "seed", "output_dir", "budgets"}
STAR_TYPES = {"ellipsoid_star", "ellp", "spectral", "scaled", "psum", "tabulated", "polar_projection"}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    command: str
    spec: dict
    seed: int = None
    output_dir: str = None
    budgets: dict = field(default_factory=dict)

    def resolved(self):
        return {
            "command": self.command,
            "spec": self.spec,
            "seed": self.seed,
            "output_dir": self.output_dir if self.output_dir is not None else ".",
            "budgets": {**DEFAULT_BUDGETS, **self.budgets},
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config: expected a JSON object")
        extra = set(data) - CONFIG_FIELDS
        if extra:
            raise ConfigError(f"config.{sorted(extra)[0]}: unknown field")
        if data.get("command") not in COMMANDS:
            raise ConfigError(f"config.command: expected one of {list(COMMANDS)}, got {data.get('command')!r}")
        spec = data.get("spec", {})
        if not isinstance(spec, dict):
            raise ConfigError("config.spec: expected a JSON object")
        budgets = data.get("budgets", {}) or {}
        if not isinstance(budgets, dict):
            raise ConfigError("config.budgets: expected a JSON object")
        bad = set(budgets) - set(DEFAULT_BUDGETS)
        if bad:
            raise ConfigError(f"config.budgets.{sorted(bad)[0]}: unknown budget")
        for key, val in budgets.items():
            if val is not None and (isinstance(val, bool) or not isinstance(val, int) or val < 1):
                raise ConfigError(f"config.budgets.{key}: expected a positive integer")
        seed = data.get("seed")
        if seed is not None:
            try:
                seed = _streams.check_seed(seed)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config.seed: {exc}") from None
        out = data.get("output_dir")
        if out is not None and not isinstance(out, str):
            raise ConfigError("config.output_dir: expected a path string")
        return cls(data["command"], spec, seed, out, dict(budgets))


# ---------------------------------------------------------------------------
# spec validation helpers


def _fields(spec, where, required, optional=()):
    extra = set(spec) - set(required) - set(optional)
    if extra:
        raise ConfigError(f"{where}.{sorted(extra)[0]}: unknown field")
    missing = [k for k in required if k not in spec]
    if missing:
        raise ConfigError(f"{where}.{missing[0]}: missing field")


def _number(spec, key, where):
    val = spec[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {val!r}")
    return float(val)


def _points(spec, where, dim=None):
    try:
        pts = np.atleast_2d(np.asarray(spec["points"], dtype=float))
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.points: expected a list of coordinate lists") from None
    if pts.ndim != 2 or pts.size == 0 or not np.all(np.isfinite(pts)):
        raise ConfigError(f"{where}.points: expected a non-empty list of finite coordinate lists")
    if dim is not None and pts.shape[1] != dim:
        raise ConfigError(f"{where}.points: points have dimension {pts.shape[1]}, body has {dim}")
    return pts


def _body(spec, where, key="body"):
    try:
        return geometry.body_from_dict(spec[key])
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, np.linalg.LinAlgError) as exc:
        msg = str(exc)
        if msg.startswith("body"):
            msg = msg[len("body"):].lstrip(".:")
            raise ConfigError(f"{where}.{key}.{msg}") from None
        raise ConfigError(f"{where}.{key}: {msg}") from None


def _convex(spec, where):
    K = _body(spec, where)
    if not isinstance(K, geometry.ConvexBody):
        raise ConfigError(f"{where}.body.type: a convex body is required here")
    return K


def _need_seed(config):
    if config.seed is None:
        raise ConfigError("config.seed: a seed is required for stochastic commands")
    return config.seed


def _wrap(where, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


# ---------------------------------------------------------------------------
# planning: validate everything, return a zero-argument runner


def _plan_body(config):
    spec, where = config.spec, "spec"
    action = spec.get("action")
    budgets = {**DEFAULT_BUDGETS, **config.budgets}
    if action == "gauge":
        _fields(spec, where, ("action", "body", "points"))
        F = _body(spec, where)
        if not isinstance(F, geometry.StarBody):
            raise ConfigError(f"{where}.body.type: gauge needs a star body (one of {sorted(STAR_TYPES)})")
        pts = _points(spec, where, F.dim)

        def run():
            vals = np.atleast_1d(F.gauge(pts))
            rows = [list(p) + [g] for p, g in zip(pts, vals)]
            header = [f"z{i}" for i in range(F.dim)] + ["gauge"]
            return [("gauge.csv", _csv(header, rows), {})], True

        return run
    if action != "transform":
        raise ConfigError(f"{where}.action: expected 'transform' or 'gauge', got {action!r}")
    _fields(spec, where, ("action", "body", "transform"), ("p", "H"))
    K = _body(spec, where)
    if not isinstance(K, geometry.ConvexBody):
        raise ConfigError(f"{where}.body.type: transforms need a convex body")
    kind = spec["transform"]
    grid = _wrap("config.budgets.grid", geometry.direction_grid, K.dim, budgets["grid"]) if K.dim in (2, 3) else None
    if grid is None:
        raise ConfigError(f"{where}.body: transforms are supported for d=2,3")
    if kind == "polar_projection":
        build = lambda: geometry.polar_projection_body(K, grid)  # noqa: E731
    elif kind == "radial_mean":
        if "p" not in spec:
            raise ConfigError(f"{where}.p: missing field")
        p = _number(spec, "p", where)
        if not -1 < p < 0:
            raise ConfigError(f"{where}.p: expected a value in (-1, 0), got {p}")
        seed = _need_seed(config)
        build = lambda: geometry.radial_pth_mean_body(K, p, budgets["n_samples"], seed, grid)  # noqa: E731
    elif kind == "associated":
        if "H" not in spec:
            raise ConfigError(f"{where}.H: missing field")
        H = _number(spec, "H", where)
        if not 0 < H < 0.5:
            raise ConfigError(f"{where}.H: expected a value in (0, 1/2), got {H}")
        seed = _need_seed(config)
        build = lambda: geometry.associated_body_of_poisson(K, H, budgets["n_samples"], seed, grid)  # noqa: E731
    else:
        raise ConfigError(f"{where}.transform: expected polar_projection, radial_mean or associated, got {kind!r}")
    if kind != "polar_projection" and budgets["n_samples"] < 10_000:
        raise ConfigError("config.budgets.n_samples: radial mean bodies need at least 10000 samples")

    def run():
        F = build()
        dirs = grid.directions
        vals = np.atleast_1d(F.gauge(dirs))
        header = [f"u{i}" for i in range(K.dim)] + ["gauge"]
        rows = [list(u) + [g] for u, g in zip(dirs, vals)]
        tab, scale = (F.inner, F.c) if isinstance(F, geometry.ScaledBody) else (F, 1.0)
        stderr = getattr(tab, "stderr", None)
        if stderr is not None:
            header.append("stderr")
            rows = [r + [s / scale] for r, s in zip(rows, stderr)]
        meta = {"interp_error": getattr(F, "interp_error", None)}
        return [
            (f"body_{kind}.csv", _csv(header, rows), meta),
            (f"body_{kind}.json", _json(F.to_dict()), meta),
        ], True

    return run


def _plan_gauss(config):
    spec, where = config.spec, "spec"
    _fields(spec, where, ("H", "body", "points"), ("variant", "method"))
    H = _number(spec, "H", where)
    F = _body(spec, where)
    if isinstance(F, geometry.ConvexBody):
        raise ConfigError(f"{where}.body.type: the Gaussian field needs a star body")
    variant = spec.get("variant", "standard")
    method = spec.get("method", "cholesky")
    mspec = _wrap(where, gaussian.MfBfSpec, H, F, variant)
    pts = _points(spec, where, F.dim)
    seed = _need_seed(config)
    n_paths = {**DEFAULT_BUDGETS, **config.budgets}["n_paths"]
    if method == "planewave":
        if not isinstance(F, geometry.SpectralBody) or abs(F.p - 2 * H) > 1e-12:
            raise ConfigError(f"{where}.method: planewave needs a spectral body with p = 2H")
        if variant != "standard":
            raise ConfigError(f"{where}.variant: planewave simulates the standard variant only")
        sim = lambda: gaussian.plane_wave_simulate(H, F.measure, pts, n_paths, seed)  # noqa: E731
    elif method == "cholesky":
        sim = lambda: gaussian.cholesky_simulate(mspec, pts, n_paths, seed)  # noqa: E731
    else:
        raise ConfigError(f"{where}.method: expected 'cholesky' or 'planewave', got {method!r}")

    def run():
        batch = sim()
        meta = {"method": batch.method, "jitter": batch.jitter_used}
        return [("gauss_paths.csv", _csv(_point_header(pts), batch.paths), meta)], True

    return run


def _plan_poisson(config):
    spec, where = config.spec, "spec"
    kind = spec.get("field", "xi")
    seed = _need_seed(config)
    n_paths = {**DEFAULT_BUDGETS, **config.budgets}["n_paths"]
    if kind == "xi":
        _fields(spec, where, ("H", "body", "points"), ("field",))
        K = _convex(spec, where)
        fspec = _wrap(where, poisson.FracPoissonSpec, _number(spec, "H", where), K, _points(spec, where, K.dim))
        sim = lambda: poisson.simulate_xi(fspec, n_paths, seed)  # noqa: E731
    elif kind == "eta":
        _fields(spec, where, ("p", "C", "body", "points"), ("field",))
        K = _convex(spec, where)
        fspec = _wrap(
            where,
            poisson.TruncatedSpec,
            _number(spec, "p", where),
            _number(spec, "C", where),
            K,
            _points(spec, where, K.dim),
        )
        sim = lambda: poisson.simulate_eta(fspec, n_paths, seed)  # noqa: E731
    elif kind == "zeta":
        _fields(spec, where, ("H", "sigma", "points"), ("field",))
        try:
            sigma = geometry.SpectralMeasure.from_dict(spec["sigma"])
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"{where}.sigma: {exc}") from None
        fspec = _wrap(
            where, poisson.DirectionalSpec, _number(spec, "H", where), sigma, _points(spec, where, sigma.dim)
        )
        sim = lambda: poisson.simulate_zeta(fspec, n_paths, seed)  # noqa: E731
    else:
        raise ConfigError(f"{where}.field: expected 'xi', 'eta' or 'zeta', got {kind!r}")

    def run():
        batch = sim()
        meta = {"field": kind, "counters": batch.counters}
        return [(f"poisson_{kind}.csv", _csv(_point_header(fspec.eval_points), batch.values), meta)], True

    return run


def _plan_verify(config):
    spec, where = config.spec, "spec"
    _fields(spec, where, (), ("target", "body", "H", "quick"))
    target = spec.get("target", "suite")
    if target != "suite" and target not in verify.REPORTS:
        raise ConfigError(f"{where}.target: expected 'suite' or one of {sorted(verify.REPORTS)}, got {target!r}")
    K = _convex(spec, where) if "body" in spec else geometry.unit_square()
    H = _number(spec, "H", where) if "H" in spec else 0.25
    if not 0 < H < 0.5:
        raise ConfigError(f"{where}.H: expected a value in (0, 1/2), got {H}")
    quick = spec.get("quick", False)
    if not isinstance(quick, bool):
        raise ConfigError(f"{where}.quick: expected true or false")
    seed = _need_seed(config)
    names = None if target == "suite" else [target]

    def run():
        reports = verify.run_suite(seed, K, H, quick, names)
        for r in reports:
            print(r.summary() + f" [{r.runtime_s:.1f}s]")
        summary = verify.suite_summary(reports)
        return [(f"verify_{target}.json", _json(summary), {})], summary["passed"]

    return run


def _plan_constants(config):
    spec, where = config.spec, "spec"
    _fields(spec, where, ("H", "d"))
    H = _number(spec, "H", where)
    d = spec["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ConfigError(f"{where}.d: expected a positive integer")
    if not 0 < H < 1:
        raise ConfigError(f"{where}.H: expected a value in (0, 1), got {H}")

    def run():
        out = {
            "H": H,
            "d": d,
            "a": gaussian.a_hd(H, d),
            "a_quoted_form": gaussian.a_hd_quoted(H, d),
            "b": gaussian.b_hd(H, d) if H < d / 2 else None,
            "c_H": gaussian.c_h(H),
            "c_H_quadrature": gaussian.c_h_quadrature(H),
            "normalisation_residual": gaussian.normalisation_residual(H, d),
        }
        print(_json(out), end="")
        return ([("constants.json", _json(out), {})] if config.output_dir is not None else []), True

    return run


PLANNERS = {
    "body": _plan_body,
    "simulate-gauss": _plan_gauss,
    "simulate-poisson": _plan_poisson,
    "verify": _plan_verify,
    "constants": _plan_constants,
}


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _point_header(points):
    return [" ".join(_fmt(c) for c in p) for p in points]


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json(obj):
    from .report import _plain

    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(config):
    """Validate and execute ``config``; returns the process exit code."""
    try:
        runner = PLANNERS[config.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        artifacts, passed = runner()
    except (NotPositiveDefiniteError, RuntimeError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    resolved = config.resolved()
    for name, text, meta in artifacts:
        path = os.path.join(resolved["output_dir"], name)
        write_atomic(path, text)
        write_atomic(path + ".meta.json", _json({"artifact": name, "config": resolved, "meta": meta}))
        print(f"wrote {path}")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# argument parsing


def _load_json(text, where):
    """Inline JSON or a path to a JSON file."""
    try:
        if os.path.isfile(text):
            with open(text) as fh:
                return json.load(fh)
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: malformed JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None
    except OSError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _seed_arg(text):
    try:
        return _streams.check_seed(int(text))
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="minkfield", description="Minkowski fractional Gaussian and Poisson fields over star bodies."
    )
    parser.add_argument("--config", help="JSON experiment file (command, spec, seed, output_dir, budgets)")
    sub = parser.add_subparsers(dest="command")

    def common(p, spec_help):
        p.add_argument("--spec", help=spec_help + " (inline JSON or a file path)")
        p.add_argument("--seed", type=_seed_arg, help="unsigned 64-bit seed")
        p.add_argument("--output-dir", default=".", help="artifact directory (default: current)")
        p.add_argument("--n-paths", type=int, help=f"replicates (default {DEFAULT_BUDGETS['n_paths']})")
        p.add_argument("--n-samples", type=int, help=f"Monte Carlo samples (default {DEFAULT_BUDGETS['n_samples']})")
        p.add_argument("--grid", type=int, help="direction grid size (default 720 in d=2, 2000 in d=3)")

    body = sub.add_parser("body", help="convex-geometry transforms and gauges")
    body.add_argument("action", choices=("transform", "gauge"))
    common(body, "body spec, e.g. {\"body\": {...}, \"transform\": \"polar_projection\"}")
    common(sub.add_parser("simulate-gauss", help="sample the Gaussian field"), "{\"H\", \"body\", \"points\"}")
    common(sub.add_parser("simulate-poisson", help="sample a Poisson field"), "{\"field\", \"H\", \"body\", \"points\"}")
    ver = sub.add_parser("verify", help="run verification reports")
    ver.add_argument("target", nargs="?", default="suite", help="'suite' or a report name")
    ver.add_argument("--quick", action="store_true", help="reduced Monte Carlo budgets")
    common(ver, "optional {\"body\", \"H\"}")
    const = sub.add_parser("constants", help="print the representation constants")
    const.add_argument("--H", type=float, required=True)
    const.add_argument("--d", type=int, required=True)
    const.add_argument("--output-dir", default=None)
    return parser


def config_from_args(args):
    if args.config:
        if args.command:
            raise ConfigError("config: pass either --config or a subcommand, not both")
        return ExperimentConfig.from_dict(_load_json(args.config, "config"))
    if not args.command:
        raise ConfigError("config.command: no subcommand given")
    if args.command == "constants":
        data = {"command": "constants", "spec": {"H": args.H, "d": args.d}}
        if args.output_dir:
            data["output_dir"] = args.output_dir
        return ExperimentConfig.from_dict(data)
    spec = _load_json(args.spec, "spec") if args.spec else {}
    if not isinstance(spec, dict):
        raise ConfigError("spec: expected a JSON object")
    if args.command == "body":
        spec = {"action": args.action, **spec}
    if args.command == "verify":
        spec = {"target": args.target, **spec}
        if args.quick:
            spec["quick"] = True
    budgets = {
        k: v for k, v in (("n_paths", args.n_paths), ("n_samples", args.n_samples), ("grid", args.grid)) if v is not None
    }
    data = {"command": args.command, "spec": spec, "output_dir": args.output_dir, "budgets": budgets}
    if args.seed is not None:
        data["seed"] = args.seed
    return ExperimentConfig.from_dict(data)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
