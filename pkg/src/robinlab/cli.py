"""Command-line front end: ``python -m robinlab <command>``.

Commands
--------
ball      lambda_{2,alpha} (or lambda_{1,alpha} with ``--sector 0``) of a geodesic ball
steklov   sigma_1 of a ball, or of a meshed domain with ``--mesh``
fem       lowest Robin eigenvalues of a mesh2d v1 file
mesh      generate a mesh2d v1 file (disk, ellipse, rectangle, perturbed disk)
verify    run a check suite over a configuration and exit 0 / 4
sweep     tabulate ball eigenvalues over a configuration grid as CSV

Exit codes: 0 success, 2 bad arguments or configuration, 3 computation
failure, 4 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DegenerateMeshError, DomainError, RobinLabError, UnsupportedParameterError
from .fem2d import read_mesh, robin_eigs_fem, steklov_fem, write_mesh
from .profile import check_h_monotone, check_profile_bounds
from .radial import solve_robin_ball, steklov_ball
from .shapes import disk_mesh, ellipse_mesh, perturbed_disk_mesh, rectangle_mesh
from .spaceform import BallSpec
from .verify import comparison_sweep, inequality_chain, mesh_error_estimate, shape_opt_sweep

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_CHECK = 0, 2, 3, 4

CSV_COLUMNS = ["kappa", "dim", "radius", "alpha", "lambda1", "lambda2", "sigma1", "source", "residual"]

CONFIG_KEYS = {
    "kappa": float,
    "dim": int,
    "radius": float,
    "alpha_min": float,
    "alpha_max": float,
    "alpha_steps": int,
    "mesh_h": float,
    "family": str,
    "eps": float,
    "mode_k": int,
    "tolerance": float,
}
LIST_KEYS = {"kappa", "dim", "radius", "eps", "mode_k"}

PRESETS = {
    "default": (
        "kappa = 0, -1\n"
        "dim = 2, 3\n"
        "radius = 0.5, 1\n"
        "alpha_min = -0.8\n"
        "alpha_max = 0\n"
        "alpha_steps = 5\n"
        "mesh_h = 0.04\n"
        "family = ellipse\n"
        "eps = 0.2, 0.5\n"
        "mode_k = 2\n"
        "tolerance = 1e-10\n"
    ),
    "alpha_grid": (
        "kappa = 0, -1\n"
        "dim = 2\n"
        "radius = 1\n"
        "alpha_min = -1\n"
        "alpha_max = 0\n"
        "alpha_steps = 5\n"
        "tolerance = 1e-10\n"
    ),
}

DEFAULTS = {
    "kappa": [0.0],
    "dim": [2],
    "radius": [1.0],
    "alpha_min": -1.0,
    "alpha_max": 0.0,
    "alpha_steps": 5,
    "mesh_h": 0.04,
    "family": "ellipse",
    "eps": [0.2],
    "mode_k": [2],
    "tolerance": 1e-10,
}


class UsageError(Exception):
    """Bad flags or configuration (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- configuration --------------------------------------------------------------

def parse_config(text: str) -> dict:
    """Parse flat ``key = value`` text; ``#`` starts a comment.

    Keys in ``kappa, dim, radius, eps, mode_k`` accept comma-separated lists.
    Unknown keys, duplicate keys and malformed values raise :class:`UsageError`.
    """
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        if key in cfg:
            raise UsageError(f"config line {lineno}: duplicate key {key!r}")
        conv = CONFIG_KEYS[key]
        try:
            if key in LIST_KEYS:
                cfg[key] = [conv(v.strip()) for v in value.split(",")]
            else:
                cfg[key] = conv(value)
        except ValueError:
            raise UsageError(f"config line {lineno}: bad value {value!r} for {key}") from None
    return validate_config(cfg)


def validate_config(cfg: dict) -> dict:
    out = dict(DEFAULTS)
    out.update(cfg)
    if out["alpha_steps"] < 1:
        raise UsageError("alpha_steps must be >= 1")
    if out["alpha_min"] > out["alpha_max"]:
        raise UsageError("alpha_min must not exceed alpha_max")
    if out["alpha_max"] > 0:
        raise UsageError("alpha > 0 is not supported")
    if any(n < 2 for n in out["dim"]):
        raise UsageError("dim must be >= 2")
    if any(not r > 0 for r in out["radius"]):
        raise UsageError("radius must be positive")
    if out["family"] not in ("ellipse", "perturbed_disk"):
        raise UsageError("family must be 'ellipse' or 'perturbed_disk'")
    if not out["mesh_h"] > 0 or not out["tolerance"] > 0:
        raise UsageError("mesh_h and tolerance must be positive")
    for k in out["kappa"]:
        for R in out["radius"]:
            if k > 0 and R >= math.pi / math.sqrt(k):
                raise UsageError(f"radius {R} exceeds the injectivity radius for kappa={k}")
    return out


def load_config(name: str) -> tuple[dict, str]:
    """Config from a file path or a preset name; returns ``(config, source_text)``."""
    path = Path(name)
    if path.is_file():
        text = path.read_text()
    elif name in PRESETS:
        text = PRESETS[name]
    else:
        raise UsageError(f"config {name!r} is neither a file nor a preset ({', '.join(PRESETS)})")
    return parse_config(text), text


def alpha_grid(cfg: dict) -> list[float]:
    n = cfg["alpha_steps"]
    if n == 1:
        return [cfg["alpha_min"]]
    # round to kill linspace noise such as -0.25000000000000006
    return [float(round(a, 12)) + 0.0 for a in np.linspace(cfg["alpha_min"], cfg["alpha_max"], n)]


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# --- output helpers -------------------------------------------------------------

def fmt12(x: float) -> str:
    s = f"{x:.12f}"
    return s[1:] if s.startswith("-") and float(s) == 0.0 else s


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def make_record(command: str, inputs: dict, **payload) -> dict:
    rec = {"tool": "robinlab", "version": __version__, "command": command, "inputs": inputs}
    rec.update(payload)
    rec["config_hash"] = config_hash(inputs)
    return _jsonable(rec)


def write_json(record: dict, path: str | None, out) -> None:
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if path == "-":
        out.write(text)
    elif path:
        Path(path).write_text(text)


# --- commands -------------------------------------------------------------------

def cmd_ball(args, out) -> int:
    if args.sector not in (0, 1):
        raise UsageError("--sector must be 0 or 1")
    try:
        ball = BallSpec(args.kappa, args.dim, args.radius)
    except (DomainError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.alpha > 0:
        raise UsageError(f"alpha > 0 is not supported (got {args.alpha})")
    pair = solve_robin_ball(ball, args.alpha, args.sector)
    print(fmt12(pair.eigenvalue), file=out)
    inputs = {"kappa": args.kappa, "dim": args.dim, "radius": args.radius,
              "alpha": args.alpha, "sector": args.sector}
    write_json(make_record("ball", inputs, eigenvalue=pair.eigenvalue, residual=pair.residual,
                           solver_stats=pair.stats), args.json, out)
    return EXIT_OK


def cmd_steklov(args, out) -> int:
    if args.mesh:
        mesh = _read_mesh(args.mesh)
        res = steklov_fem(mesh, k=1)
        value, residual, stats = float(res.eigenvalues[0]), float(res.residuals[0]), res.stats
        inputs = {"mesh": str(args.mesh), "kappa": mesh.kappa, "n_vertices": mesh.n_vertices}
    else:
        try:
            ball = BallSpec(args.kappa, args.dim, args.radius)
        except (DomainError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        value, residual, stats = steklov_ball(ball), 0.0, {"method": "radial"}
        inputs = {"kappa": args.kappa, "dim": args.dim, "radius": args.radius}
    print(fmt12(value), file=out)
    write_json(make_record("steklov", inputs, eigenvalue=value, residual=residual,
                           solver_stats=stats), args.json, out)
    return EXIT_OK


def _read_mesh(path):
    if not Path(path).is_file():
        raise UsageError(f"mesh file {path} not found")
    try:
        mesh = read_mesh(path)
        mesh.validate(min_angle=0.0)
    except (DegenerateMeshError, ValueError) as exc:
        raise UsageError(f"invalid mesh {path}: {exc}") from None
    return mesh


def cmd_fem(args, out) -> int:
    if args.alpha > 0:
        raise UsageError(f"alpha > 0 is not supported (got {args.alpha})")
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    mesh = _read_mesh(args.mesh)
    res = robin_eigs_fem(mesh, args.alpha, k=args.k)
    for lam in res.eigenvalues:
        print(fmt12(float(lam)), file=out)
    inputs = {"mesh": str(args.mesh), "kappa": mesh.kappa, "n_vertices": mesh.n_vertices,
              "alpha": args.alpha, "k": args.k}
    write_json(make_record("fem", inputs, eigenvalue=float(res.eigenvalues[-1]),
                           eigenvalues=res.eigenvalues, residual=float(np.max(res.residuals)),
                           solver_stats=res.stats), args.json, out)
    return EXIT_OK


def cmd_mesh(args, out) -> int:
    try:
        if args.shape == "disk":
            mesh = disk_mesh(args.kappa, args.radius, args.h)
        elif args.shape == "ellipse":
            mesh = ellipse_mesh(args.a, args.b, args.h, args.kappa)
        elif args.shape == "rectangle":
            mesh = rectangle_mesh(args.a, args.b, args.h, args.kappa)
        else:
            mesh = perturbed_disk_mesh(args.kappa, args.radius, args.eps, args.mode_k, args.h)
    except (UnsupportedParameterError, DegenerateMeshError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    write_mesh(mesh, args.out)
    print(f"{mesh.n_vertices} vertices, {len(mesh.triangles)} triangles, "
          f"min angle {mesh.min_angle():.1f} deg -> {args.out}", file=out)
    return EXIT_OK


def _balls(cfg):
    for k in cfg["kappa"]:
        for n in cfg["dim"]:
            for R in cfg["radius"]:
                yield BallSpec(k, n, R)


def _family(cfg):
    """(label, mesh) pairs of the configured shape family, each of area pi (flat)."""
    h = cfg["mesh_h"]
    if cfg["family"] == "ellipse":
        for e in cfg["eps"]:
            aspect = 1.0 + e
            a, b = math.sqrt(aspect), 1.0 / math.sqrt(aspect)
            yield f"ellipse a/b={aspect:g}", ellipse_mesh(a, b, h)
    else:
        kappa = min(cfg["kappa"])
        if kappa > 0:
            raise UsageError("perturbed_disk family needs kappa <= 0")
        for e in cfg["eps"]:
            for k in cfg["mode_k"]:
                yield (f"perturbed disk kappa={kappa:g} eps={e:g} k={k}",
                       perturbed_disk_mesh(kappa, 1.0, e, k, h))


def _suite_profile_bounds(cfg, log):
    ok = True
    tol = cfg["tolerance"]
    for ball in _balls(cfg):
        if ball.kappa > 0:
            continue
        for a in alpha_grid(cfg):
            rep = check_profile_bounds(ball, a)
            if not rep.applicable:
                continue
            good = rep.fprime_positive and rep.ratio_bound is not False and rep.worst_margin >= -tol
            ok &= good
            log(f"{ball.kappa:g} {ball.dim} {ball.radius:g} alpha={a:g} "
                f"margin={rep.worst_margin:.3e} {'ok' if good else 'FAIL'}")
    return ok


def _suite_sign(cfg, log):
    ok = True
    for ball in _balls(cfg):
        sigma = steklov_ball(ball)
        for a in alpha_grid(cfg):
            if a < -sigma:
                continue
            lam = solve_robin_ball(ball, a).eigenvalue
            good = lam >= -cfg["tolerance"]
            ok &= good
            log(f"{ball.kappa:g} {ball.dim} {ball.radius:g} alpha={a:g} lambda2={lam:.6e} "
                f"{'ok' if good else 'FAIL'}")
    return ok


def _suite_hmono(cfg, log):
    ok = True
    for ball in _balls(cfg):
        for a in alpha_grid(cfg):
            rep = check_h_monotone(ball, a, 3 * ball.radius, tol=cfg["tolerance"])
            if not rep.applicable:
                continue
            ok &= rep.monotone
            log(f"{ball.kappa:g} {ball.dim} {ball.radius:g} alpha={a:g} "
                f"rel_increase={rep.relative_increase:.3e} {'ok' if rep.monotone else 'FAIL'}")
    return ok


def _suite_chain(cfg, log):
    ok = True
    for label, mesh in _family(cfg):
        for a in alpha_grid(cfg):
            rep = inequality_chain(mesh, a)
            if not rep.applicable:
                continue
            good = rep.holds(mesh_slack=rep.mesh_error_bound)
            ok &= good
            log(f"{label} alpha={a:g} chain=" + ",".join(f"{c:.8g}" for c in rep.chain)
                + f" {'ok' if good else 'FAIL'}")
    return ok


def _suite_compare(cfg, log):
    ok = True
    kappas = [k for k in cfg["kappa"] if k <= 0]
    for n in cfg["dim"]:
        for R in cfg["radius"]:
            alphas = [a for a in alpha_grid(cfg) if a >= -1.0 / R]
            _, violations = comparison_sweep(R, n, alphas, kappas)
            bad = [v for v in violations if v[3] > cfg["tolerance"]]
            ok &= not bad
            log(f"dim={n} radius={R:g} cells={len(alphas) * len(kappas)} violations={len(bad)}")
    return ok


def _suite_shapeopt(cfg, log):
    ok = True
    for label, mesh in _family(cfg):
        rows = shape_opt_sweep([(label, mesh)], alpha_grid(cfg))
        for row in rows:
            if not row.applicable:
                continue
            slack = mesh_error_estimate(mesh, row.lambda2_ball)
            good = row.lambda2_omega <= row.lambda2_ball + slack
            ok &= good
            log(f"{label} alpha={row.alpha:g} lambda2={row.lambda2_omega:.8g} "
                f"ball={row.lambda2_ball:.8g} {'ok' if good else 'FAIL'}")
    return ok


SUITES = {
    "prop21": _suite_profile_bounds,
    "prop22": _suite_sign,
    "hmono": _suite_hmono,
    "chain": _suite_chain,
    "compare": _suite_compare,
    "shapeopt": _suite_shapeopt,
}


def cmd_verify(args, out) -> int:
    cfg, _ = load_config(args.config)
    lines = []

    def log(msg):
        lines.append(msg)
        print(msg, file=out)

    passed = SUITES[args.suite](cfg, log)
    print(f"suite {args.suite}: {'PASS' if passed else 'FAIL'}", file=out)
    write_json(make_record("verify", cfg, suite=args.suite, passed=passed, lines=lines),
               args.json, out)
    return EXIT_OK if passed else EXIT_CHECK


def sweep_rows(cfg) -> list[dict]:
    rows = []
    for ball in _balls(cfg):
        sigma = steklov_ball(ball)
        for a in alpha_grid(cfg):
            p1 = solve_robin_ball(ball, a, sector=0)
            p2 = solve_robin_ball(ball, a, sector=1)
            rows.append({
                "kappa": ball.kappa, "dim": ball.dim, "radius": ball.radius, "alpha": a,
                "lambda1": p1.eigenvalue, "lambda2": p2.eigenvalue, "sigma1": sigma,
                "source": "radial", "residual": max(abs(p1.residual), abs(p2.residual)),
            })
    return rows


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([f"{r[c]:.15g}" if isinstance(r[c], float) else r[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args, out) -> int:
    cfg, _ = load_config(args.config)
    text = format_csv(sweep_rows(cfg))
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robinlab", description="Robin/Steklov eigenvalues on space-form domains.")
    p.add_argument("--version", action="version", version=f"robinlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def ball_flags(q, alpha=True):
        q.add_argument("--kappa", type=float, required=True)
        q.add_argument("--dim", type=int, required=True)
        q.add_argument("--radius", type=float, required=True)
        if alpha:
            q.add_argument("--alpha", type=float, required=True)

    q = sub.add_parser("ball", help="ball eigenvalue by shooting")
    ball_flags(q)
    q.add_argument("--sector", type=int, default=1, help="1: lambda_2 (default), 0: lambda_1")
    q.add_argument("--json", metavar="PATH", help="write the JSON record ('-' for stdout)")
    q.set_defaults(func=cmd_ball)

    q = sub.add_parser("steklov", help="first nonzero Steklov eigenvalue")
    q.add_argument("--kappa", type=float, default=0.0)
    q.add_argument("--dim", type=int, default=2)
    q.add_argument("--radius", type=float, default=1.0)
    q.add_argument("--mesh", help="mesh2d v1 file (overrides the ball flags)")
    q.add_argument("--json", metavar="PATH")
    q.set_defaults(func=cmd_steklov)

    q = sub.add_parser("fem", help="Robin eigenvalues of a mesh file")
    q.add_argument("--mesh", required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--k", type=int, default=2)
    q.add_argument("--json", metavar="PATH")
    q.set_defaults(func=cmd_fem)

    q = sub.add_parser("mesh", help="write a mesh2d v1 file")
    q.add_argument("--shape", choices=["disk", "ellipse", "rectangle", "perturbed_disk"], required=True)
    q.add_argument("--kappa", type=float, default=0.0)
    q.add_argument("--radius", type=float, default=1.0)
    q.add_argument("--a", type=float, default=1.0, help="semi-axis or width")
    q.add_argument("--b", type=float, default=1.0, help="semi-axis or height")
    q.add_argument("--eps", type=float, default=0.1)
    q.add_argument("--mode-k", dest="mode_k", type=int, default=2)
    q.add_argument("--h", type=float, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_mesh)

    q = sub.add_parser("verify", help="run a check suite")
    q.add_argument("--suite", choices=sorted(SUITES), required=True)
    q.add_argument("--config", required=True, help=f"config file or preset ({', '.join(PRESETS)})")
    q.add_argument("--json", metavar="PATH")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("sweep", help="CSV table of ball eigenvalues")
    q.add_argument("--config", required=True)
    q.add_argument("--out", help="CSV path (stdout if omitted)")
    q.set_defaults(func=cmd_sweep)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"robinlab: error: {exc}", file=err)
        return EXIT_USAGE
    except UnsupportedParameterError as exc:
        print(f"robinlab: error: {exc}", file=err)
        return EXIT_USAGE
    except (RobinLabError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"robinlab: computation failed: {exc}", file=err)
        return EXIT_COMPUTE
