"""Command-line frontend: sections, radon, invert, constants, bp-check, scan.

Outputs are CSV files (comma delimiter, 12 significant digits) plus a JSON
summary with the command, the echoed configuration and the headline results.
Exit codes: 0 success, 2 usage error, 3 numerical-resolution failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .bodies import StarBody, parse_body, volume
from .bp import bp_experiment, perturbation_scan
from .geom import MAX_DIM, MIN_DIM, unit_vector
from .inversion import (
    coefficients,
    consistency_residual,
    direction_grid,
    inverse_radon,
)
from .radon import body_radial_function, radon_field
from .sections import ResolutionError, profile
from .settings import Rules, default_rules

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOLUTION = 3


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def write_summary(path: Path, command: str, config: dict, results: dict) -> None:
    payload = {"command": command, "config_echo": config, "results": results}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@dataclass
class RunConfig:
    command: str
    dim: int
    body: str | None = None
    body_k: str | None = None
    body_l: str | None = None
    xi: str | None = None
    section_level: int | None = None
    radon_level: int | None = None
    grid_level: int | None = None
    support_level: int | None = None
    profile_points: int | None = None
    gauss_nodes: int | None = None
    delta_frac: float | None = None
    t_margin: float | None = None
    samples: int | None = None
    degree: int = 4
    eps: str = "0:0.9:0.1"
    axis: str = "last"
    analytic: bool = False
    no_symmetry: bool = False
    no_roundtrip: bool = False
    random_dirs: int = 0
    seed: int = 0
    out: str | None = None

    def echo(self) -> dict:
        d = asdict(self)
        return {k: v for k, v in d.items() if v is not None}


def build_rules(cfg: RunConfig) -> Rules:
    return default_rules(
        cfg.dim,
        section_level=cfg.section_level,
        radon_level=cfg.radon_level,
        grid_level=cfg.grid_level,
        support_level=cfg.support_level,
        profile_points=cfg.profile_points,
        gauss_nodes=cfg.gauss_nodes,
        delta_frac=cfg.delta_frac,
        t_margin=cfg.t_margin,
        spline_samples=cfg.samples,
        use_symmetry=False if cfg.no_symmetry else None,
        analytic_sections=True if cfg.analytic else None,
    )


def _grid(cfg: RunConfig, rules: Rules) -> np.ndarray:
    grid = direction_grid(cfg.dim, rules.grid_level)
    if cfg.random_dirs > 0:
        rng = np.random.default_rng(cfg.seed)
        extra = rng.standard_normal((cfg.random_dirs, cfg.dim))
        extra /= np.linalg.norm(extra, axis=1, keepdims=True)
        grid = np.vstack([grid, extra])
    return grid


def _parse_xi(cfg: RunConfig) -> np.ndarray:
    if cfg.xi:
        return unit_vector([float(v) for v in cfg.xi.split(",")], cfg.dim)
    e = np.zeros(cfg.dim)
    e[-1] = 1.0
    return e


def _parse_eps(spec: str) -> list[float]:
    spec = spec.strip()
    if ":" in spec:
        parts = [float(v) for v in spec.split(":")]
        if len(parts) != 3:
            raise ValueError(f"eps range must be start:stop:step, got {spec!r}")
        start, stop, step = parts
        if step <= 0:
            raise ValueError("eps step must be positive")
        count = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(count)]
    return [float(v) for v in spec.split(",")]


def _out_paths(cfg: RunConfig) -> tuple[Path, Path]:
    base = Path(cfg.out) if cfg.out else Path(f"{cfg.command.replace('-', '_')}.csv")
    if base.suffix != ".csv":
        base = base.with_suffix(".csv")
    return base, base.with_suffix(".json")


def _xi_header(n: int) -> list[str]:
    return [f"xi_{i + 1}" for i in range(n)]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_sections(cfg: RunConfig) -> int:
    rules = build_rules(cfg)
    body = parse_body(cfg.body, cfg.dim)
    xi = _parse_xi(cfg)
    prof = profile(body, xi, rules=rules)
    csv_path, json_path = _out_paths(cfg)
    rows = [list(xi) + [t, a] for t, a in zip(prof.ts, prof.values)]
    write_csv(csv_path, _xi_header(cfg.dim) + ["t", "A"], rows)
    write_summary(
        json_path, "sections", cfg.echo(),
        {
            "support_bound": prof.support,
            "points": int(prof.ts.size),
            "A_at_0": float(prof.values[0]),
            "csv": str(csv_path),
        },
    )
    print(f"wrote {csv_path} ({prof.ts.size} rows)")
    return EXIT_OK


def cmd_radon(cfg: RunConfig) -> int:
    rules = build_rules(cfg)
    body = parse_body(cfg.body, cfg.dim)
    grid = _grid(cfg, rules)
    vals = radon_field(body_radial_function(body), grid, rules.radon_level)
    csv_path, json_path = _out_paths(cfg)
    rows = [list(xi) + [v] for xi, v in zip(grid, vals)]
    write_csv(csv_path, _xi_header(cfg.dim) + ["radon_rho"], rows)
    write_summary(
        json_path, "radon", cfg.echo(),
        {
            "directions": int(grid.shape[0]),
            "min": float(vals.min()),
            "max": float(vals.max()),
            "csv": str(csv_path),
        },
    )
    print(f"wrote {csv_path} ({grid.shape[0]} rows)")
    return EXIT_OK


def cmd_invert(cfg: RunConfig) -> int:
    rules = build_rules(cfg)
    body = parse_body(cfg.body, cfg.dim)
    grid = _grid(cfg, rules)
    fld = inverse_radon(body, grid=grid, rules=rules, roundtrip=not cfg.no_roundtrip)
    csv_path, json_path = _out_paths(cfg)
    if fld.rho_hat is not None:
        rows = [
            list(xi) + [rh, rt, abs(rh - rt)]
            for xi, rh, rt in zip(fld.grid, fld.rho_hat, fld.rho_true)
        ]
        write_csv(csv_path, _xi_header(cfg.dim) + ["rho_hat", "rho_true", "abs_err"], rows)
    else:
        rows = [list(xi) + [v] for xi, v in zip(fld.grid, fld.values)]
        write_csv(csv_path, _xi_header(cfg.dim) + ["inverse_scaled"], rows)
    results = fld.summary()
    results["csv"] = str(csv_path)
    write_summary(json_path, "invert", cfg.echo(), results)
    msg = f"wrote {csv_path}; min inverse (ball-normalized) = {_fmt(fld.min_value)}"
    if fld.max_abs_err is not None:
        msg += f", roundtrip max|rho_hat - rho| = {_fmt(fld.max_abs_err)}"
    print(msg)
    return EXIT_OK


def cmd_constants(cfg: RunConfig) -> int:
    c = coefficients(cfg.dim)
    csv_path, json_path = _out_paths(cfg)
    rows = [[k, a] for k, a in enumerate(c.a[:16])]
    write_csv(csv_path, ["k", "a_k"], rows)
    results = {
        "kappa_n": c.kappa,
        "series_terms_used": c.terms_used,
        "series_tail_bound": c.tail_bound,
        "csv": str(csv_path),
    }
    print(f"n = {c.n}")
    print(f"kappa_n = {_fmt(c.kappa)}")
    if c.series_sum is not None:
        results["S_n"] = c.series_sum
        results["consistency_residual"] = consistency_residual(cfg.dim)
        print(f"S_n = {_fmt(c.series_sum)}")
        print(f"consistency_residual = {_fmt(results['consistency_residual'])}")
    print("a_k:", ", ".join(_fmt(a) for a in c.a[:8]), "...")
    write_summary(json_path, "constants", cfg.echo(), results)
    return EXIT_OK


def cmd_bp_check(cfg: RunConfig) -> int:
    rules = build_rules(cfg)
    body_k = parse_body(cfg.body_k, cfg.dim)
    body_l = parse_body(cfg.body_l, cfg.dim)
    grid = _grid(cfg, rules)
    report = bp_experiment(body_k, body_l, grid=grid, rules=rules)
    csv_path, json_path = _out_paths(cfg)
    txt_path = csv_path.with_suffix(".txt")
    txt_path.parent.mkdir(parents=True, exist_ok=True)
    txt_path.write_text(report.to_text())
    write_csv(
        csv_path,
        ["quantity", "value"],
        [
            ["sections_dominated", 1.0 if report.dominance.holds else 0.0],
            ["dominance_violations", report.dominance.violations],
            ["dominance_worst_margin", report.dominance.worst_margin],
            ["dominance_margin_error", report.dominance.margin_error],
            ["vol_k", report.vol_k],
            ["vol_l", report.vol_l],
            ["vol_error", report.vol_error],
        ],
    )
    write_summary(
        json_path, "bp-check", cfg.echo(),
        {
            "verdict": report.verdict,
            "vol_k": report.vol_k,
            "vol_l": report.vol_l,
            "dominance_holds": report.dominance.holds,
            "worst_margin": report.dominance.worst_margin,
            "report": str(txt_path),
        },
    )
    print(report.to_text(), end="")
    return EXIT_OK


def _axis_vector(spec: str, dim: int) -> np.ndarray:
    axis = np.zeros(dim)
    spec = spec.strip().lower()
    if spec == "last":
        axis[-1] = 1.0
    elif spec == "first":
        axis[0] = 1.0
    else:
        idx = int(spec)
        if not 1 <= idx <= dim:
            raise ValueError(f"axis index out of range: {idx}")
        axis[idx - 1] = 1.0
    return axis


def cmd_scan(cfg: RunConfig) -> int:
    rules = build_rules(cfg)
    eps_values = _parse_eps(cfg.eps)
    axis = _axis_vector(cfg.axis, cfg.dim)
    result = perturbation_scan(cfg.dim, cfg.degree, eps_values, rules=rules, axis=axis)
    csv_path, json_path = _out_paths(cfg)
    write_csv(
        csv_path,
        ["eps", "min_value", "argmin_alignment"],
        [list(r) for r in result["rows"]],
    )
    first = result["first_negative_eps"]
    write_summary(
        json_path, "scan", cfg.echo(),
        {
            "first_negative_eps": first,
            "admissible_limit": result["admissible_limit"],
            "rows": [[float(v) for v in r] for r in result["rows"]],
            "csv": str(csv_path),
        },
    )
    tag = "none" if first is None else _fmt(first)
    print(f"wrote {csv_path}; first negative minimum at eps = {tag}")
    return EXIT_OK


_COMMANDS = {
    "sections": cmd_sections,
    "radon": cmd_radon,
    "invert": cmd_invert,
    "constants": cmd_constants,
    "bp-check": cmd_bp_check,
    "scan": cmd_scan,
}


# ---------------------------------------------------------------------------
# argument parsing (flat key=value config file; flags win on conflict)
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, body_flags=("--body",)) -> None:
    p.add_argument("--dim", type=int, required=True, help="ambient dimension, 3..8")
    for flag in body_flags:
        p.add_argument(flag, type=str, help="body spec, e.g. ball:r=1 or pball:eps=0.3,d=4,axis=last")
    p.add_argument("--config", type=str, help="key=value file; flags win on conflict")
    p.add_argument("--section-level", type=int, dest="section_level")
    p.add_argument("--radon-level", type=int, dest="radon_level")
    p.add_argument("--grid-level", type=int, dest="grid_level")
    p.add_argument("--support-level", type=int, dest="support_level")
    p.add_argument("--profile-points", type=int, dest="profile_points")
    p.add_argument("--gauss-nodes", type=int, dest="gauss_nodes")
    p.add_argument("--delta-frac", type=float, dest="delta_frac")
    p.add_argument("--t-margin", type=float, dest="t_margin")
    p.add_argument("--samples", type=int, help="spline samples for symmetric bodies")
    p.add_argument("--analytic-sections", action="store_true", dest="analytic",
                   help="use closed-form sections where available")
    p.add_argument("--no-symmetry", action="store_true", dest="no_symmetry",
                   help="disable symmetry fast paths")
    p.add_argument("--random-dirs", type=int, default=0, dest="random_dirs",
                   help="append this many seeded random directions to the grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, help="output CSV path (JSON summary alongside)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="startomo",
        description="Section functions, spherical Radon transform and its "
                    "inversion for origin-symmetric star bodies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sections", help="dump a section profile A_xi(t) to CSV")
    _add_common(p)
    p.add_argument("--xi", type=str, help="comma-separated direction (normalized)")

    p = sub.add_parser("radon", help="transform of the radial function over a grid")
    _add_common(p)

    p = sub.add_parser("invert", help="inverse transform and roundtrip report")
    _add_common(p)
    p.add_argument("--no-roundtrip", action="store_true", dest="no_roundtrip",
                   help="skip the reconstruction pass (field minimum only)")

    p = sub.add_parser("constants", help="coefficients a_k, series sum and kappa_n")
    _add_common(p, body_flags=())

    p = sub.add_parser("bp-check", help="section dominance and volume comparison")
    _add_common(p, body_flags=("--k", "--l"))

    p = sub.add_parser("scan", help="zonal perturbation scan of the inverse minimum")
    _add_common(p, body_flags=())
    p.add_argument("--d", type=int, default=4, dest="degree",
                   help="even perturbation degree (2, 4 or 6)")
    p.add_argument("--eps", type=str, default="0:0.9:0.1",
                   help="start:stop:step or comma list")
    p.add_argument("--axis", type=str, default="last")

    return parser


# built-in defaults of optional flags, used to decide whether the command
# line actually set a value (flags win over the config file)
_FLAG_DEFAULTS = {
    "seed": 0,
    "random_dirs": 0,
    "degree": 4,
    "eps": "0:0.9:0.1",
    "axis": "last",
    "analytic": False,
    "no_symmetry": False,
    "no_roundtrip": False,
}

_CONFIG_TYPES = {
    "section_level": int,
    "radon_level": int,
    "grid_level": int,
    "support_level": int,
    "profile_points": int,
    "gauss_nodes": int,
    "samples": int,
    "random_dirs": int,
    "seed": int,
    "degree": int,
    "delta_frac": float,
    "t_margin": float,
    "analytic": bool,
    "no_symmetry": bool,
    "no_roundtrip": bool,
}


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    path = Path(args.config)
    if not path.exists():
        parser.error(f"config file not found: {path}")
    entries = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            parser.error(f"malformed config line: {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        entries[key.replace("-", "_")] = val
    for key, val in entries.items():
        if not hasattr(args, key):
            parser.error(f"unknown config key: {key}")
        current = getattr(args, key)
        untouched = current is None or (
            key in _FLAG_DEFAULTS and current == _FLAG_DEFAULTS[key]
        )
        if not untouched:
            continue
        caster = _CONFIG_TYPES.get(key, str)
        try:
            if caster is bool:
                setattr(args, key, val.lower() in ("1", "true", "yes"))
            else:
                setattr(args, key, caster(val))
        except ValueError:
            parser.error(f"bad value for config key {key}: {val!r}")


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    _apply_config_file(args, parser)

    if not MIN_DIM <= args.dim <= MAX_DIM:
        parser.error(f"--dim must be in [{MIN_DIM}, {MAX_DIM}], got {args.dim}")

    cfg = RunConfig(
        command=args.command,
        dim=args.dim,
        body=getattr(args, "body", None),
        body_k=getattr(args, "k", None),
        body_l=getattr(args, "l", None),
        xi=getattr(args, "xi", None),
        section_level=args.section_level,
        radon_level=args.radon_level,
        grid_level=args.grid_level,
        support_level=args.support_level,
        profile_points=args.profile_points,
        gauss_nodes=args.gauss_nodes,
        delta_frac=args.delta_frac,
        t_margin=args.t_margin,
        samples=args.samples,
        degree=getattr(args, "degree", 4),
        eps=getattr(args, "eps", "0:0.9:0.1"),
        axis=getattr(args, "axis", "last"),
        analytic=args.analytic,
        no_symmetry=args.no_symmetry,
        no_roundtrip=getattr(args, "no_roundtrip", False),
        random_dirs=args.random_dirs,
        seed=args.seed,
        out=args.out,
    )

    needs_body = {"sections": ["body"], "radon": ["body"], "invert": ["body"],
                  "bp-check": ["body_k", "body_l"]}
    for attr in needs_body.get(cfg.command, []):
        if getattr(cfg, attr) is None:
            flag = {"body": "--body", "body_k": "--k", "body_l": "--l"}[attr]
            parser.error(f"{cfg.command} requires {flag}")

    try:
        if cfg.command in ("sections", "radon", "invert"):
            parse_body(cfg.body, cfg.dim)
        if cfg.command == "bp-check":
            parse_body(cfg.body_k, cfg.dim)
            parse_body(cfg.body_l, cfg.dim)
        if cfg.command == "scan":
            _parse_eps(cfg.eps)
    except ValueError as exc:
        parser.error(str(exc))

    try:
        return _COMMANDS[cfg.command](cfg)
    except ResolutionError as exc:
        print(f"numerical resolution failure: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION


if __name__ == "__main__":
    sys.exit(main())
