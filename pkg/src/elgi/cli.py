"""``elgi`` command-line front end.

Every command evaluates a theta grid (or a single theta) and writes one
table as CSV, JSON or an SVG figure. Settings resolve as: command-line
flags, then a JSON file given with ``--config``, then ``ELGI_SEED`` for
the seed, then built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .entropy import info_deficit
from .macrorealism import grand_feasibility, quantum_marginal_set
from .protocols import MeasurementMode, joint2, joint3, marginalize
from .qcore import as_spin, spin_dim
from .sampling import DEFAULT_REPS, DEFAULT_SEED, DEFAULT_SHOTS, ShotConfig, estimate_deficit, estimate_table, sigma_violation

COMMANDS = ("probabilities", "deficit", "sweep", "joint3", "feasibility", "sample")
FORMATS = ("csv", "json", "svg")

DEFAULT_GRIDS = {
    "probabilities": "0:2pi:101",
    "deficit": "pi/4",
    "sweep": "0:pi:181",
    "joint3": "0:pi/2:51",
    "feasibility": "0:pi/2:51",
    "sample": "pi/4",
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


_ANGLE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$")


def parse_angle(text) -> float:
    """Parse ``0.785``, ``pi/4``, ``3pi/4``, ``-2*pi`` and the like to radians."""
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        t = str(text).strip().lower()
        m = _ANGLE.match(t)
        if m:
            sign_only = {"": 1.0, "+": 1.0, "-": -1.0}
            coef = sign_only[m.group(1)] if m.group(1) in sign_only else float(m.group(1))
            denom = float(m.group(2)) if m.group(2) else 1.0
            if denom == 0:
                raise CliError(f"angle denominator is zero in {text!r}")
            value = coef * math.pi / denom
        else:
            try:
                value = float(t)
            except ValueError:
                raise CliError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise CliError(f"angle must be finite, got {text!r}")
    return value


def parse_grid(text: str) -> list[float]:
    """``start:stop:points`` (inclusive linspace) or a single angle."""
    parts = str(text).split(":")
    if len(parts) == 1:
        return [parse_angle(parts[0])]
    if len(parts) != 3:
        raise CliError(f"grid must look like start:stop:points, got {text!r}")
    start, stop = parse_angle(parts[0]), parse_angle(parts[1])
    try:
        points = int(parts[2])
    except ValueError:
        raise CliError(f"grid point count must be an integer, got {parts[2]!r}") from None
    if points < 1:
        raise CliError(f"grid needs at least one point, got {points}")
    return np.linspace(start, stop, points).tolist()


@dataclass
class RunConfig:
    command: str
    s: float = 0.5
    n: int = 3
    theta_grid: list = field(default_factory=list)
    mode: str = "analytic"
    shots: int | None = None
    reps: int = DEFAULT_REPS
    seed: int = DEFAULT_SEED
    readout_flip: float = 0.0
    out: str | None = None
    format: str = "csv"

    def shot_config(self) -> ShotConfig | None:
        if self.shots is None:
            return None
        return ShotConfig(self.shots, self.reps, self.seed, self.readout_flip)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="elgi", description="Entropic Leggett-Garg simulations.")
    p.add_argument("--version", action="version", version=f"elgi {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with default settings")
    p.add_argument("--s", type=float, help="spin (0.5, 1, 1.5, ...)")
    p.add_argument("--n", type=int, help="number of measurement times")
    p.add_argument("--theta", help="single rotation angle, e.g. 0.785 or pi/4")
    p.add_argument("--theta-grid", help="start:stop:points, inclusive")
    p.add_argument("--mode", choices=[m.value for m in MeasurementMode])
    p.add_argument("--shots", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--readout-flip", type=float)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=FORMATS)
    return p


def resolve_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    file_cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise CliError("config file must hold a JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        unknown = set(file_cfg) - {f for f in RunConfig.__dataclass_fields__ if f != "command"} - {"theta"}
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(name, default):
        value = getattr(args, name, None)
        if value is not None:
            return value
        return file_cfg.get(name, default)

    env_seed = environ.get("ELGI_SEED")
    seed_default = DEFAULT_SEED
    if env_seed:
        try:
            seed_default = int(env_seed)
        except ValueError:
            raise CliError(f"ELGI_SEED must be an integer, got {env_seed!r}") from None

    if args.theta is not None and args.theta_grid is not None:
        raise CliError("give either --theta or --theta-grid, not both")
    if args.theta is not None:
        grid = [parse_angle(args.theta)]
    elif args.theta_grid is not None:
        grid = parse_grid(args.theta_grid)
    elif "theta" in file_cfg:
        grid = [parse_angle(file_cfg["theta"])]
    elif "theta_grid" in file_cfg:
        g = file_cfg["theta_grid"]
        grid = [parse_angle(t) for t in g] if isinstance(g, list) else parse_grid(g)
    else:
        grid = parse_grid(DEFAULT_GRIDS[args.command])

    shots = pick("shots", None)
    if args.command == "sample" and shots is None:
        shots = DEFAULT_SHOTS
    cfg = RunConfig(
        command=args.command,
        s=float(pick("s", 0.5)),
        n=int(pick("n", 3)),
        theta_grid=grid,
        mode=MeasurementMode.parse(pick("mode", "analytic")).value,
        shots=None if shots is None else int(shots),
        reps=int(pick("reps", DEFAULT_REPS)),
        seed=int(pick("seed", seed_default)),
        readout_flip=float(pick("readout_flip", 0.0)),
        out=pick("out", None),
        format=pick("format", "csv"),
    )
    if cfg.format not in FORMATS:
        raise CliError(f"format must be one of {', '.join(FORMATS)}")
    try:
        as_spin(cfg.s)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return cfg


def _labels(d: int, k: int) -> list[str]:
    return ["".join(map(str, idx)) for idx in np.ndindex(*(d,) * k)]


def cmd_probabilities(cfg: RunConfig) -> list[dict]:
    d = spin_dim(cfg.s)
    shots = cfg.shot_config()
    rows = []
    for theta in cfg.theta_grid:
        table = joint2(cfg.s, theta, cfg.mode)
        row = {"theta": theta}
        row.update({f"P{k}": v for k, v in zip(_labels(d, 2), table.flat())})
        if shots is not None:
            mean, std = estimate_table(table, shots)
            row.update({f"S{k}": v for k, v in zip(_labels(d, 2), mean.flat())})
            row.update({f"S{k}_std": v for k, v in zip(_labels(d, 2), std.ravel())})
        rows.append(row)
    return rows


def cmd_deficit(cfg: RunConfig) -> list[dict]:
    rows = []
    for theta in cfg.theta_grid:
        r = info_deficit(cfg.n, cfg.s, theta, cfg.mode)
        rows.append({
            "theta": theta, "n": r.n, "s": r.s, "mode": r.mode.value,
            "h_step": r.h_step, "h_total": r.h_total, "deficit": r.deficit, "violated": r.violated,
        })
    return rows


def cmd_sweep(cfg: RunConfig) -> list[dict]:
    shots = cfg.shot_config()
    rows = []
    for theta in cfg.theta_grid:
        r = info_deficit(cfg.n, cfg.s, theta, cfg.mode)
        row = {"theta": theta, "deficit": r.deficit, "violated": r.violated}
        if shots is not None:
            e = estimate_deficit(theta, shots, cfg.mode, cfg.s, cfg.n)
            row.update({"mean": e.mean, "std": e.std, "sigma": sigma_violation(e)})
        rows.append(row)
    return rows


def cmd_joint3(cfg: RunConfig) -> list[dict]:
    d = spin_dim(cfg.s)
    rows = []
    for theta in cfg.theta_grid:
        p3 = joint3(cfg.s, theta, theta, cfg.mode)
        row = {"theta": theta}
        row.update({f"P{k}": v for k, v in zip(_labels(d, 3), p3.flat())})
        for name, pair, rot in (("12", (0, 1), theta), ("23", (1, 2), theta), ("13", (0, 2), 2 * theta)):
            direct = joint2(cfg.s, rot, cfg.mode)
            derived = marginalize(p3, pair)
            row.update({f"P{name}_{k}": v for k, v in zip(_labels(d, 2), direct.flat())})
            row.update({f"Pprime{name}_{k}": v for k, v in zip(_labels(d, 2), derived.flat())})
        rows.append(row)
    return rows


def cmd_feasibility(cfg: RunConfig) -> list[dict]:
    rows = []
    for theta in cfg.theta_grid:
        r = grand_feasibility(quantum_marginal_set(theta, cfg.s, cfg.mode))
        rows.append({"theta": theta, "feasible": r.feasible, "borderline": r.borderline, "gap": r.gap})
    return rows


def cmd_sample(cfg: RunConfig) -> list[dict]:
    shots = cfg.shot_config()
    rows = []
    for theta in cfg.theta_grid:
        e = estimate_deficit(theta, shots, cfg.mode, cfg.s, cfg.n)
        rows.append({
            "theta": theta, "shots": shots.shots, "reps": shots.reps, "seed": shots.seed,
            "readout_flip": shots.readout_flip, "mean": e.mean, "std": e.std,
            "sigma": sigma_violation(e), "analytic": info_deficit(cfg.n, cfg.s, theta).deficit,
        })
    return rows


HANDLERS = {
    "probabilities": cmd_probabilities,
    "deficit": cmd_deficit,
    "sweep": cmd_sweep,
    "joint3": cmd_joint3,
    "feasibility": cmd_feasibility,
    "sample": cmd_sample,
}


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        out = format(v, ".12g")
        return "0" if out == "-0" else out
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return format_value(v) if math.isinf(v) else float(format_value(v))
    return v


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([format_value(v) for v in row.values()])
    return buf.getvalue()


def render_json(cfg: RunConfig, rows: list[dict]) -> str:
    config = {k: _json_value(v) for k, v in asdict(cfg).items() if k not in ("theta_grid", "out")}
    config["theta_grid"] = [_json_value(t) for t in cfg.theta_grid]
    doc = {"config": config, "rows": [{k: _json_value(v) for k, v in row.items()} for row in rows]}
    return json.dumps(doc, indent=2) + "\n"


def render_svg(cfg: RunConfig, rows: list[dict]) -> str:
    from .plotting import line_plot

    x = [r["theta"] for r in rows]
    col = lambda name: [r[name] for r in rows]  # noqa: E731
    c = cfg.command
    if c == "probabilities":
        curves = {k: col(k) for k in rows[0] if k.startswith("P")}
        points = None
        if cfg.shots is not None:
            points = {f"sampled {k[1:]}": (x, col(k), col(k + "_std")) for k in rows[0]
                      if k.startswith("S") and not k.endswith("_std")}
        return line_plot(x, curves, xlabel="theta (rad)", ylabel="joint probability",
                         title=f"two-time joint probabilities ({cfg.mode})", points=points)
    if c in ("deficit", "sweep"):
        points = None
        if "mean" in rows[0]:
            points = {"sampled": (x, col("mean"), col("std"))}
        return line_plot(x, {f"D{cfg.n}": col("deficit")}, xlabel="theta (rad)", ylabel="information deficit",
                         title=f"information deficit, s={cfg.s:g}", hline=0.0, points=points)
    if c == "joint3":
        return line_plot(x, {"P(0_1,0_3) direct": col("P13_00"), "P'(0_1,0_3) from 3-time": col("Pprime13_00")},
                         xlabel="step theta (rad)", ylabel="probability", title="direct vs derived (1,3) marginal")
    if c == "feasibility":
        return line_plot(x, {"phase-1 residual": col("gap")}, xlabel="step theta (rad)",
                         ylabel="max constraint violation", title="grand distribution feasibility", hline=0.0)
    points = {"sampled mean +/- std": (x, col("mean"), col("std"))}
    return line_plot(x, {"analytic": col("analytic")}, xlabel="theta (rad)", ylabel="information deficit",
                     title=f"finite-shot deficit ({cfg.shots} shots x {cfg.reps})", hline=0.0, points=points)


def run(cfg: RunConfig) -> str:
    rows = HANDLERS[cfg.command](cfg)
    if cfg.format == "csv":
        return render_csv(rows)
    if cfg.format == "json":
        return render_json(cfg, rows)
    return render_svg(cfg, rows)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        text = run(cfg)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (CliError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"elgi: error: {msg}", file=sys.stderr)
        return 2 if isinstance(exc, CliError) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
