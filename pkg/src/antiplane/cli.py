"""Command-line entry point: ``antiplane {solve,decay,converge,green,check}``.

Every run writes CSV files into ``--out`` (a directory) plus ``summary.txt``.
Each CSV starts with a ``# config: {...}`` comment line recording the full run
configuration; floats are written with 17 significant digits so the files
round-trip exactly.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analysis import convergence_study, decay_envelope
from .checks import run_checks
from .green import BOUNDARY_MODES, LatticeGreenFunction, sample_ray
from .lattice import LatticeDomain, position
from .model import EnergyModel
from .solver import SolverError, lambda_min, newton

log = logging.getLogger("antiplane")

COMMANDS = ("solve", "decay", "converge", "green", "check")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    radius: float = 32.0
    eps: float = 0.01
    tol: float = 1e-8
    radii: List[float] = field(default_factory=lambda: [16.0, 32.0, 64.0])
    ref_radius: float = 256.0
    source: Tuple[int, int] = (13, 9)
    boundary: str = "symmetric"
    out_path: str = "."

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.radius < 8:
            raise ConfigError("radius must be at least 8")
        if self.eps < 0:
            raise ConfigError("eps must be nonnegative")
        if self.command == "converge":
            if not self.radii or min(self.radii) < 8:
                raise ConfigError("radii must be nonempty and each at least 8")
            if self.ref_radius < 4 * max(self.radii):
                raise ConfigError("ref_radius must be at least 4 * max(radii)")
        if self.command == "green":
            p = position(self.source)
            if np.hypot(p[0], p[1]) > self.radius / 2:
                raise ConfigError("source must lie within radius / 2 of the crack tip")
            if self.boundary not in BOUNDARY_MODES:
                raise ConfigError(f"boundary must be one of {BOUNDARY_MODES}")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, config: RunConfig, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("# config: " + json.dumps(asdict(config), sort_keys=True) + "\r\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def write_summary(path: Path, items) -> None:
    with open(path, "w") as fh:
        for key, value in items:
            fh.write(f"{key}: {value}\n")


def _solve(config: RunConfig):
    dom = LatticeDomain(config.radius)
    model = EnergyModel(dom, config.eps)
    return model, newton(model, tol=config.tol)


def cmd_solve(config: RunConfig, out: Path) -> List[Tuple[str, object]]:
    model, rep = _solve(config)
    dom = model.domain
    rows = ((l[0], l[1], p[0], p[1], u)
            for l, p, u in zip(dom.sites, dom.positions, rep.final_field.values))
    write_csv(out / "field.csv", config, ["l1", "l2", "x1", "x2", "u"], rows)
    lam = lambda_min(model, rep.final_field)
    return [("iterations", rep.iterations), ("residual", _fmt(rep.residual)),
            ("lambda_min", _fmt(lam)), ("n_sites", dom.n_sites)]


def cmd_decay(config: RunConfig, out: Path):
    _, rep = _solve(config)
    report = decay_envelope(rep.final_field, eps=config.eps)
    write_csv(out / "decay.csv", config, ["r", "envelope"], report.rows())
    return [("iterations", rep.iterations), ("slope", _fmt(report.slope)),
            ("fit_window", f"{report.fit_window[0]:g},{report.fit_window[1]:g}")]


def cmd_converge(config: RunConfig, out: Path):
    report = convergence_study(config.radii, config.eps, config.ref_radius, tol=config.tol)
    write_csv(out / "converge.csv", config, ["R", "err_h1"], report.rows())
    return [("slope", _fmt(report.slope)), ("ref_radius", _fmt(report.ref_radius)),
            ("note", report.note)]


def cmd_green(config: RunConfig, out: Path):
    dom = LatticeDomain(config.radius)
    green = LatticeGreenFunction(dom, config.boundary)
    s = tuple(int(c) for c in config.source)
    # ray along +e1 starting two sites from the source, kept R/4 inside the boundary
    count = 0
    while np.hypot(*position((s[0] + 2 + count, s[1]))) <= 0.75 * config.radius:
        count += 1
    samples = sample_ray(green, s, (s[0] + 2, s[1]), (1, 0), count)
    write_csv(out / "green.csv", config, ["l1", "l2", "s1", "s2", "G", "mixedD", "bound"],
              ((l[0], l[1], ss[0], ss[1], g, md, b) for l, ss, g, md, b in samples))
    far = dom.distance_to_boundary() >= config.radius / 4
    delta = float(np.max(np.abs(green.delta_residual(s)[far])))
    ratio = max(abs(md) / b for *_, md, b in samples) if samples else float("nan")
    return [("delta_residual_max", _fmt(delta)), ("samples", len(samples)),
            ("max_mixed_over_bound", _fmt(ratio)), ("boundary", config.boundary)]


def cmd_check(config: RunConfig, out: Path):
    results = run_checks()
    items = []
    for name, ok, detail in results:
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        print(line)
        items.append((name, f"{'PASS' if ok else 'FAIL'} ({detail})"))
    if not all(ok for _, ok, _ in results):
        raise SystemExit(1)
    return items


HANDLERS = {"solve": cmd_solve, "decay": cmd_decay, "converge": cmd_converge,
            "green": cmd_green, "check": cmd_check}


def run(config: RunConfig) -> int:
    """Execute one configured command; returns the process exit status."""
    try:
        config.validate()
        out = Path(config.out_path)
        out.mkdir(parents=True, exist_ok=True)
        items = HANDLERS[config.command](config, out)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ConfigError, SolverError, ValueError, RuntimeError) as exc:
        print(f"antiplane {config.command}: error: {exc}", file=sys.stderr)
        return 2
    write_summary(out / "summary.txt", [("command", config.command)] + items)
    for key, value in items:
        log.info("%s: %s", key, value)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antiplane", description="Atomistic anti-plane crack experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--radius", type=float, default=32.0, help="supercell radius R")
        p.add_argument("--eps", type=float, default=0.01, help="loading parameter")
        p.add_argument("--tol", type=float, default=1e-8, help="Newton l-inf residual")
        p.add_argument("--out", dest="out_path", default=".", help="output directory")
        p.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("solve", help="equilibrium corrector on a supercell"))
    common(sub.add_parser("decay", help="envelope decay rate of |Du|"))
    p = sub.add_parser("converge", help="supercell convergence study")
    common(p)
    p.add_argument("--radii", type=float, nargs="+", default=[16.0, 32.0, 64.0])
    p.add_argument("--ref-radius", type=float, default=256.0)
    p = sub.add_parser("green", help="crack lattice Green's function along a ray")
    common(p)
    p.add_argument("--source", type=int, nargs=2, default=[13, 9], metavar=("S1", "S2"))
    p.add_argument("--boundary", choices=BOUNDARY_MODES, default="symmetric")
    common(sub.add_parser("check", help="run the invariant suite"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    kw = {k: v for k, v in vars(args).items() if k != "verbose"}
    if "source" in kw:
        kw["source"] = tuple(kw["source"])
    return run(RunConfig(**kw))


if __name__ == "__main__":
    sys.exit(main())
