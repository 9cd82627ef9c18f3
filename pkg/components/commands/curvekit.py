"""
CurveKit Command Component
Routes the analyze / evolute / bifurcation / strata / jet subcommands
"""
from __future__ import annotations

import argparse
import logging
import os
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, List

import numpy as np
import yaml

from src.data_constants import COMMANDS, FEATURE_KINDS, FORMATS, STRATUM_NAMES
from src.renderer import Polyline

if TYPE_CHECKING:
    from main import CurveKitApp

logger = logging.getLogger(__name__)

DESCRIPTOR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "curvekit.yaml")


@dataclass(frozen=True)
class Subcommand:
    name: str
    help: str
    usage: str
    handler: Callable[["CurveKitCommand", argparse.Namespace], int]


def parse_range(text: str) -> List[float]:
    """'LO:HI' -> [lo, hi]"""
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    try:
        return [float(parts[0]), float(parts[1])]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from e


def join_range_values(argv: List[str]) -> List[str]:
    """'--range LO:HI' -> '--range=LO:HI' so that a negative LO is not read as an option"""
    out: List[str] = []
    i = 0
    while i < len(argv):
        if argv[i] == "--range" and i + 1 < len(argv):
            out.append(f"--range={argv[i + 1]}")
            i += 2
            continue
        out.append(argv[i])
        i += 1
    return out


class CurveKitCommand:
    """CurveKit command handler"""

    registered_subcommands: Dict[str, Subcommand] = {}

    def __init__(self, app: "CurveKitApp"):
        self.app = app

    @classmethod
    def subcommand(cls, name: str, help: str, usage: str):
        """Register a handler under a subcommand name"""

        def decorator(fn):
            cls.registered_subcommands[name] = Subcommand(name, help, usage, fn)
            return fn

        return decorator

    @staticmethod
    def descriptor() -> Dict:
        with open(DESCRIPTOR, "r", encoding="utf-8") as f:
            return yaml.safe_load(f)

    @classmethod
    def build_parser(cls) -> argparse.ArgumentParser:
        meta = cls.descriptor()["metadata"]
        usages = "\n".join(f"  {s.usage}" for s in cls.registered_subcommands.values())
        parser = argparse.ArgumentParser(prog=meta["name"], description=meta["description"]["en_US"],
                                         epilog=f"usage by command:\n{usages}",
                                         formatter_class=argparse.RawDescriptionHelpFormatter)
        parser.add_argument("command", choices=COMMANDS,
                            help="; ".join(f"{s.name}: {s.help}" for s in cls.registered_subcommands.values()))
        parser.add_argument("input", help="curve or family spec (JSON)")
        parser.add_argument("--range", dest="t_range", type=parse_range, help="t-range override LO:HI")
        parser.add_argument("--samples", type=int, help="scan samples")
        parser.add_argument("--tol", type=float, help="regularity / zero tolerance")
        parser.add_argument("--degree", type=int, help="jet degree")
        parser.add_argument("--at", type=float, help="basepoint t for strata and jet")
        parser.add_argument("--out", help="output directory")
        parser.add_argument("--format", choices=FORMATS, help="table format")
        parser.add_argument("--feature", choices=FEATURE_KINDS, help="local-model report for evolute")
        parser.add_argument("--stratum", choices=STRATUM_NAMES, help="trace a single stratum")
        parser.add_argument("--grid", type=int, help="grid lines per parameter axis")
        parser.add_argument("--workers", type=int, help="worker threads")
        parser.add_argument("--debug", action="store_true", default=None, help="debug logging")
        return parser

    def execute(self, args: argparse.Namespace) -> int:
        subcommand = self.registered_subcommands.get(args.command)
        if subcommand is None:
            raise ValueError(f"unknown command: {args.command}")
        logger.info(f"Running {args.command} on {args.input}")
        status = subcommand.handler(self, args)
        logger.info(f"{args.command} finished")
        return status

    # helpers

    @property
    def config(self) -> Dict:
        return self.app.config

    def _interval(self, curve) -> List[float]:
        return list(self.config["numerics"].get("t_range") or curve.t_range)

    def _samples(self, interval) -> int:
        scan = self.config["scan"]
        if scan.get("samples"):
            return int(scan["samples"])
        per_unit = int(scan.get("samples_per_unit", 2048))
        return max(16, int(per_unit * (interval[1] - interval[0])))

    def _basepoint(self, curve) -> float:
        at = self.config["scan"].get("at")
        if at is not None:
            return float(at)
        lo, hi = curve.t_range
        return 0.0 if lo <= 0.0 <= hi else 0.5 * (lo + hi)

    def _table(self, stem: str, columns, rows) -> None:
        writer = self.app.writer
        if self.config["output"]["format"] == "json":
            writer.write_json(f"{stem}.json", rows)
        else:
            writer.write_csv(f"{stem}.csv", columns, rows)

    def _svg(self, name: str, polylines: List[Polyline], title: str) -> None:
        svg = self.app.renderer.render(polylines, style=self.config["output"].get("style", "detailed"),
                                       title=title)
        self.app.writer.write_svg(name, svg)


@CurveKitCommand.subcommand(name="analyze", help="feature table", usage="analyze SPEC.json [--range LO:HI]")
def analyze_cmd(self: CurveKitCommand, args: argparse.Namespace) -> int:
    curve = self.app.load_input()
    interval = self._interval(curve)
    scan = self.app.calculator.analyze(curve, tuple(interval), self._samples(interval))
    rows = [p.as_row() for p in scan]
    extra = sorted({k for row in rows for k in row} - {"kind", "t", "residual"})
    self._table("features", ["kind", "t", "residual"] + extra, rows)
    for issue in scan.issues:
        logger.warning(f"{issue.kind} on [{issue.t_lo:.6g}, {issue.t_hi:.6g}] (magnitude {issue.magnitude:.3e})")
    if self.config["output"]["format"] == "svg":
        grid = np.linspace(interval[0], interval[1], 512)
        pts = curve.point(grid)
        polylines = [Polyline(curve.label or "curve", pts[:2].T)]
        for p in scan:
            polylines.append(Polyline(p.kind, curve.point(np.array([p.t]))[:2].T))
        self._svg("features.svg", polylines, f"{curve.label} (x, y)")
    return 0


@CurveKitCommand.subcommand(name="evolute", help="evolute polyline and local-model report",
                            usage="evolute SPEC.json [--feature flattening|vertex|twisting]")
def evolute_cmd(self: CurveKitCommand, args: argparse.Namespace) -> int:
    curve = self.app.load_input()
    interval = self._interval(curve)
    polyline, report = self.app.calculator.evolute(curve, tuple(interval), self._samples(interval),
                                                   self.config["scan"].get("feature"))
    rows = [{"t": t, "x": p[0], "y": p[1], "z": p[2]} for t, p in zip(polyline.t, polyline.points)]
    if self.config["output"]["format"] == "svg":
        grid = np.linspace(interval[0], interval[1], 512)
        self._svg("evolute.svg", [
            Polyline(curve.label or "curve", curve.point(grid)[:2].T),
            Polyline("evolute", polyline.points[:, :2]),
        ], f"{curve.label} evolute (x, y)")
    else:
        self._table("evolute", ["t", "x", "y", "z"], rows)
    if report is not None:
        self.app.writer.write_json("report.json", report.as_dict())
    return 0


@CurveKitCommand.subcommand(name="bifurcation", help="bifurcation loci, tangent cones and diagram",
                            usage="bifurcation FAMILY.json [--grid N] [--stratum C|F|V|T]")
def bifurcation_cmd(self: CurveKitCommand, args: argparse.Namespace) -> int:
    family = self.app.load_input(family=True)
    stratum = self.config["scan"].get("stratum")
    strata = (stratum,) if stratum else STRATUM_NAMES
    result = self.app.calculator.bifurcation(family, int(self.config["scan"]["grid"]), strata)
    rows = [row for name in strata for row in result.loci[name].rows()]
    self.app.writer.write_csv("loci.csv", ["stratum", "s1", "s2", "residual"], rows)
    self.app.writer.write_json("report.json", result.report)
    polylines = []
    for name in strata:
        locus = result.loci[name]
        if len(locus):
            polylines.append(Polyline(name, locus.points, locus.branches() if name != "C" else []))
    if any(len(p.points) >= 2 for p in polylines):
        self._svg("bifurcation.svg", polylines, f"{family.label} bifurcation set (s1, s2)")
    else:
        logger.warning("No traced curve to draw; bifurcation.svg not written")
    return 0


@CurveKitCommand.subcommand(name="strata", help="jet-space stratum values at a point",
                            usage="strata SPEC.json --at T")
def strata_cmd(self: CurveKitCommand, args: argparse.Namespace) -> int:
    curve = self.app.load_input()
    self.app.writer.write_json("strata.json", self.app.calculator.strata(curve, self._basepoint(curve)))
    return 0


@CurveKitCommand.subcommand(name="jet", help="raw component jets", usage="jet SPEC.json --at T --degree K")
def jet_cmd(self: CurveKitCommand, args: argparse.Namespace) -> int:
    curve = self.app.load_input()
    degree = int(self.config["numerics"]["degree"])
    rows = self.app.calculator.jets(curve, self._basepoint(curve), degree)
    self._table("jets", ["component", "order", "coefficient"], rows)
    return 0
