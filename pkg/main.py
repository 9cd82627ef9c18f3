"""
CurveKit - differential geometry of space curves and cusp families
Version: 0.3.0
"""
from __future__ import annotations

import argparse
import logging
import os
import pathlib
import sys
from typing import Any, Dict, List, Optional

import yaml

from components.commands.curvekit import CurveKitCommand, join_range_values
from src.artifacts import ArtifactWriter
from src.calculator import InvariantCalculator
from src.config_validator import validate_config
from src.curve_model import DeformationFamily, SpaceCurve, load_spec_file
from src.data_constants import DEFAULTS
from src.errors import CurveKitError, SchemaError
from src.jet import set_division_epsilon
from src.renderer import SvgRenderer

# Setup logger
logger = logging.getLogger(__name__)

APP_DIR = pathlib.Path(__file__).parent.absolute()


def load_manifest_defaults(path: Optional[str] = None) -> Dict[str, Any]:
    """Defaults declared under spec.config in manifest.yaml"""
    path = path or os.path.join(APP_DIR, "manifest.yaml")
    defaults = dict(DEFAULTS)
    try:
        with open(path, "r", encoding="utf-8") as f:
            manifest = yaml.safe_load(f) or {}
    except FileNotFoundError:
        logger.warning(f"Manifest not found at {path}, using built-in defaults")
        return defaults
    for item in manifest.get("spec", {}).get("config", []):
        defaults[item["name"]] = item.get("default")
    return defaults


class CurveKitApp:
    """CurveKit application main class"""

    calculator: InvariantCalculator
    renderer: SvgRenderer
    writer: ArtifactWriter
    command: CurveKitCommand

    # Run configuration
    config: Dict[str, Any]

    def __init__(self, defaults: Optional[Dict[str, Any]] = None, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self.defaults = defaults if defaults is not None else load_manifest_defaults()

    def build_config(self, args: argparse.Namespace) -> Dict[str, Any]:
        """Nest manifest defaults and command-line overrides into one RunConfig dict"""
        d = self.defaults

        def pick(flag: str, key: str):
            value = getattr(args, flag, None)
            return d.get(key) if value is None else value

        return {
            "command": args.command,
            "input": args.input,
            "numerics": {
                "t_range": args.t_range,
                "tol": pick("tol", "tol"),
                "degree": pick("degree", "degree"),
                "max_degree": d.get("max_degree"),
                "div_eps": d.get("div_eps"),
                "zero_rel_tol": d.get("zero_rel_tol"),
                "root_rel_tol": d.get("root_rel_tol"),
            },
            "scan": {
                "samples": args.samples,
                "samples_per_unit": d.get("samples_per_unit"),
                "grid": pick("grid", "grid"),
                "workers": pick("workers", "workers"),
                "merge_fraction": d.get("merge_fraction"),
                "degenerate_fraction": d.get("degenerate_fraction"),
                "feature": args.feature,
                "stratum": args.stratum,
                "at": args.at,
            },
            "output": {
                "dir": pick("out", "output_dir"),
                "format": pick("format", "format"),
                "style": d.get("style", "detailed"),
            },
            "debug": bool(pick("debug", "debug")),
        }

    def initialize(self, config: Dict[str, Any]) -> None:
        """Validate the configuration and set up the core modules"""
        self.logger.info("CurveKit initializing...")

        self.logger.info("Validating run configuration...")
        is_valid, errors, warnings = validate_config(config, self.logger)

        if not is_valid:
            error_msg = "Configuration validation failed:\n" + "\n".join(f"  - {e}" for e in errors)
            self.logger.error(error_msg)
            raise ValueError(error_msg)

        if warnings:
            self.logger.warning(f"Configuration has {len(warnings)} warning(s)")

        self.config = config
        numerics = dict(config["numerics"])
        numerics.update({k: config["scan"][k] for k in ("workers", "merge_fraction", "degenerate_fraction")})
        set_division_epsilon(float(numerics["div_eps"]))

        self.calculator = InvariantCalculator(numerics, logger=self.logger)
        self.renderer = SvgRenderer(logger=self.logger)
        self.writer = ArtifactWriter(config["output"]["dir"], logger=self.logger)
        self.command = CurveKitCommand(self)

        self.logger.info("CurveKit initialized successfully")

    def load_input(self, family: bool = False) -> SpaceCurve:
        curve = load_spec_file(self.config["input"], int(self.config["numerics"]["max_degree"]))
        if family and not isinstance(curve, DeformationFamily):
            raise SchemaError(f"{self.config['command']} needs a family spec (kind 'family')")
        return curve

    def run(self, args: argparse.Namespace) -> int:
        self.initialize(self.build_config(args))
        return self.command.execute(args)


def exit_code(error: BaseException) -> int:
    """0 success, 2 validation, 3 numerical failure"""
    if isinstance(error, CurveKitError):
        return error.exit_code
    if isinstance(error, (ValueError, OSError)):
        return 2
    return 3


def main(argv: Optional[List[str]] = None) -> int:
    parser = CurveKitCommand.build_parser()
    args = parser.parse_args(join_range_values(sys.argv[1:] if argv is None else list(argv)))

    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    app = CurveKitApp()
    try:
        return app.run(args)
    except (ValueError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code(e)


if __name__ == "__main__":
    raise SystemExit(main())
