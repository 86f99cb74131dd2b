"""Command-line front end.

Subcommands: spectrum, pulse, sweep, fit, preset, validate.
Exit codes: 0 success, 2 validation error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CellsimError, NumericalError, ParseError, ValidationError
from .presets import PRESET_NAMES, get_preset
from . import scenario

_PIPELINE_FAMILIES = {
    "spectrum": scenario.SPECTRUM_PIPELINES,
    "pulse": ("pulse",),
    "sweep": scenario.SWEEP_PIPELINES,
}


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}", line=exc.lineno) from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (overrides the config)")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel workers for sweep cells")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering next to the CSV output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellsim",
        description="EIT and slow-light simulator for paraffin-coated Rb cells",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("spectrum", "run a spectrum pipeline from a config file"),
        ("pulse", "propagate one pulse from a config file"),
        ("sweep", "run a sweep pipeline from a config file"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario config (JSON)")
        _add_common(p)

    p = sub.add_parser("preset", help="run a built-in figure preset")
    p.add_argument("name", choices=PRESET_NAMES)
    _add_common(p)

    p = sub.add_parser("fit", help="fit an on-disk spectrum or pulse CSV")
    p.add_argument("path", help="CSV file to fit")
    p.add_argument("--model", default="lorentzian",
                   choices=("lorentzian", "dual", "pulse-metrics"))
    p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("validate", help="validate a config file")
    p.add_argument("--config", required=True, help="scenario config (JSON)")
    return parser


def _run(args) -> int:
    if args.command == "validate":
        config = _load_config(args.config)
        errors = scenario.validate_config(config)
        if errors:
            for field, message in errors:
                print(f"invalid: {field}: {message}", file=sys.stderr)
            return 2
        print("ok")
        return 0

    if args.command == "fit":
        result = scenario.fit_file(args.path, args.model, out_dir=args.out)
        if isinstance(result, tuple):
            peak, fwhm, energy = result
            print(f"peak_time_s={peak!r} fwhm_s={fwhm!r} energy={energy!r}")
        else:
            for key, value in result.params.items():
                print(f"{key}={value!r}")
        return 0

    if args.command == "preset":
        config = get_preset(args.name)
    else:
        config = _load_config(args.config)
        pipeline = scenario.resolve_config(config)["pipeline"]
        allowed = _PIPELINE_FAMILIES[args.command]
        if pipeline not in allowed:
            raise ValidationError(
                f"pipeline {pipeline!r} does not belong to the "
                f"{args.command!r} subcommand (expected one of {allowed})",
                fields=["pipeline"],
            )

    if args.seed is not None:
        config["seed"] = args.seed
    manifest = scenario.run_scenario(
        config, args.out, workers=args.workers,
        figures=False if args.no_figures else None,
    )
    for artifact in manifest["artifacts"]:
        print(f"wrote {artifact['name']} ({artifact['bytes']} bytes)")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except CellsimError as exc:  # pragma: no cover - catch-all guard
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
