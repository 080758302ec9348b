"""
``simulate`` command-line driver.

Exit status: 0 on success, 2 on configuration errors, 3 on IO errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .analytic import compare_with_numeric, write_oracle_csv
from .conditioning import VACUUM_OFFSETS, Conditioning, parse_conditioning
from .errors import ConfigError
from .model import REFERENCE_PARAMS, load_config
from .scan import (
    DEFAULT_CHI_GRID,
    DEFAULT_DETUNING_GRID,
    DEFAULT_THETA_GRID,
    FIELD_PANELS,
    MIRROR_PANELS,
    export_wigner,
    scan_chi,
    scan_detuning,
    scan_theta,
    write_hysteresis_csv,
    write_rows_csv,
)

log = logging.getLogger("optomech")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

# 20 points for the closed-form comparison
ORACLE_GRID = tuple(k / 10 for k in range(1, 21))


def parse_values(text: str) -> list[float]:
    """``a,b,c`` or an inclusive range ``start:stop:step``."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return [round(start + k * step, 12) for k in range(count)]
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse value list {text!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise ConfigError(f"cannot parse value list {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Steady-state Gaussian optomechanics: parameter scans, conditioning and Wigner grids.",
    )
    p.add_argument("--config", type=Path, help="key = value parameter file (defaults to the built-in parameter set)")
    p.add_argument("--scan", choices=("detuning", "chi", "theta"), required=True)
    p.add_argument("--values", help="sweep values: 'a,b,c' or 'start:stop:step' (defaults to the standard grid)")
    p.add_argument(
        "--conditioning",
        help="none | homodyne | vacuum | ancilla:<theta_over_pi>; fills the *_cond columns and conditions mirror Wigner grids",
    )
    p.add_argument("--vacuum-offset", choices=tuple(VACUUM_OFFSETS), help="offset added to B in the vacuum projection")
    p.add_argument("--oracle", choices=("appendix-b",), help="write the closed-form comparison report")
    p.add_argument("--wigner", choices=("mirror", "field"), help="export Wigner grids for this subsystem")
    p.add_argument("--wigner-values", help="sweep values for the Wigner panels (default: standard panel sequence)")
    p.add_argument("--wigner-matrix", action="store_true", help="also write whitespace matrix blocks (.dat)")
    p.add_argument("--workers", type=int, default=1, help="threads used to evaluate grid points")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _resolve(args, extras):
    text = args.conditioning or extras.get("conditioning")
    conditioning = None
    if text:
        try:
            conditioning = parse_conditioning(text)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if conditioning.kind == "none":
            conditioning = None
    offset_key = args.vacuum_offset or extras.get("vacuum_offset", "half")
    if offset_key not in VACUUM_OFFSETS:
        raise ConfigError(f"vacuum_offset must be one of {tuple(VACUUM_OFFSETS)}, got {offset_key!r}")
    return conditioning, VACUUM_OFFSETS[offset_key]


def run(args) -> int:
    if args.config is not None:
        params, extras = load_config(args.config)
    else:
        params, extras = REFERENCE_PARAMS, {}
    conditioning, offset = _resolve(args, extras)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")

    defaults = {"detuning": DEFAULT_DETUNING_GRID, "chi": DEFAULT_CHI_GRID, "theta": DEFAULT_THETA_GRID}
    values = parse_values(args.values) if args.values else list(defaults[args.scan])
    try:
        if args.scan == "detuning":
            rows = scan_detuning(params, values, conditioning=conditioning, vacuum_offset=offset, workers=args.workers)
        elif args.scan == "chi":
            rows = scan_chi(params, values, conditioning=conditioning, vacuum_offset=offset, workers=args.workers)
        else:
            rows = scan_theta(params, values, vacuum_offset=offset, workers=args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    args.out.mkdir(parents=True, exist_ok=True)
    write_rows_csv(args.out / f"scan_{args.scan}.csv", rows, args.scan)
    if args.scan == "detuning":
        write_hysteresis_csv(args.out / "hysteresis.csv", rows)
    n_unstable = sum(not r.stable for r in rows)
    log.info("scan %s: %d points, %d unstable", args.scan, len(rows), n_unstable)

    if args.oracle == "appendix-b":
        grid = values if args.scan == "detuning" else ORACLE_GRID
        oracle = compare_with_numeric(params, grid)
        write_oracle_csv(args.out / "closed_form_oracle.csv", params, oracle)

    if args.wigner:
        sweep = "chi" if args.scan == "chi" else "detuning"
        if args.wigner_values:
            panel_values = parse_values(args.wigner_values)
        elif sweep == "chi":
            panel_values = [0.0, 0.25, 0.5, 0.75, 1.0]
        else:
            panel_values = list(MIRROR_PANELS if args.wigner == "mirror" else FIELD_PANELS)
        cond = conditioning
        if args.scan == "theta" and cond is None:
            cond = Conditioning("ancilla", math.pi / 2)
        written = export_wigner(
            params,
            args.wigner,
            panel_values,
            args.out,
            sweep=sweep,
            conditioning=cond,
            vacuum_offset=offset,
            matrix_format=args.wigner_matrix,
        )
        log.info("wrote %d Wigner grids", sum(p is not None for p in written))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        print(f"simulate: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"simulate: IO error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
