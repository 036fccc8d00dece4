"""Command-line experiment runner.

Usage::

    cheyette-ca futures --config f.json [--seed N] [--paths N] [--out PREFIX]

Subcommands ``futures``, ``ois-future``, ``fra-arrears`` and ``cms`` compare
the analytic adjustment with the Monte Carlo oracle over the expiry grid and
write ``<prefix>.csv`` and ``<prefix>.svg``.  ``diagnostics`` runs numeraire
martingale checks and the state-approximation error study and writes
``<prefix>.csv`` only.

Exit status: 0 all rows within tolerance, 1 some row outside tolerance,
2 configuration error, 3 numerical failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from typing import Sequence

import numpy as np

from .adjusters import FraInArrears, ca_fra_arrears, convexity_adjustment, natural_forward_rate
from .config import ExperimentConfig, SchemaError, build_product, build_spec, load_config
from .errors import DomainError, NumericError
from .mc import discount_bond_ratio, mc_rate, state_approx_error
from .report import ComparisonRow, rows_to_csv, rows_to_svg, table_to_csv, write_atomically

logger = logging.getLogger("cheyette_ca")

EXIT_OK, EXIT_TOLERANCE, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3, 64
PRODUCT_COMMANDS = ("futures", "ois-future", "fra-arrears", "cms")
TITLES = {
    "futures": "Futures convexity adjustment",
    "ois-future": "OIS future convexity adjustment",
    "fra-arrears": "FRA in arrears convexity adjustment",
    "cms": "CMS convexity adjustment",
}
DEFAULT_APPROX_TIMES = (0.1, 0.2, 0.4, 1.0, 5.0, 10.0, 30.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cheyette-ca", description="Convexity adjustments under the Cheyette model versus Monte Carlo.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in PRODUCT_COMMANDS + ("diagnostics",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--paths", type=int)
        p.add_argument("--out", help="output path prefix")
    return parser


def _meta(cfg: ExperimentConfig) -> dict:
    return {
        "subcommand": cfg.subcommand,
        "seed": cfg.mc.seed,
        "paths": cfg.mc.paths,
        "steps_per_year": cfg.mc.steps_per_year,
        "antithetic": str(cfg.mc.antithetic).lower(),
        "model_hash": cfg.model_hash,
    }


def comparison_rows(cfg: ExperimentConfig) -> list[ComparisonRow]:
    spec = build_spec(cfg)
    products = [build_product(cfg, t) for t in cfg.grid]
    rows = []
    for t, p in zip(cfg.grid, products):
        res = convexity_adjustment(spec, p)
        variant = ca_fra_arrears(spec, p, "eta").adjustment if isinstance(p, FraInArrears) else None
        mc = mc_rate(spec, cfg.mc, p)
        # MC adjustment relative to its own martingale value, which drops the tenor-basis drift
        ca_mc = mc.mean - natural_forward_rate(spec.curve, p)
        rows.append(ComparisonRow(t, res.adjustment, ca_mc, mc.std_error, variant))
        logger.info("expiry %g: analytic %.6e mc %.6e se %.2e", t, res.adjustment, rows[-1].ca_mc, mc.std_error)
    return rows


def diagnostic_records(cfg: ExperimentConfig) -> list[tuple]:
    spec = build_spec(cfg)
    records = []
    for T, est in zip(cfg.grid, discount_bond_ratio(spec, cfg.mc, cfg.grid)):
        z = est.z_score(1.0)
        records.append(("martingale", T, 1.0, est.mean, est.std_error, z, bool(abs(z) < 3)))
    times = sorted(cfg.product.get("approx_error_times", DEFAULT_APPROX_TIMES))
    paths = cfg.product.get("approx_error_paths", min(cfg.mc.paths, 20_000))
    mc = replace(cfg.mc, paths=paths)
    errs = state_approx_error(spec, mc, times[-1], times[:-1])
    errs = errs if isinstance(errs, list) else [errs]
    for t, est in zip(times, errs):
        records.append(("approx_error", t, "", est.mean, est.std_error, "", bool(np.isfinite(est.mean))))
    small = [(t, e.mean) for t, e in zip(times, errs) if t <= 0.4 and e.mean > 0]
    if len(small) >= 2:
        slope = float(np.polyfit(np.log([t for t, _ in small]), np.log([m for _, m in small]), 1)[0])
        records.append(("approx_error_slope", "", 2.5, slope, "", "", slope >= 2.5))
    return records


def run(cfg: ExperimentConfig) -> int:
    prefix = cfg.output
    if cfg.subcommand == "diagnostics":
        records = diagnostic_records(cfg)
        text = table_to_csv(("check", "time", "expected", "mc", "mc_se", "z", "pass"), records, _meta(cfg))
        write_atomically({f"{prefix}.csv": text})
        sys.stdout.write(text)
        return EXIT_OK if all(r[-1] for r in records) else EXIT_TOLERANCE
    rows = comparison_rows(cfg)
    csv_text = rows_to_csv(rows, _meta(cfg))
    svg_text = rows_to_svg(rows, TITLES[cfg.subcommand])
    write_atomically({f"{prefix}.csv": csv_text, f"{prefix}.svg": svg_text})
    sys.stdout.write(csv_text)
    return EXIT_OK if all(r.within_tolerance for r in rows) else EXIT_TOLERANCE


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.command).with_overrides(args.seed, args.paths, args.out)
        if cfg.subcommand in PRODUCT_COMMANDS:
            for t in cfg.grid:
                try:
                    build_product(cfg, t)
                except DomainError as exc:
                    raise SchemaError("$.product", str(exc)) from exc
    except SchemaError as exc:
        print(f"config error at {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except DomainError as exc:
        print(f"config error at $: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        return run(cfg)
    except (NumericError, FloatingPointError, DomainError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
