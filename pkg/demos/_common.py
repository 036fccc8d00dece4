"""Shared runner: execute one CLI experiment from demos/configs and print its CSV."""

from __future__ import annotations

import sys
from pathlib import Path

from cheyette_ca.cli import main

HERE = Path(__file__).resolve().parent


def run(subcommand: str, config: str, *extra: str) -> int:
    out = HERE / "out" / config
    code = main([subcommand, "--config", str(HERE / "configs" / f"{config}.json"), "--out", str(out), *extra])
    print(f"[{config}] exit status {code}; wrote {out}.csv", file=sys.stderr)
    return code
