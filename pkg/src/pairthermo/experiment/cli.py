"""Command-line entry point: ``pairthermo simulate|sweep-temp|protocol|validate``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from ..errors import ConfigError, PairThermoError
from . import runner, validate
from .config import load_config

log = logging.getLogger("pairthermo")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="JSON config file")
    p.add_argument("--setup", choices=["a", "b", "c", "all"], help="setup(s) to simulate")
    p.add_argument("--t-min", type=float, dest="t_min")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--points", type=int)
    p.add_argument("--log", dest="log", action="store_true", default=None, help="logarithmic time grid")
    p.add_argument("--linear", dest="log", action="store_false", help="linear time grid")
    p.add_argument("--output", "-o", metavar="PATH")
    p.add_argument("--seed", type=int)
    p.add_argument("--gamma-a", type=float, dest="gamma_a", help="override Alice's decay rate [1/s]")
    p.add_argument("--gamma-b", type=float, dest="gamma_b", help="override Bob's decay rate [1/s]")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairthermo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="time series of ergotropy, heat and locality gap")
    _common(p)

    p = sub.add_parser("sweep-temp", help="temperature sweeps (common T or T_B - T_A)")
    _common(p)
    p.add_argument("--mode", choices=["common", "delta"], dest="sweep_mode")
    p.add_argument("--eval-time", type=float, dest="eval_time")

    p = sub.add_parser("protocol", help="two-stage work extraction and thermalization")
    _common(p)
    p.add_argument("--temperature", type=float, dest="protocol_temperature")
    p.add_argument("--steps", type=int, dest="protocol_steps")
    p.add_argument("--time", type=float, dest="protocol_time", help="initial-state time of the chosen setup")

    p = sub.add_parser("validate", help="run every invariant suite")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--suite", action="append", choices=sorted(validate.SUITES))
    p.add_argument("--json", metavar="PATH", help="write the machine-readable report here")
    return parser


_NOT_CONFIG = {"command", "verbose", "config", "setup", "suite", "json"}


def _overrides(ns: argparse.Namespace) -> dict:
    out = {k: v for k, v in vars(ns).items() if k not in _NOT_CONFIG and v is not None}
    setup = getattr(ns, "setup", None)
    if setup == "all":
        out["setups"] = ["a", "b", "c"]
    elif setup:
        out["setups"] = [setup]
        if ns.command == "protocol":
            out["protocol_setup"] = setup
    return out


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(ns.config, _overrides(ns))
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    try:
        if ns.command == "simulate":
            table = runner.run_simulate(cfg)
            paths = runner.write_outputs(table, cfg.output)
            log.info("wrote %s and %s (%d rows)", *paths, len(table.rows))
        elif ns.command == "sweep-temp":
            table = runner.run_sweep_temperature(cfg)
            paths = runner.write_outputs(table, cfg.output)
            log.info("wrote %s and %s (%d rows)", *paths, len(table.rows))
            for note in table.notes:
                log.info("%s", note)
        elif ns.command == "protocol":
            table, summary = runner.run_protocol(cfg)
            paths = runner.write_outputs(table, cfg.output)
            log.info("wrote %s and %s (%d rows)", *paths, len(table.rows))
            log.info("summary: %s", " ".join(f"{k}={v:.6e}" for k, v in summary.items()))
        else:
            checks = validate.run_validate(cfg.seed, ns.suite)
            for c in checks:
                print(c.line())
            if ns.json:
                with open(ns.json, "w", encoding="utf-8") as fh:
                    json.dump(validate.as_records(checks), fh, indent=2)
            bad = validate.failed(checks)
            print(f"{len(checks) - len(bad)}/{len(checks)} checks passed")
            return EXIT_FAILED if bad else EXIT_OK
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (OSError, PairThermoError) as exc:
        log.error("%s", exc)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
