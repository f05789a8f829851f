#!/usr/bin/env python3
"""
fstirap-cavity Scenario Runner

Runs one scenario of the two-atom cavity/laser simulation:
- simulate:   propagate one configuration, write trace.csv, pulses.csv, summary
- sweep:      (z0, d) scan, write grid.csv + axis files + cells.csv, locate the operating point
- robustness: fidelity versus one scaled parameter, write robustness.csv
- darkstate:  dark-state components and residual at one time
- check:      four-photon detuning guard, RWA ratios, adiabaticity products

Configuration comes from an optional `key = value` document (--config) with
`--set key=value` overrides; see src/integrations/config_file.py for the keys.

Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
3 integration failure, 4 no viable operating point, 5 check failed.
"""

import sys
import json
import logging
from pathlib import Path
from datetime import datetime

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from config.settings import settings, SCENARIOS, EXIT_CONFIG_ERROR
from src.integrations.config_file import ConfigError, parse_config
from src.runner.scenarios import ScenarioRunner

logger = logging.getLogger(__name__)


def configure_logging(level: str, scenario: str) -> None:
    """
    Console + timestamped file logging under the logs directory.

    A no-op when the root logger already has handlers, so no log file is
    opened that would never be attached.
    """
    if logging.getLogger().handlers:
        return
    logs_dir = Path(settings.logs_dir)
    logs_dir.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stdout),
            logging.FileHandler(logs_dir / f'fstirap_{scenario}_{datetime.now().strftime("%Y%m%d_%H%M%S")}.log')
        ]
    )


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(pair, "override must look like key=value")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def main():
    """Main entry point."""
    import argparse

    parser = argparse.ArgumentParser(description="Run a two-atom cavity STIRAP scenario")
    parser.add_argument(
        "scenario",
        choices=SCENARIOS,
        help="Scenario to run (overrides scenario.name)"
    )
    parser.add_argument(
        "--config",
        type=str,
        help="Path to a key = value run configuration"
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        metavar="KEY=VALUE",
        help="Override one configuration key (repeatable), e.g. --set geometry.tau=-9us"
    )
    parser.add_argument(
        "--output-dir",
        type=str,
        help="Directory for the artifacts (overrides output.directory)"
    )
    parser.add_argument(
        "--workers",
        type=int,
        help="Sweep worker processes (0 = one per CPU, 1 = in-process; default FSTIRAP_WORKERS)"
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default=settings.log_level,
        help="Logging level (default FSTIRAP_LOG_LEVEL or INFO)"
    )
    parser.add_argument(
        "--output",
        type=str,
        help="Path to save results JSON"
    )

    args = parser.parse_args()
    configure_logging(args.log_level, args.scenario)

    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
        overrides = _parse_overrides(args.overrides)
        overrides["scenario.name"] = args.scenario
        if args.output_dir:
            overrides["output.directory"] = args.output_dir
        cfg = parse_config(text, overrides)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(EXIT_CONFIG_ERROR)
    except OSError as e:
        logger.error(f"Cannot read configuration: {e}")
        sys.exit(EXIT_CONFIG_ERROR)

    runner = ScenarioRunner(cfg, workers=args.workers)
    results = runner.run()

    # Save results if output path specified
    if args.output:
        output_path = Path(args.output)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w') as f:
            json.dump(results, f, indent=2, ensure_ascii=False)
        logger.info(f"Results saved to {output_path}")

    sys.exit(results["exit_code"])


if __name__ == "__main__":
    main()
