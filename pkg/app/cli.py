########################
# verify Command       #
########################

import argparse
import logging
import os
import sys
from typing import List, Optional

from app.exceptions import ConfigurationError
from app.observers import AutoSaveObserver, LoggingObserver
from app.suites import SuiteFactory
from app.verifier import Verifier
from app.verify_config import VerifyConfig

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verify",
        description="Run the p-adic and Weil pairing verification suites.",
    )
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--suite", action="append", default=None,
                        help=f"suite to run (repeatable, or 'all'): {', '.join(SuiteFactory.available())}")
    parser.add_argument("--json", help="write the JSON report here")
    parser.add_argument("--csv", help="write the per-case table here")
    return parser


def setup_logging(config: VerifyConfig) -> None:
    """Log to the configured file; the level comes from VERIFY_LOG_LEVEL."""
    config.log_file.parent.mkdir(parents=True, exist_ok=True)
    level = getattr(logging, os.getenv('VERIFY_LOG_LEVEL', 'INFO').upper(), logging.INFO)
    logging.basicConfig(
        filename=str(config.log_file),
        level=level,
        format="%(asctime)s %(levelname)s %(threadName)s: %(message)s",
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Returns:
        0 when every suite passed, 1 when one failed, 2 on a configuration error.
    """
    args = build_parser().parse_args(argv)
    try:
        config = VerifyConfig.from_file(args.config) if args.config else VerifyConfig()
        config.validate()
        setup_logging(config)
        verifier = Verifier(config)
        verifier.add_observer(LoggingObserver())
        verifier.add_observer(AutoSaveObserver(verifier))
        reports = verifier.run(args.suite)
    except ConfigurationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        logging.error(f"configuration error: {e}")
        return EXIT_CONFIG

    for report in reports:
        line = f"{report.suite}: {report.status} ({len(report.cases)} cases, {report.wall_time:.2f}s)"
        if report.error:
            line += f" error: {report.error}"
        print(line)
    if args.json:
        print(f"JSON report written to {verifier.save_reports(args.json)}")
    if args.csv:
        print(f"CSV table written to {verifier.save_csv(args.csv)}")
    return EXIT_PASS if verifier.passed else EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
