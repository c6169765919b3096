########################
# Verifier             #
########################

from concurrent.futures import ThreadPoolExecutor, as_completed
import logging
from pathlib import Path
import time
from typing import Dict, List, Optional, Sequence, Union

from app.exceptions import ConfigurationError
from app.observers import SuiteObserver
from app.reports import SuiteReport, reports_from_json, save_csv, save_json
from app.suites import Suite, SuiteFactory
from app.verify_config import VerifyConfig

REPORT_FILE = "report.json"


class Verifier:
    """
    Runs verification suites and keeps their reports.

    Responsibilities:
    - Resolve suite names through SuiteFactory.
    - Run suites concurrently on up to `config.workers` threads.
    - Turn an exception escaping a suite into that suite's report error.
    - Notify registered SuiteObservers as each suite finishes.
    - Persist reports as JSON (and CSV on request).
    """

    def __init__(self, config: Optional[VerifyConfig] = None) -> None:
        """
        Raises:
            ConfigurationError: If the config fails validation.
        """
        self.config: VerifyConfig = config or VerifyConfig()
        self.config.validate()
        self._reports: Dict[str, SuiteReport] = {}
        self._observers: List[SuiteObserver] = []

    def add_observer(self, observer: SuiteObserver) -> None:
        """
        Raises:
            TypeError: If observer is not a SuiteObserver.
        """
        if not isinstance(observer, SuiteObserver):
            raise TypeError("Observer must be a SuiteObserver instance")
        self._observers.append(observer)

    def _notify_observers(self, report: SuiteReport) -> None:
        for observer in self._observers:
            observer.update(report)

    def resolve(self, names: Optional[Sequence[str]] = None) -> List[Suite]:
        """
        Turn names into suites; "all" stands for every registered suite.

        Raises:
            ConfigurationError: If a name is unknown.
        """
        names = list(self.config.suites if names is None else names)
        if any(name.lower() == 'all' for name in names):
            names = SuiteFactory.available()
        seen: List[str] = []
        for name in names:
            if name.lower() not in seen:
                seen.append(name.lower())
        return [SuiteFactory.create_suite(name) for name in seen]

    def _run_one(self, suite: Suite) -> SuiteReport:
        start = time.perf_counter()
        try:
            return suite.run(self.config)
        except ConfigurationError:
            raise
        except Exception as e:
            logging.error(f"suite {suite.name} aborted: {type(e).__name__}: {e}")
            report = SuiteReport(suite.name, suite.parameters(self.config), self.config.seed,
                                 error=f"{type(e).__name__}: {e}")
            report.wall_time = time.perf_counter() - start
            return report

    def run(self, names: Optional[Sequence[str]] = None) -> List[SuiteReport]:
        """
        Run the named suites (the configured ones by default).

        Returns:
            The reports of this run, ordered by suite name.

        Raises:
            ConfigurationError: If a suite name is unknown.
        """
        suites = self.resolve(names)
        if not suites:
            logging.info("no suites requested")
            return []
        logging.info(f"running {', '.join(s.name for s in suites)} on {self.config.workers} worker(s)")
        finished: List[SuiteReport] = []
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            futures = [pool.submit(self._run_one, suite) for suite in suites]
            for future in as_completed(futures):
                report = future.result()
                self._reports[report.suite] = report
                finished.append(report)
                self._notify_observers(report)
        return sorted(finished, key=lambda r: r.suite)

    @property
    def reports(self) -> List[SuiteReport]:
        return [self._reports[name] for name in sorted(self._reports)]

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self._reports.values())

    def save_reports(self, path: Optional[Union[str, Path]] = None) -> Path:
        """Write every report kept so far as JSON; defaults to report_dir/report.json."""
        return save_json(self.reports, path or self.config.report_dir / REPORT_FILE)

    def save_csv(self, path: Union[str, Path]) -> Path:
        return save_csv(self.reports, path)

    def load_reports(self, path: Optional[Union[str, Path]] = None) -> List[SuiteReport]:
        """
        Read reports written by save_reports back into the verifier.

        Raises:
            ConfigurationError: If the file is missing.
        """
        path = Path(path or self.config.report_dir / REPORT_FILE)
        if not path.is_file():
            raise ConfigurationError(f"report file not found: {path}")
        for report in reports_from_json(path.read_text(encoding='utf-8')):
            self._reports[report.suite] = report
        return self.reports
