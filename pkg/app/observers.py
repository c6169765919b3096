########################
# Suite Observers      #
########################

from abc import ABC, abstractmethod
import logging
from typing import Any

from app.reports import FAIL, SuiteReport


class SuiteObserver(ABC):
    """
    Abstract base class for verifier observers.

    Observers are notified with each SuiteReport as soon as its suite finishes.
    """

    @abstractmethod
    def update(self, report: SuiteReport) -> None:
        """
        Handle a finished suite.

        Args:
            report (SuiteReport): The report of the suite that just ran.
        """
        pass  # pragma: no cover


class LoggingObserver(SuiteObserver):
    """Logs suite completion at INFO and failures at WARNING."""

    def update(self, report: SuiteReport) -> None:
        if report is None:
            raise AttributeError("Report cannot be None")
        if report.status == FAIL:
            failed = [case.case for case in report.cases if case.failed]
            logging.warning(
                f"Suite {report.suite} failed: {report.error or ', '.join(failed)}"
            )
        else:
            logging.info(
                f"Suite {report.suite} finished with status {report.status} "
                f"({len(report.cases)} cases, {report.wall_time:.2f}s)"
            )


class AutoSaveObserver(SuiteObserver):
    """
    Saves the reports collected so far after every suite, so an interrupted
    run keeps what it finished.
    """

    def __init__(self, verifier: Any):
        """
        Args:
            verifier (Any): Must have 'config' and 'save_reports' attributes.

        Raises:
            TypeError: If the verifier does not have the required attributes.
        """
        if not hasattr(verifier, 'config') or not hasattr(verifier, 'save_reports'):
            raise TypeError("Verifier must have 'config' and 'save_reports' attributes")
        self.verifier = verifier

    def update(self, report: SuiteReport) -> None:
        if report is None:
            raise AttributeError("Report cannot be None")
        path = self.verifier.save_reports()
        logging.info(f"Reports auto-saved to {path}")
