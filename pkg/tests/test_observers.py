import logging

import pytest

from app.observers import AutoSaveObserver, LoggingObserver, SuiteObserver
from app.reports import FAIL, PASS, CaseResult, SuiteReport
from app.verifier import REPORT_FILE, Verifier


@pytest.fixture
def passing_report():
    return SuiteReport('padic', {'prime': 5}, 7, [CaseResult('teichmuller', PASS, 10)], wall_time=0.5)


@pytest.fixture
def failing_report():
    return SuiteReport('coleman', {'prime': 5}, 7, [
        CaseResult('a=2/interpolation', FAIL, 3),
        CaseResult('a=2/norm-operator', PASS, 8),
    ])


# Test cases for LoggingObserver

def test_logging_observer_logs_finished_suite(passing_report, caplog):
    with caplog.at_level(logging.INFO):
        LoggingObserver().update(passing_report)
    assert "Suite padic finished with status pass (1 cases, 0.50s)" in caplog.text

def test_logging_observer_warns_on_failure(failing_report, caplog):
    with caplog.at_level(logging.INFO):
        LoggingObserver().update(failing_report)
    assert "Suite coleman failed: a=2/interpolation" in caplog.text
    assert any(record.levelno == logging.WARNING for record in caplog.records)

def test_logging_observer_reports_suite_error(caplog):
    report = SuiteReport('weil', {}, 7, error="RuntimeError: boom")
    with caplog.at_level(logging.WARNING):
        LoggingObserver().update(report)
    assert "Suite weil failed: RuntimeError: boom" in caplog.text

def test_logging_observer_no_report():
    with pytest.raises(AttributeError, match="Report cannot be None"):
        LoggingObserver().update(None)

# Test cases for AutoSaveObserver

def test_autosave_observer_saves(config, passing_report):
    verifier = Verifier(config)
    verifier._reports[passing_report.suite] = passing_report
    AutoSaveObserver(verifier).update(passing_report)
    assert (config.report_dir / REPORT_FILE).exists()

def test_autosave_observer_invalid_verifier():
    with pytest.raises(TypeError, match="Verifier must have 'config' and 'save_reports' attributes"):
        AutoSaveObserver(object())

def test_autosave_observer_no_report(config):
    with pytest.raises(AttributeError, match="Report cannot be None"):
        AutoSaveObserver(Verifier(config)).update(None)

def test_observer_is_abstract():
    with pytest.raises(TypeError):
        SuiteObserver()
