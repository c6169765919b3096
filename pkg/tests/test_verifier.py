import pytest

from app.exceptions import ConfigurationError
from app.observers import SuiteObserver
from app.reports import load_csv, results_json
from app.suites import SuiteFactory
from app.verifier import REPORT_FILE, Verifier
from app.verify_config import VerifyConfig


class RecordingObserver(SuiteObserver):
    def __init__(self):
        self.seen = []

    def update(self, report):
        self.seen.append(report.suite)


@pytest.fixture
def verifier(config, stub_suites):
    return Verifier(config)


def test_invalid_config_rejected(clean_env):
    with pytest.raises(ConfigurationError, match="workers must be at least 1"):
        Verifier(VerifyConfig(workers=0))

def test_empty_run(verifier):
    assert verifier.run([]) == []
    assert verifier.run() == []
    assert verifier.reports == []
    assert verifier.passed

def test_run_orders_reports(verifier):
    reports = verifier.run(['stub-pass', 'stub-fail'])
    assert [r.suite for r in reports] == ['stub-fail', 'stub-pass']
    assert not verifier.passed

def test_observers_see_every_suite(verifier):
    observer = RecordingObserver()
    verifier.add_observer(observer)
    verifier.run(['stub-pass', 'stub-fail'])
    assert sorted(observer.seen) == ['stub-fail', 'stub-pass']

def test_add_invalid_observer(verifier):
    with pytest.raises(TypeError, match="Observer must be a SuiteObserver instance"):
        verifier.add_observer(object())

def test_resolve_all(verifier):
    assert [s.name for s in verifier.resolve(['all'])] == SuiteFactory.available()

def test_resolve_drops_duplicates(verifier):
    assert [s.name for s in verifier.resolve(['padic', 'PADIC', 'stub-pass'])] == ['padic', 'stub-pass']

def test_resolve_uses_configured_suites(config, stub_suites):
    config.suites = ['stub-pass']
    assert [r.suite for r in Verifier(config).run()] == ['stub-pass']

def test_unknown_suite(verifier):
    with pytest.raises(ConfigurationError, match="Unknown suite: nope"):
        verifier.run(['stub-pass', 'nope'])

def test_crashing_suite_becomes_error_report(verifier):
    report, = verifier.run(['stub-crash'])
    assert report.error == "RuntimeError: boom"
    assert report.cases == []
    assert not verifier.passed

def test_reruns_are_identical(config, stub_suites):
    first = Verifier(config).run(['padic', 'stub-pass'])
    second = Verifier(config).run(['padic', 'stub-pass'])
    assert results_json(first) == results_json(second)

def test_single_worker_matches_parallel(config, stub_suites):
    parallel = Verifier(config).run(['padic', 'stub-fail'])
    config.workers = 1
    serial = Verifier(config).run(['padic', 'stub-fail'])
    assert results_json(parallel) == results_json(serial)

def test_save_and_load_reports(verifier, config, stub_suites):
    verifier.run(['stub-pass', 'stub-fail'])
    path = verifier.save_reports()
    assert path == config.report_dir / REPORT_FILE
    restored = Verifier(config).load_reports()
    assert results_json(restored) == results_json(verifier.reports)

def test_load_missing_reports(verifier):
    with pytest.raises(ConfigurationError, match="report file not found"):
        verifier.load_reports()

def test_save_csv(verifier, tmp_path):
    verifier.run(['stub-fail'])
    frame = load_csv(verifier.save_csv(tmp_path / 'cases.csv'))
    assert list(frame['case']) == ['false', 'exhausted', 'limited']
