import os

import pytest

from app.certificates import Certificate
from app.exceptions import PrecisionError
from app.suites import Suite, SuiteFactory
from app.verify_config import VerifyConfig


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long runs over the full parameter grid (deselect with -m 'not slow')")


class PassingSuite(Suite):
    name = 'stub-pass'

    def cases(self, ctx):
        yield "exact", lambda: Certificate("exact", True, ctx.target)
        yield "not-p-adic", lambda: Certificate("finite field", True)


class FailingSuite(Suite):
    name = 'stub-fail'

    def cases(self, ctx):
        def exhausted():
            raise PrecisionError("no digits left")

        yield "false", lambda: Certificate("false", False, ctx.target)
        yield "exhausted", exhausted
        yield "limited", lambda: Certificate("limited", True, ctx.target - 1)


class CrashingSuite(Suite):
    name = 'stub-crash'

    def cases(self, ctx):
        raise RuntimeError("boom")


@pytest.fixture
def clean_env(monkeypatch):
    """Drop VERIFY_* variables so configs only see what a test sets."""
    for var in [key for key in os.environ if key.startswith('VERIFY_')]:
        monkeypatch.delenv(var)
    return monkeypatch


@pytest.fixture
def config(tmp_path, clean_env):
    """A small, fast configuration rooted in a temporary directory."""
    return VerifyConfig(base_dir=tmp_path, prime=5, precision=6, degree_cap=6, slack=6,
                        seed=7, suites=[], trials=2, levels=[1], workers=2)


@pytest.fixture
def stub_suites(monkeypatch):
    """Register the stub suites for the duration of a test."""
    for suite_class in (PassingSuite, FailingSuite, CrashingSuite):
        monkeypatch.setitem(SuiteFactory._suites, suite_class.name, suite_class)
