import pytest

from functools import partial

from app.certificates import Certificate
from app.exceptions import ConfigurationError
from app.padic import PAdicRing
from app.reports import FAIL, LIMITED, PASS
from app.rng import SplitMix64
from app.suites import (
    ColemanSuite,
    DerthetaSuite,
    PAdicSuite,
    Suite,
    SuiteContext,
    SuiteFactory,
    ThetaCongruenceSuite,
    TraceStabilitySuite,
    WeilSuite,
    aggregate,
    control,
    equality,
    expect_failure,
)
from app.verify_config import VerifyConfig

ALL_SUITES = [
    'coleman', 'dertheta', 'formal-group', 'gm-closed-forms', 'iota-star', 'isomorphism',
    'localfield', 'padic', 'series', 'theta-congruence', 'trace-stability', 'weil',
]


# Factory

def test_available_suites():
    assert SuiteFactory.available() == ALL_SUITES

@pytest.mark.parametrize("name", ALL_SUITES)
def test_create_suite(name):
    suite = SuiteFactory.create_suite(name)
    assert isinstance(suite, Suite)
    assert suite.name == name

def test_create_suite_is_case_insensitive():
    assert isinstance(SuiteFactory.create_suite('PAdic'), PAdicSuite)

def test_create_unknown_suite():
    with pytest.raises(ConfigurationError, match="Unknown suite: nope"):
        SuiteFactory.create_suite('nope')

def test_register_suite(monkeypatch):
    monkeypatch.setattr(SuiteFactory, '_suites', dict(SuiteFactory._suites))

    class Extra(PAdicSuite):
        name = 'extra'

    SuiteFactory.register_suite('extra', Extra)
    assert isinstance(SuiteFactory.create_suite('extra'), Extra)

def test_register_non_suite():
    with pytest.raises(TypeError, match="Suite class must inherit from Suite"):
        SuiteFactory.register_suite('bogus', object)

def test_register_duplicate_name():
    with pytest.raises(ValueError, match="already registered"):
        SuiteFactory.register_suite('padic', PAdicSuite)

def test_suite_str():
    assert str(PAdicSuite()) == 'PAdicSuite'


# Certificate helpers

def test_aggregate():
    certificate = aggregate("trials", [Certificate("a", True, 6), Certificate("b", False, 4),
                                       Certificate("c", True)], m=2)
    assert not certificate.passed
    assert certificate.precision == 4
    assert certificate.details == {"trials": 3, "failures": 1, "m": 2}

def test_aggregate_without_padic_precision():
    assert aggregate("trials", [Certificate("a", True)]).precision is None

def test_expect_failure():
    control = expect_failure(Certificate("interpolation", False, 8, {"level": 1}))
    assert control.passed
    assert control.name == "interpolation (control)"
    assert control.precision is None
    assert control.details == {"level": 1, "control": True, "control_outcome": "fail"}
    assert not expect_failure(Certificate("interpolation", True, 8)).passed

def test_control():
    certificate = control(Certificate, "identity", False, 6)
    assert certificate.passed
    assert certificate.name == "identity (control)"
    assert not control(Certificate, "identity", True, 6).passed

def test_equality():
    ring = PAdicRing(5, 6)
    assert equality("same", ring(3), ring(3)).precision == 6
    assert not equality("different", ring(3), ring(4)).passed


# Floors and parameters

def test_floors(config):
    assert PAdicSuite().floor(config) == 3
    assert DerthetaSuite().floor(config) == 3
    assert TraceStabilitySuite().floor(config) == 1
    assert DerthetaSuite().floor(VerifyConfig(precision=2)) == 1

def test_weil_parameters(config):
    assert WeilSuite().parameters(config) == {"seed": 7, "trials": 2, "curve": "y^2 = x^3 - x", "N": [5, 9]}

def test_trace_stability_datasets():
    assert TraceStabilitySuite.datasets(3) == ["cyclotomic:a=2", "constant:k=1"]


# Running suites

def test_padic_suite_passes(config):
    report = PAdicSuite().run(config)
    assert report.passed
    assert [case.case for case in report.cases] == [
        'log-exp-inverse', 'log-homomorphism', 'teichmuller', 'fraction-arithmetic',
    ]
    assert report.parameters == config.to_dict()

def test_runs_are_deterministic(config):
    first = PAdicSuite().run(config).results_dict()
    second = PAdicSuite().run(config).results_dict()
    assert first == second

def test_theta_congruence_suite(config):
    config.levels = [1, 2, 5]
    report = ThetaCongruenceSuite().run(config)
    assert [case.case for case in report.cases] == ['n=1', 'n=2', 'n=1/control']
    assert report.passed
    control = report.cases[-1]
    assert control.precision is None
    assert control.details['control_outcome'] == 'fail'

def test_case_errors_fail_only_that_case(config, stub_suites):
    report = SuiteFactory.create_suite('stub-fail').run(config)
    statuses = {case.case: case.status for case in report.cases}
    assert statuses == {'false': FAIL, 'exhausted': FAIL, 'limited': LIMITED}
    exhausted = report.cases[1]
    assert exhausted.precision == 0
    assert exhausted.details == {'error': 'PrecisionError: no digits left'}

def test_stub_suite_passes(config, stub_suites):
    report = SuiteFactory.create_suite('stub-pass').run(config)
    assert report.status == PASS
    assert report.cases[1].precision is None

def test_cases_record_their_prime(config):
    report = PAdicSuite().run(config)
    assert {case.prime for case in report.cases} == {5}


# Prime grids

class PrimeFreeSuite(Suite):
    name = 'prime-free'
    sweeps_primes = False

    def cases(self, ctx):
        yield "finite-field", partial(Certificate, "finite field", ctx.prime is None)


def test_suite_sweeps_prime_grid(config):
    config.primes = [5, 7]
    report = PAdicSuite().run(config)
    assert report.passed
    assert report.parameters['primes'] == [5, 7]
    assert [case.case for case in report.cases][::4] == ['p=5/log-exp-inverse', 'p=7/log-exp-inverse']
    assert [case.prime for case in report.cases] == [5] * 4 + [7] * 4

def test_sweep_is_deterministic(config):
    config.primes = [5, 7]
    assert PAdicSuite().run(config).results_dict() == PAdicSuite().run(config).results_dict()

def test_theta_congruence_over_configured_grid(config):
    config.suite_primes = {'theta-congruence': [5, 7]}
    config.suite_levels = {'theta-congruence': [1]}
    report = ThetaCongruenceSuite().run(config)
    assert report.passed
    assert [case.case for case in report.cases] == ['p=5/n=1', 'p=5/n=1/control', 'p=7/n=1', 'p=7/n=1/control']
    assert report.parameters['levels'] == [1]

def test_prime_free_suite_runs_once(config):
    config.primes = [3, 5, 7]
    report = PrimeFreeSuite().run(config)
    assert report.passed
    assert [(case.case, case.prime) for case in report.cases] == [('finite-field', None)]

def test_weil_does_not_sweep_primes():
    assert not WeilSuite.sweeps_primes


def test_coleman_suite_checks_norm_multiplicativity(config):
    ctx = SuiteContext(config, SplitMix64(7), 5, [1])
    cases = dict(ColemanSuite().cases(ctx))
    certificate = cases["norm-multiplicative"]()
    assert certificate.passed
    assert certificate.name == "N(gh) = (N g)(N h)"
