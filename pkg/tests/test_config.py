from pathlib import Path

import pytest

from app.exceptions import ConfigurationError
from app.padic import PAdicConfig
from app.verify_config import VerifyConfig


@pytest.fixture(autouse=True)
def isolated_env(clean_env):
    """Each test starts without VERIFY_* variables."""
    return clean_env


def write_config(path, text):
    path.write_text(text, encoding='utf-8')
    return path


def test_default_configuration():
    config = VerifyConfig()
    assert config.prime == 5
    assert config.precision == 10
    assert config.degree_cap == 12
    assert config.slack == 12
    assert config.seed == 20240601
    assert config.suites == []
    assert config.trials == 20
    assert config.levels == [1, 2]
    assert config.workers == 2
    assert config.unit_root == 1

def test_environment_configuration(clean_env):
    clean_env.setenv('VERIFY_PRIME', '7')
    clean_env.setenv('VERIFY_PRECISION', '8')
    clean_env.setenv('VERIFY_DEGREE_CAP', '6')
    clean_env.setenv('VERIFY_SUITES', 'padic,series')
    clean_env.setenv('VERIFY_LEVELS', '1,3')
    config = VerifyConfig()
    assert config.prime == 7
    assert config.precision == 8
    assert config.slack == 6
    assert config.suites == ['padic', 'series']
    assert config.levels == [1, 3]

def test_custom_configuration():
    config = VerifyConfig(prime=3, precision=6, degree_cap=4, slack=2, seed=9,
                          suites=['weil'], trials=3, levels=[1], workers=1, unit_root=2)
    assert config.padic_config() == PAdicConfig(3, 6, 4, 2)
    assert config.suites == ['weil']
    assert config.to_dict() == {
        'prime': 3, 'primes': [3], 'precision': 6, 'degree_cap': 4, 'slack': 2, 'seed': 9,
        'trials': 3, 'levels': [1], 'unit_root': 2,
    }

def test_directory_properties():
    config = VerifyConfig(base_dir=Path('/custom_base_dir'))
    assert config.log_dir == Path('/custom_base_dir/logs').resolve()
    assert config.log_file == Path('/custom_base_dir/logs/verify.log').resolve()
    assert config.report_dir == Path('/custom_base_dir/reports').resolve()
    assert config.fixture_file == Path('/custom_base_dir/fixtures/weil.env').resolve()

def test_log_paths_from_environment(clean_env):
    clean_env.setenv('VERIFY_LOG_DIR', './test_logs')
    clean_env.setenv('VERIFY_LOG_FILE', './test_logs/test_log.log')
    config = VerifyConfig()
    assert config.log_dir == Path('./test_logs').resolve()
    assert config.log_file == Path('./test_logs/test_log.log').resolve()

def test_absolute_report_dir(tmp_path):
    config = VerifyConfig(base_dir=Path('/custom_base_dir'), report_dir=tmp_path / 'out')
    assert config.report_dir == (tmp_path / 'out').resolve()

@pytest.mark.parametrize("kwargs, message", [
    ({'prime': 4}, "prime must be an odd prime"),
    ({'prime': 2}, "prime must be an odd prime"),
    ({'precision': 0}, "precision must be positive"),
    ({'degree_cap': 0, 'slack': 0}, "degree_cap must be positive"),
    ({'slack': -1}, "slack must be non-negative"),
    ({'workers': 0}, "workers must be at least 1"),
    ({'trials': -1}, "trials must be non-negative"),
    ({'levels': [0, 1]}, "levels must be positive"),
    ({'unit_root': 10}, "unit_root must be prime to p"),
])
def test_invalid_configuration(kwargs, message):
    with pytest.raises(ConfigurationError, match=message):
        VerifyConfig(**kwargs).validate()

def test_valid_configuration():
    VerifyConfig().validate()


# Prime grids

def test_primes_default_to_prime():
    config = VerifyConfig(prime=7)
    assert config.primes == [7]
    assert config.primes_for('padic') == [7]
    assert config.padic_config() == config.padic_config(7)

def test_primes_from_environment(clean_env):
    clean_env.setenv('VERIFY_PRIMES', '7, 3,5,3')
    assert VerifyConfig().primes == [3, 5, 7]

def test_suite_grids_override_run_grids():
    config = VerifyConfig(primes=[3, 5, 7], levels=[1, 2],
                          suite_primes={'Dertheta': [5, 7]}, suite_levels={'theta-congruence': [1]})
    assert config.primes_for('dertheta') == [5, 7]
    assert config.primes_for('padic') == [3, 5, 7]
    assert config.levels_for('theta-congruence') == [1]
    assert config.levels_for('coleman') == [1, 2]
    assert config.padic_config(7) == PAdicConfig(7, config.precision, config.degree_cap, config.slack)

@pytest.mark.parametrize("kwargs, message", [
    ({'primes': [3, 9]}, "prime must be an odd prime"),
    ({'primes': []}, "prime grids must not be empty"),
    ({'suite_primes': {'padic': [2]}}, "prime must be an odd prime"),
    ({'suite_levels': {'coleman': [0]}}, "levels must be positive"),
    ({'primes': [3, 7], 'unit_root': 14}, "unit_root must be prime to p"),
])
def test_invalid_prime_grids(kwargs, message):
    with pytest.raises(ConfigurationError, match=message):
        VerifyConfig(**kwargs).validate()

# Config files

def test_from_file(tmp_path):
    path = write_config(tmp_path / 'verify.conf', "prime=3\nprecision=6\nsuites=padic, series\nlevels=1-3\n")
    config = VerifyConfig.from_file(path)
    assert config.prime == 3
    assert config.precision == 6
    assert config.suites == ['padic', 'series']
    assert config.levels == [1, 2, 3]
    assert config.base_dir == tmp_path.resolve()
    assert config.report_dir == (tmp_path / 'reports').resolve()

def test_from_file_prime_grids(tmp_path):
    path = write_config(tmp_path / 'verify.conf', "primes=3,5,7\nlevels=1-2\n"
                        "primes_dertheta=5,7\nLEVELS_THETA_CONGRUENCE=1,2\nprimes_theta_congruence=5,7\n")
    config = VerifyConfig.from_file(path)
    config.validate()
    assert config.primes == [3, 5, 7]
    assert config.primes_for('dertheta') == [5, 7]
    assert config.primes_for('theta-congruence') == [5, 7]
    assert config.levels_for('theta-congruence') == [1, 2]
    assert config.primes_for('formal-group') == [3, 5, 7]
    assert config.to_dict()['primes'] == [3, 5, 7]

def test_from_file_keys_are_case_insensitive(tmp_path):
    path = write_config(tmp_path / 'verify.conf', "PRIME=7\nTrials=4\n")
    config = VerifyConfig.from_file(path)
    assert config.prime == 7
    assert config.trials == 4

def test_from_file_empty_suites(tmp_path):
    path = write_config(tmp_path / 'verify.conf', "suites=\n")
    assert VerifyConfig.from_file(path).suites == []

def test_from_file_workers_override(tmp_path, clean_env):
    clean_env.setenv('VERIFY_WORKERS', '5')
    path = write_config(tmp_path / 'verify.conf', "workers=1\n")
    assert VerifyConfig.from_file(path).workers == 5

def test_from_file_missing(tmp_path):
    with pytest.raises(ConfigurationError, match="config file not found"):
        VerifyConfig.from_file(tmp_path / 'absent.conf')

def test_from_file_unknown_key(tmp_path):
    path = write_config(tmp_path / 'verify.conf', "prime=5\ncolour=blue\n")
    with pytest.raises(ConfigurationError, match="unknown config keys: colour"):
        VerifyConfig.from_file(path)

@pytest.mark.parametrize("text", [
    "prime=9\n", "precision=ten\n", "levels=0\n", "suites=bad_name\n",
    "primes=3,4\n", "primes_dertheta=\n", "levels_coleman=0\n",
])
def test_from_file_bad_values(tmp_path, text):
    path = write_config(tmp_path / 'verify.conf', text)
    with pytest.raises(ConfigurationError, match="verify.conf"):
        VerifyConfig.from_file(path)
