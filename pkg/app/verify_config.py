########################
# Verifier Config      #
########################

from dataclasses import dataclass
from pathlib import Path
import os
from typing import Any, Dict, List, Optional, Union

from dotenv import dotenv_values, load_dotenv

from app.exceptions import ConfigurationError, ValidationError
from app.input_validators import InputValidator
from app.padic import PAdicConfig, is_prime

# Load environment variables from a .env file into the program's environment
load_dotenv()

CONFIG_KEYS = (
    'prime', 'primes', 'precision', 'degree_cap', 'slack', 'seed', 'suites', 'trials',
    'levels', 'workers', 'unit_root', 'weil_fixture_path', 'report_dir',
)

# Per-suite grids: primes_<suite> and levels_<suite>, hyphens spelled as underscores.
PRIMES_PREFIX = 'primes_'
LEVELS_PREFIX = 'levels_'


def suite_key(key: str, prefix: str) -> str:
    """'levels_theta_congruence' -> 'theta-congruence'."""
    return key[len(prefix):].replace('_', '-')


def get_project_root() -> Path:
    """
    Get the project root directory.

    Returns:
        Path: The directory two levels above this file.
    """
    return Path(__file__).parent.parent


def _env_int(key: str, default: int) -> int:
    return InputValidator.validate_int(key, os.getenv(key, str(default)))


@dataclass
class VerifyConfig:
    """
    Verification run settings.

    Every setting can be passed to the constructor; otherwise it is read from
    a VERIFY_* environment variable, and otherwise a default applies. Config
    files are flat key=value text (see from_file).
    """

    def __init__(
        self,
        base_dir: Optional[Path] = None,
        prime: Optional[int] = None,
        precision: Optional[int] = None,
        degree_cap: Optional[int] = None,
        slack: Optional[int] = None,
        seed: Optional[int] = None,
        suites: Optional[List[str]] = None,
        trials: Optional[int] = None,
        levels: Optional[List[int]] = None,
        workers: Optional[int] = None,
        unit_root: Optional[int] = None,
        weil_fixture_path: Optional[Union[str, Path]] = None,
        report_dir: Optional[Union[str, Path]] = None,
        primes: Optional[List[int]] = None,
        suite_primes: Optional[Dict[str, List[int]]] = None,
        suite_levels: Optional[Dict[str, List[int]]] = None,
    ):
        """
        Initialize configuration with environment variables and defaults.

        Args:
            base_dir: Directory that relative paths resolve against. Defaults to the project root.
            prime: The odd prime p.
            precision: Target precision N (results certified modulo p^N).
            degree_cap: Degree cap D for truncated series.
            slack: Extra digits carried by recursions; defaults to the degree cap.
            seed: Seed of the SplitMix64 generator.
            suites: Suite names to run.
            trials: Random trials per randomized check.
            levels: Tower levels exercised by the tower suites.
            workers: Number of suites run concurrently.
            unit_root: The unit u0 in the Euler factors (1 - u0/p).
            weil_fixture_path: key=value file caching Weil pairing fields.
            report_dir: Where reports are written.
            primes: Prime grid every suite sweeps; defaults to [prime].
            suite_primes: Per-suite prime grids overriding `primes`.
            suite_levels: Per-suite level lists overriding `levels`.
        """
        project_root = get_project_root()
        self.base_dir = Path(base_dir or os.getenv('VERIFY_BASE_DIR', str(project_root))).resolve()

        self.prime = prime if prime is not None else _env_int('VERIFY_PRIME', 5)
        self.precision = precision if precision is not None else _env_int('VERIFY_PRECISION', 10)
        self.degree_cap = degree_cap if degree_cap is not None else _env_int('VERIFY_DEGREE_CAP', 12)
        # Recursions divide by π once per degree, so the slack defaults to the cap.
        self.slack = slack if slack is not None else _env_int('VERIFY_SLACK', self.degree_cap)
        self.seed = seed if seed is not None else _env_int('VERIFY_SEED', 20240601)
        self.suites = list(suites) if suites is not None else InputValidator.validate_suites(
            os.getenv('VERIFY_SUITES', '')
        )
        self.trials = trials if trials is not None else _env_int('VERIFY_TRIALS', 20)
        self.levels = list(levels) if levels is not None else InputValidator.validate_levels(
            os.getenv('VERIFY_LEVELS', '1-2')
        )
        self.workers = workers if workers is not None else _env_int('VERIFY_WORKERS', 2)
        self.unit_root = unit_root if unit_root is not None else _env_int('VERIFY_UNIT_ROOT', 1)
        self._weil_fixture_path = weil_fixture_path or os.getenv('VERIFY_WEIL_FIXTURE_PATH')
        self._report_dir = report_dir or os.getenv('VERIFY_REPORT_DIR')
        if primes is not None:
            self.primes = list(primes)
        elif os.getenv('VERIFY_PRIMES'):
            self.primes = InputValidator.validate_primes(os.environ['VERIFY_PRIMES'])
        else:
            self.primes = [self.prime]
        self.suite_primes = {name.lower(): list(grid) for name, grid in (suite_primes or {}).items()}
        self.suite_levels = {name.lower(): list(grid) for name, grid in (suite_levels or {}).items()}

    @classmethod
    def from_file(cls, path: Union[str, Path], base_dir: Optional[Path] = None) -> 'VerifyConfig':
        """
        Read a flat key=value config file.

        VERIFY_WORKERS in the environment overrides the file's worker count.

        Raises:
            ConfigurationError: If the file is missing, has unknown keys or bad values.
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"config file not found: {path}")
        raw: Dict[str, Any] = {k.strip().lower(): v for k, v in dotenv_values(path).items()}
        unknown = sorted(key for key in set(raw) - set(CONFIG_KEYS)
                         if not key.startswith((PRIMES_PREFIX, LEVELS_PREFIX)))
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        values: Dict[str, Any] = {}
        try:
            if raw.get('prime'):
                values['prime'] = InputValidator.validate_prime(raw['prime'])
            if raw.get('primes'):
                values['primes'] = InputValidator.validate_primes(raw['primes'])
            values['suite_primes'] = {
                suite_key(key, PRIMES_PREFIX): InputValidator.validate_primes(value)
                for key, value in raw.items() if key.startswith(PRIMES_PREFIX)
            }
            values['suite_levels'] = {
                suite_key(key, LEVELS_PREFIX): InputValidator.validate_levels(value)
                for key, value in raw.items() if key.startswith(LEVELS_PREFIX)
            }
            for key in ('precision', 'degree_cap', 'slack', 'seed', 'trials', 'workers', 'unit_root'):
                if raw.get(key):
                    values[key] = InputValidator.validate_int(key, raw[key])
            if 'suites' in raw:
                values['suites'] = InputValidator.validate_suites(raw['suites'])
            if raw.get('levels'):
                values['levels'] = InputValidator.validate_levels(raw['levels'])
            if os.getenv('VERIFY_WORKERS'):
                values['workers'] = InputValidator.validate_int('VERIFY_WORKERS', os.environ['VERIFY_WORKERS'])
        except ValidationError as e:
            raise ConfigurationError(f"{path}: {e}") from e
        for key in ('weil_fixture_path', 'report_dir'):
            if raw.get(key):
                values[key] = raw[key]
        return cls(base_dir=base_dir or path.parent, **values)

    def _resolve(self, value: Union[str, Path]) -> Path:
        path = Path(value)
        return (path if path.is_absolute() else self.base_dir / path).resolve()

    @property
    def log_dir(self) -> Path:
        return Path(os.getenv('VERIFY_LOG_DIR', str(self.base_dir / "logs"))).resolve()

    @property
    def log_file(self) -> Path:
        return Path(os.getenv('VERIFY_LOG_FILE', str(self.log_dir / "verify.log"))).resolve()

    @property
    def report_dir(self) -> Path:
        return self._resolve(self._report_dir or "reports")

    @property
    def fixture_file(self) -> Path:
        """Cache of Weil pairing fields and bases."""
        return self._resolve(self._weil_fixture_path or "fixtures/weil.env")

    def padic_config(self, prime: Optional[int] = None) -> PAdicConfig:
        return PAdicConfig(prime or self.prime, self.precision, self.degree_cap, self.slack)

    def primes_for(self, suite: str) -> List[int]:
        """The prime grid a suite sweeps."""
        return list(self.suite_primes.get(suite.lower(), self.primes))

    def levels_for(self, suite: str) -> List[int]:
        """The tower levels a suite exercises."""
        return list(self.suite_levels.get(suite.lower(), self.levels))

    def validate(self) -> None:
        """
        Validate configuration settings.

        Raises:
            ConfigurationError: If any configuration parameter is invalid.
        """
        grids = [[self.prime], self.primes, *self.suite_primes.values()]
        if any(not grid for grid in grids):
            raise ConfigurationError("prime grids must not be empty")
        all_primes = sorted({p for grid in grids for p in grid})
        if any(p <= 2 or not is_prime(p) for p in all_primes):
            raise ConfigurationError("prime must be an odd prime")
        if self.precision <= 0:
            raise ConfigurationError("precision must be positive")
        if self.degree_cap <= 0:
            raise ConfigurationError("degree_cap must be positive")
        if self.slack < 0:
            raise ConfigurationError("slack must be non-negative")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        if self.trials < 0:
            raise ConfigurationError("trials must be non-negative")
        if any(not levels or min(levels) < 1 for levels in [self.levels, *self.suite_levels.values()]):
            raise ConfigurationError("levels must be positive")
        if any(self.unit_root % p == 0 for p in all_primes):
            raise ConfigurationError("unit_root must be prime to p")

    def to_dict(self) -> Dict[str, Any]:
        """The parameters that determine a run's results (paths excluded)."""
        return {
            'prime': self.prime,
            'primes': list(self.primes),
            'precision': self.precision,
            'degree_cap': self.degree_cap,
            'slack': self.slack,
            'seed': self.seed,
            'trials': self.trials,
            'levels': list(self.levels),
            'unit_root': self.unit_root,
        }
