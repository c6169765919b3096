########################
# Input Validation     #
########################

import re
from dataclasses import dataclass
from typing import Any, List, Optional

from app.exceptions import ValidationError
from app.padic import is_prime

# Suite names: lowercase words joined by hyphens, e.g. "trace-stability".
SUITE_PATTERN = re.compile(r'[a-z][a-z0-9]*(?:-[a-z0-9]+)*')

# Level lists: "1,2,3" or a range "1-3".
LEVEL_RANGE_PATTERN = re.compile(r'(\d+)\s*-\s*(\d+)')


@dataclass
class InputValidator:
    """Validates and converts raw configuration values."""

    @staticmethod
    def validate_int(name: str, value: Any, minimum: Optional[int] = None) -> int:
        """
        Convert a config value to int.

        Args:
            name: Key being parsed, used in error messages.
            value: Raw value (str or int).
            minimum: Smallest accepted value, if any.

        Returns:
            int: The parsed value.

        Raises:
            ValidationError: If the value is not an integer or is below minimum.
        """
        try:
            number = int(str(value).strip())
        except ValueError as e:
            raise ValidationError(f"{name} must be an integer, got {value!r}") from e
        if minimum is not None and number < minimum:
            raise ValidationError(f"{name} must be at least {minimum}, got {number}")
        return number

    @staticmethod
    def validate_prime(value: Any) -> int:
        """
        Raises:
            ValidationError: If the value is not an odd prime.
        """
        p = InputValidator.validate_int("prime", value)
        if p <= 2 or not is_prime(p):
            raise ValidationError(f"prime must be an odd prime, got {p}")
        return p

    @staticmethod
    def validate_primes(raw: Any) -> List[int]:
        """
        Parse a comma-separated prime grid such as "3,5,7" (sorted, duplicates dropped).

        Raises:
            ValidationError: If the grid is empty or holds something other than an odd prime.
        """
        parts = raw if isinstance(raw, (list, tuple)) else str(raw).split(',')
        primes = [InputValidator.validate_prime(part) for part in parts if str(part).strip()]
        if not primes:
            raise ValidationError(f"prime grid must not be empty, got {raw!r}")
        return sorted(set(primes))

    @staticmethod
    def validate_suites(raw: Any) -> List[str]:
        """
        Split a comma-separated suite list; blanks are dropped.

        Raises:
            ValidationError: If a name is not a well-formed suite name.
        """
        if raw is None:
            return []
        if isinstance(raw, (list, tuple)):
            names = [str(name).strip().lower() for name in raw]
        else:
            names = [name.strip().lower() for name in str(raw).split(',')]
        names = [name for name in names if name]
        for name in names:
            if not SUITE_PATTERN.fullmatch(name):
                raise ValidationError(f"malformed suite name {name!r}")
        return names

    @staticmethod
    def validate_levels(raw: Any) -> List[int]:
        """
        Parse "1,2,3" or "1-3" into a sorted list of positive levels.

        Raises:
            ValidationError: If the list is empty or holds a non-positive level.
        """
        if isinstance(raw, int):
            levels = list(range(1, raw + 1))
        else:
            text = str(raw).strip()
            match = LEVEL_RANGE_PATTERN.fullmatch(text)
            if match:
                levels = list(range(int(match.group(1)), int(match.group(2)) + 1))
            else:
                levels = [InputValidator.validate_int("levels", part) for part in text.split(',') if part.strip()]
        if not levels or min(levels) < 1:
            raise ValidationError(f"levels must be positive, got {raw!r}")
        return sorted(set(levels))
