########################
# Certificates         #
########################

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union


@dataclass
class Certificate:
    """
    Outcome of a mathematical check.

    Checks never raise for a false identity; they return a certificate saying
    whether it held and to how many p-adic digits it was decided.

    Attributes:
        name: Short label of the identity checked.
        passed: Whether the identity held at the achieved precision.
        precision: Digits to which the check was decided, None when not p-adic.
        details: Extra values worth reporting (kept JSON-friendly).
    """

    name: str
    passed: bool
    precision: Optional[Union[int, float]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed
