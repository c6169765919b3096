########################
# Suite Reports        #
########################

from dataclasses import dataclass, field
import datetime
from fractions import Fraction
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from app.certificates import Certificate

PASS = 'pass'
FAIL = 'fail'
LIMITED = 'precision-limited'

CSV_COLUMNS = ['suite', 'case', 'status', 'precision', 'detail', 'prime']


def jsonable(value: Any) -> Any:
    """Make certificate details JSON-friendly and deterministic."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return "inf" if math.isinf(value) else value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return str(value)


@dataclass
class CaseResult:
    """
    One checked case of a suite.

    Attributes:
        case: Case label, unique within the suite.
        status: PASS, FAIL or LIMITED.
        precision: Digits the case was decided to (None when not p-adic).
        details: JSON-friendly extra values.
        prime: The p the case ran at (None for checks that do not depend on p).
    """

    case: str
    status: str
    precision: Optional[Union[int, str]] = None
    details: Dict[str, Any] = field(default_factory=dict)
    prime: Optional[int] = None

    @classmethod
    def from_certificate(cls, case: str, certificate: Certificate, target: Optional[int] = None,
                         floor: Optional[int] = None, prime: Optional[int] = None) -> 'CaseResult':
        """
        Grade a certificate: a passed check decided below `target` digits is
        precision-limited, and below `floor` digits it fails.
        """
        precision = jsonable(certificate.precision)
        status = PASS if certificate.passed else FAIL
        if certificate.passed and isinstance(precision, int):
            if floor is not None and precision < floor:
                status = FAIL
            elif target is not None and precision < target:
                status = LIMITED
        return cls(case, status, precision, jsonable(certificate.details), prime)

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            'case': self.case,
            'status': self.status,
            'precision': self.precision,
            'details': self.details,
            'prime': self.prime,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CaseResult':
        return cls(data['case'], data['status'], data.get('precision'), dict(data.get('details', {})),
                   data.get('prime'))


@dataclass
class SuiteReport:
    """
    Results of one suite run.

    `results_dict()` depends only on the seed and parameters, so it is
    byte-identical across reruns; wall time and timestamp sit in `timing`.
    """

    suite: str
    parameters: Dict[str, Any]
    seed: int
    cases: List[CaseResult] = field(default_factory=list)
    error: Optional[str] = None
    wall_time: float = 0.0
    timestamp: datetime.datetime = field(default_factory=datetime.datetime.now)

    @property
    def passed(self) -> bool:
        return self.error is None and not any(case.failed for case in self.cases)

    @property
    def status(self) -> str:
        if not self.passed:
            return FAIL
        if any(case.status == LIMITED for case in self.cases):
            return LIMITED
        return PASS

    def results_dict(self) -> Dict[str, Any]:
        return {
            'suite': self.suite,
            'parameters': jsonable(self.parameters),
            'seed': self.seed,
            'status': self.status,
            'error': self.error,
            'cases': [case.to_dict() for case in self.cases],
        }

    def timing_dict(self) -> Dict[str, Any]:
        return {'wall_time': round(self.wall_time, 6), 'timestamp': self.timestamp.isoformat()}

    def to_dict(self) -> Dict[str, Any]:
        return {'results': self.results_dict(), 'timing': self.timing_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SuiteReport':
        results, timing = data['results'], data.get('timing', {})
        report = cls(
            suite=results['suite'],
            parameters=dict(results.get('parameters', {})),
            seed=results['seed'],
            cases=[CaseResult.from_dict(case) for case in results.get('cases', [])],
            error=results.get('error'),
            wall_time=float(timing.get('wall_time', 0.0)),
        )
        if 'timestamp' in timing:
            report.timestamp = datetime.datetime.fromisoformat(timing['timestamp'])
        return report


def reports_to_json(reports: List[SuiteReport]) -> str:
    """Serialize reports merged by suite name; results and timing are separate blocks."""
    ordered = sorted(reports, key=lambda r: r.suite)
    payload = {
        'results': {r.suite: r.results_dict() for r in ordered},
        'timing': {r.suite: r.timing_dict() for r in ordered},
    }
    return json.dumps(payload, sort_keys=True, indent=2)


def results_json(reports: List[SuiteReport]) -> str:
    """The deterministic part alone."""
    ordered = sorted(reports, key=lambda r: r.suite)
    return json.dumps({r.suite: r.results_dict() for r in ordered}, sort_keys=True, indent=2)


def reports_from_json(text: str) -> List[SuiteReport]:
    payload = json.loads(text)
    timing = payload.get('timing', {})
    return [SuiteReport.from_dict({'results': results, 'timing': timing.get(name, {})})
            for name, results in sorted(payload.get('results', {}).items())]


def reports_to_frame(reports: List[SuiteReport]) -> pd.DataFrame:
    records = []
    for report in sorted(reports, key=lambda r: r.suite):
        if report.error is not None:
            records.append({'suite': report.suite, 'case': '<error>', 'status': FAIL,
                            'precision': None, 'detail': report.error, 'prime': None})
        for case in report.cases:
            records.append({
                'suite': report.suite,
                'case': case.case,
                'status': case.status,
                'precision': case.precision,
                'detail': json.dumps(case.details, sort_keys=True),
                'prime': case.prime,
            })
    return pd.DataFrame(records, columns=CSV_COLUMNS)


def save_json(reports: List[SuiteReport], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(reports_to_json(reports) + "\n", encoding='utf-8')
    return path


def save_csv(reports: List[SuiteReport], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    reports_to_frame(reports).to_csv(path, index=False, encoding='utf-8')
    return path


def load_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, encoding='utf-8')
