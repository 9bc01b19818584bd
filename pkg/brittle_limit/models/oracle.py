from dataclasses import dataclass, field
from typing import Dict, Any, Optional
import json
import math


@dataclass
class OracleReport:
    """Worst-case comparison of a shortcut against its brute-force oracle."""
    name: str
    samples: int
    max_abs_gap: float = 0.0
    max_rel_gap: float = 0.0
    worst_case_input: Optional[Dict[str, Any]] = None
    seed: Optional[int] = None
    tolerance: float = 0.0
    expect_violation: bool = False
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.max_abs_gap) and math.isfinite(self.max_rel_gap)):
            raise ValueError(f"Oracle {self.name} produced non-finite gaps")

    def record(self, abs_gap: float, rel_gap: float, case: Dict[str, Any]):
        """Keep the sample with the largest relative gap."""
        self.max_abs_gap = max(self.max_abs_gap, abs_gap)
        if self.worst_case_input is None or rel_gap > self.max_rel_gap:
            self.max_rel_gap = max(self.max_rel_gap, rel_gap)
            self.worst_case_input = case

    @property
    def passed(self) -> bool:
        within = self.max_rel_gap <= self.tolerance
        return not within if self.expect_violation else within

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'samples': self.samples,
            'max_abs_gap': self.max_abs_gap,
            'max_rel_gap': self.max_rel_gap,
            'worst_case_input': self.worst_case_input,
            'seed': self.seed,
            'tolerance': self.tolerance,
            'expect_violation': self.expect_violation,
            'passed': self.passed,
            'details': self.details
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def __repr__(self):
        status = 'pass' if self.passed else 'FAIL'
        return f'<OracleReport {self.name} {status} rel_gap={self.max_rel_gap:.3e} n={self.samples}>'
