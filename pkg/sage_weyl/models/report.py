from dataclasses import dataclass, field
from typing import Any, Dict, List

from sage_weyl.helpers.enums import SelfAdjointCriterion, Verdict


@dataclass(frozen=True)
class ConditionVerdict:
    """One row of a hypothesis report: the condition, its verdict and a witness."""

    condition: str
    verdict: Verdict
    witness: Any = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "condition": self.condition,
            "verdict": str(self.verdict),
            "witness": self.witness,
        }


@dataclass
class HypothesisReport:
    """
    Verdicts for the hypotheses of a self-adjointness or lower-bound criterion.

    Attributes
    ----------
    verdicts : List[ConditionVerdict]
        One entry per checked condition, in the order of the criterion.
    variants : List[SelfAdjointCriterion]
        The criteria whose hypotheses are all met.
    real_points_in_resolvent_set : List[float]
        Real points where the Krein block was invertible; these lie in ρ(A_[B]).
    """

    verdicts: List[ConditionVerdict] = field(default_factory=list)
    variants: List[SelfAdjointCriterion] = field(default_factory=list)
    real_points_in_resolvent_set: List[float] = field(default_factory=list)

    def add(self, condition: str, verdict: Verdict, witness: Any = None) -> None:
        self.verdicts.append(ConditionVerdict(condition, verdict, witness))

    @property
    def passed(self) -> bool:
        return all(item.verdict is not Verdict.FAIL for item in self.verdicts)

    def verdict_for(self, condition: str) -> List[ConditionVerdict]:
        return [item for item in self.verdicts if item.condition == condition]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "conditions": [item.to_dict() for item in self.verdicts],
            "variants": [str(variant) for variant in self.variants],
            "real_points_in_resolvent_set": list(self.real_points_in_resolvent_set),
        }
