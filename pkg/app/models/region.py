from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import List, Optional, Tuple

from app.models.channel import DMWiretapChannel, InputDistribution, MIBundle
from app.models.polytope import RateTuple


class RegionKind(str, Enum):
    """速率區域種類"""

    THEOREM_ONE = "TheoremOne"
    LEMMA_ONE_K = "LemmaOneK"
    TEKIN_YENER_R1 = "TekinYenerR1"
    DERIVED_R2 = "DerivedR2"
    LIFTED_WITH_GUARD_RATES = "LiftedWithGuardRates"
    EPSILON_STRICT = "EpsilonStrict"


class Category(IntEnum):
    """速率分割的六個類別"""

    ONE = 1
    TWO = 2
    THREE = 3
    FOUR = 4
    FIVE = 5
    SIX = 6


@dataclass(frozen=True)
class InequalityCheck:
    """報表中的一筆檢查：slack = 右側 − 左側"""

    name: str
    slack: float
    passed: bool


@dataclass(frozen=True)
class TransformReport:
    input: RateTuple
    category: Category
    output: Optional[RateTuple]
    verified: bool
    checks: Tuple[InequalityCheck, ...]

    def failed_checks(self) -> List[InequalityCheck]:
        return [check for check in self.checks if not check.passed]


@dataclass(frozen=True)
class SearchResult:
    """反例搜尋的結果"""

    trial: int
    channel: DMWiretapChannel
    inputs: Tuple[InputDistribution, ...]
    bundle: MIBundle
    counterexample: RateTuple
    in_tekin_region: bool
    in_theorem_region: bool
