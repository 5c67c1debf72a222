from app.models.channel import (
    ChannelViolation,
    DMWiretapChannel,
    InputDistribution,
    JointPMF,
    MIBundle,
)
from app.models.polytope import LinearInequality, Polytope, RateTuple
from app.models.region import Category, InequalityCheck, RegionKind, SearchResult, TransformReport
from app.models.coding import (
    CodeConfig,
    Codebook,
    LeakageReport,
    NStatisticSummary,
    SimResult,
    SubcodebookLayout,
    Theorem3Bounds,
    TypicalityProbability,
    UserRates,
)

# 為了方便其他模組導入，這裡導出所有模型
__all__ = [
    "ChannelViolation",
    "DMWiretapChannel",
    "InputDistribution",
    "JointPMF",
    "MIBundle",
    "LinearInequality",
    "Polytope",
    "RateTuple",
    "Category",
    "InequalityCheck",
    "RegionKind",
    "SearchResult",
    "TransformReport",
    "CodeConfig",
    "Codebook",
    "LeakageReport",
    "NStatisticSummary",
    "SimResult",
    "SubcodebookLayout",
    "Theorem3Bounds",
    "TypicalityProbability",
    "UserRates",
]
