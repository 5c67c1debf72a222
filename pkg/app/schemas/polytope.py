from fractions import Fraction
from typing import Dict, List

from pydantic import BaseModel, Field, field_validator

from app.models.polytope import LinearInequality, Polytope
from app.models.region import RegionKind
from app.services.report import format_fraction


def _parse_fraction(value: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"無法解析的有理數: {value!r}")


# 多面體匯出格式：係數與右側均為 "num/den"
class InequalityExport(BaseModel):
    coefficients: List[str] = Field(..., description="與 axes 對齊的係數")
    rhs: str = Field(..., description="右側常數")
    name: str = Field("", description="可讀名稱")

    @field_validator("coefficients")
    @classmethod
    def check_coefficients(cls, v: List[str]) -> List[str]:
        for item in v:
            _parse_fraction(item)
        return v

    @field_validator("rhs")
    @classmethod
    def check_rhs(cls, v: str) -> str:
        _parse_fraction(v)
        return v


class PolytopeExport(BaseModel):
    axes: List[str] = Field(..., description="座標軸標籤")
    inequalities: List[InequalityExport] = Field(default_factory=list)

    @classmethod
    def from_polytope(cls, polytope: Polytope) -> "PolytopeExport":
        return cls(
            axes=list(polytope.axes),
            inequalities=[
                InequalityExport(
                    coefficients=[format_fraction(c) for c in inequality.vector(polytope.axes)],
                    rhs=format_fraction(inequality.rhs),
                    name=inequality.name,
                )
                for inequality in polytope.inequalities
            ],
        )

    def to_polytope(self) -> Polytope:
        rows = []
        for item in self.inequalities:
            if len(item.coefficients) != len(self.axes):
                raise ValueError("係數數量與軸數不符")
            coefficients = dict(zip(self.axes, (_parse_fraction(c) for c in item.coefficients)))
            rows.append(LinearInequality.of(coefficients, _parse_fraction(item.rhs), item.name))
        return Polytope.build(self.axes, rows)


class RegionExport(PolytopeExport):
    kind: RegionKind = Field(..., description="區域種類")
    eps: float = Field(0.0, description="ε")
    mi: Dict[str, float] = Field(default_factory=dict, description="建構時使用的互資訊值")
