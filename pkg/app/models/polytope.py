from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from app.core.errors import AxisMismatchError, InvalidInputError, UnknownAxisError

Number = Union[int, Fraction]


@dataclass(frozen=True)
class LinearInequality:
    """
    線性不等式 Σ a_i x_i ≤ b

    係數與右側皆為精確有理數；係數為零的軸不存放。
    name 僅作為報表標籤，不參與相等比較。
    """

    coefficients: Tuple[Tuple[str, Fraction], ...]
    rhs: Fraction
    name: str = field(default="", compare=False)

    @classmethod
    def of(
        cls, coefficients: Mapping[str, Number], rhs: Number, name: str = ""
    ) -> "LinearInequality":
        terms = tuple(
            (axis, Fraction(value)) for axis, value in coefficients.items() if Fraction(value) != 0
        )
        return cls(terms, Fraction(rhs), name)

    @classmethod
    def nonnegativity(cls, axis: str) -> "LinearInequality":
        return cls(((axis, Fraction(-1)),), Fraction(0), f"{axis} >= 0")

    @property
    def axes(self) -> Tuple[str, ...]:
        return tuple(axis for axis, _ in self.coefficients)

    @property
    def is_constant(self) -> bool:
        return not self.coefficients

    def coefficient(self, axis: str) -> Fraction:
        for label, value in self.coefficients:
            if label == axis:
                return value
        return Fraction(0)

    def nonnegativity_axis(self) -> Optional[str]:
        """若為 x ≥ 0 型式則回傳該軸"""
        if len(self.coefficients) == 1 and self.rhs == 0 and self.coefficients[0][1] < 0:
            return self.coefficients[0][0]
        return None

    def normalized_key(self) -> Tuple:
        """結構去重用的標準型：除以最大係數絕對值並依軸排序"""
        scale = max((abs(v) for _, v in self.coefficients), default=Fraction(1))
        if scale == 0:
            scale = Fraction(1)
        terms = tuple(sorted((axis, value / scale) for axis, value in self.coefficients))
        return terms, self.rhs / scale

    def vector(self, axes: Sequence[str]) -> Tuple[Fraction, ...]:
        return tuple(self.coefficient(axis) for axis in axes)

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        return sum((value * point[axis] for axis, value in self.coefficients), Fraction(0))

    def slack(self, point: Mapping[str, Fraction]) -> Fraction:
        return self.rhs - self.evaluate(point)

    def combine(self, other: "LinearInequality", weight: Fraction, other_weight: Fraction, name: str = "") -> "LinearInequality":
        """weight·self + other_weight·other (兩權重皆須非負)"""
        merged: Dict[str, Fraction] = {}
        for axis, value in self.coefficients:
            merged[axis] = merged.get(axis, Fraction(0)) + weight * value
        for axis, value in other.coefficients:
            merged[axis] = merged.get(axis, Fraction(0)) + other_weight * value
        return LinearInequality.of(merged, weight * self.rhs + other_weight * other.rhs, name)

    def substitute(self, values: Mapping[str, Fraction]) -> "LinearInequality":
        """代入固定座標，回傳剩餘軸上的不等式"""
        rhs = self.rhs
        kept = {}
        for axis, value in self.coefficients:
            if axis in values:
                rhs -= value * values[axis]
            else:
                kept[axis] = value
        return LinearInequality.of(kept, rhs, self.name)

    def describe(self) -> str:
        if self.is_constant:
            return f"0 <= {self.rhs}"
        parts = []
        for axis, value in self.coefficients:
            sign = "-" if value < 0 else "+"
            magnitude = abs(value)
            term = axis if magnitude == 1 else f"{magnitude}*{axis}"
            parts.append(f"{sign} {term}")
        text = " ".join(parts)
        text = text[2:] if text.startswith("+ ") else "-" + text[2:]
        return f"{text} <= {self.rhs}"


@dataclass(frozen=True)
class Polytope:
    """
    標記軸上的 H 表示多面體

    請使用 Polytope.build 建立：會檢查軸名稱、折疊常數不等式、
    結構去重，並補上每個軸的非負限制。
    """

    axes: Tuple[str, ...]
    inequalities: Tuple[LinearInequality, ...]

    @classmethod
    def build(cls, axes: Sequence[str], inequalities: Iterable[LinearInequality]) -> "Polytope":
        axes = tuple(axes)
        if not axes or len(set(axes)) != len(axes):
            raise InvalidInputError("軸名稱必須非空且不重複", {"axes": list(axes)})
        known = set(axes)
        kept = []
        seen = set()
        for inequality in inequalities:
            unknown = [axis for axis in inequality.axes if axis not in known]
            if unknown:
                raise UnknownAxisError(f"不等式使用了未知的軸: {unknown}", {"axes": list(axes)})
            if inequality.is_constant:
                if inequality.rhs < 0:
                    return cls.empty(axes)
                continue
            key = inequality.normalized_key()
            if key in seen:
                continue
            seen.add(key)
            kept.append(inequality)
        for axis in axes:
            guard = LinearInequality.nonnegativity(axis)
            if guard.normalized_key() not in seen:
                seen.add(guard.normalized_key())
                kept.append(guard)
        return cls(axes, tuple(kept))

    @classmethod
    def empty(cls, axes: Sequence[str]) -> "Polytope":
        axes = tuple(axes)
        rows = [LinearInequality.nonnegativity(axis) for axis in axes]
        rows.append(LinearInequality.of({axis: 1 for axis in axes}, -1, "empty"))
        return cls(axes, tuple(rows))

    @property
    def dimension(self) -> int:
        return len(self.axes)

    def satisfies(self, point: Sequence[Fraction]) -> bool:
        values = dict(zip(self.axes, point))
        return all(ineq.evaluate(values) <= ineq.rhs for ineq in self.inequalities)

    def require_axes(self, axes: Sequence[str]) -> None:
        if tuple(axes) != self.axes:
            raise AxisMismatchError(
                "座標軸不一致", {"expected": list(self.axes), "actual": list(axes)}
            )


@dataclass(frozen=True)
class RateTuple:
    """
    速率組

    values 為浮點數檢視；由有理數建立時 exact 保存精確值。
    """

    axes: Tuple[str, ...]
    values: Tuple[float, ...]
    exact: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        if len(self.axes) != len(self.values) or (
            self.exact is not None and len(self.exact) != len(self.axes)
        ):
            raise AxisMismatchError("速率組的軸與值數量不一致", {"axes": list(self.axes)})
        negative = [
            axis
            for axis, value, exact in zip(self.axes, self.values, self.exact or self.values)
            if value < 0 or exact < 0
        ]
        if negative:
            raise InvalidInputError(f"速率不可為負: {negative}", {"axes": negative})

    @classmethod
    def from_fractions(cls, axes: Sequence[str], values: Sequence[Number]) -> "RateTuple":
        exact = tuple(Fraction(v) for v in values)
        return cls(tuple(axes), tuple(float(v) for v in exact), exact)

    @classmethod
    def from_floats(cls, axes: Sequence[str], values: Sequence[float]) -> "RateTuple":
        return cls(tuple(axes), tuple(float(v) for v in values))

    @classmethod
    def from_mapping(cls, axes: Sequence[str], mapping: Mapping[str, float]) -> "RateTuple":
        missing = [axis for axis in axes if axis not in mapping]
        extra = [axis for axis in mapping if axis not in axes]
        if missing or extra:
            raise AxisMismatchError("速率組的軸不符", {"missing": missing, "extra": extra})
        values = [mapping[axis] for axis in axes]
        if all(isinstance(v, (int, Fraction)) for v in values):
            return cls.from_fractions(axes, values)
        return cls.from_floats(axes, values)

    def __getitem__(self, axis: str) -> float:
        return self.values[self._index(axis)]

    def _index(self, axis: str) -> int:
        try:
            return self.axes.index(axis)
        except ValueError:
            raise UnknownAxisError(f"未知的軸: {axis}", {"axes": list(self.axes)})

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def exact_value(self, axis: str) -> Fraction:
        if self.exact is None:
            raise InvalidInputError("此速率組沒有精確值", {"axis": axis})
        return self.exact[self._index(axis)]

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.axes, self.values))
