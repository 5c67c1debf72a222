from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Tuple, Union

import numpy as np

from app.core.errors import ChannelValidationError, DimensionMismatchError

UserSet = FrozenSet[int]
Users = Union[int, Iterable[int]]


def user_set(users: Users) -> UserSet:
    """將使用者編號 (從 1 開始) 或其集合轉為 frozenset"""
    if isinstance(users, int):
        return frozenset((users,))
    return frozenset(users)


def nonempty_subsets(num_users: int) -> List[UserSet]:
    """依大小與字典序列出 {1..K} 的所有非空子集"""
    indices = range(1, num_users + 1)
    return [
        frozenset(combo)
        for size in range(1, num_users + 1)
        for combo in combinations(indices, size)
    ]


@dataclass(frozen=True, eq=False)
class DMWiretapChannel:
    """
    離散無記憶多重存取竊聽通道

    transition 的索引為 [x_1]...[x_K][y][z]，值為 p(y,z|x_1,...,x_K)。
    列和是否為 1 由 validate_channel 回報，不在建構時強制。
    """

    input_sizes: Tuple[int, ...]
    y_size: int
    z_size: int
    transition: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.input_sizes)
        if not sizes or min(sizes) < 1 or self.y_size < 1 or self.z_size < 1:
            raise ChannelValidationError(
                "字母表大小必須為正整數",
                {"input_sizes": list(sizes), "y_size": self.y_size, "z_size": self.z_size},
            )
        table = np.array(self.transition, dtype=float)
        expected = (*sizes, int(self.y_size), int(self.z_size))
        if table.shape != expected:
            raise DimensionMismatchError(
                "轉移機率表的維度與字母表大小不符",
                {"expected": list(expected), "actual": list(table.shape)},
            )
        table.setflags(write=False)
        object.__setattr__(self, "input_sizes", sizes)
        object.__setattr__(self, "y_size", int(self.y_size))
        object.__setattr__(self, "z_size", int(self.z_size))
        object.__setattr__(self, "transition", table)

    @property
    def num_users(self) -> int:
        return len(self.input_sizes)

    def main_channel(self) -> np.ndarray:
        """p(y|x)"""
        return self.transition.sum(axis=-1)

    def eavesdropper_channel(self) -> np.ndarray:
        """p(z|x)"""
        return self.transition.sum(axis=-2)


@dataclass(frozen=True, eq=False)
class InputDistribution:
    """單一使用者的輸入機率分佈 p(x_k)"""

    pmf: np.ndarray
    tolerance: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        pmf = np.array(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0:
            raise DimensionMismatchError("輸入分佈必須是一維非空陣列", {"shape": list(pmf.shape)})
        if np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
            raise ChannelValidationError("輸入分佈含有負值", {"pmf": pmf.tolist()})
        total = float(pmf.sum())
        if abs(total - 1.0) > self.tolerance:
            raise ChannelValidationError("輸入分佈總和不為 1", {"sum": total})
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @property
    def size(self) -> int:
        return int(self.pmf.size)


@dataclass(frozen=True)
class ChannelViolation:
    """通道驗證報告中的一筆違規"""

    kind: str  # row_sum, negative, not_finite
    index: Tuple[int, ...]
    value: float

    def describe(self) -> str:
        return f"{self.kind} at {list(self.index)}: {self.value!r}"


@dataclass(frozen=True, eq=False)
class JointPMF:
    """具名變數的聯合機率表，軸名稱如 X1, X2, Y, Z"""

    table: np.ndarray
    names: Tuple[str, ...]

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DimensionMismatchError(f"未知的變數: {name}", {"names": list(self.names)})

    def marginal(self, names: Iterable[str]) -> np.ndarray:
        keep = sorted({self.axis(n) for n in names})
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        return self.table.sum(axis=drop) if drop else self.table


@dataclass(frozen=True)
class MIBundle:
    """
    互資訊彙整

    所有值都是由四捨五入後的聯合熵組合而成的精確有理數 (單位 bits)，
    因此連鎖律等恆等式在有理數上完全成立。
    """

    num_users: int
    y_cond: Dict[UserSet, Fraction]  # I(X_S; Y | X_S̄)
    z_cond: Dict[UserSet, Fraction]  # I(X_S; Z | X_S̄)
    z_marginal: Dict[UserSet, Fraction]  # I(X_S; Z)
    y_marginal: Dict[UserSet, Fraction]  # I(X_S; Y)
    h_x: Dict[UserSet, Fraction]  # H(X_S)
    h_y: Fraction
    h_z: Fraction

    @property
    def users(self) -> Tuple[int, ...]:
        return tuple(range(1, self.num_users + 1))

    @property
    def all_users(self) -> UserSet:
        return frozenset(self.users)

    def subsets(self) -> List[UserSet]:
        return nonempty_subsets(self.num_users)

    def _lookup(self, table: Dict[UserSet, Fraction], users: Users) -> Fraction:
        key = user_set(users)
        if not key:
            return Fraction(0)
        if key not in table:
            raise DimensionMismatchError(
                "使用者集合超出範圍", {"users": sorted(key), "num_users": self.num_users}
            )
        return table[key]

    def i_y_given(self, users: Users) -> Fraction:
        """I(X_S; Y | X_S̄)"""
        return self._lookup(self.y_cond, users)

    def i_z_given(self, users: Users) -> Fraction:
        """I(X_S; Z | X_S̄)"""
        return self._lookup(self.z_cond, users)

    def i_z(self, users: Users) -> Fraction:
        """I(X_S; Z)，空集合為 0"""
        return self._lookup(self.z_marginal, users)

    def i_y(self, users: Users) -> Fraction:
        """I(X_S; Y)"""
        return self._lookup(self.y_marginal, users)

    def label(self, kind: str, users: Users) -> str:
        """互資訊符號，例如 I(X1;Y|X2)、I(X1,X2;Z)"""
        key = sorted(user_set(users))
        rest = [k for k in self.users if k not in key]
        lhs = ",".join(f"X{k}" for k in key)
        if kind == "y_cond":
            cond = ",".join(f"X{k}" for k in rest)
            return f"I({lhs};Y|{cond})" if cond else f"I({lhs};Y)"
        if kind == "z_cond":
            cond = ",".join(f"X{k}" for k in rest)
            return f"I({lhs};Z|{cond})" if cond else f"I({lhs};Z)"
        if kind == "z_marginal":
            return f"I({lhs};Z)"
        if kind == "y_marginal":
            return f"I({lhs};Y)"
        if kind == "h_x":
            return f"H({lhs})"
        raise KeyError(kind)

    def as_floats(self) -> Dict[str, float]:
        """供匯出使用的浮點數檢視"""
        values: Dict[str, float] = {}
        for subset in self.subsets():
            for kind, table in (
                ("y_cond", self.y_cond),
                ("z_cond", self.z_cond),
                ("z_marginal", self.z_marginal),
                ("y_marginal", self.y_marginal),
                ("h_x", self.h_x),
            ):
                values.setdefault(self.label(kind, subset), float(table[subset]))
        values["H(Y)"] = float(self.h_y)
        values["H(Z)"] = float(self.h_z)
        return values

