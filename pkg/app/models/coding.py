import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from app.core.errors import CodebookLimitError, InvalidInputError, PreconditionError, ResourceLimitError
from app.models.channel import InputDistribution

# 2^{nR} 取整時的容許誤差
_COUNT_SLACK = 1e-9


def message_count(n: int, rate: float) -> int:
    """floor(2^{nR})，至少為 1"""
    return max(1, int(math.floor(2.0 ** (n * rate) + _COUNT_SLACK)))


@dataclass(frozen=True)
class UserRates:
    """單一使用者的 (機密, 公開, 保護) 速率，單位 bits/use"""

    secret: float
    open: float = 0.0
    guard: float = 0.0

    def __post_init__(self):
        if min(self.secret, self.open, self.guard) < 0:
            raise InvalidInputError("速率不可為負", {"rates": [self.secret, self.open, self.guard]})


@dataclass(frozen=True)
class SubcodebookLayout:
    """
    巢狀子碼書配置

    使用者碼書以 (m, w, j) 編排為 l = (m·|W| + w)·|J| + j，
    子碼書 m 佔連續區段，且被 |W| 個大小 |J| 的 bin 平均分割。
    """

    num_secret: int
    num_open: int
    num_guard: int

    @property
    def size(self) -> int:
        return self.num_secret * self.num_open * self.num_guard

    @property
    def subcodebook_size(self) -> int:
        return self.num_open * self.num_guard

    def index(self, m: int, w: int, j: int) -> int:
        if not (0 <= m < self.num_secret and 0 <= w < self.num_open and 0 <= j < self.num_guard):
            raise InvalidInputError(
                "訊息索引超出範圍",
                {"m": m, "w": w, "j": j, "layout": [self.num_secret, self.num_open, self.num_guard]},
            )
        return (m * self.num_open + w) * self.num_guard + j

    def split(self, index: int) -> Tuple[int, int, int]:
        if not 0 <= index < self.size:
            raise InvalidInputError("碼字索引超出範圍", {"index": index, "size": self.size})
        rest, j = divmod(index, self.num_guard)
        m, w = divmod(rest, self.num_open)
        return m, w, j

    def subcodebook(self, m: int) -> range:
        start = self.index(m, 0, 0)
        return range(start, start + self.subcodebook_size)

    def bin(self, m: int, w: int) -> range:
        start = self.index(m, w, 0)
        return range(start, start + self.num_guard)

    def effective_rates(self, n: int) -> UserRates:
        return UserRates(
            secret=math.log2(self.num_secret) / n,
            open=math.log2(self.num_open) / n,
            guard=math.log2(self.num_guard) / n,
        )


@dataclass(frozen=True)
class CodeConfig:
    """隨機碼設定"""

    n: int
    rates: Tuple[UserRates, ...]
    eps: float
    seed: int = 0
    max_blocklength: int = field(default=10, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("區塊長度必須至少為 1", {"n": self.n})
        if self.n > self.max_blocklength:
            raise ResourceLimitError(
                "區塊長度超過上限", {"n": self.n, "max": self.max_blocklength}
            )
        if len(self.rates) != 2:
            raise PreconditionError("模擬器僅支援兩個使用者", {"users": len(self.rates)})
        if not self.eps > 0:
            raise InvalidInputError("典型性參數必須為正", {"eps": self.eps})
        object.__setattr__(self, "rates", tuple(self.rates))

    def layouts(self) -> Tuple[SubcodebookLayout, ...]:
        return tuple(
            SubcodebookLayout(
                num_secret=message_count(self.n, r.secret),
                num_open=message_count(self.n, r.open),
                num_guard=message_count(self.n, r.guard),
            )
            for r in self.rates
        )

    def effective_rates(self) -> Tuple[UserRates, ...]:
        return tuple(layout.effective_rates(self.n) for layout in self.layouts())

    def check_codebook_size(self, max_pairs: int) -> None:
        sizes = [layout.size for layout in self.layouts()]
        if math.prod(sizes) > max_pairs:
            raise CodebookLimitError("碼書大小超過上限", {"sizes": sizes, "max_pairs": max_pairs})


@dataclass(frozen=True, eq=False)
class Codebook:
    """兩使用者的隨機碼書，codewords[k] 的形狀為 (|ℒ_k|, n)，inputs 為產生碼字的輸入分佈"""

    n: int
    layouts: Tuple[SubcodebookLayout, ...]
    codewords: Tuple[np.ndarray, ...]
    seed: int
    inputs: Tuple[InputDistribution, ...]

    def __post_init__(self):
        frozen = []
        for layout, words in zip(self.layouts, self.codewords):
            array = np.array(words, dtype=np.int64)
            if array.shape != (layout.size, self.n):
                raise InvalidInputError(
                    "碼字陣列維度不符", {"expected": [layout.size, self.n], "actual": list(array.shape)}
                )
            array.setflags(write=False)
            frozen.append(array)
        object.__setattr__(self, "codewords", tuple(frozen))
        object.__setattr__(self, "inputs", tuple(self.inputs))

    def codeword(self, user: int, index: int) -> np.ndarray:
        return self.codewords[user][index]


@dataclass(frozen=True)
class LeakageReport:
    """固定碼書下以窮舉計算的洩漏量 (bits per use 與 bits)"""

    n: int
    rate: float  # (1/n) I(M1,M2;Z^n)
    user_rates: Tuple[float, ...]  # (1/n) I(Mk;Z^n)
    subset_rates: Dict[str, float]
    mutual_information: float
    message_entropy: float
    entropy_given_z: float  # H(L1,L2|Z^n)
    entropy_given_mz: float  # H(L1,L2|M1,M2,Z^n)
    chain_residual: float
    superadditivity_margin: float
    total_probability: float


@dataclass(frozen=True)
class NStatisticSummary:
    samples: int
    mean: float
    variance: float
    typical_fraction: float
    maximum: int


@dataclass(frozen=True)
class Theorem3Bounds:
    delta: float
    delta_users: Tuple[float, ...]
    delta1: float
    mean_bound: float
    var_bound: float
    tail_bound: float


@dataclass(frozen=True)
class TypicalityProbability:
    """條件典型機率 p1 與其上界"""

    probability: float
    bound: float
    expected_count: float


@dataclass(frozen=True)
class SimResult:
    seed: int
    n: int
    trials: int
    errors: int
    error_probability: float
    requested_rates: Tuple[UserRates, ...]
    effective_rates: Tuple[UserRates, ...]
    leakage: Optional[LeakageReport]
    n_statistic: Optional[NStatisticSummary]
    bounds: Theorem3Bounds
    equivocation_margin: Optional[float]
