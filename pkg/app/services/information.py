"""
通道與互資訊服務

提供通道驗證、聯合分佈、熵與互資訊計算 (以 2 為底)，
以及 MIBundle 的建立與隨機通道取樣。
"""

from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.core.errors import (
    DimensionMismatchError,
    InternalInvariantError,
    OverlappingVariablesError,
    UserLimitError,
)
from app.models.channel import (
    ChannelViolation,
    DMWiretapChannel,
    InputDistribution,
    JointPMF,
    MIBundle,
    nonempty_subsets,
)
from app.services.logging import logging_service

COMPONENT = "channel"


def validate_channel(
    ch: DMWiretapChannel, tolerance: Optional[float] = None
) -> List[ChannelViolation]:
    """
    檢查轉移機率表

    Returns:
        List[ChannelViolation]: 違規清單，空清單代表通道有效
    """
    tol = settings.PROBABILITY_TOLERANCE if tolerance is None else tolerance
    violations: List[ChannelViolation] = []
    table = ch.transition
    for x in np.ndindex(*ch.input_sizes):
        row = table[x]
        if not np.all(np.isfinite(row)):
            violations.append(ChannelViolation("not_finite", tuple(x), float("nan")))
            continue
        for yz in zip(*np.nonzero(row < 0)):
            violations.append(
                ChannelViolation("negative", tuple(x) + tuple(int(i) for i in yz), float(row[yz]))
            )
        total = float(row.sum())
        if abs(total - 1.0) > tol:
            violations.append(ChannelViolation("row_sum", tuple(x), total))
    return violations


def variable_names(num_users: int) -> Tuple[str, ...]:
    return tuple(f"X{k}" for k in range(1, num_users + 1)) + ("Y", "Z")


def joint_distribution(ch: DMWiretapChannel, px: Sequence[InputDistribution]) -> JointPMF:
    """p(x_1,...,x_K,y,z) = Π_k p(x_k) · p(y,z|x)"""
    if len(px) != ch.num_users:
        raise DimensionMismatchError(
            "輸入分佈數量與使用者數量不符", {"users": ch.num_users, "inputs": len(px)}
        )
    sizes = [dist.size for dist in px]
    if tuple(sizes) != ch.input_sizes:
        raise DimensionMismatchError(
            "輸入分佈大小與字母表不符", {"input_sizes": list(ch.input_sizes), "pmf_sizes": sizes}
        )
    table = np.array(ch.transition, dtype=float)
    for k, dist in enumerate(px):
        shape = [1] * table.ndim
        shape[k] = dist.size
        table = table * dist.pmf.reshape(shape)
    table.setflags(write=False)
    return JointPMF(table=table, names=variable_names(ch.num_users))


def entropy(joint: JointPMF, names: Iterable[str]) -> float:
    """H(V)，採用 0·log0 = 0"""
    names = list(names)
    if not names:
        return 0.0
    p = joint.marginal(names).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def clamp_nonnegative(value, tolerance: float, label: str):
    """將 −tolerance 以內的負值截為 0，更負則視為不變量違反"""
    if value >= 0:
        return value
    if value >= -tolerance:
        return type(value)(0)
    raise InternalInvariantError(f"互資訊為負: {label}", {"value": float(value)})


def mutual_information(
    joint: JointPMF,
    a: Iterable[str],
    b: Iterable[str],
    c: Iterable[str] = (),
    method: str = "entropy",
    tolerance: Optional[float] = None,
) -> float:
    """
    I(A;B|C)，單位 bits

    Args:
        joint: 聯合分佈
        a, b, c: 變數名稱集合 (兩兩不相交)
        method: "entropy" 使用熵恆等式，"divergence" 使用直接雙重加總
        tolerance: 負值截斷容許誤差
    """
    a, b, c = set(a), set(b), set(c)
    if a & b or a & c or b & c:
        raise OverlappingVariablesError(
            "變數集合必須互不相交", {"a": sorted(a), "b": sorted(b), "c": sorted(c)}
        )
    tol = settings.MI_TOLERANCE if tolerance is None else tolerance
    if method == "entropy":
        value = (
            entropy(joint, a | c)
            + entropy(joint, b | c)
            - entropy(joint, a | b | c)
            - entropy(joint, c)
        )
    elif method == "divergence":
        value = _divergence_form(joint, a, b, c)
    else:
        raise ValueError(f"unknown method: {method}")
    return float(clamp_nonnegative(value, tol, f"I({sorted(a)};{sorted(b)}|{sorted(c)})"))


def _divergence_form(joint: JointPMF, a: set, b: set, c: set) -> float:
    """Σ p(a,b,c) log2 [p(a,b,c) p(c) / (p(a,c) p(b,c))]"""
    order = sorted(a | b | c, key=joint.axis)
    p_abc = joint.marginal(order)
    positions = {name: i for i, name in enumerate(order)}

    def keep(names: set) -> np.ndarray:
        drop = tuple(positions[n] for n in order if n not in names)
        return p_abc.sum(axis=drop, keepdims=True) if drop else p_abc

    p_ac, p_bc, p_c = keep(a | c), keep(b | c), keep(c)
    p_ac, p_bc, p_c = (np.broadcast_to(t, p_abc.shape) for t in (p_ac, p_bc, p_c))
    mask = p_abc > 0
    ratio = p_abc[mask] * p_c[mask] / (p_ac[mask] * p_bc[mask])
    return float(np.sum(p_abc[mask] * np.log2(ratio)))


def rationalize(value: float, denominator: Optional[int] = None) -> Fraction:
    """四捨五入至固定分母的有理數"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    scale = denominator or settings.RATIONAL_DENOMINATOR
    return Fraction(round(float(value) * scale), scale)


def mi_bundle(
    ch: DMWiretapChannel,
    px: Sequence[InputDistribution],
    denominator: Optional[int] = None,
    tolerance: Optional[float] = None,
    max_users: Optional[int] = None,
) -> MIBundle:
    """
    建立互資訊彙整

    先計算 X_T、(X_T,Y)、(X_T,Z) 的聯合熵並四捨五入為有理數，
    再以熵的線性組合得到每個互資訊，因此各恆等式在有理數上精確成立。
    """
    limit = settings.MAX_USERS if max_users is None else max_users
    if ch.num_users > limit:
        raise UserLimitError("使用者數量超過上限", {"users": ch.num_users, "max": limit})
    tol = settings.MI_TOLERANCE if tolerance is None else tolerance
    joint = joint_distribution(ch, px)
    users = tuple(range(1, ch.num_users + 1))
    everyone = frozenset(users)

    cache: Dict[FrozenSet[str], Fraction] = {}

    def h(subset: Iterable[int], extra: Tuple[str, ...] = ()) -> Fraction:
        names = frozenset(f"X{k}" for k in subset) | frozenset(extra)
        if names not in cache:
            cache[names] = rationalize(entropy(joint, names), denominator)
        return cache[names]

    y_cond, z_cond, z_marginal, y_marginal, h_x = {}, {}, {}, {}, {}
    for subset in nonempty_subsets(ch.num_users):
        rest = everyone - subset
        label = "".join(str(k) for k in sorted(subset))
        y_cond[subset] = clamp_nonnegative(
            h(rest, ("Y",)) + h(everyone) - h(everyone, ("Y",)) - h(rest), tol, f"I(X{label};Y|rest)"
        )
        z_cond[subset] = clamp_nonnegative(
            h(rest, ("Z",)) + h(everyone) - h(everyone, ("Z",)) - h(rest), tol, f"I(X{label};Z|rest)"
        )
        z_marginal[subset] = clamp_nonnegative(
            h(subset) + h((), ("Z",)) - h(subset, ("Z",)), tol, f"I(X{label};Z)"
        )
        y_marginal[subset] = clamp_nonnegative(
            h(subset) + h((), ("Y",)) - h(subset, ("Y",)), tol, f"I(X{label};Y)"
        )
        h_x[subset] = h(subset)
        if z_cond[subset] < z_marginal[subset] - Fraction(tol):
            raise InternalInvariantError(
                "條件互資訊小於無條件互資訊",
                {"users": sorted(subset), "conditional": float(z_cond[subset]),
                 "marginal": float(z_marginal[subset])},
            )

    bundle = MIBundle(
        num_users=ch.num_users,
        y_cond=y_cond,
        z_cond=z_cond,
        z_marginal=z_marginal,
        y_marginal=y_marginal,
        h_x=h_x,
        h_y=h((), ("Y",)),
        h_z=h((), ("Z",)),
    )
    logging_service.debug(
        COMPONENT,
        "MI bundle computed",
        {"users": ch.num_users, "I(X;Y)": float(y_cond[everyone]), "I(X;Z)": float(z_marginal[everyone])},
    )
    return bundle


# 通道建構與取樣


def deterministic_channel(
    input_sizes: Sequence[int],
    y_size: int,
    z_size: int,
    y_of: Callable[..., int],
    z_of: Callable[..., int],
) -> DMWiretapChannel:
    """由 y = f(x)、z = g(x) 建立確定性通道"""
    table = np.zeros((*input_sizes, y_size, z_size))
    for x in np.ndindex(*input_sizes):
        table[x + (y_of(*x), z_of(*x))] = 1.0
    return DMWiretapChannel(tuple(input_sizes), y_size, z_size, table)


def xor_witness_channel() -> DMWiretapChannel:
    """Y = X1 ⊕ X2、Z = X1 的二元通道 (反例見證)"""
    return deterministic_channel((2, 2), 2, 2, lambda a, b: a ^ b, lambda a, b: a)


def seeded_rng(*keys: int) -> np.random.Generator:
    """由 (seed, stream, index, ...) 建立獨立且可重現的亂數流"""
    return np.random.default_rng([int(key) % 2**64 for key in keys])


def uniform_inputs(input_sizes: Sequence[int]) -> List[InputDistribution]:
    return [InputDistribution(np.full(size, 1.0 / size)) for size in input_sizes]


def sample_inputs(rng: np.random.Generator, input_sizes: Sequence[int]) -> List[InputDistribution]:
    return [InputDistribution(_normalize(rng.dirichlet(np.ones(size)))) for size in input_sizes]


def sample_channel(
    rng: np.random.Generator, input_sizes: Sequence[int], y_size: int, z_size: int
) -> DMWiretapChannel:
    """每個輸入組的 (y,z) 列取自對稱 Dirichlet(1)"""
    rows = int(np.prod(input_sizes))
    table = rng.dirichlet(np.ones(y_size * z_size), size=rows)
    table = _normalize(table).reshape(*input_sizes, y_size, z_size)
    return DMWiretapChannel(tuple(input_sizes), y_size, z_size, table)


def sample_degraded_channel(
    rng: np.random.Generator, input_sizes: Sequence[int], y_size: int, z_size: int
) -> DMWiretapChannel:
    """p(y,z|x) = p(y|x) p(z|y)，竊聽者為主通道的退化版本"""
    rows = int(np.prod(input_sizes))
    main = _normalize(rng.dirichlet(np.ones(y_size), size=rows)).reshape(*input_sizes, y_size)
    degrade = _normalize(rng.dirichlet(np.ones(z_size), size=y_size))
    table = main[..., :, None] * degrade
    return DMWiretapChannel(tuple(input_sizes), y_size, z_size, table)


def _normalize(array: np.ndarray) -> np.ndarray:
    return array / array.sum(axis=-1, keepdims=True)
