"""
速率區域建構

由 MIBundle 建立各種速率區域多面體。右側的 [·]⁺ 截斷在建構不等式前完成；
ε 以有理數從右側扣除。
"""

from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.config import settings
from app.core.errors import DimensionMismatchError, InvalidInputError, PreconditionError, UserLimitError
from app.models.channel import DMWiretapChannel, InputDistribution, MIBundle, UserSet
from app.models.polytope import LinearInequality, Polytope, RateTuple
from app.models.region import RegionKind
from app.services import polytope as poly
from app.services.information import mi_bundle, rationalize
from app.services.logging import logging_service

COMPONENT = "regions"

RATE_AXES = ("R1s", "R1o", "R2s", "R2o")
GUARD_AXES = ("R1g", "R2g")
SPLIT_AXES = ("R1x", "R2x")


def rate_axes(num_users: int, parts: Sequence[str] = ("s", "o")) -> Tuple[str, ...]:
    return tuple(f"R{k}{part}" for k in range(1, num_users + 1) for part in parts)


def clip(value: Fraction) -> Fraction:
    """[x]⁺"""
    return value if value > 0 else Fraction(0)


def _eps(eps: float) -> Fraction:
    value = rationalize(eps)
    if value < 0:
        raise InvalidInputError("ε 不可為負", {"eps": float(eps)})
    return value


def _require_users(mi: MIBundle, expected: int) -> None:
    if mi.num_users != expected:
        raise DimensionMismatchError(
            f"此區域需要 {expected} 個使用者", {"num_users": mi.num_users}
        )


def _sum_row(
    parts: Dict[str, int], users: Iterable[int], rhs: Fraction, label: str, sign: int = 1
) -> LinearInequality:
    """Σ_{k∈S} Σ_part sign·R_k^part ≤ rhs，並產生可讀名稱"""
    coefficients = {
        f"R{k}{part}": sign * weight for k in sorted(users) for part, weight in parts.items()
    }
    relation = "<=" if sign > 0 else ">="
    return LinearInequality.of(coefficients, rhs, f"{' + '.join(coefficients)} {relation} {label}")


def _secret_cap(mi: MIBundle, subset: UserSet, eps: Fraction) -> Fraction:
    return clip(mi.i_y_given(subset) - mi.i_z(subset) - eps)


def epsilon_strict_region(mi: MIBundle, eps: float = 0.0) -> Polytope:
    """
    三族不等式 (兩使用者)，每個右側先扣除 ε 再截斷

        Σ_S (Rks + Rko) ≤ [I(X_S;Y|X_S̄) − ε]⁺
        Σ_S Rks ≤ [I(X_S;Y|X_S̄) − I(X_S;Z) − ε]⁺
        R1s + R2s + Rko ≤ [I(X1,X2;Y) − I(X_k̄;Z) − ε]⁺
    """
    _require_users(mi, 2)
    shrink = _eps(eps)
    rows: List[LinearInequality] = []
    for subset in mi.subsets():
        rows.append(
            _sum_row({"s": 1, "o": 1}, subset, clip(mi.i_y_given(subset) - shrink), mi.label("y_cond", subset))
        )
    for subset in mi.subsets():
        label = f"[{mi.label('y_cond', subset)} - {mi.label('z_marginal', subset)}]+"
        rows.append(_sum_row({"s": 1}, subset, _secret_cap(mi, subset, shrink), label))
    everyone = mi.all_users
    for k in mi.users:
        other = everyone - {k}
        rhs = clip(mi.i_y_given(everyone) - mi.i_z(other) - shrink)
        label = f"[{mi.label('y_cond', everyone)} - {mi.label('z_marginal', other)}]+"
        rows.append(
            LinearInequality.of({"R1s": 1, "R2s": 1, f"R{k}o": 1}, rhs, f"R1s + R2s + R{k}o <= {label}")
        )
    return Polytope.build(RATE_AXES, rows)


def region_theorem1(mi: MIBundle) -> Polytope:
    """修正後的可達區域 ℛ"""
    return epsilon_strict_region(mi, 0.0)


def region_lemma1(mi: MIBundle, num_users: Optional[int] = None) -> Polytope:
    """
    K 使用者區域：對每個非空 S 與 S₁ ⊆ S

        Σ_{k∈S} Rks + Σ_{k∈S∖S₁} Rko ≤ [I(X_S;Y|X_S̄) − I(X_{S₁};Z)]⁺
    """
    k_users = mi.num_users if num_users is None else num_users
    if k_users < 1:
        raise InvalidInputError("使用者數量必須至少為 1", {"num_users": k_users})
    if k_users > settings.MAX_USERS:
        raise UserLimitError("使用者數量超過上限", {"num_users": k_users, "max": settings.MAX_USERS})
    _require_users(mi, k_users)
    rows: List[LinearInequality] = []
    for subset in mi.subsets():
        members = sorted(subset)
        for size in range(len(members) + 1):
            for chosen in combinations(members, size):
                inner = frozenset(chosen)
                coefficients = {f"R{k}s": 1 for k in members}
                coefficients.update({f"R{k}o": 1 for k in members if k not in inner})
                rhs = clip(mi.i_y_given(subset) - mi.i_z(inner))
                label = mi.label("y_cond", subset)
                if inner:
                    label = f"[{label} - {mi.label('z_marginal', inner)}]+"
                terms = " + ".join(coefficients)
                rows.append(LinearInequality.of(coefficients, rhs, f"{terms} <= {label}"))
    return Polytope.build(rate_axes(k_users), rows)


def region_tekin_r1(mi: MIBundle) -> Polytope:
    """ℛ₁：只有前兩族不等式"""
    _require_users(mi, 2)
    rows = []
    for subset in mi.subsets():
        rows.append(_sum_row({"s": 1, "o": 1}, subset, mi.i_y_given(subset), mi.label("y_cond", subset)))
    for subset in mi.subsets():
        label = f"[{mi.label('y_cond', subset)} - {mi.label('z_marginal', subset)}]+"
        rows.append(_sum_row({"s": 1}, subset, _secret_cap(mi, subset, Fraction(0)), label))
    return Polytope.build(RATE_AXES, rows)


def region_r2(mi: MIBundle) -> Polytope:
    """ℛ₂：公開速率受 I(X_S;Z|X_S̄) 限制"""
    _require_users(mi, 2)
    rows = []
    for subset in mi.subsets():
        rows.append(_sum_row({"s": 1, "o": 1}, subset, mi.i_y_given(subset), mi.label("y_cond", subset)))
    for subset in mi.subsets():
        label = f"[{mi.label('y_cond', subset)} - {mi.label('z_marginal', subset)}]+"
        rows.append(_sum_row({"s": 1}, subset, _secret_cap(mi, subset, Fraction(0)), label))
    for subset in mi.subsets():
        rows.append(_sum_row({"o": 1}, subset, mi.i_z_given(subset), mi.label("z_cond", subset)))
    return Polytope.build(RATE_AXES, rows)


def lifted_region(mi: MIBundle, eps: float = 0.0) -> Polytope:
    """
    含保護速率的六維區域 (R1s, R1o, R2s, R2o, R1g, R2g)

        Σ_S (Rks + Rko + Rkg) ≤ I(X_S;Y|X_S̄) − ε
        Σ_S (Rko + Rkg) ≥ I(X_S;Z)
    """
    _require_users(mi, 2)
    shrink = _eps(eps)
    rows = []
    for subset in mi.subsets():
        rows.append(
            _sum_row(
                {"s": 1, "o": 1, "g": 1}, subset, mi.i_y_given(subset) - shrink,
                f"{mi.label('y_cond', subset)} - eps",
            )
        )
    for subset in mi.subsets():
        rows.append(
            _sum_row({"o": 1, "g": 1}, subset, -mi.i_z(subset), mi.label("z_marginal", subset), sign=-1)
        )
    return Polytope.build(RATE_AXES + GUARD_AXES, rows)


def project_lifted_region(mi: MIBundle, eps: float = 0.0) -> Polytope:
    """將含保護速率的區域投影回四個速率軸"""
    return poly.fm_eliminate_all(lifted_region(mi, eps), GUARD_AXES)


def appendix_system(mi: MIBundle) -> Polytope:
    """
    速率分割系統 (R1s, R1o, R2s, R2o, R1x, R2x)

        Σ_S (Rks + Rko + Rkx) ≤ I(X_S;Y|X_S̄)
        Σ_S (Rko + Rkx) ≤ I(X_S;Z|X_S̄)，S = 𝒦 時取等號
        Σ_S Rks ≤ [I(X_S;Y|X_S̄) − I(X_S;Z)]⁺
        Rkx ≥ 0
    """
    _require_users(mi, 2)
    rows = []
    for subset in mi.subsets():
        rows.append(
            _sum_row({"s": 1, "o": 1, "x": 1}, subset, mi.i_y_given(subset), mi.label("y_cond", subset))
        )
    for subset in mi.subsets():
        rows.append(_sum_row({"o": 1, "x": 1}, subset, mi.i_z_given(subset), mi.label("z_cond", subset)))
    everyone = mi.all_users
    rows.append(
        _sum_row({"o": 1, "x": 1}, everyone, -mi.i_z_given(everyone), mi.label("z_cond", everyone), sign=-1)
    )
    for subset in mi.subsets():
        label = f"[{mi.label('y_cond', subset)} - {mi.label('z_marginal', subset)}]+"
        rows.append(_sum_row({"s": 1}, subset, _secret_cap(mi, subset, Fraction(0)), label))
    return Polytope.build(RATE_AXES + SPLIT_AXES, rows)


def eliminate_splitting_rates(mi: MIBundle) -> Polytope:
    return poly.fm_eliminate_all(appendix_system(mi), SPLIT_AXES)


def secrecy_gaps(mi: MIBundle) -> Dict[UserSet, Fraction]:
    """I(X_S;Y|X_S̄) − I(X_S;Z)"""
    return {subset: mi.i_y_given(subset) - mi.i_z(subset) for subset in mi.subsets()}


def has_positive_gaps(mi: MIBundle, eps: float = 0.0) -> bool:
    shrink = _eps(eps)
    return all(gap > shrink for gap in secrecy_gaps(mi).values())


def guard_rate_slice(mi: MIBundle, t: RateTuple, eps: float = 0.0) -> List[Tuple[Fraction, Fraction]]:
    """給定速率組時 (R1g, R2g) 的可行多邊形頂點；空清單表示不存在保護速率"""
    fixed = {axis: t.exact_value(axis) if t.is_exact else t[axis] for axis in RATE_AXES}
    return poly.slice_polygon(lifted_region(mi, eps), GUARD_AXES, fixed)


def build_region(kind: RegionKind, mi: MIBundle, eps: float = 0.0) -> Polytope:
    """依區域種類建立多面體"""
    kind = RegionKind(kind)
    if kind is RegionKind.THEOREM_ONE:
        return region_theorem1(mi)
    if kind is RegionKind.LEMMA_ONE_K:
        return region_lemma1(mi)
    if kind is RegionKind.TEKIN_YENER_R1:
        return region_tekin_r1(mi)
    if kind is RegionKind.DERIVED_R2:
        return region_r2(mi)
    if kind is RegionKind.LIFTED_WITH_GUARD_RATES:
        return lifted_region(mi, eps)
    return epsilon_strict_region(mi, eps)


def hull_over_inputs(
    ch: DMWiretapChannel,
    family: Sequence[Sequence[InputDistribution]],
    kind: RegionKind,
    eps: float = 0.0,
) -> Polytope:
    """對有限輸入分佈族取各區域聯集的凸包"""
    if not family:
        raise PreconditionError("輸入分佈族不可為空")
    members = [build_region(kind, mi_bundle(ch, inputs), eps) for inputs in family]
    logging_service.info(
        COMPONENT, "Hull over input family", {"kind": RegionKind(kind).value, "members": len(members)}
    )
    return poly.convex_hull_union(members)
