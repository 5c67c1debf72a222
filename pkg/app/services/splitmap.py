"""
速率分割映射

將 ℛ 中的速率組依 (R1o, R2o) 分成六類，套用各類別的分割轉換映入 ℛ₂，
並建構反例速率組與搜尋滿足缺口條件的通道。
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.config import settings
from app.core.errors import InternalInvariantError, NotInRegionError, PreconditionError
from app.models.channel import DMWiretapChannel, InputDistribution, MIBundle
from app.models.polytope import RateTuple
from app.models.region import Category, InequalityCheck, SearchResult, TransformReport
from app.services import polytope as poly
from app.services.information import (
    mi_bundle,
    rationalize,
    sample_channel,
    sample_inputs,
    seeded_rng,
    uniform_inputs,
)
from app.services.logging import logging_service
from app.services.regions import RATE_AXES, clip, region_r2, region_tekin_r1, region_theorem1

COMPONENT = "splitmap"

Candidate = Tuple[DMWiretapChannel, Sequence[InputDistribution]]


def _exact(t: RateTuple) -> Dict[str, Fraction]:
    if t.is_exact:
        return {axis: t.exact_value(axis) for axis in RATE_AXES}
    return {axis: rationalize(t[axis]) for axis in RATE_AXES}


def _terms(mi: MIBundle) -> Dict[str, Fraction]:
    return {
        "c1": mi.i_z_given(1),
        "c2": mi.i_z_given(2),
        "z1": mi.i_z(1),
        "z2": mi.i_z(2),
        "z12": mi.i_z((1, 2)),
    }


def _require_in_region(t: RateTuple, mi: MIBundle) -> Dict[str, Fraction]:
    rates = _exact(t)
    point = RateTuple.from_fractions(RATE_AXES, [rates[a] for a in RATE_AXES])
    if not poly.contains_point(region_theorem1(mi), point):
        raise NotInRegionError("速率組不在區域 ℛ 內", {"tuple": t.as_dict()})
    return rates


def _category_rules(q: Dict[str, Fraction]) -> List[Tuple[Category, Callable[[Fraction, Fraction], bool]]]:
    c1, c2, z1, z2, z12 = q["c1"], q["c2"], q["z1"], q["z2"], q["z12"]
    return [
        (Category.ONE, lambda o1, o2: o1 <= c1 and o2 <= c2 and o1 + o2 <= z12),
        (Category.TWO, lambda o1, o2: o1 > c1 and o2 <= z2),
        (Category.THREE, lambda o1, o2: z2 < o2 <= c2 and o1 + o2 > z12),
        (Category.FOUR, lambda o1, o2: o1 <= z1 and o2 > c2),
        (Category.FIVE, lambda o1, o2: z1 < o1 <= c1 and o2 > c2),
        (Category.SIX, lambda o1, o2: o1 > c1 and o2 > c2),
    ]


def classify(t: RateTuple, mi: MIBundle) -> Category:
    """
    依公開速率分類；邊界上同時符合多類時取編號最小者

    Raises:
        NotInRegionError: 速率組不在 ℛ 內
    """
    rates = _require_in_region(t, mi)
    o1, o2 = rates["R1o"], rates["R2o"]
    for category, rule in _category_rules(_terms(mi)):
        if rule(o1, o2):
            return category
    raise InternalInvariantError(
        "分類不完整", {"R1o": float(o1), "R2o": float(o2), **{k: float(v) for k, v in _terms(mi).items()}}
    )


def _apply(category: Category, rates: Dict[str, Fraction], q: Dict[str, Fraction]) -> Dict[str, Fraction]:
    s1, o1, s2, o2 = rates["R1s"], rates["R1o"], rates["R2s"], rates["R2o"]
    out = dict(rates)
    if category is Category.TWO:
        out["R1o"], out["R1s"] = q["c1"], s1 + o1 - q["c1"]
    elif category is Category.THREE:
        out["R1o"], out["R1s"] = q["z12"] - o2, s1 + o1 + o2 - q["z12"]
    elif category is Category.FOUR:
        out["R2o"], out["R2s"] = q["c2"], s2 + o2 - q["c2"]
    elif category is Category.FIVE:
        out["R2o"], out["R2s"] = q["z12"] - o1, o1 + s2 + o2 - q["z12"]
    elif category is Category.SIX:
        out["R1o"], out["R1s"] = q["c1"], s1 + o1 - q["c1"]
        out["R2o"], out["R2s"] = q["z2"], s2 + o2 - q["z2"]
    return out


def transform(t: RateTuple, mi: MIBundle, tolerance: Optional[float] = None) -> TransformReport:
    """
    將速率組轉換進 ℛ₂ 並逐條驗證

    報表列出 ℛ₂ 每條不等式的 slack、各使用者總速率守恆與非負檢查。
    """
    tol = settings.CONTAINMENT_TOLERANCE if tolerance is None else tolerance
    category = classify(t, mi)
    rates = _exact(t)
    result = _apply(category, rates, _terms(mi))

    checks: List[InequalityCheck] = []
    for axis in RATE_AXES:
        checks.append(InequalityCheck(f"{axis} >= 0", float(result[axis]), result[axis] >= 0))
    for k in (1, 2):
        drift = (rates[f"R{k}s"] + rates[f"R{k}o"]) - (result[f"R{k}s"] + result[f"R{k}o"])
        checks.append(InequalityCheck(f"user {k} total conserved", float(drift), drift == 0))
    for inequality in region_r2(mi).inequalities:
        slack = inequality.slack(result)
        checks.append(InequalityCheck(inequality.name or inequality.describe(), float(slack), slack >= -tol))

    verified = all(check.passed for check in checks)
    output = None
    if all(result[axis] >= 0 for axis in RATE_AXES):
        output = RateTuple.from_fractions(RATE_AXES, [result[a] for a in RATE_AXES])
    if not verified:
        logging_service.warning(
            COMPONENT,
            "Transform failed verification",
            {"category": int(category), "failed": [c.name for c in checks if not c.passed]},
        )
    return TransformReport(
        input=t, category=category, output=output, verified=verified, checks=tuple(checks)
    )


def split_vertices(mi: MIBundle) -> List[TransformReport]:
    """轉換 ℛ 的每個頂點"""
    return [transform(vertex, mi) for vertex in poly.vertices(region_theorem1(mi))]


def counterexample_tuple(mi: MIBundle) -> RateTuple:
    """C = ([I(X1;Y|X2) − I(X1;Z)]⁺, 0, [I(X2;Y) − I(X2;Z|X1)]⁺, I(X1,X2;Z))"""
    values = (
        clip(mi.i_y_given(1) - mi.i_z(1)),
        Fraction(0),
        clip(mi.i_y(2) - mi.i_z_given(2)),
        mi.i_z((1, 2)),
    )
    return RateTuple.from_fractions(RATE_AXES, values)


def check_gap_condition(mi: MIBundle, tolerance: Optional[float] = None) -> bool:
    """I(X2;Y) + I(X1;Z) ≤ I(X2;Y|X1) 且 I(X1,X2;Z) > I(X2;Z|X1)"""
    tol = settings.MI_TOLERANCE if tolerance is None else tolerance
    first = float(mi.i_y(2)) + float(mi.i_z(1)) <= float(mi.i_y_given(2)) + tol
    second = float(mi.i_z((1, 2))) > float(mi.i_z_given(2)) + tol
    return first and second


def _candidate(
    trial: int, seed: int, input_sizes: Sequence[int], y_size: int, z_size: int
) -> Candidate:
    rng = seeded_rng(seed, trial)
    channel = sample_channel(rng, input_sizes, y_size, z_size)
    inputs = uniform_inputs(input_sizes) if trial % 2 == 0 else sample_inputs(rng, input_sizes)
    return channel, inputs


def _evaluate(trial: int, candidate: Candidate) -> Optional[SearchResult]:
    channel, inputs = candidate
    bundle = mi_bundle(channel, inputs)
    if not check_gap_condition(bundle):
        return None
    point = counterexample_tuple(bundle)
    in_r1 = poly.contains_point(region_tekin_r1(bundle), point)
    in_r = poly.contains_point(region_theorem1(bundle), point)
    if not in_r1 or in_r:
        logging_service.debug(
            COMPONENT, "Gap condition without separation", {"trial": trial, "in_r1": in_r1, "in_r": in_r}
        )
        return None
    return SearchResult(
        trial=trial,
        channel=channel,
        inputs=tuple(inputs),
        bundle=bundle,
        counterexample=point,
        in_tekin_region=in_r1,
        in_theorem_region=in_r,
    )


def search_counterexample(
    input_sizes: Sequence[int],
    y_size: int,
    z_size: int,
    trials: int,
    seed: int,
    planted: Optional[Candidate] = None,
    workers: Optional[int] = None,
) -> Optional[SearchResult]:
    """
    搜尋使 C ∈ ℛ₁ 且 C ∉ ℛ 的通道

    第 t 次試驗使用亂數流 (seed, t)，偶數次採均勻輸入、奇數次採 Dirichlet 輸入；
    planted 取代第 0 次試驗。結果與 worker 數量無關：回傳成功的最小試驗編號。
    """
    if trials < 1:
        raise PreconditionError("試驗次數必須至少為 1", {"trials": trials})
    if len(input_sizes) != 2:
        raise PreconditionError("反例搜尋僅適用兩個使用者", {"input_sizes": list(input_sizes)})
    pool_size = settings.WORKERS if workers is None else workers

    def run(trial: int) -> Optional[SearchResult]:
        if trial == 0 and planted is not None:
            return _evaluate(trial, planted)
        return _evaluate(trial, _candidate(trial, seed, input_sizes, y_size, z_size))

    found: Optional[SearchResult] = None
    if pool_size <= 1:
        for trial in range(trials):
            found = run(trial)
            if found is not None:
                break
    else:
        batch = pool_size * 4
        with ThreadPoolExecutor(max_workers=pool_size) as executor:
            for start in range(0, trials, batch):
                results = list(executor.map(run, range(start, min(start + batch, trials))))
                found = next((r for r in results if r is not None), None)
                if found is not None:
                    break

    logging_service.info(
        COMPONENT,
        "Counterexample search finished",
        {"trials": trials, "seed": seed, "found": found is not None,
         "trial": found.trial if found else None},
    )
    return found
