"""
多面體服務

所有不等式運算皆為精確有理數。頂點列舉採用雙重描述法：
在齊次化錐 {(x,t): a·x − b·t ≤ 0} 上從非負象限出發逐一加入不等式，
以整數運算保持射線，t > 0 的射線即為頂點。
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations, islice
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.core.errors import (
    DimensionLimitError,
    EnumerationLimitError,
    InvalidInputError,
    PreconditionError,
    UnboundedPolytopeError,
    UnknownAxisError,
)
from app.models.polytope import LinearInequality, Polytope, RateTuple
from app.services.information import rationalize
from app.services.logging import logging_service

COMPONENT = "polytope"

Point = Tuple[Fraction, ...]


@dataclass(frozen=True)
class _Enumeration:
    vertices: Tuple[Point, ...]
    recession: Tuple[Tuple[int, ...], ...]

    @property
    def bounded(self) -> bool:
        return not self.vertices or not self.recession


def _integer_row(coefficients: Sequence[Fraction], rhs: Fraction) -> Tuple[int, ...]:
    """齊次列 (a, −b)，通分後除以最大公因數"""
    values = list(coefficients) + [-rhs]
    scale = math.lcm(*(v.denominator for v in values))
    ints = [int(v * scale) for v in values]
    divisor = reduce(math.gcd, (abs(i) for i in ints), 0)
    return tuple(i // divisor for i in ints) if divisor > 1 else tuple(ints)


def _primitive(ray: Sequence[int]) -> Tuple[int, ...]:
    divisor = reduce(math.gcd, (abs(i) for i in ray), 0)
    return tuple(i // divisor for i in ray) if divisor > 1 else tuple(ray)


def _orthant_axis(row: Tuple[int, ...]) -> Optional[int]:
    """若此列只是 −x_i ≤ 0 則回傳 i"""
    nonzero = [i for i, v in enumerate(row) if v != 0]
    if len(nonzero) == 1 and row[nonzero[0]] < 0 and nonzero[0] < len(row) - 1:
        return nonzero[0]
    return None


def _check_dimension(axes: Sequence[str], max_dim: Optional[int] = None) -> None:
    limit = settings.MAX_POLYTOPE_DIM if max_dim is None else max_dim
    if len(axes) > limit:
        raise DimensionLimitError("多面體維度超過上限", {"dimension": len(axes), "max": limit})


def _enumerate(axes: Sequence[str], inequalities: Iterable[LinearInequality]) -> _Enumeration:
    _check_dimension(axes)
    d = len(axes)
    dim = d + 1
    rows = [_integer_row(ineq.vector(axes), ineq.rhs) for ineq in inequalities]

    # 初始錐為非負象限 (含 t ≥ 0)，限制編號 0..d 對應各座標
    rays: List[Tuple[int, ...]] = [tuple(int(i == j) for i in range(dim)) for j in range(dim)]
    zeros: List[frozenset] = [frozenset(i for i in range(dim) if i != j) for j in range(dim)]

    for offset, row in enumerate(rows):
        if _orthant_axis(row) is not None:
            continue
        index = dim + offset
        values = [sum(a * r for a, r in zip(row, ray)) for ray in rays]
        positive = [i for i, v in enumerate(values) if v > 0]
        if not positive:
            zeros = [z | {index} if values[i] == 0 else z for i, z in enumerate(zeros)]
            continue
        negative = [i for i, v in enumerate(values) if v < 0]
        new_rays: List[Tuple[int, ...]] = []
        new_zeros: List[frozenset] = []
        for i, v in enumerate(values):
            if v < 0:
                new_rays.append(rays[i])
                new_zeros.append(zeros[i])
            elif v == 0:
                new_rays.append(rays[i])
                new_zeros.append(zeros[i] | {index})
        for p in positive:
            for q in negative:
                common = zeros[p] & zeros[q]
                if len(common) < dim - 2:
                    continue
                if any(
                    common <= zeros[r] for r in range(len(rays)) if r != p and r != q
                ):
                    continue
                combined = tuple(
                    values[p] * a - values[q] * b for a, b in zip(rays[q], rays[p])
                )
                new_rays.append(_primitive(combined))
                new_zeros.append(common | {index})
        rays, zeros = new_rays, new_zeros
        if not rays:
            break

    vertices = sorted(
        {tuple(Fraction(ray[i], ray[d]) for i in range(d)) for ray in rays if ray[d] > 0}
    )
    recession = tuple(sorted({ray for ray in rays if ray[d] == 0}))
    return _Enumeration(tuple(vertices), recession)


def _enumerate_bounded(P: Polytope) -> _Enumeration:
    result = _enumerate(P.axes, P.inequalities)
    if not result.bounded:
        raise UnboundedPolytopeError(
            "多面體無界", {"axes": list(P.axes), "direction": list(result.recession[0])}
        )
    return result


def vertices(P: Polytope) -> List[RateTuple]:
    """
    列舉頂點 (精確有理數，已去重並依字典序排列)

    空多面體回傳空清單；無界時拋出 UnboundedPolytopeError。
    """
    result = _enumerate_bounded(P)
    return [RateTuple.from_fractions(P.axes, v) for v in result.vertices]


def is_empty(P: Polytope) -> bool:
    return not _enumerate(P.axes, P.inequalities).vertices


def remove_redundant(P: Polytope) -> Polytope:
    """依序移除不影響頂點集合的不等式；非負限制永遠保留"""
    base = _enumerate_bounded(P)
    if not base.vertices:
        return Polytope.empty(P.axes)
    target = set(base.vertices)
    kept = list(P.inequalities)
    for inequality in P.inequalities:
        if inequality.nonnegativity_axis() is not None:
            continue
        trial = [q for q in kept if q is not inequality]
        candidate = _enumerate(P.axes, trial)
        if candidate.vertices and not candidate.recession and set(candidate.vertices) == target:
            kept = trial
    return Polytope(P.axes, tuple(kept))


def fm_eliminate(P: Polytope, axis: str) -> Polytope:
    """以 Fourier-Motzkin 消去一個軸，回傳去除冗餘後的投影"""
    if axis not in P.axes:
        raise UnknownAxisError(f"未知的軸: {axis}", {"axes": list(P.axes)})
    upper, lower, rest = [], [], []
    for inequality in P.inequalities:
        value = inequality.coefficient(axis)
        if value > 0:
            upper.append(inequality)
        elif value < 0:
            lower.append(inequality)
        else:
            rest.append(inequality)
    combined = list(rest)
    for p in upper:
        a_p = p.coefficient(axis)
        for q in lower:
            a_q = q.coefficient(axis)
            combined.append(p.combine(q, -a_q, a_p))
    remaining = tuple(a for a in P.axes if a != axis)
    projected = Polytope.build(remaining, combined)
    logging_service.debug(
        COMPONENT,
        "Fourier-Motzkin step",
        {"axis": axis, "upper": len(upper), "lower": len(lower), "rows": len(projected.inequalities)},
    )
    return remove_redundant(projected)


def fm_eliminate_all(P: Polytope, axes: Iterable[str]) -> Polytope:
    result = P
    for axis in axes:
        result = fm_eliminate(result, axis)
    return result


def _point_of(P: Polytope, t: RateTuple) -> RateTuple:
    if tuple(t.axes) == P.axes:
        return t
    if set(t.axes) != set(P.axes):
        P.require_axes(t.axes)
    order = [t.axes.index(axis) for axis in P.axes]
    exact = tuple(t.exact[i] for i in order) if t.exact is not None else None
    return RateTuple(P.axes, tuple(t.values[i] for i in order), exact)


def contains_point(P: Polytope, t: RateTuple, tol: Optional[float] = None) -> bool:
    """
    判斷速率組是否在多面體內

    有精確值時以有理數比較，否則以浮點數在容許誤差內比較。
    """
    point = _point_of(P, t)
    if point.exact is not None:
        return P.satisfies(point.exact)
    tolerance = settings.CONTAINMENT_TOLERANCE if tol is None else tol
    for inequality in P.inequalities:
        lhs = sum(float(v) * point.values[P.axes.index(a)] for a, v in inequality.coefficients)
        if lhs > float(inequality.rhs) + tolerance:
            return False
    return True


def is_subset(P: Polytope, Q: Polytope) -> bool:
    """P 的每個頂點都精確滿足 Q"""
    P.require_axes(Q.axes)
    return all(Q.satisfies(v) for v in _enumerate_bounded(P).vertices)


def equals(P: Polytope, Q: Polytope) -> bool:
    return is_subset(P, Q) and is_subset(Q, P)


# 凸包


def _rref(rows: List[List[Fraction]], ncols: int) -> Tuple[List[List[Fraction]], List[int]]:
    matrix = [list(r) for r in rows]
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == len(matrix):
            break
        pivot = next((i for i in range(r, len(matrix)) if matrix[i][c] != 0), None)
        if pivot is None:
            continue
        matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
        lead = matrix[r][c]
        matrix[r] = [v / lead for v in matrix[r]]
        for i in range(len(matrix)):
            if i != r and matrix[i][c] != 0:
                factor = matrix[i][c]
                matrix[i] = [a - factor * b for a, b in zip(matrix[i], matrix[r])]
        pivots.append(c)
        r += 1
    return matrix[:r], pivots


def _nullspace(rows: List[List[Fraction]], ncols: int) -> List[List[Fraction]]:
    reduced, pivots = _rref(rows, ncols)
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        vector = [Fraction(0)] * ncols
        vector[free] = Fraction(1)
        for row, column in zip(reduced, pivots):
            vector[column] = -row[free]
        basis.append(vector)
    return basis


def _determinant(matrix: List[List[Fraction]]) -> Fraction:
    m = [list(r) for r in matrix]
    size = len(m)
    det = Fraction(1)
    for c in range(size):
        pivot = next((i for i in range(c, size) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, size):
            factor = m[i][c] / m[c][c]
            if factor:
                m[i] = [a - factor * b for a, b in zip(m[i], m[c])]
    return det


def _cross_normal(points: Sequence[Point]) -> List[Fraction]:
    """k 維空間中 k 個點決定之超平面的法向量 (廣義外積)"""
    origin = points[0]
    diffs = [[a - b for a, b in zip(p, origin)] for p in points[1:]]
    k = len(origin)
    normal = []
    for i in range(k):
        minor = [row[:i] + row[i + 1:] for row in diffs]
        value = _determinant(minor) if minor else Fraction(1)
        normal.append(value if i % 2 == 0 else -value)
    return normal


def _float_normals(points: np.ndarray, combos: np.ndarray) -> np.ndarray:
    """批次計算浮點法向量，作為精確驗證前的篩選"""
    chosen = points[combos]
    diffs = chosen[:, 1:, :] - chosen[:, :1, :]
    k = points.shape[1]
    normals = np.empty((len(combos), k))
    for i in range(k):
        minor = np.delete(diffs, i, axis=2)
        value = np.linalg.det(minor) if minor.shape[1] else np.ones(len(combos))
        normals[:, i] = value if i % 2 == 0 else -value
    return normals


def _facets(points: List[Point], max_candidates: int) -> List[Tuple[List[Fraction], Fraction]]:
    """全維點集的所有刻面 a·y ≤ b"""
    k = len(points[0])
    if k == 1:
        values = [p[0] for p in points]
        return [([Fraction(1)], max(values)), ([Fraction(-1)], -min(values))]
    total = math.comb(len(points), k)
    if total > max_candidates:
        raise EnumerationLimitError(
            "凸包候選組合過多", {"points": len(points), "dimension": k, "max": max_candidates}
        )
    approx = np.array([[float(v) for v in p] for p in points])
    scale = 1.0 + float(np.abs(approx).max())
    facets: Dict[Tuple, Tuple[List[Fraction], Fraction]] = {}
    source = combinations(range(len(points)), k)
    while True:
        chunk = list(islice(source, 50_000))
        if not chunk:
            break
        combos = np.array(chunk, dtype=np.int64)
        normals = _float_normals(approx, combos)
        norms = np.linalg.norm(normals, axis=1)
        # 浮點法向量夠大時才用浮點排除，其餘一律精確判斷
        clear = norms > 1e-6 * scale ** (k - 1)
        for row in range(len(combos)):
            if clear[row]:
                unit = normals[row] / norms[row]
                offsets = approx @ unit - approx[combos[row, 0]] @ unit
                if offsets.max() > 1e-7 * scale and offsets.min() < -1e-7 * scale:
                    continue
            chosen = [points[i] for i in combos[row]]
            normal = _cross_normal(chosen)
            if not any(normal):
                continue
            rhs = sum(a * b for a, b in zip(normal, chosen[0]))
            sides = [sum(a * b for a, b in zip(normal, p)) - rhs for p in points]
            if all(s <= 0 for s in sides):
                pass
            elif all(s >= 0 for s in sides):
                normal, rhs = [-a for a in normal], -rhs
            else:
                continue
            key = LinearInequality.of({str(i): a for i, a in enumerate(normal)}, rhs).normalized_key()
            facets.setdefault(key, (normal, rhs))
    return list(facets.values())


def convex_hull_union(polytopes: Sequence[Polytope], max_candidates: Optional[int] = None) -> Polytope:
    """
    多個多面體聯集的凸包

    先求合併頂點的仿射包 (等式以兩個不等式表示)，
    再於仿射包座標中列舉刻面，最後去除冗餘。
    """
    if not polytopes:
        raise PreconditionError("至少需要一個多面體")
    axes = polytopes[0].axes
    for P in polytopes[1:]:
        P.require_axes(axes)
    pooled = sorted({v for P in polytopes for v in _enumerate_bounded(P).vertices})
    hull = convex_hull_of_points(axes, pooled, max_candidates)
    logging_service.debug(
        COMPONENT, "Convex hull computed", {"members": len(polytopes), "points": len(pooled)}
    )
    return hull


def convex_hull_of_points(
    axes: Sequence[str], points: Sequence[Point], max_candidates: Optional[int] = None
) -> Polytope:
    """有限點集的凸包 H 表示 (點座標須非負)"""
    axes = tuple(axes)
    _check_dimension(axes)
    limit = settings.MAX_HULL_CANDIDATES if max_candidates is None else max_candidates
    pooled = sorted({tuple(Fraction(v) for v in p) for p in points})
    if not pooled:
        return Polytope.empty(axes)
    if any(v < 0 for p in pooled for v in p):
        raise InvalidInputError("凸包的點座標不可為負", {"axes": list(axes)})
    d = len(axes)
    origin = pooled[0]
    diffs = [[a - b for a, b in zip(p, origin)] for p in pooled[1:]]
    direction, pivots = _rref(diffs, d) if diffs else ([], [])

    inequalities: List[LinearInequality] = []
    for normal in _nullspace(direction, d):
        rhs = sum(a * b for a, b in zip(normal, origin))
        coefficients = dict(zip(axes, normal))
        inequalities.append(LinearInequality.of(coefficients, rhs, "affine hull"))
        inequalities.append(LinearInequality.of({a: -v for a, v in coefficients.items()}, -rhs, "affine hull"))

    if pivots:
        projected = sorted({tuple(p[c] for c in pivots) for p in pooled})
        for normal, rhs in _facets(projected, limit):
            coefficients = {axes[c]: a for c, a in zip(pivots, normal)}
            inequalities.append(LinearInequality.of(coefficients, rhs, "hull facet"))

    return remove_redundant(Polytope.build(axes, inequalities))


# 切片


def slice_polygon(
    P: Polytope, free_axes: Sequence[str], fixed: Mapping[str, float]
) -> List[Tuple[Fraction, Fraction]]:
    """
    二維切片

    代入固定座標後列舉頂點，依繞質心的角度逆時針排序。
    固定值落在區域外時回傳空清單。
    """
    free_axes = tuple(free_axes)
    if len(free_axes) != 2 or len(set(free_axes)) != 2:
        raise PreconditionError("切片需要兩個不同的自由軸", {"free_axes": list(free_axes)})
    unknown = [a for a in list(free_axes) + list(fixed) if a not in P.axes]
    if unknown:
        raise UnknownAxisError(f"未知的軸: {unknown}", {"axes": list(P.axes)})
    overlap = set(free_axes) & set(fixed)
    missing = [a for a in P.axes if a not in free_axes and a not in fixed]
    if overlap or missing:
        raise PreconditionError(
            "其餘軸必須全部固定", {"overlap": sorted(overlap), "missing": missing}
        )
    values = {axis: rationalize(value) for axis, value in fixed.items()}
    if any(v < 0 for v in values.values()):
        return []
    section = Polytope.build(free_axes, [ineq.substitute(values) for ineq in P.inequalities])
    points = list(_enumerate_bounded(section).vertices)
    if len(points) <= 2:
        return [(p[0], p[1]) for p in points]
    cx = sum(float(p[0]) for p in points) / len(points)
    cy = sum(float(p[1]) for p in points) / len(points)
    points.sort(key=lambda p: math.atan2(float(p[1]) - cy, float(p[0]) - cx))
    return [(p[0], p[1]) for p in points]


def project_vertices(P: Polytope, axes: Sequence[str]) -> List[Point]:
    """頂點在部分座標上的投影 (去重)"""
    unknown = [a for a in axes if a not in P.axes]
    if unknown:
        raise UnknownAxisError(f"未知的軸: {unknown}", {"axes": list(P.axes)})
    index = [P.axes.index(a) for a in axes]
    return sorted({tuple(v[i] for i in index) for v in _enumerate_bounded(P).vertices})

