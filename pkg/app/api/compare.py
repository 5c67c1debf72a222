from itertools import permutations
from typing import Any, Dict, Optional

from app.api.deps import CommandContext, get_bundle
from app.core.router import CommandRouter
from app.crud.results import result as crud_result
from app.models.polytope import Polytope, RateTuple
from app.models.region import RegionKind
from app.schemas.run_spec import Command, RunSpec
from app.services import polytope as poly
from app.services.logging import logging_service
from app.services.regions import build_region
from app.services.report import render_compare_report, round_floats
from app.services.splitmap import check_gap_condition, counterexample_tuple

router = CommandRouter()

COMPARED = (RegionKind.THEOREM_ONE, RegionKind.TEKIN_YENER_R1, RegionKind.DERIVED_R2)


def _witness(inner: Polytope, outer: Polytope) -> Optional[RateTuple]:
    """outer 中不屬於 inner 的頂點"""
    for vertex in poly.vertices(outer):
        if not poly.contains_point(inner, vertex):
            return vertex
    return None


@router.command(Command.COMPARE)
def cmd_compare(spec: RunSpec, context: CommandContext) -> Dict[str, Any]:
    """
    比較 ℛ、ℛ₁、ℛ₂ 的包含關係並列出見證點
    """
    _, inputs, mi = get_bundle(spec, context)
    regions = {kind: build_region(kind, mi) for kind in COMPARED}

    matrix = []
    witnesses = []
    for left, right in permutations(COMPARED, 2):
        subset = poly.is_subset(regions[left], regions[right])
        equal = subset and poly.is_subset(regions[right], regions[left])
        matrix.append({"left": left.value, "right": right.value, "subset": subset, "equal": equal})
        if subset and not equal:
            point = _witness(regions[left], regions[right])
            witnesses.append({"inner": left.value, "outer": right.value, "point": point.as_dict()})

    c = counterexample_tuple(mi)
    payload = {
        "channel": spec.channel,
        "inputs": [dist.pmf.tolist() for dist in inputs],
        "mi": mi.as_floats(),
        "matrix": matrix,
        "witnesses": witnesses,
        "counterexample": {
            "point": c.as_dict(),
            "gap_condition": check_gap_condition(mi),
            "memberships": {kind.value: poly.contains_point(regions[kind], c) for kind in COMPARED},
        },
    }
    outputs = [
        crud_result.save_json(context.output("compare.json"), payload),
        crud_result.save_text(context.output("compare.txt"), render_compare_report(round_floats(payload))),
    ]
    logging_service.audit(
        "cli", "compare", "spec", str(context.spec_path), {"strict_inclusions": len(witnesses)}
    )
    return {
        "command": "compare",
        "matrix": matrix,
        "counterexample": payload["counterexample"],
        "outputs": [p.name for p in outputs],
    }
