from typing import Any, Dict

from app.api.deps import CommandContext, get_bundle, get_channel, get_input_family
from app.core.router import CommandRouter
from app.crud.regions import region as crud_region
from app.schemas.run_spec import Command, RunSpec
from app.services import polytope as poly
from app.services.logging import logging_service
from app.services.regions import build_region, hull_over_inputs

router = CommandRouter()


@router.command(Command.REGION)
def cmd_region(spec: RunSpec, context: CommandContext) -> Dict[str, Any]:
    """
    建立區域並輸出 region_<Kind>.json 與 vertices_<Kind>.csv
    """
    _, _, mi = get_bundle(spec, context)
    outputs = []
    summary = {}
    for kind in spec.kinds:
        polytope = build_region(kind, mi, spec.eps)
        vertices = poly.vertices(polytope)
        outputs.append(
            crud_region.save(
                context.output(f"region_{kind.value}.json"), polytope, kind, mi.as_floats(), spec.eps
            )
        )
        outputs.append(
            crud_region.save_vertices(context.output(f"vertices_{kind.value}.csv"), polytope.axes, vertices)
        )
        summary[kind.value] = {"inequalities": len(polytope.inequalities), "vertices": len(vertices)}

    logging_service.audit(
        "cli", "region", "spec", str(context.spec_path),
        {"kinds": [k.value for k in spec.kinds], "eps": spec.eps},
    )
    return {"command": "region", "regions": summary, "outputs": [p.name for p in outputs]}


@router.command(Command.HULL)
def cmd_hull(spec: RunSpec, context: CommandContext) -> Dict[str, Any]:
    """
    對輸入分佈族取區域聯集的凸包
    """
    ch, _ = get_channel(spec, context)
    family = get_input_family(spec)
    outputs = []
    summary = {}
    for kind in spec.kinds:
        hull = hull_over_inputs(ch, family, kind, spec.eps)
        vertices = poly.vertices(hull)
        outputs.append(crud_region.save(context.output(f"hull_{kind.value}.json"), hull, kind, eps=spec.eps))
        outputs.append(
            crud_region.save_vertices(context.output(f"hull_vertices_{kind.value}.csv"), hull.axes, vertices)
        )
        summary[kind.value] = {"inequalities": len(hull.inequalities), "vertices": len(vertices)}

    logging_service.audit(
        "cli", "hull", "spec", str(context.spec_path), {"family": len(family), "kinds": list(summary)}
    )
    return {"command": "hull", "regions": summary, "outputs": [p.name for p in outputs]}
