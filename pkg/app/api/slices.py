from typing import Any, Dict

from app.api.deps import CommandContext, get_bundle
from app.core.router import CommandRouter
from app.crud.results import result as crud_result
from app.schemas.results import SliceStatus
from app.schemas.run_spec import Command, RunSpec
from app.services import polytope as poly
from app.services.logging import logging_service
from app.services.regions import build_region

router = CommandRouter()


@router.command(Command.SLICE)
def cmd_slice(spec: RunSpec, context: CommandContext) -> Dict[str, Any]:
    """
    輸出區域的二維切片邊界 (slice.csv) 與狀態 (slice_status.json)
    """
    _, _, mi = get_bundle(spec, context)
    section = spec.slice
    region = build_region(section.region, mi, spec.eps)
    points = poly.slice_polygon(region, section.axes, section.fixed)
    status = SliceStatus(
        status="ok" if points else "empty",
        region=section.region.value,
        axes=list(section.axes),
        fixed=dict(section.fixed),
        vertices=len(points),
    )
    outputs = [
        crud_result.save_csv(
            context.output("slice.csv"), section.axes, ([float(a), float(b)] for a, b in points)
        ),
        crud_result.save_json(context.output("slice_status.json"), status),
    ]
    if not points:
        logging_service.warning("cli", "Slice is empty", {"fixed": section.fixed})
    logging_service.audit(
        "cli", "slice", "spec", str(context.spec_path), {"status": status.status, "vertices": len(points)}
    )
    return {"command": "slice", "status": status.status, "outputs": [p.name for p in outputs]}
