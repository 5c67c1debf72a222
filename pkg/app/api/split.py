from typing import Any, Dict

from app.api.deps import CommandContext, get_bundle
from app.core.router import CommandRouter
from app.crud.channels import channel as crud_channel
from app.crud.results import result as crud_result
from app.models.polytope import RateTuple
from app.schemas.results import CounterexampleExport, SplitExport, TransformExport
from app.schemas.run_spec import Command, RunSpec, SearchSpec
from app.services.information import uniform_inputs, xor_witness_channel
from app.services.logging import logging_service
from app.services.regions import RATE_AXES
from app.services.splitmap import search_counterexample, split_vertices, transform

router = CommandRouter()


@router.command(Command.SPLIT)
def cmd_split(spec: RunSpec, context: CommandContext) -> Dict[str, Any]:
    """
    將指定速率組 (或 ℛ 的所有頂點) 轉換進 ℛ₂
    """
    _, _, mi = get_bundle(spec, context)
    if spec.split is not None and spec.split.point is not None:
        reports = [transform(RateTuple.from_mapping(RATE_AXES, spec.split.point), mi)]
    else:
        reports = split_vertices(mi)
    export = SplitExport(
        mi=mi.as_floats(),
        reports=[TransformExport.from_domain(report) for report in reports],
        all_verified=all(report.verified for report in reports),
    )
    path = crud_result.save_json(context.output("split.json"), export)
    logging_service.audit(
        "cli", "split", "spec", str(context.spec_path),
        {"tuples": len(reports), "verified": export.all_verified},
    )
    return {
        "command": "split",
        "tuples": len(reports),
        "all_verified": export.all_verified,
        "outputs": [path.name],
    }


@router.command(Command.COUNTEREXAMPLE)
def cmd_counterexample(spec: RunSpec, context: CommandContext) -> Dict[str, Any]:
    """
    搜尋使 C ∈ ℛ₁ 且 C ∉ ℛ 的通道
    """
    search = spec.search or SearchSpec()
    planted = (xor_witness_channel(), uniform_inputs((2, 2))) if search.plant_witness else None
    found = search_counterexample(
        search.input_sizes, search.y_size, search.z_size, search.trials, context.seed, planted=planted
    )
    export = CounterexampleExport.from_domain(found, context.seed, search.trials)
    outputs = [crud_result.save_json(context.output("counterexample.json"), export)]
    if found is not None:
        outputs.append(
            crud_channel.save(context.output("counterexample_channel.json"), found.channel, found.inputs)
        )
    logging_service.audit(
        "cli", "counterexample", "search", str(context.spec_path),
        {"found": export.found, "trial": export.trial, "seed": context.seed},
    )
    return {
        "command": "counterexample",
        "found": export.found,
        "trial": export.trial,
        "outputs": [p.name for p in outputs],
    }
