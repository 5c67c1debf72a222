from dataclasses import asdict
from typing import Any, Dict

from app.api.deps import CommandContext, get_bundle
from app.config import settings
from app.core.router import CommandRouter
from app.crud.results import result as crud_result
from app.models.coding import CodeConfig
from app.schemas.results import SimulationExport, SimulationRow
from app.schemas.run_spec import Command, RunSpec
from app.services.logging import logging_service
from app.services.simcode import run_trials, sample_n_statistic

router = CommandRouter()


@router.command(Command.SIMULATE)
def cmd_simulate(spec: RunSpec, context: CommandContext) -> Dict[str, Any]:
    """
    對每個碼書種子執行模擬，輸出 simulation.json 與 simulation.csv
    """
    ch, inputs, _ = get_bundle(spec, context)
    sim = spec.simulation
    rates = tuple(rate.to_domain() for rate in sim.rates)
    seeds = sim.seeds or [context.seed]

    def config(seed: int) -> CodeConfig:
        return CodeConfig(
            n=sim.n, rates=rates, eps=sim.eps, seed=seed, max_blocklength=settings.MAX_BLOCKLENGTH
        )

    results = [
        run_trials(ch, inputs, config(seed), sim.trials, leakage=sim.leakage, n_samples=sim.n_samples)
        for seed in seeds
    ]
    ensemble = None
    if sim.ensemble_samples:
        summary = sample_n_statistic(ch, inputs, config(seeds[0]), sim.ensemble_samples)
        ensemble = {**asdict(summary), "mean_bound": results[0].bounds.mean_bound}

    export = SimulationExport(
        n=sim.n,
        eps=sim.eps,
        requested_rates=[asdict(rate) for rate in rates],
        effective_rates=[asdict(rate) for rate in results[0].effective_rates],
        rows=[SimulationRow.from_domain(item) for item in results],
        leakage=[asdict(item.leakage) if item.leakage is not None else None for item in results],
        ensemble=ensemble,
    )
    outputs = crud_result.save_simulation(context.output_dir, export)
    logging_service.audit(
        "cli", "simulate", "spec", str(context.spec_path),
        {"seeds": seeds, "n": sim.n, "trials": sim.trials},
    )
    return {
        "command": "simulate",
        "error_probability": [row.error_probability for row in export.rows],
        "outputs": [p.name for p in outputs],
    }
