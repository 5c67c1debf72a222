from pathlib import Path
from typing import Any, Iterable, List, Sequence

from pydantic import BaseModel

from app.crud.base import PathLike, write_csv, write_json
from app.schemas.results import SimulationExport, SimulationRow


class CRUDResult:
    """指令結果的輸出"""

    def save_json(self, path: PathLike, payload: Any) -> Path:
        if isinstance(payload, BaseModel):
            payload = payload.model_dump(mode="json")
        return write_json(path, payload)

    def save_text(self, path: PathLike, text: str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path

    def save_csv(self, path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return write_csv(path, header, rows)

    def save_simulation(self, directory: PathLike, export: SimulationExport) -> List[Path]:
        """simulation.json 與每個種子一列的 simulation.csv"""
        directory = Path(directory)
        header = list(SimulationRow.model_fields)
        rows = ([getattr(row, name) for name in header] for row in export.rows)
        return [
            self.save_json(directory / "simulation.json", export),
            self.save_csv(directory / "simulation.csv", header, rows),
        ]


result = CRUDResult()
