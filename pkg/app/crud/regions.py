from pathlib import Path
from typing import Dict, List, Optional, Sequence

from app.crud.base import JSONFileCRUD, PathLike, write_csv
from app.models.polytope import Polytope, RateTuple
from app.models.region import RegionKind
from app.schemas.polytope import PolytopeExport, RegionExport

class CRUDRegion(JSONFileCRUD[RegionExport]):
    def save(
        self,
        path: PathLike,
        polytope: Polytope,
        kind: RegionKind,
        mi: Optional[Dict[str, float]] = None,
        eps: float = 0.0,
    ) -> Path:
        document = RegionExport(
            **PolytopeExport.from_polytope(polytope).model_dump(), kind=kind, eps=eps, mi=mi or {}
        )
        return self.write(path, document)

    def load(self, path: PathLike) -> Polytope:
        return self.read(path).to_polytope()

    def save_vertices(self, path: PathLike, axes: Sequence[str], vertices: List[RateTuple]) -> Path:
        """每個軸一欄的頂點 CSV"""
        return write_csv(path, list(axes), ([vertex[axis] for axis in axes] for vertex in vertices))


region = CRUDRegion(RegionExport)
