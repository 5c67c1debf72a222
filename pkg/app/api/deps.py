from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.crud.channels import channel as crud_channel
from app.models.channel import DMWiretapChannel, InputDistribution, MIBundle
from app.schemas.run_spec import RunSpec
from app.services.information import mi_bundle, uniform_inputs


@dataclass(frozen=True)
class CommandContext:
    """單次指令執行的環境：設定檔位置、輸出目錄與種子"""

    spec_path: Path
    output_dir: Path
    seed: int

    def resolve(self, relative: str) -> Path:
        """設定檔內的路徑以設定檔所在目錄為基準"""
        path = Path(relative)
        return path if path.is_absolute() else self.spec_path.parent / path

    def output(self, name: str) -> Path:
        return self.output_dir / name


def _distributions(pmfs: Sequence[Sequence[float]]) -> List[InputDistribution]:
    return [InputDistribution(np.array(pmf, dtype=float)) for pmf in pmfs]


# 依賴函數：讀取通道與輸入分佈
def get_channel(
    spec: RunSpec, context: CommandContext
) -> Tuple[DMWiretapChannel, List[InputDistribution]]:
    """
    依賴函數：讀取設定檔指定的通道

    輸入分佈優先順序為設定檔 inputs、通道檔案 inputs、均勻分佈。
    """
    ch, file_inputs = crud_channel.load(context.resolve(spec.channel))
    if spec.inputs is not None:
        return ch, _distributions(spec.inputs)
    if file_inputs is not None:
        return ch, file_inputs
    return ch, uniform_inputs(ch.input_sizes)


def get_bundle(
    spec: RunSpec, context: CommandContext
) -> Tuple[DMWiretapChannel, List[InputDistribution], MIBundle]:
    """
    依賴函數：通道、輸入分佈與其互資訊彙整
    """
    ch, inputs = get_channel(spec, context)
    return ch, inputs, mi_bundle(ch, inputs)


def get_input_family(spec: RunSpec) -> List[List[InputDistribution]]:
    return [_distributions(member) for member in spec.input_family or []]


def resolve_output_dir(spec_path: Path, spec: RunSpec, override: Optional[str], default: Optional[str]) -> Path:
    """--out > 設定檔 output > OUTPUT_DIR > 設定檔所在目錄"""
    if override:
        return Path(override)
    if spec.output:
        path = Path(spec.output)
        return path if path.is_absolute() else spec_path.parent / path
    if default:
        return Path(default)
    return spec_path.parent
