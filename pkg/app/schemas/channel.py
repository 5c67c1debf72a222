from typing import Any, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.models.channel import DMWiretapChannel, InputDistribution


# 通道檔案格式
class ChannelFile(BaseModel):
    num_users: int = Field(..., ge=1, description="使用者數量 K")
    input_sizes: List[int] = Field(..., description="各使用者的輸入字母表大小")
    y_size: int = Field(..., ge=1, description="合法接收端字母表大小")
    z_size: int = Field(..., ge=1, description="竊聽端字母表大小")
    transition: List[Any] = Field(..., description="巢狀陣列 [x1]...[xK][y][z] = p(y,z|x)")
    inputs: Optional[List[List[float]]] = Field(None, description="各使用者的輸入分佈")

    @model_validator(mode="after")
    def check_sizes(self) -> "ChannelFile":
        if len(self.input_sizes) != self.num_users:
            raise ValueError("input_sizes 的長度必須等於 num_users")
        if any(size < 1 for size in self.input_sizes):
            raise ValueError("字母表大小必須為正整數")
        if self.inputs is not None and len(self.inputs) != self.num_users:
            raise ValueError("inputs 的長度必須等於 num_users")
        return self

    def to_channel(self) -> DMWiretapChannel:
        return DMWiretapChannel(
            tuple(self.input_sizes), self.y_size, self.z_size, np.array(self.transition, dtype=float)
        )

    def to_inputs(self) -> Optional[List[InputDistribution]]:
        if self.inputs is None:
            return None
        return [InputDistribution(np.array(pmf, dtype=float)) for pmf in self.inputs]

    @classmethod
    def from_domain(
        cls, ch: DMWiretapChannel, inputs: Optional[Sequence[InputDistribution]] = None
    ) -> "ChannelFile":
        return cls(
            num_users=ch.num_users,
            input_sizes=list(ch.input_sizes),
            y_size=ch.y_size,
            z_size=ch.z_size,
            transition=ch.transition.tolist(),
            inputs=[dist.pmf.tolist() for dist in inputs] if inputs is not None else None,
        )
