from typing import Any, Dict

from pydantic import BaseModel, Field


# 通用回應模型
class ResponseBase(BaseModel):
    success: bool = True


class CommandResponse(ResponseBase):
    data: Dict[str, Any] = Field(
        ...,
        example={"command": "region", "outputs": ["region_TheoremOne.json", "vertices_TheoremOne.csv"]},
    )


class ErrorResponse(ResponseBase):
    success: bool = False
    error: Dict[str, Any] = Field(
        ...,
        example={
            "code": "INVALID_CHANNEL",
            "message": "錯誤描述訊息",
            "details": {"violations": ["row_sum at [0, 1]: 0.9"]},
        },
    )
