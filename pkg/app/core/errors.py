"""
錯誤類別

每個錯誤帶有機器可讀的代碼與對應的結束碼，
結構與 API 錯誤回應 {"code", "message", "details"} 相同。
"""

from typing import Any, Dict, Optional


class ToolkitError(Exception):
    """所有工具錯誤的基底類別"""

    code: str = "TOOLKIT_ERROR"
    exit_code: int = 4

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "success": False,
            "error": {
                "code": self.code,
                "message": self.message,
                "details": self.details,
            },
        }


# 輸入錯誤 (結束碼 2)
class InvalidInputError(ToolkitError):
    code = "INVALID_INPUT"
    exit_code = 2


class ChannelValidationError(InvalidInputError):
    code = "INVALID_CHANNEL"


class DimensionMismatchError(InvalidInputError):
    code = "DIMENSION_MISMATCH"


class OverlappingVariablesError(InvalidInputError):
    code = "OVERLAPPING_VARIABLES"


class UnknownAxisError(InvalidInputError):
    code = "UNKNOWN_AXIS"


class AxisMismatchError(InvalidInputError):
    code = "AXIS_MISMATCH"


class UnboundedPolytopeError(InvalidInputError):
    code = "UNBOUNDED_POLYTOPE"


class NotInRegionError(InvalidInputError):
    code = "NOT_IN_REGION"


class PreconditionError(InvalidInputError):
    code = "PRECONDITION_FAILED"


class SpecFileError(InvalidInputError):
    code = "INVALID_SPEC"


# 資源上限 (結束碼 3)
class ResourceLimitError(ToolkitError):
    code = "RESOURCE_LIMIT"
    exit_code = 3


class UserLimitError(ResourceLimitError):
    code = "USER_LIMIT"


class DimensionLimitError(ResourceLimitError):
    code = "DIMENSION_LIMIT"


class EnumerationLimitError(ResourceLimitError):
    code = "ENUMERATION_LIMIT"


class CodebookLimitError(ResourceLimitError):
    code = "CODEBOOK_LIMIT"


# 內部不變量違反 (結束碼 4)
class InternalInvariantError(ToolkitError):
    code = "INVARIANT_BREACH"
    exit_code = 4
