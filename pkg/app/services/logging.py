import json
import logging
from typing import Any, Dict, Optional, Union

Details = Optional[Union[Dict[str, Any], str]]

_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
}


class LoggingService:
    """
    統一的系統日誌服務
    以 component 區分來源，詳細資訊以排序後的 JSON 附在訊息後
    """

    @staticmethod
    def log(
        level: str,
        component: str,
        message: str,
        details: Details = None,
        exc_info: bool = False,
    ) -> str:
        """
        記錄系統日誌

        Args:
            level: 日誌級別 (debug, info, warning, error)
            component: 系統組件 (channel, polytope, regions, splitmap, simcode, cli)
            message: 日誌訊息
            details: 詳細資訊 (可選)
            exc_info: 是否附上例外堆疊

        Returns:
            str: 實際寫出的訊息
        """
        # 將詳細資訊轉換為JSON字符串
        if details and isinstance(details, dict):
            details_json = json.dumps(details, sort_keys=True, default=str, ensure_ascii=False)
        elif details:
            details_json = str(details)
        else:
            details_json = None

        text = f"{message} | {details_json}" if details_json else message
        logging.getLogger(f"app.{component}").log(
            _LEVELS.get(level, logging.INFO), text, exc_info=exc_info
        )
        return text

    @classmethod
    def debug(cls, component: str, message: str, details: Details = None) -> str:
        """記錄除錯級別日誌"""
        return cls.log("debug", component, message, details)

    @classmethod
    def info(cls, component: str, message: str, details: Details = None) -> str:
        """記錄信息級別日誌"""
        return cls.log("info", component, message, details)

    @classmethod
    def warning(cls, component: str, message: str, details: Details = None) -> str:
        """記錄警告級別日誌"""
        return cls.log("warning", component, message, details)

    @classmethod
    def error(
        cls, component: str, message: str, details: Details = None, exc_info: bool = False
    ) -> str:
        """記錄錯誤級別日誌"""
        return cls.log("error", component, message, details, exc_info=exc_info)

    @classmethod
    def audit(
        cls,
        component: str,
        action: str,
        resource_type: str,
        resource_id: str,
        details: Optional[Dict[str, Any]] = None,
    ) -> str:
        """
        記錄審計日誌（用於記錄指令執行）

        Args:
            component: 系統組件
            action: 操作類型 (region, compare, split, simulate 等)
            resource_type: 資源類型 (spec, channel, region)
            resource_id: 資源識別 (例如設定檔路徑)
            details: 詳細資訊 (可選)
        """
        message = f"{action.upper()} {resource_type} {resource_id}"

        audit_details = {
            "action": action,
            "resourceType": resource_type,
            "resourceId": resource_id,
        }

        if details:
            audit_details.update(details)

        return cls.info(component, message, audit_details)


# 創建服務實例
logging_service = LoggingService()
