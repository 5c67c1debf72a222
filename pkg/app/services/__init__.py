from app.services.logging import logging_service

# 計算服務請直接導入子模組：information, polytope, regions, splitmap, simcode, report
__all__ = ["logging_service"]
