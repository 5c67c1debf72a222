from app.api import compare, regions, simulate, slices, split
from app.core.router import CommandRouter

api_router = CommandRouter()

# 註冊各模組的指令
api_router.include_router(regions.router)  # region, hull
api_router.include_router(compare.router)
api_router.include_router(split.router)  # split, counterexample
api_router.include_router(simulate.router)
api_router.include_router(slices.router)
