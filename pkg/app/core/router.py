from typing import TYPE_CHECKING, Any, Callable, Dict

from app.core.errors import SpecFileError

if TYPE_CHECKING:
    from app.api.deps import CommandContext
    from app.schemas.run_spec import RunSpec

Handler = Callable[["RunSpec", "CommandContext"], Dict[str, Any]]


class CommandRouter:
    """
    指令路由
    以指令名稱註冊處理函數，各模組的 router 再匯入總路由
    """

    def __init__(self):
        self.routes: Dict[str, Handler] = {}

    def command(self, name: str) -> Callable[[Handler], Handler]:
        key = getattr(name, "value", name)

        def decorator(func: Handler) -> Handler:
            if key in self.routes:
                raise ValueError(f"指令重複註冊: {key}")
            self.routes[key] = func
            return func

        return decorator

    def include_router(self, router: "CommandRouter") -> None:
        for key, handler in router.routes.items():
            if key in self.routes:
                raise ValueError(f"指令重複註冊: {key}")
            self.routes[key] = handler

    def dispatch(self, spec: "RunSpec", context: "CommandContext") -> Dict[str, Any]:
        key = getattr(spec.command, "value", spec.command)
        handler = self.routes.get(key)
        if handler is None:
            raise SpecFileError(f"未知的指令: {key}", {"commands": sorted(self.routes)})
        return handler(spec, context)
