import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.api import api_router
from app.api.deps import CommandContext, resolve_output_dir
from app.config import settings
from app.core.errors import ToolkitError
from app.crud.base import JSONFileCRUD
from app.schemas import CommandResponse, ErrorResponse, ResponseBase
from app.schemas.run_spec import RunSpec
from app.services.report import round_floats

logger = logging.getLogger(__name__)

run_specs = JSONFileCRUD(RunSpec)


def configure_logging() -> None:
    """日誌一律寫到 stderr，stdout 只輸出結果 JSON"""
    level = logging.DEBUG if settings.DEBUG else getattr(logging, settings.LOG_LEVEL, logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app",
        description=f"{settings.APP_NAME}：多重存取竊聽通道安全速率區域工具",
    )
    parser.add_argument("--spec", required=True, help="JSON 執行設定檔")
    parser.add_argument("--out", default=None, help="輸出目錄 (優先於設定檔的 output)")
    parser.add_argument("--seed-override", type=int, default=None, help="覆寫設定檔的 seed")
    return parser


def _emit(response: ResponseBase) -> None:
    print(json.dumps(response.model_dump(), ensure_ascii=False, sort_keys=True, default=str))


def run(argv: Optional[List[str]] = None) -> int:
    """
    執行一個指令並回傳結束碼

    0 成功、2 輸入錯誤、3 超過資源上限、4 內部不變量違反
    """
    args = build_parser().parse_args(argv)
    spec_path = Path(args.spec)
    try:
        spec = run_specs.read(spec_path)
        if args.seed_override is not None:
            spec = spec.model_copy(update={"seed": args.seed_override})
        context = CommandContext(
            spec_path=spec_path,
            output_dir=resolve_output_dir(spec_path, spec, args.out, settings.OUTPUT_DIR),
            seed=spec.seed,
        )
        logger.info(f"Running command {spec.command.value} from {spec_path}")
        data = api_router.dispatch(spec, context)
    except ToolkitError as exc:
        if exc.exit_code == 4:
            logger.error(f"{exc.code}: {exc.message}", exc_info=True)
        else:
            logger.warning(f"{exc.code}: {exc.message}")
        _emit(ErrorResponse(error=round_floats(exc.to_dict()["error"])))
        return exc.exit_code
    except Exception as exc:
        logger.error(f"Unhandled exception: {str(exc)}", exc_info=True)
        _emit(
            ErrorResponse(
                error={"code": "INTERNAL_ERROR", "message": "內部錯誤", "details": {"reason": str(exc)}}
            )
        )
        return 4
    _emit(CommandResponse(data=round_floats(data)))
    return 0


def main() -> None:
    configure_logging()
    sys.exit(run())


if __name__ == "__main__":
    main()
