import csv
import json
from pathlib import Path
from typing import Any, Generic, Iterable, Sequence, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from app.core.errors import SpecFileError
from app.services.report import format_float, round_floats

SchemaType = TypeVar("SchemaType", bound=BaseModel)
PathLike = Union[str, Path]


def write_json(path: PathLike, payload: Any) -> Path:
    """以固定格式寫出 JSON (排序鍵、固定有效位數)，相同內容產生相同位元組"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(round_floats(payload), indent=2, sort_keys=True, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    return path


class JSONFileCRUD(Generic[SchemaType]):
    """
    JSON 檔案讀寫基礎類，以 pydantic schema 驗證內容
    """

    def __init__(self, schema: Type[SchemaType]):
        self.schema = schema

    def read(self, path: PathLike) -> SchemaType:
        """
        讀取並驗證檔案

        Raises:
            SpecFileError: 檔案不存在、不是 JSON 或內容不符合 schema
        """
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise SpecFileError(f"找不到檔案: {path}", {"path": str(path)})
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecFileError(f"無法讀取 JSON: {path}", {"path": str(path), "reason": str(exc)})
        try:
            return self.schema.model_validate(raw)
        except ValidationError as exc:
            issues = [
                {"field": ".".join(str(part) for part in error["loc"]), "issue": error["msg"]}
                for error in exc.errors()
            ]
            raise SpecFileError(f"檔案內容不符合格式: {path}", {"path": str(path), "errors": issues})

    def write(self, path: PathLike, obj: SchemaType) -> Path:
        return write_json(path, obj.model_dump(mode="json"))
