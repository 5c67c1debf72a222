"""
輸出格式化

所有浮點數以 FLOAT_DIGITS 位有效數字輸出；文字報表以 jinja2 樣板產生。
"""

from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.config import settings

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"


def format_float(value: float, digits: Optional[int] = None) -> str:
    places = settings.FLOAT_DIGITS if digits is None else digits
    return f"{float(value):.{places}g}"


def format_fraction(value: Fraction) -> str:
    """精確有理數字串 "num/den" """
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def round_floats(obj: Any, digits: Optional[int] = None) -> Any:
    """遞迴地將浮點數截為固定有效位數，使 JSON 輸出穩定"""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(format_float(obj, digits))
    if isinstance(obj, Fraction):
        return float(format_float(float(obj), digits))
    if isinstance(obj, Mapping):
        return {key: round_floats(value, digits) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(value, digits) for value in obj]
    return obj


def format_point(point: Mapping[str, float]) -> str:
    return "(" + ", ".join(f"{axis}={format_float(value)}" for axis, value in point.items()) + ")"


def _environment() -> Environment:
    env = Environment(
        loader=FileSystemLoader(str(TEMPLATE_DIR)),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
        undefined=StrictUndefined,
    )
    env.filters["fmt"] = format_float
    return env


def render_template(name: str, **context: Any) -> str:
    return _environment().get_template(name).render(**context)


def render_compare_report(context: Dict[str, Any]) -> str:
    """
    區域比較文字報表

    Args:
        context: compare 指令的結果 (channel, inputs, mi, matrix, witnesses, counterexample)
    """
    view = dict(context)
    view["witnesses"] = [
        {**item, "point_text": format_point(item["point"])} for item in context.get("witnesses", [])
    ]
    counterexample = dict(context["counterexample"])
    counterexample["point_text"] = format_point(counterexample["point"])
    view["counterexample"] = counterexample
    return render_template("compare.txt.j2", **view)
