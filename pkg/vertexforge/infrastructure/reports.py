"""
Infrastructure Layer - JSONL Reports
Строки отчёта: JSON с отсортированными ключами, скаляры "p/q"
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import IO, Dict, Iterable, Optional, Union

from vertexforge.domain.scalar import format_scalar


def _default(value):
    if isinstance(value, Fraction):
        return format_scalar(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value, key=repr)
    raise TypeError(f"{type(value).__name__} is not serializable in a report")


def format_line(line: Dict[str, object]) -> str:
    """One compact JSON object; byte-identical for equal lines"""
    return json.dumps(line, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=_default)


def format_report(lines: Iterable[Dict[str, object]]) -> str:
    return "".join(format_line(line) + "\n" for line in lines)


def write_report(lines: Iterable[Dict[str, object]], out: Optional[Union[str, Path, IO[str]]] = None) -> str:
    """Write to a path or stream; the text is returned as well"""
    text = format_report(lines)
    if isinstance(out, (str, Path)):
        Path(out).write_text(text, encoding="utf-8")
    elif out is not None:
        out.write(text)
    return text
