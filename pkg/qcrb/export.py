from __future__ import annotations
import csv, io, json

from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence


def format_number(x: Any) -> str:
    """
    12 significant digits; scientific notation when |x| < 1e-4 (x != 0) or |x| >= 1e6.
    """
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    v = float(x)
    if v == 0.0:
        return "0"
    if abs(v) < 1e-4 or abs(v) >= 1e6:
        return f"{v:.11e}"
    return f"{v:.12g}"


def _columns(rows: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]]) -> List[str]:
    if columns is not None:
        return list(columns)
    seen: List[str] = []
    for r in rows:
        for k in r.keys():
            if k not in seen:
                seen.append(k)
    return seen


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return obj


def render_json(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def render_csv(rows: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    rows = list(rows)
    if not rows:
        return ""  # nothing to do
    headers = _columns(rows, columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    for r in rows:
        w.writerow([format_number(r.get(h)) for h in headers])
    return buf.getvalue()


def render_table(rows: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    """Plain text table, columns padded to their widest cell."""
    rows = list(rows)
    if not rows:
        return ""
    headers = _columns(rows, columns)
    cells = [[format_number(r.get(h)) for h in headers] for r in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for c in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip())
    return "\n".join(lines) + "\n"


def write_json(path: str, obj: Any) -> None:
    Path(path).write_text(render_json(obj))


def write_csv(path: str, rows: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> None:
    with open(path, "w", newline="") as f:
        f.write(render_csv(rows, columns))


def write_table(path: str, rows: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> None:
    Path(path).write_text(render_table(rows, columns))


EXTENSION_FORMATS = {".csv": "csv", ".txt": "table", ".json": "json"}


def format_for_path(path: str) -> Optional[str]:
    """Output format implied by the file extension, or None."""
    return EXTENSION_FORMATS.get(Path(path).suffix.lower())


def write_auto(
    path: str, data: Any, columns: Optional[Sequence[str]] = None, fmt: Optional[str] = None
) -> None:
    """
    Minimal adapter: fmt when given, else by extension: .csv -> csv; .txt -> table; otherwise -> json.
    """
    fmt = fmt or format_for_path(path) or "json"
    is_table = isinstance(data, list) and all(isinstance(r, dict) for r in data)
    if fmt == "csv" and is_table:
        write_csv(path, data, columns)  # table → CSV
    elif fmt == "table" and is_table:
        write_table(path, data, columns)
    elif isinstance(data, dict):
        write_json(path, data)  # mapping → JSON
    else:
        # fallback JSON
        write_json(path, {"data": data})
