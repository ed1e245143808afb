"""Line-oriented report format.

Machine-readable form::

    fmt-workbench-report 1
    key=value
    ...

Keys are dotted identifiers, values never contain newlines; booleans are
``true``/``false``. The human form prints the same records aligned.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Tuple

from .errors import WorkbenchError

HEADER = "fmt-workbench-report"
VERSION = 1


class ReportFormatError(WorkbenchError):
    pass


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    text = str(value)
    return text.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(text: str) -> str:
    out, i = [], 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def to_kv(records: Iterable[Tuple[str, object]]) -> str:
    lines = [f"{HEADER} {VERSION}"]
    for key, value in records:
        if "=" in key or "\n" in key or "\r" in key:
            raise ReportFormatError(f"bad key {key!r}")
        lines.append(f"{key}={format_value(value)}")
    return "\n".join(lines) + "\n"


def parse_kv(text: str) -> List[Tuple[str, str]]:
    # only "\n" separates records; a trailing "\r" comes from CRLF files
    lines = [line[:-1] if line.endswith("\r") else line for line in text.split("\n")]
    if not lines or lines[0].strip() != f"{HEADER} {VERSION}":
        raise ReportFormatError("missing or unsupported report header")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ReportFormatError(f"line {lineno}: expected key=value")
        records.append((key, _unescape(value)))
    return records


def as_dict(records: Iterable[Tuple[str, object]]) -> Dict[str, str]:
    return {k: format_value(v) if not isinstance(v, str) else v for k, v in records}


def to_text(title: str, records: Iterable[Tuple[str, object]]) -> str:
    records = list(records)
    width = max((len(k) for k, _ in records), default=0)
    lines = [title, "-" * len(title)]
    for key, value in records:
        lines.append(f"{key.ljust(width)}  {format_value(value)}")
    return "\n".join(lines) + "\n"


def parse_bool(value: str) -> bool:
    if value == "true":
        return True
    if value == "false":
        return False
    raise ReportFormatError(f"not a boolean: {value!r}")


def format_tuple(t) -> str:
    return ",".join(str(x) for x in t)


def parse_tuple(text: str) -> Tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(x) for x in text.split(","))
