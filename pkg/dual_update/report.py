"""
Machine records and human tables.

A record is one line of ``key=value`` fields starting with ``kind=``::

    kind=joint x=1 y=-1 p=0.125

Numbers are written with 12 significant digits. Complex vectors and
matrices are flattened row-major into ``re,im`` pairs joined by ``;``.
"""

from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np

Value = Union[int, float, str, complex, List[complex]]


def format_number(x: float) -> str:
    """12 significant digits; negative zero prints as 0."""
    text = format(float(x), ".12g")
    return "0" if text == "-0" else text


def _format_complex(z: complex) -> str:
    return f"{format_number(z.real)},{format_number(z.imag)}"


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    if isinstance(value, (complex, np.complexfloating)):
        return _format_complex(complex(value))
    if isinstance(value, (np.ndarray, list, tuple)):
        flat = np.asarray(value, dtype=complex).reshape(-1)
        text = ";".join(_format_complex(z) for z in flat)
        # a lone entry keeps a ";" so it parses back as a list
        return text + ";" if flat.size == 1 else text
    text = str(value)
    if not text or any(c.isspace() for c in text):
        raise ValueError(f"Record values must be non-empty without whitespace: {text!r}")
    return text


def format_record(kind: str, **fields: Any) -> str:
    """
    Format one record line.

    Example:
        >>> format_record("joint", x=1.0, y=-1.0, p=0.125)
        'kind=joint x=1 y=-1 p=0.125'
    """
    parts = [f"kind={kind}"]
    parts.extend(f"{key}={format_value(value)}" for key, value in fields.items())
    return " ".join(parts)


def _parse_value(text: str) -> Value:
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if "," in text:
        try:
            pairs = [p.split(",") for p in text.split(";") if p]
            values = [complex(float(re_), float(im)) for re_, im in pairs]
        except ValueError:
            return text
        return values[0] if len(values) == 1 and ";" not in text else values
    return text


def parse_record(line: str) -> Dict[str, Value]:
    """
    Parse a record line back into a dict.

    Raises:
        ValueError: If the line is not a record.
    """
    fields: Dict[str, Value] = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"Malformed record field {token!r}")
        fields[key] = value if key == "kind" else _parse_value(value)
    if "kind" not in fields:
        raise ValueError(f"Record has no kind: {line!r}")
    return fields


def parse_records(text: str) -> List[Dict[str, Value]]:
    """Every record line of ``text``; other lines are skipped."""
    return [parse_record(line) for line in text.splitlines() if line.startswith("kind=")]


def format_table(headers: Sequence[str], rows: Iterable[Sequence[Any]], title: str = "") -> str:
    """
    Aligned columns; numbers right-aligned with 12 significant digits.
    """
    cells = [[format_value(c) if not isinstance(c, str) else c for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    numeric = [all(_is_number(row[k]) for row in cells) if cells else False
               for k in range(len(headers))]

    def line(values: Sequence[str]) -> str:
        return "  ".join(v.rjust(w) if num else v.ljust(w)
                         for v, w, num in zip(values, widths, numeric)).rstrip()

    out = [title] if title else []
    out.append(line(headers))
    out.append("  ".join("-" * w for w in widths))
    out.extend(line(row) for row in cells)
    return "\n".join(out)


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False
