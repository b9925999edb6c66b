"""
Structured text reports.

A report is a header line followed by one ``key<TAB>class<TAB>value`` record
per line.  Every value carries its exactness class:

* ``exact``  rational, rendered ``num/den``
* ``int``    integer count or index
* ``real``   toleranced float, 17 significant digits
* ``bool``   ``true`` / ``false``
* ``text``   anything else (backslash-escaped)
* ``none``   missing value

Nested dicts and sequences flatten into dotted keys.  Records keep their
insertion order, so identical inputs give byte-identical files.
"""

from __future__ import annotations

from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import Any, Iterator, Mapping

import mpmath
import numpy as np

HEADER = "shadowlab-report v1"


def format_value(v: Any) -> tuple[str, str]:
    """(class, rendered value) for a scalar."""
    if v is None:
        return "none", "-"
    if isinstance(v, (bool, np.bool_)):
        return "bool", "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return "int", str(int(v))
    if isinstance(v, Fraction):
        return "exact", f"{v.numerator}/{v.denominator}"
    if isinstance(v, (float, np.floating)):
        return "real", format(float(v), ".17g")
    if isinstance(v, mpmath.mpf):
        return "real", mpmath.nstr(v, 17, strip_zeros=False)
    s = str(v)
    return "text", (s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")
                    .replace("\r", "\\r"))


def parse_value(cls: str, text: str) -> Any:
    """Inverse of :func:`format_value` (reals come back as floats)."""
    if cls == "none":
        return None
    if cls == "bool":
        return text == "true"
    if cls == "int":
        return int(text)
    if cls == "exact":
        return Fraction(text)
    if cls == "real":
        return float(text)
    if cls == "text":
        out, i = [], 0
        while i < len(text):
            ch = text[i]
            if ch == "\\" and i + 1 < len(text):
                out.append({"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}[text[i + 1]])
                i += 2
            else:
                out.append(ch)
                i += 1
        return "".join(out)
    raise ValueError(f"unknown value class {cls!r}")


def flatten(prefix: str, obj: Any) -> Iterator[tuple[str, Any]]:
    """Yield (dotted key, scalar) pairs."""
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, Mapping):
        if not obj:
            yield prefix + ".count", 0
        for k, v in obj.items():
            yield from flatten(f"{prefix}.{k}" if prefix else str(k), v)
    elif isinstance(obj, (list, tuple)):
        yield prefix + ".count", len(obj)
        for i, v in enumerate(obj):
            yield from flatten(f"{prefix}.{i}", v)
    else:
        yield prefix, obj


def render(records: Mapping[str, Any]) -> str:
    lines = [HEADER]
    for key, v in flatten("", records):
        cls, text = format_value(v)
        lines.append(f"{key}\t{cls}\t{text}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> dict[str, Any]:
    """Flat {key: value} from a rendered report."""
    # records end in "\n" only; other line breaks may occur inside text values
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != HEADER:
        raise ValueError("missing report header")
    out = {}
    for line in lines[1:]:
        key, cls, val = line.split("\t", 2)
        out[key] = parse_value(cls, val)
    return out


def report_records(rep: Any) -> dict[str, Any]:
    """Records for a PropertyReport-like dataclass, with a verdict line."""
    rec: dict[str, Any] = {}
    if is_dataclass(rep):
        for f in fields(rep):
            rec[f.name] = getattr(rep, f.name)
    for attr in ("failure_count", "ok"):
        if hasattr(rep, attr):
            rec[attr] = getattr(rep, attr)
    return rec
