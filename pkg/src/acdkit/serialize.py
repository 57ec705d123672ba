"""JSON wire formats: arbitrary-precision integers as 0x-hex strings."""

from __future__ import annotations

import json
from fractions import Fraction


def int_to_hex(x: int) -> str:
    return ("-0x%x" % -x) if x < 0 else ("0x%x" % x)


def hex_to_int(s) -> int:
    if isinstance(s, int):
        return s
    s = s.strip()
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    if not (s.startswith("0x") or s.startswith("0X")):
        # decimal strings are accepted too
        val = int(s, 10)
    else:
        val = int(s, 16)
    return -val if neg else val


def beta_to_json(beta: Fraction):
    """Emit exact small fractions as floats when lossless, else as strings."""
    f = float(beta)
    if Fraction(str(f)) == beta:
        return f
    return f"{beta.numerator}/{beta.denominator}"


def beta_from_json(value) -> Fraction:
    """Parse a beta value exactly.

    Floats are read through their decimal repr so 0.2 means 1/5, not the
    nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/")
        return Fraction(int(num), int(den))
    return Fraction(str(value))


def matrix_to_json(rows) -> list[list[str]]:
    return [[int_to_hex(x) for x in row] for row in rows]


def matrix_from_json(data) -> list[list[int]]:
    return [[hex_to_int(x) for x in row] for row in data]


def dump_json(obj, path=None) -> str:
    """Stable serialization: sorted keys, no whitespace drift."""
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def load_json(path_or_text):
    if isinstance(path_or_text, str) and path_or_text.lstrip().startswith(("{", "[")):
        return json.loads(path_or_text)
    with open(path_or_text) as fh:
        return json.load(fh)
