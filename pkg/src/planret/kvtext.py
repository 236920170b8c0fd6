"""Line-oriented ``key = value`` text blocks.

One format serves the case sidecars, checkpoint headers, train reports,
index metadata, and the run config. Keys are bare identifiers; values are
written so that parsing them back is exact (floats via repr, lists
comma-joined). Blank lines and ``#`` comments are ignored on parse.
"""

from __future__ import annotations


def dumps(pairs):
    """Serialize an ordered iterable of (key, value) pairs."""
    lines = []
    for key, value in pairs:
        lines.append(f"{key} = {encode_value(value)}")
    return "\n".join(lines) + "\n"


def loads(text):
    """Parse into an insertion-ordered dict of raw string values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def encode_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(encode_value(v) for v in value)
    return str(value)


def parse_bool(s):
    if s in ("true", "false"):
        return s == "true"
    raise ValueError(f"expected true/false, got {s!r}")


def parse_ints(s):
    return tuple(int(v) for v in s.split(","))


def parse_floats(s):
    return tuple(float(v) for v in s.split(","))
