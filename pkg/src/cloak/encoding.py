"""Runtime value types and their canonical byte encoding.

Types are written the way the policy renders them: ``uint``, ``bool``,
``address``, ``uint[]``, ``address[3]``, ``mapping(address=>uint)``.
Runtime values are plain Python: ``int``, ``bool``, 20-byte ``bytes``,
``list`` and ``dict``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

UINT_BITS = 256
UINT_MOD = 1 << UINT_BITS
ADDRESS_LEN = 20


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class VType:
    kind: str  # uint | bool | address | array | mapping
    elem: Optional[VType] = None  # array element or mapping value
    key: Optional[VType] = None
    length: Optional[int] = None  # fixed array length

    def __str__(self) -> str:
        if self.kind == "array":
            return f"{self.elem}[{'' if self.length is None else self.length}]"
        if self.kind == "mapping":
            return f"mapping({self.key}=>{self.elem})"
        return self.kind


UINT = VType("uint")
BOOL = VType("bool")
ADDRESS = VType("address")

_MAPPING_RE = re.compile(r"^mapping\((\w+)=>(.*)\)$")
_ARRAY_RE = re.compile(r"^(.*)\[(\d*)\]$")


@lru_cache(maxsize=None)
def parse_type(text: str) -> VType:
    text = text.replace(" ", "")
    m = _MAPPING_RE.match(text)
    if m:
        return VType("mapping", parse_type(m.group(2)), parse_type(m.group(1)))
    m = _ARRAY_RE.match(text)
    if m:
        return VType("array", parse_type(m.group(1)), length=int(m.group(2)) if m.group(2) else None)
    if text in ("uint", "uint256"):
        return UINT
    if text in ("bool", "address"):
        return VType(text)
    raise EncodingError(f"unsupported type {text!r}")


def as_type(t) -> VType:
    return t if isinstance(t, VType) else parse_type(t)


def default_value(t):
    t = as_type(t)
    if t.kind == "uint":
        return 0
    if t.kind == "bool":
        return False
    if t.kind == "address":
        return bytes(ADDRESS_LEN)
    if t.kind == "array":
        return [default_value(t.elem) for _ in range(t.length or 0)]
    return {}


def check_value(value, t) -> None:
    """Raise EncodingError unless ``value`` is a well-formed value of type ``t``."""
    t = as_type(t)
    if t.kind == "uint":
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < UINT_MOD:
            raise EncodingError(f"expected uint, got {value!r}")
    elif t.kind == "bool":
        if not isinstance(value, bool):
            raise EncodingError(f"expected bool, got {value!r}")
    elif t.kind == "address":
        if not isinstance(value, bytes) or len(value) != ADDRESS_LEN:
            raise EncodingError(f"expected 20-byte address, got {value!r}")
    elif t.kind == "array":
        if not isinstance(value, list):
            raise EncodingError(f"expected array, got {type(value).__name__}")
        if t.length is not None and len(value) != t.length:
            raise EncodingError(f"expected {t.length} elements, got {len(value)}")
        for v in value:
            check_value(v, t.elem)
    else:
        if not isinstance(value, dict):
            raise EncodingError(f"expected mapping, got {type(value).__name__}")
        for k, v in value.items():
            check_value(k, t.key)
            check_value(v, t.elem)


def _length(n: int) -> bytes:
    return n.to_bytes(32, "big")


def encode(value, t) -> bytes:
    """Canonical encoding; mappings drop default-valued entries and sort by key bytes."""
    t = as_type(t)
    check_value(value, t)
    return _encode(value, t)


def _encode(value, t: VType) -> bytes:
    if t.kind == "uint":
        return value.to_bytes(32, "big")
    if t.kind == "bool":
        return b"\x01" if value else b"\x00"
    if t.kind == "address":
        return bytes(value)
    if t.kind == "array":
        return _length(len(value)) + b"".join(_encode(v, t.elem) for v in value)
    default = _encode(default_value(t.elem), t.elem)
    entries = []
    for k, v in value.items():
        ev = _encode(v, t.elem)
        if ev != default:
            entries.append((_encode(k, t.key), ev))
    entries.sort()
    return _length(len(entries)) + b"".join(k + v for k, v in entries)


# -- JSON-friendly form (addresses as 0x-hex) ---------------------------------

def to_json(value, t):
    t = as_type(t)
    if t.kind == "address":
        return "0x" + value.hex()
    if t.kind == "array":
        return [to_json(v, t.elem) for v in value]
    if t.kind == "mapping":
        items = sorted(value.items(), key=lambda kv: _encode(kv[0], t.key))
        return [[to_json(k, t.key), to_json(v, t.elem)] for k, v in items]
    return value


def from_json(data, t):
    t = as_type(t)
    if t.kind == "address":
        if not isinstance(data, str) or not data.startswith("0x"):
            raise EncodingError(f"expected 0x-prefixed address, got {data!r}")
        try:
            raw = bytes.fromhex(data[2:])
        except ValueError as e:
            raise EncodingError(str(e)) from None
        check_value(raw, t)
        return raw
    if t.kind == "array":
        if not isinstance(data, list):
            raise EncodingError(f"expected list, got {data!r}")
        out = [from_json(v, t.elem) for v in data]
        check_value(out, t)
        return out
    if t.kind == "mapping":
        if not isinstance(data, list):
            raise EncodingError(f"expected entry list, got {data!r}")
        return {from_json(k, t.key): from_json(v, t.elem) for k, v in data}
    check_value(data, t)
    return data


def encode_record(entries) -> bytes:
    """Encoding of named values ``(name, type, value)``, kept in the given order."""
    out = [_length(len(entries))]
    for name, t, value in entries:
        raw = name.encode("utf-8")
        out.append(_length(len(raw)) + raw + encode(value, t))
    return b"".join(out)
