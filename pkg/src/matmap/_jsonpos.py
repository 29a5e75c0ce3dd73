"""JSON decoding that remembers where each object and array came from.

The stdlib decoder discards positions, which makes validation messages
vague. This module swaps in the pure-Python scanner with hooks that record
the character span of every object/array, so a key path can be mapped back
to a line number.
"""

from __future__ import annotations

import json
import re
from decimal import Decimal
from json import decoder as _jdec
from json import scanner as _jscan


class JSONDocError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(message)
        self.line = line


class PosDict(dict):
    start: int = 0
    end: int = 0


class PosList(list):
    start: int = 0
    end: int = 0


def _make_decoder() -> json.JSONDecoder:
    dec = json.JSONDecoder(parse_float=Decimal, object_pairs_hook=list)

    def parse_object(s_and_end, *args, **kwargs):
        s, idx = s_and_end
        pairs, end = _jdec.JSONObject(s_and_end, *args, **kwargs)
        obj = PosDict()
        for key, value in pairs:
            if key in obj:
                line = s.count("\n", 0, idx) + 1
                raise JSONDocError(f"duplicate key {key!r}", line)
            obj[key] = value
        obj.start, obj.end = idx - 1, end
        return obj, end

    def parse_array(s_and_end, scan_once, *args, **kwargs):
        s, idx = s_and_end
        values, end = _jdec.JSONArray(s_and_end, scan_once, *args, **kwargs)
        arr = PosList(values)
        arr.start, arr.end = idx - 1, end
        return arr, end

    dec.parse_object = parse_object
    dec.parse_array = parse_array
    dec.scan_once = _jscan.py_make_scanner(dec)
    return dec


def loads(text: str):
    """Parse ``text``; floats become :class:`~decimal.Decimal`."""
    try:
        return _make_decoder().decode(text)
    except json.JSONDecodeError as exc:
        raise JSONDocError(exc.msg, exc.lineno) from None


class Document:
    """Parsed JSON plus the source text, for line lookups."""

    def __init__(self, text: str):
        self.text = text
        self.root = loads(text)

    def line_at(self, pos: int) -> int:
        return self.text.count("\n", 0, pos) + 1

    def line_of(self, node, key: str | None = None) -> int | None:
        """Line of ``node`` itself, or of ``key`` inside it when given."""
        if not isinstance(node, (PosDict, PosList)):
            return None
        if key is None or not isinstance(node, PosDict):
            return self.line_at(node.start)
        children = [v for v in node.values() if isinstance(v, (PosDict, PosList))]
        pattern = re.compile(r'"%s"\s*:' % re.escape(json.dumps(key)[1:-1]))
        for m in pattern.finditer(self.text, node.start, node.end):
            if not any(ch.start <= m.start() < ch.end for ch in children):
                return self.line_at(m.start())
        return self.line_at(node.start)
