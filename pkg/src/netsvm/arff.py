"""ARFF datasets: model, reader, writer, capture conversion and the Remove filter.

Supported subset: ``numeric`` (also ``real``/``integer`` on input), nominal
``{v1,v2,...}`` and ``string`` attributes, dense data rows, ``?`` for missing
values, whole-line ``%`` comments, case-insensitive ``@`` keywords.

Cell representation inside :class:`Dataset` instances:

========  ======================================
numeric   ``float``
nominal   ``int`` index into ``Attribute.values``
string    ``str``
missing   ``None``
========  ======================================

Quoting on output: a token is wrapped in single quotes when it is empty, is
``?``, or contains whitespace, a comma, a quote, ``%``, ``{``, ``}`` or a
backslash. Inside quotes ``\\``, ``'``, newline, carriage return and tab are
escaped as ``\\\\``, ``\\'``, ``\\n``, ``\\r`` and ``\\t``.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    ArffSyntax,
    EmptyDataset,
    IndexOutOfRange,
    UnknownAttribute,
    UnsupportedFeature,
)

NUMERIC = "numeric"
NOMINAL = "nominal"
STRING = "string"

REMOVE_FILTER = "weka.filters.unsupervised.attribute.Remove"


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, NOMINAL, STRING):
            raise ValueError(f"unknown attribute kind {self.kind!r}")
        object.__setattr__(self, "values", tuple(self.values))
        if self.kind == NOMINAL:
            if not self.values:
                raise ValueError(f"nominal attribute {self.name!r} has no values")
            if len(set(self.values)) != len(self.values):
                raise ValueError(f"nominal attribute {self.name!r} has duplicate values")
        elif self.values:
            raise ValueError(f"{self.kind} attribute {self.name!r} cannot carry a value list")

    @classmethod
    def numeric(cls, name):
        return cls(name, NUMERIC)

    @classmethod
    def nominal(cls, name, values):
        return cls(name, NOMINAL, tuple(values))

    @classmethod
    def string(cls, name):
        return cls(name, STRING)

    @property
    def is_nominal(self):
        return self.kind == NOMINAL

    @property
    def is_numeric(self):
        return self.kind == NUMERIC

    def index_of(self, value):
        return self.values.index(value)


@dataclass(frozen=True)
class Dataset:
    relation: str
    attributes: tuple
    instances: tuple = ()
    class_index: int | None = None
    _checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "instances", tuple(tuple(r) for r in self.instances))
        if self.class_index is not None:
            if not 0 <= self.class_index < len(self.attributes):
                raise IndexOutOfRange(f"class_index {self.class_index} out of range")
            if not self.attributes[self.class_index].is_nominal:
                raise ValueError("class attribute must be nominal")
        if not self._checked:
            self.validate()

    def validate(self):
        width = len(self.attributes)
        for n, row in enumerate(self.instances):
            if len(row) != width:
                raise ValueError(f"instance {n} has {len(row)} values, expected {width}")
            for attr, cell in zip(self.attributes, row):
                if cell is None:
                    continue
                if attr.kind == NOMINAL:
                    if not isinstance(cell, int) or not 0 <= cell < len(attr.values):
                        raise ValueError(f"instance {n}: bad nominal index {cell!r} for {attr.name!r}")
                elif attr.kind == NUMERIC:
                    if not isinstance(cell, float):
                        raise ValueError(f"instance {n}: numeric cell {cell!r} for {attr.name!r} is not a float")
                elif not isinstance(cell, str):
                    raise ValueError(f"instance {n}: string cell {cell!r} for {attr.name!r} is not a str")

    def __len__(self):
        return len(self.instances)

    @property
    def attribute_names(self):
        return [a.name for a in self.attributes]

    def attribute_index(self, name):
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise UnknownAttribute(f"no attribute named {name!r}")

    def attribute(self, name):
        return self.attributes[self.attribute_index(name)]

    def column(self, name_or_index):
        """Raw cells of one attribute, in instance order."""
        idx = name_or_index if isinstance(name_or_index, int) else self.attribute_index(name_or_index)
        return [row[idx] for row in self.instances]

    def decoded_column(self, name_or_index):
        """Like :meth:`column` but nominal indices are replaced by their labels."""
        idx = name_or_index if isinstance(name_or_index, int) else self.attribute_index(name_or_index)
        attr = self.attributes[idx]
        if attr.is_nominal:
            vals = attr.values
            return [None if row[idx] is None else vals[row[idx]] for row in self.instances]
        return [row[idx] for row in self.instances]

    def with_class(self, name):
        return Dataset(self.relation, self.attributes, self.instances, self.attribute_index(name), _checked=True)


# -- conversion -------------------------------------------------------------


def _nominal_column(values):
    index = {}
    cells = []
    for v in values:
        i = index.get(v)
        if i is None:
            i = index[v] = len(index)
        cells.append(i)
    return tuple(index), cells


def from_capture(batch, *, info_nominal=False, relation=None) -> Dataset:
    """Convert a :class:`~netsvm.ingest.CaptureBatch` into the 7-attribute dataset.

    Nominal value lists follow first appearance in the records, as WEKA's CSV
    loader does. ``Info`` is a ``string`` attribute unless ``info_nominal``.
    """
    records = batch.records
    if not records:
        raise EmptyDataset(f"capture batch {batch.label!r} has no records")
    src_vals, src = _nominal_column(r.source for r in records)
    dst_vals, dst = _nominal_column(r.destination for r in records)
    proto_vals, proto = _nominal_column(r.protocol for r in records)
    attrs = [
        Attribute.numeric("No."),
        Attribute.numeric("Time"),
        Attribute.nominal("Source", src_vals),
        Attribute.nominal("Destination", dst_vals),
        Attribute.nominal("Protocol", proto_vals),
        Attribute.numeric("Length"),
    ]
    if info_nominal:
        info_vals, info = _nominal_column(r.info for r in records)
        attrs.append(Attribute.nominal("Info", info_vals))
    else:
        info = [r.info for r in records]
        attrs.append(Attribute.string("Info"))
    rows = [
        (float(r.no), float(r.time), s, d, p, float(r.length), i)
        for r, s, d, p, i in zip(records, src, dst, proto, info)
    ]
    return Dataset(relation or batch.label or "capture", attrs, rows, _checked=True)


def _compress_ranges(positions):
    out = []
    ps = sorted(positions)
    start = prev = ps[0]
    for p in ps[1:]:
        if p == prev + 1:
            prev = p
            continue
        out.append(f"{start}-{prev}" if prev > start else str(start))
        start = prev = p
    out.append(f"{start}-{prev}" if prev > start else str(start))
    return ",".join(out)


def parse_positions(text):
    """Parse a 1-based index list such as ``"1-3,7"`` or ``"1,2,3,7"``."""
    out = set()
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise ValueError(f"bad range {part!r}")
            out.update(range(lo, hi + 1))
        else:
            out.add(int(part))
    return out


def remove_attributes(d: Dataset, positions: Iterable[int]) -> Dataset:
    """WEKA ``Remove -R``: drop attributes at the given 1-based positions.

    The relation name gets ``-weka.filters.unsupervised.attribute.Remove-R<ranges>``
    appended. An empty position set returns ``d`` unchanged.
    """
    positions = set(positions)
    if not positions:
        return d
    width = len(d.attributes)
    for p in positions:
        if not 1 <= p <= width:
            raise IndexOutOfRange(f"attribute position {p} outside 1..{width}")
    keep = [i for i in range(width) if i + 1 not in positions]
    attrs = [d.attributes[i] for i in keep]
    rows = [tuple(row[i] for i in keep) for row in d.instances]
    class_index = None
    if d.class_index is not None and d.class_index in keep:
        class_index = keep.index(d.class_index)
    relation = f"{d.relation}-{REMOVE_FILTER}-R{_compress_ranges(positions)}"
    return Dataset(relation, attrs, rows, class_index, _checked=True)


# -- writer -----------------------------------------------------------------

_NEEDS_QUOTE = set(" \t\r\n,'\"%{}\\")
_ESCAPES = {"\\": "\\\\", "'": "\\'", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(c):
    if c in _ESCAPES:
        return _ESCAPES[c]
    if c == " " or c.isprintable():
        return c
    # control, line-break and non-space whitespace characters
    code = ord(c)
    return f"\\u{code:04x}" if code < 0x10000 else f"\\U{code:08x}"


def quote(token: str) -> str:
    if token == "" or token == "?" or any(c in _NEEDS_QUOTE or not c.isprintable() for c in token):
        return "'" + "".join(_escape(c) for c in token) + "'"
    return token


def format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _format_cell(attr, cell):
    if cell is None:
        return "?"
    if attr.kind == NUMERIC:
        return format_number(cell)
    if attr.kind == NOMINAL:
        return quote(attr.values[cell])
    return quote(cell)


def dumps_arff(d: Dataset) -> str:
    out = io.StringIO()
    out.write(f"@relation {quote(d.relation)}\n\n")
    for attr in d.attributes:
        if attr.kind == NOMINAL:
            kind = "{" + ",".join(quote(v) for v in attr.values) + "}"
        else:
            kind = attr.kind
        out.write(f"@attribute {quote(attr.name)} {kind}\n")
    out.write("\n@data\n")
    attrs = d.attributes
    for row in d.instances:
        out.write(",".join(_format_cell(a, c) for a, c in zip(attrs, row)))
        out.write("\n")
    return out.getvalue()


def write_arff(d: Dataset, sink) -> None:
    """Write ``d`` as UTF-8 ARFF text to a binary or text sink."""
    text = dumps_arff(d)
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))


def save_arff(d: Dataset, path) -> None:
    with open(path, "wb") as fh:
        write_arff(d, fh)


# -- reader -----------------------------------------------------------------

_UNESCAPES = {"n": "\n", "r": "\r", "t": "\t"}


def _read_token(text, pos, lineno, stops):
    """Read one (possibly quoted) token starting at ``pos``.

    Returns ``(value, quoted, new_pos)``; unquoted tokens stop at any char in
    ``stops`` and are stripped.
    """
    n = len(text)
    while pos < n and text[pos] in " \t":
        pos += 1
    if pos < n and text[pos] in "'\"":
        q = text[pos]
        pos += 1
        buf = []
        while True:
            if pos >= n:
                raise ArffSyntax(lineno, "unterminated quoted value")
            c = text[pos]
            if c == "\\" and pos + 1 < n:
                nxt = text[pos + 1]
                width = {"u": 4, "U": 8}.get(nxt)
                if width and pos + 2 + width <= n:
                    try:
                        buf.append(chr(int(text[pos + 2 : pos + 2 + width], 16)))
                        pos += 2 + width
                        continue
                    except ValueError:
                        pass
                buf.append(_UNESCAPES.get(nxt, nxt))
                pos += 2
                continue
            if c == q:
                pos += 1
                break
            buf.append(c)
            pos += 1
        return "".join(buf), True, pos
    start = pos
    while pos < n and text[pos] not in stops:
        pos += 1
    return text[start:pos].strip(), False, pos


def _split_list(text, lineno, sep=","):
    """Split a comma separated list of possibly quoted tokens."""
    out = []
    pos = 0
    n = len(text)
    if not text.strip():
        return out
    while True:
        value, quoted, pos = _read_token(text, pos, lineno, sep)
        out.append((value, quoted))
        while pos < n and text[pos] in " \t":
            pos += 1
        if pos >= n:
            break
        if text[pos] != sep:
            raise ArffSyntax(lineno, f"expected {sep!r} at column {pos + 1}")
        pos += 1
    return out


def _parse_attribute(rest, lineno):
    name, _, pos = _read_token(rest, 0, lineno, " \t{")
    if not name:
        raise ArffSyntax(lineno, "attribute without a name")
    spec = rest[pos:].strip()
    low = spec.lower()
    if low in ("numeric", "real", "integer"):
        return Attribute.numeric(name)
    if low == "string":
        return Attribute.string(name)
    if low.startswith("date") or low.startswith("relational"):
        raise UnsupportedFeature(f"line {lineno}: {spec.split()[0]} attributes are not supported")
    if spec.startswith("{"):
        if not spec.endswith("}"):
            raise ArffSyntax(lineno, "nominal specification not closed with '}'")
        values = [v for v, _ in _split_list(spec[1:-1], lineno)]
        if not values:
            raise ArffSyntax(lineno, f"nominal attribute {name!r} declares no values")
        if len(set(values)) != len(values):
            raise ArffSyntax(lineno, f"nominal attribute {name!r} repeats a value")
        return Attribute.nominal(name, values)
    raise ArffSyntax(lineno, f"unknown attribute type {spec!r}")


def loads_arff(text: str) -> Dataset:
    relation = None
    attrs = []
    rows = []
    in_data = False
    lookups = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            if not line.startswith("@"):
                raise ArffSyntax(lineno, "expected an @ declaration")
            parts = line.split(None, 1)
            keyword = parts[0].lower()
            rest = parts[1].strip() if len(parts) > 1 else ""
            if keyword == "@relation":
                relation, _, _ = _read_token(rest, 0, lineno, "")
            elif keyword == "@attribute":
                if relation is None:
                    raise ArffSyntax(lineno, "@attribute before @relation")
                attrs.append(_parse_attribute(rest, lineno))
            elif keyword == "@data":
                if relation is None:
                    raise ArffSyntax(lineno, "@data before @relation")
                in_data = True
                lookups = [
                    {v: i for i, v in enumerate(a.values)} if a.is_nominal else None for a in attrs
                ]
            else:
                raise ArffSyntax(lineno, f"unknown declaration {keyword}")
            continue
        if line.startswith("{"):
            raise UnsupportedFeature(f"line {lineno}: sparse data rows are not supported")
        cells = _split_list(line, lineno)
        if len(cells) != len(attrs):
            raise ArffSyntax(lineno, f"expected {len(attrs)} values, found {len(cells)}")
        row = []
        for attr, lookup, (value, quoted) in zip(attrs, lookups, cells):
            if value == "?" and not quoted:
                row.append(None)
            elif attr.kind == NUMERIC:
                try:
                    row.append(float(value))
                except ValueError:
                    raise ArffSyntax(lineno, f"{attr.name}: {value!r} is not numeric") from None
            elif attr.kind == NOMINAL:
                idx = lookup.get(value)
                if idx is None:
                    raise ArffSyntax(lineno, f"{attr.name}: {value!r} is not a declared value")
                row.append(idx)
            else:
                row.append(value)
        rows.append(tuple(row))
    if relation is None:
        raise ArffSyntax(0, "no @relation declaration")
    if not in_data:
        raise ArffSyntax(0, "no @data section")
    return Dataset(relation, attrs, rows, _checked=True)


def parse_arff(stream) -> Dataset:
    """Parse ARFF text from a binary/text stream, bytes or str."""
    if isinstance(stream, (bytes, bytearray)):
        text = bytes(stream).decode("utf-8-sig")
    elif isinstance(stream, str):
        text = stream
    else:
        data = stream.read()
        text = data.decode("utf-8-sig") if isinstance(data, (bytes, bytearray)) else data
    return loads_arff(text)


def load_arff(path) -> Dataset:
    with open(os.fspath(path), "rb") as fh:
        return parse_arff(fh)


def dataset_from_columns(relation: str, attributes: Sequence[Attribute], columns: Sequence[Sequence]) -> Dataset:
    """Build a Dataset from decoded columns (nominal cells given as labels)."""
    cols = []
    for attr, col in zip(attributes, columns):
        if attr.is_nominal:
            lookup = {v: i for i, v in enumerate(attr.values)}
            cols.append([None if v is None else lookup[v] for v in col])
        elif attr.is_numeric:
            cols.append([None if v is None or (isinstance(v, float) and math.isnan(v)) else float(v) for v in col])
        else:
            cols.append(list(col))
    rows = list(zip(*cols)) if cols else []
    return Dataset(relation, attributes, rows)
