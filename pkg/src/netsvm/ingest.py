"""Wireshark packet-list CSV exports.

Wireshark's *File > Export Packet Dissections > As CSV* writes seven columns::

    "No.","Time","Source","Destination","Protocol","Length","Info"

with every field double-quoted (RFC 4180). This module parses those exports
into :class:`PacketRecord` tuples, merges daily files into weekly batches and
writes batches back out in the same dialect.
"""

from __future__ import annotations

import csv
import io
import os
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import BinaryIO, Iterable, Sequence

from .errors import CaptureParseError, EmptyInput, MalformedRow

HEADER = ("No.", "Time", "Source", "Destination", "Protocol", "Length", "Info")

# C-locale numerals only: no thousands grouping, '.' as decimal separator.
_INT_RE = re.compile(r"[0-9]+\Z")
_TIME_RE = re.compile(r"[0-9]+(\.[0-9]+)?\Z")
_WS_RE = re.compile(r"\s")


@dataclass(frozen=True)
class PacketRecord:
    no: int
    time: float
    source: str
    destination: str
    protocol: str
    length: int
    info: str = ""

    def as_row(self):
        return (
            str(self.no),
            format_time(self.time),
            self.source,
            self.destination,
            self.protocol,
            str(self.length),
            self.info,
        )


@dataclass(frozen=True)
class CaptureBatch:
    """An ordered set of packets plus where they came from.

    ``source_files`` holds ``(name, record_count)`` pairs in concatenation
    order. ``rejected`` is only populated when parsing ran in
    skip-and-report mode.
    """

    label: str
    records: tuple = ()
    source_files: tuple = ()
    rejected: tuple = field(default=(), compare=False)

    def __len__(self):
        return len(self.records)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "source_files", tuple(tuple(s) for s in self.source_files))
        object.__setattr__(self, "rejected", tuple(self.rejected))
        total = sum(n for _, n in self.source_files)
        if self.source_files and total != len(self.records):
            raise ValueError(
                f"source_files account for {total} records but batch holds {len(self.records)}"
            )


def format_time(t):
    """Render a capture timestamp without exponent notation (``1e-05`` -> ``0.00001``)."""
    text = format(Decimal(repr(float(t))), "f")
    return text


def _looks_like_header(row):
    return len(row) >= 1 and row[0].strip().lower() in ("no.", "no")


def _check_token(value, name):
    if not value:
        return f"{name} is empty"
    if _WS_RE.search(value):
        return f"{name} {value!r} contains whitespace"
    return None


def _parse_row(row):
    """Return a PacketRecord or a reason string."""
    if len(row) != 7:
        return f"expected 7 columns, found {len(row)}"
    no, time, source, destination, protocol, length, info = row
    if not _INT_RE.match(no) or int(no) < 1:
        return f"No. {no!r} is not a positive integer"
    if not _TIME_RE.match(time):
        return f"Time {time!r} is not a non-negative decimal"
    if not _INT_RE.match(length) or int(length) < 1:
        return f"Length {length!r} is not a positive integer"
    for value, name in ((source, "Source"), (destination, "Destination"), (protocol, "Protocol")):
        reason = _check_token(value, name)
        if reason:
            return reason
    return PacketRecord(int(no), float(time), source, destination, protocol, int(length), info)


def parse_capture_csv(
    stream,
    *,
    delimiter=",",
    header_mode="auto",
    skip_malformed=False,
    label="",
    source_name=None,
):
    """Parse one Wireshark packet-list CSV export.

    Parameters
    ----------
    stream : binary file object, bytes or str
        UTF-8 encoded export. A leading BOM is ignored.
    delimiter : str
        Field separator; Wireshark always writes ``,``.
    header_mode : {"auto", "present", "absent"}
        ``auto`` treats the first row as a header when its first cell is
        ``No.``.
    skip_malformed : bool
        When False (default) any malformed row aborts the parse with
        :class:`CaptureParseError` listing every bad line. When True bad rows
        are dropped and reported in ``CaptureBatch.rejected``.
    label : str
        Batch label; defaults to the source name.

    Returns
    -------
    CaptureBatch
    """
    if header_mode not in ("auto", "present", "absent"):
        raise ValueError(f"unknown header_mode {header_mode!r}")
    if isinstance(stream, (bytes, bytearray)):
        raw = bytes(stream)
    elif isinstance(stream, str):
        raw = stream.encode("utf-8")
    else:
        raw = stream.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    if not raw.strip():
        raise EmptyInput(f"{source_name or 'input'} is empty")
    text = raw.decode("utf-8-sig")

    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter, strict=True)
    records = []
    bad = []
    first = True
    prev_line = 0
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            bad.append(MalformedRow(prev_line + 1, f"CSV quoting error: {exc}"))
            break
        line = prev_line + 1
        prev_line = reader.line_num
        if first:
            first = False
            if header_mode == "present" or (header_mode == "auto" and _looks_like_header(row)):
                continue
        if not row:
            continue
        parsed = _parse_row(row)
        if isinstance(parsed, str):
            bad.append(MalformedRow(line, parsed))
        else:
            records.append(parsed)

    name = source_name or label or "<stream>"
    if bad and not skip_malformed:
        raise CaptureParseError(bad, source=name)
    return CaptureBatch(
        label=label or name,
        records=records,
        source_files=[(name, len(records))],
        rejected=bad,
    )


def read_capture_csv(path, **options):
    """Parse a capture export from disk; the batch label defaults to the file stem."""
    path = os.fspath(path)
    options.setdefault("label", os.path.splitext(os.path.basename(path))[0])
    with open(path, "rb") as fh:
        return parse_capture_csv(fh, source_name=os.path.basename(path), **options)


def merge_batches(batches: Sequence[CaptureBatch], label: str) -> CaptureBatch:
    """Concatenate batches in argument order (e.g. seven daily files into one week)."""
    batches = list(batches)
    if not batches:
        raise ValueError("merge_batches needs at least one batch")
    records = []
    files = []
    for b in batches:
        records.extend(b.records)
        files.extend(b.source_files)
    return CaptureBatch(label=label, records=records, source_files=files)


def write_capture_csv(batch_or_records, sink: BinaryIO | None = None, *, header=True):
    """Write packets in Wireshark's CSV dialect (all fields quoted).

    Returns the encoded bytes when ``sink`` is None.
    """
    records: Iterable[PacketRecord]
    records = getattr(batch_or_records, "records", batch_or_records)
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, quoting=csv.QUOTE_ALL, lineterminator="\r\n")
    if header:
        writer.writerow(HEADER)
    for rec in records:
        writer.writerow(rec.as_row())
    data = buf.getvalue().encode("utf-8")
    if sink is None:
        return data
    sink.write(data)
    return None
