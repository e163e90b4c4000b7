"""Descriptive traffic analytics per capture batch.

Per batch: packet count, the most frequent destinations and protocols, and
Length statistics as shown in WEKA's attribute panel (sample standard
deviation). Reports render as aligned text, long-format CSV or JSON.

Wording: the quantity is a packet count. Counting distinct users would need
de-duplication of NATed source addresses, which is not attempted.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .arff import NUMERIC, Dataset, from_capture
from .errors import AllMissing, NotNominal, NotNumeric

OTHER = "(other)"


@dataclass(frozen=True)
class LengthStats:
    minimum: float
    maximum: float
    mean: float
    stddev: float
    distinct: int
    unique: int
    missing: int
    count: int
    degenerate: bool = False

    def to_dict(self):
        return {
            "minimum": self.minimum,
            "maximum": self.maximum,
            "mean": self.mean,
            "stddev": self.stddev,
            "distinct": self.distinct,
            "unique": self.unique,
            "missing": self.missing,
            "count": self.count,
        }


@dataclass(frozen=True)
class TrafficReport:
    batch_label: str
    packet_count: int
    destination_counts: tuple
    protocol_counts: tuple
    length_stats: LengthStats | None
    evaluation: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "batch_label": self.batch_label,
            "packet_count": self.packet_count,
            "destination_counts": [{"value": v, "count": c} for v, c in self.destination_counts],
            "protocol_counts": [{"value": v, "count": c} for v, c in self.protocol_counts],
            "length_stats": None if self.length_stats is None else self.length_stats.to_dict(),
        }


def _rank(counter):
    return sorted(counter.items(), key=lambda vc: (-vc[1], vc[0]))


def tabulate(d: Dataset, attribute: str, top_k: int | None = None):
    """Exact value frequencies of a nominal attribute.

    Sorted by count descending, then value ascending; missing cells are not
    counted. Truncated to ``top_k`` rows when given.
    """
    attr = d.attribute(attribute)
    if not attr.is_nominal:
        raise NotNominal(f"attribute {attribute!r} is {attr.kind}")
    idx = d.attribute_index(attribute)
    counts = Counter(row[idx] for row in d.instances if row[idx] is not None)
    ranked = _rank({attr.values[i]: c for i, c in counts.items()})
    if top_k is not None:
        ranked = ranked[:top_k]
    return ranked


def with_remainder(ranked, top_k, total):
    """Cut ``ranked`` to ``top_k`` rows and append an ``(other)`` row for the rest."""
    if top_k is None or len(ranked) <= top_k:
        return tuple(ranked)
    head = list(ranked[:top_k])
    rest = total - sum(c for _, c in head)
    return tuple(head + [(OTHER, rest)])


def length_stats(d: Dataset, attribute: str = "Length") -> LengthStats:
    """Minimum, maximum, mean and sample standard deviation of a numeric attribute.

    A single observation gives ``stddev == 0`` with ``degenerate`` set.
    """
    attr = d.attribute(attribute)
    if attr.kind != NUMERIC:
        raise NotNumeric(f"attribute {attribute!r} is {attr.kind}")
    cells = d.column(attribute)
    values = [v for v in cells if v is not None]
    missing = len(cells) - len(values)
    if not values:
        raise AllMissing(f"attribute {attribute!r} has no values")
    # Welford's update keeps the variance accurate for large packet counts
    mean = 0.0
    m2 = 0.0
    for k, x in enumerate(values, start=1):
        delta = x - mean
        mean += delta / k
        m2 += delta * (x - mean)
    n = len(values)
    std = math.sqrt(m2 / (n - 1)) if n > 1 else 0.0
    freq = Counter(values)
    return LengthStats(
        minimum=min(values),
        maximum=max(values),
        mean=mean,
        stddev=std,
        distinct=len(freq),
        unique=sum(1 for c in freq.values() if c == 1),
        missing=missing,
        count=n,
        degenerate=n == 1,
    )


def batch_report(label, d, top_k=None, destination="Destination", protocol="Protocol", length="Length"):
    """Build one :class:`TrafficReport`; ``d`` may be a Dataset, a CaptureBatch or None."""
    if d is not None and not isinstance(d, Dataset):
        d = from_capture(d) if len(d.records) else None
    if d is None or len(d) == 0:
        return TrafficReport(label, 0, (), (), None)
    n = len(d)
    dst = with_remainder(tabulate(d, destination), top_k, n)
    proto = with_remainder(tabulate(d, protocol), top_k, n)
    try:
        stats = length_stats(d, length)
    except AllMissing:
        stats = None
    return TrafficReport(label, n, dst, proto, stats)


@dataclass
class WeeklyReport:
    reports: list
    top_k: int | None = None
    accuracy: list = field(default_factory=list)

    def to_dict(self):
        doc = {"top_k": self.top_k, "batches": [r.to_dict() for r in self.reports]}
        if self.accuracy:
            doc["accuracy"] = self.accuracy
        return doc

    def render(self, fmt="text"):
        if fmt == "text":
            return render_text(self)
        if fmt == "csv":
            return render_csv(self)
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"
        raise ValueError(f"unknown report format {fmt!r}")


def weekly_report(batches, top_k=None, evaluations=None) -> WeeklyReport:
    """One report per ``(label, data)`` pair, plus an optional accuracy table.

    ``evaluations`` maps a batch label to ``{"destination": accuracy,
    "protocol": accuracy, "train_percent": p}`` (any key optional).
    """
    reports = [batch_report(label, d, top_k) for label, d in batches]
    accuracy = []
    if evaluations:
        for r in reports:
            ev = evaluations.get(r.batch_label)
            if ev:
                accuracy.append({"batch_label": r.batch_label, **ev})
    return WeeklyReport(reports, top_k, accuracy)


# -- rendering ----------------------------------------------------------------


def _table(headers, rows):
    cols = list(zip(*([headers] + rows))) if rows else [[h] for h in headers]
    widths = [max(len(str(c)) for c in col) for col in cols]
    numeric = [all(isinstance(r[i], (int, float)) for r in rows) and rows for i in range(len(headers))]

    def fmt(row):
        return "  ".join(
            f"{str(c):>{w}}" if num else f"{str(c):<{w}}" for c, w, num in zip(row, widths, numeric)
        ).rstrip()

    sep = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(headers), sep] + [fmt(r) for r in rows]) + "\n"


def _num(v):
    return f"{v:.3f}".rstrip("0").rstrip(".") if isinstance(v, float) else str(v)


def render_text(w: WeeklyReport) -> str:
    out = []
    for r in w.reports:
        out.append(f"== {r.batch_label}: {r.packet_count} packets ==\n")
        out.append(_table(["Destination", "Count"], [list(vc) for vc in r.destination_counts]))
        out.append(_table(["Protocol", "Count"], [list(vc) for vc in r.protocol_counts]))
        if r.length_stats is not None:
            s = r.length_stats
            out.append(
                _table(
                    ["Statistic", "Value"],
                    [["Minimum", _num(s.minimum)], ["Maximum", _num(s.maximum)], ["Mean", _num(s.mean)], ["StdDev", _num(s.stddev)]],
                )
            )
            out.append(f"Missing: {s.missing}  Distinct: {s.distinct}  Unique: {s.unique}\n")
        out.append("")
    out.append(_table(["No", "Batch", "Destination", "Count"], combined_rows(w, "destination_counts", by_rank=True)))
    out.append(_table(["No", "Batch", "Protocol", "Count"], combined_rows(w, "protocol_counts", by_rank=False)))
    if w.accuracy:
        rows = []
        for n, a in enumerate(w.accuracy, start=1):
            rows.append(
                [
                    n,
                    a["batch_label"],
                    _pct(a.get("destination")),
                    _pct(a.get("protocol")),
                    "" if a.get("train_percent") is None else f"{a['train_percent']:g}%",
                ]
            )
        out.append(_table(["No", "Batch", "Destination", "Protocol", "Percentage"], rows))
    return "\n".join(out)


def _pct(v):
    return "" if v is None else f"{100 * v:.4f}%"


def combined_rows(w: WeeklyReport, key, by_rank=True):
    """Rows for a cross-batch table.

    ``by_rank`` interleaves batches (all rank-1 rows, then rank-2, ...);
    otherwise rows are grouped batch by batch. The ``(other)`` remainder row
    is left out.
    """
    per_batch = [(r.batch_label, [vc for vc in getattr(r, key) if vc[0] != OTHER]) for r in w.reports]
    rows = []
    if by_rank:
        depth = max((len(t) for _, t in per_batch), default=0)
        for k in range(depth):
            for label, table in per_batch:
                if k < len(table):
                    rows.append([label, *table[k]])
    else:
        for label, table in per_batch:
            rows.extend([label, *vc] for vc in table)
    return [[n, *row] for n, row in enumerate(rows, start=1)]


def render_csv(w: WeeklyReport) -> str:
    """Long format: ``table,batch,rank,value,count``."""
    buf = io.StringIO(newline="")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["table", "batch", "rank", "value", "count"])
    for r in w.reports:
        wr.writerow(["packets", r.batch_label, "", "", r.packet_count])
        for table, rows in (("destination", r.destination_counts), ("protocol", r.protocol_counts)):
            for rank, (v, c) in enumerate(rows, start=1):
                wr.writerow([table, r.batch_label, "" if v == OTHER else rank, v, c])
        if r.length_stats is not None:
            for k, v in r.length_stats.to_dict().items():
                wr.writerow(["length", r.batch_label, "", k, repr(v) if isinstance(v, float) else v])
    for a in w.accuracy:
        for k in ("destination", "protocol"):
            if a.get(k) is not None:
                wr.writerow(["accuracy", a["batch_label"], "", k, repr(a[k])])
    return buf.getvalue()
