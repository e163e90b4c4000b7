import csv
import io
import json
import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netsvm.arff import Attribute, Dataset, from_capture
from netsvm.errors import AllMissing, NotNominal, NotNumeric, UnknownAttribute
from netsvm.ingest import CaptureBatch
from netsvm.report import OTHER, batch_report, length_stats, tabulate, weekly_report
from netsvm.synthetic import synthetic_batch


def lengths(values):
    return Dataset("t", [Attribute.numeric("Length")], [(None if v is None else float(v),) for v in values])


def nominal(values):
    uniq = list(dict.fromkeys(values))
    return Dataset("t", [Attribute.nominal("Protocol", uniq)], [(uniq.index(v),) for v in values])


def two_pass(values):
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def test_textbook_stats():
    s = length_stats(lengths([1, 2, 3]))
    assert (s.minimum, s.maximum, s.mean, s.stddev) == (1, 3, 2, 1)
    assert (s.distinct, s.unique, s.missing, s.count) == (3, 3, 0, 3)


def test_single_value_is_degenerate():
    s = length_stats(lengths([5]))
    assert s.stddev == 0 and s.degenerate


def test_missing_and_errors():
    s = length_stats(lengths([1, None, 3]))
    assert s.missing == 1 and s.count == 2
    with pytest.raises(AllMissing):
        length_stats(lengths([None, None]))
    with pytest.raises(NotNumeric):
        length_stats(nominal(["a"]), "Protocol")
    with pytest.raises(NotNominal):
        tabulate(lengths([1]), "Length")
    with pytest.raises(UnknownAttribute):
        tabulate(nominal(["a"]), "Nope")


def test_ten_thousand_values_match_two_pass():
    rng = random.Random(5)
    values = [rng.randint(42, 1514) for _ in range(10_000)]
    s = length_stats(lengths(values))
    mean, sd = two_pass(values)
    assert s.mean == pytest.approx(mean, rel=1e-9)
    assert s.stddev == pytest.approx(sd, rel=1e-9)
    assert (s.minimum, s.maximum) == (min(values), max(values))
    c = Counter(values)
    assert s.distinct == len(c) and s.unique == sum(1 for v in c.values() if v == 1)


def test_tabulate_order_and_ties():
    assert tabulate(nominal(["A", "A", "B"]), "Protocol") == [("A", 2), ("B", 1)]
    assert tabulate(nominal(["z", "b", "a", "b", "z"]), "Protocol") == [("b", 2), ("z", 2), ("a", 1)]


def test_top_k_remainder_row():
    values = list("aaaabbbccde")
    r = batch_report("w", from_capture(_batch_with_protocols(values)), top_k=3)
    assert r.protocol_counts[:3] == (("a", 4), ("b", 3), ("c", 2))
    assert r.protocol_counts[3] == (OTHER, 2)
    brute = Counter(values)
    assert r.protocol_counts[3][1] == sum(brute[v] for v in "de")
    assert sum(c for _, c in r.protocol_counts) == r.packet_count == 11


def _batch_with_protocols(protocols):
    from netsvm.ingest import PacketRecord

    recs = [PacketRecord(i + 1, 0.1 * i, "s", f"d{i % 3}", p, 60 + i) for i, p in enumerate(protocols)]
    return CaptureBatch("x", recs, [("x", len(recs))])


def test_empty_batch_among_others():
    good = synthetic_batch(300, seed=2)
    empty = CaptureBatch("empty", [], [("e.csv", 0)])
    w = weekly_report([("w1", good), ("w2", empty), ("w3", good)], top_k=3)
    counts = [r.packet_count for r in w.reports]
    assert counts == [300, 0, 300]
    assert w.reports[1].destination_counts == () and w.reports[1].length_stats is None
    assert w.reports[0] == w.reports[2].__class__(**{**w.reports[2].__dict__, "batch_label": "w1"})


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_synthetic_batch_against_brute_force(seed):
    batch = synthetic_batch(2000, seed=seed)
    d = from_capture(batch)
    r = batch_report("w", d, top_k=5)
    dst = Counter(rec.destination for rec in batch.records)
    expected = sorted(dst.items(), key=lambda vc: (-vc[1], vc[0]))
    assert list(r.destination_counts[:5]) == expected[:5]
    if len(expected) > 5:
        assert r.destination_counts[5] == (OTHER, sum(c for _, c in expected[5:]))
    mean, sd = two_pass([rec.length for rec in batch.records])
    assert r.length_stats.mean == pytest.approx(mean, rel=1e-12)
    assert r.length_stats.stddev == pytest.approx(sd, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["TCP", "DNS", "QUIC", "ARP", "HTTP"]), min_size=1, max_size=60), st.randoms())
def test_permutation_invariance(protocols, rnd):
    shuffled = protocols[:]
    rnd.shuffle(shuffled)
    a = batch_report("w", _batch_with_protocols(protocols))
    b = batch_report("w", _batch_with_protocols(shuffled))
    assert a.protocol_counts == b.protocol_counts
    assert a.packet_count == b.packet_count


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(42, 1514), min_size=2, max_size=200), st.randoms())
def test_stats_invariants(values, rnd):
    s = length_stats(lengths(values))
    shuffled = values[:]
    rnd.shuffle(shuffled)
    t = length_stats(lengths(shuffled))
    assert s.mean == pytest.approx(t.mean, rel=1e-12)
    assert s.stddev == pytest.approx(t.stddev, rel=1e-9, abs=1e-9)
    n = len(values)
    assert s.minimum <= s.mean + 1e-9 and s.mean <= s.maximum + 1e-9
    assert s.stddev <= (s.maximum - s.minimum) / 2 * math.sqrt(n / (n - 1)) + 1e-9


def _reports():
    return weekly_report(
        [("minggu-1", synthetic_batch(400, seed=1)), ("minggu-2", synthetic_batch(300, seed=2))],
        top_k=2,
        evaluations={"minggu-1": {"destination": 0.933081, "protocol": 0.972522, "train_percent": 70}},
    )


def test_text_render():
    text = _reports().render("text")
    assert "== minggu-1: 400 packets ==" in text
    assert "97.2522%" in text and "93.3081%" in text
    assert "StdDev" in text


def test_csv_render_sums():
    rows = list(csv.DictReader(io.StringIO(_reports().render("csv"))))
    for label in ("minggu-1", "minggu-2"):
        total = next(int(r["count"]) for r in rows if r["table"] == "packets" and r["batch"] == label)
        for table in ("destination", "protocol"):
            assert sum(int(r["count"]) for r in rows if r["table"] == table and r["batch"] == label) == total


def test_json_render():
    doc = json.loads(_reports().render("json"))
    assert [b["packet_count"] for b in doc["batches"]] == [400, 300]
    assert doc["accuracy"][0]["protocol"] == 0.972522
    assert list(doc["batches"][0]) == ["batch_label", "packet_count", "destination_counts", "protocol_counts", "length_stats"]


def test_format_fixture_from_attribute_panel():
    from netsvm.report import LengthStats, TrafficReport, WeeklyReport

    stats = LengthStats(42.0, 1514.0, 620.145, 642.287, 942, 0, 0, 133196)
    text = WeeklyReport([TrafficReport("minggu-1", 133196, (("TCP", 37321),), (), stats)]).render("text")
    assert "Minimum    42" in text
    assert "Maximum    1514" in text
    assert "Mean       620.145" in text
    assert "StdDev     642.287" in text
