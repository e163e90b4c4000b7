import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netsvm.errors import CaptureParseError, EmptyInput
from netsvm.ingest import (
    HEADER,
    CaptureBatch,
    PacketRecord,
    merge_batches,
    parse_capture_csv,
    read_capture_csv,
    write_capture_csv,
)

HEADER_LINE = '"No.","Time","Source","Destination","Protocol","Length","Info"\n'


def test_quic_row_21591(capture_rows_batch):
    rec = capture_rows_batch.records[1]
    assert rec == PacketRecord(
        21591, 218.572138, "172.21.2.156", "74.125.68.93", "QUIC", 576,
        "Payload (Encrypted), PK0: 13, CID: 7105916818828189300",
    )


def test_rows_in_file_order(capture_rows_batch):
    assert [r.no for r in capture_rows_batch.records] == [21590, 21591, 21592, 21595, 21596]
    assert capture_rows_batch.records[-1].source == "NormalPr_F9:b6:41"


def test_header_only_gives_empty_batch():
    b = parse_capture_csv(HEADER_LINE.encode())
    assert len(b) == 0
    assert b.source_files[0][1] == 0


def test_header_auto_detection_and_modes():
    body = '1,0.000000,10.0.0.1,10.0.0.2,TCP,60,x\n'
    assert len(parse_capture_csv((HEADER_LINE + body).encode())) == 1
    assert len(parse_capture_csv(body.encode())) == 1
    assert len(parse_capture_csv(body.encode(), header_mode="present")) == 0
    with pytest.raises(CaptureParseError):
        parse_capture_csv((HEADER_LINE + body).encode(), header_mode="absent")


def test_six_columns_is_malformed_at_its_line():
    text = HEADER_LINE + '1,0.1,a,b,TCP,60,ok\n2,0.2,a,b,TCP,60\n'
    with pytest.raises(CaptureParseError) as info:
        parse_capture_csv(text.encode())
    (row,) = info.value.rows
    assert row.line == 3
    assert "7 columns" in row.reason


def test_all_malformed_rows_are_collected():
    text = '1,0.1,a,b,TCP,0,zero length\n2,1.234,5,a,b,TCP,60\n3,1,5,a,b\n4,0.5,a,b,TCP,60,ok\n'
    with pytest.raises(CaptureParseError) as info:
        parse_capture_csv(text.encode())
    assert [r.line for r in info.value.rows] == [1, 2, 3]


def test_skip_and_report():
    text = '1,0.1,a,b,TCP,60,ok\n2,0.2,a,b,TCP\n3,0.3,a,b,UDP,70,ok\n'
    b = parse_capture_csv(text.encode(), skip_malformed=True)
    assert [r.no for r in b.records] == [1, 3]
    assert [r.line for r in b.rejected] == [2]


@pytest.mark.parametrize(
    "field,value",
    [
        ("time", "218,572138"),    # locale decimal comma
        ("time", "1.2e3"),
        ("time", "-1.0"),
        ("length", "1,514"),       # thousands grouping
        ("length", "0"),
        ("no", "0"),
        ("no", "x"),
        ("protocol", "TLS v1"),
        ("protocol", ""),
        ("source", ""),
    ],
)
def test_field_validation(field, value):
    row = {"no": "1", "time": "0.5", "source": "a", "destination": "b", "protocol": "TCP", "length": "60"}
    row[field] = value
    cells = [row[k] for k in ("no", "time", "source", "destination", "protocol", "length")] + ["info"]
    text = ",".join(f'"{c}"' for c in cells) + "\n"
    with pytest.raises(CaptureParseError):
        parse_capture_csv(text.encode())


def test_empty_input():
    with pytest.raises(EmptyInput):
        parse_capture_csv(b"")
    with pytest.raises(EmptyInput):
        parse_capture_csv(b"   \n")


def test_quoted_field_with_embedded_quotes_and_newline():
    text = '1,0.5,a,b,HTTP,100,"GET ""/x,y"" \nHTTP/1.1"\n2,0.6,a,b,TCP,60,z\n'
    b = parse_capture_csv(text.encode())
    assert b.records[0].info == 'GET "/x,y" \nHTTP/1.1'
    assert b.records[1].no == 2


def test_bom_and_crlf():
    text = "﻿" + HEADER_LINE.replace("\n", "\r\n") + '1,0.5,a,b,TCP,60,x\r\n'
    assert len(parse_capture_csv(text.encode("utf-8"))) == 1


def test_read_from_disk_sets_label(tmp_path):
    p = tmp_path / "senin.csv"
    p.write_text(HEADER_LINE + '1,0.5,a,b,TCP,60,x\n')
    b = read_capture_csv(p)
    assert b.label == "senin"
    assert b.source_files == (("senin.csv", 1),)


def _batch(label, n, start=1):
    recs = [PacketRecord(start + i, 0.1 * i, "s", "d", "TCP", 60 + i, f"r{i}") for i in range(n)]
    return CaptureBatch(label, recs, [(label, n)])


def test_merge_concatenates_in_order():
    a, b = _batch("A", 3), _batch("B", 2, start=1)
    m = merge_batches([a, b], "w1")
    assert len(m) == 5
    assert m.records == a.records + b.records
    assert m.source_files == (("A", 3), ("B", 2))
    assert m.label == "w1"


def test_merge_single_is_identity():
    a = _batch("A", 4)
    assert merge_batches([a], "w1").records == a.records


def test_merge_requires_a_batch():
    with pytest.raises(ValueError):
        merge_batches([], "w")


def test_merge_seven_daily_files_matches_line_count(tmp_path):
    sizes = [5, 0, 12, 7, 1, 30, 3]
    paths = []
    for day, n in enumerate(sizes):
        p = tmp_path / f"day{day}.csv"
        p.write_bytes(write_capture_csv(_batch(f"d{day}", n)))
        paths.append(p)
    merged = merge_batches([read_capture_csv(p) for p in paths], "minggu-1")
    # independent recount: physical data lines, header excluded
    recount = sum(len(p.read_bytes().splitlines()) - 1 for p in paths)
    assert len(merged) == recount == sum(sizes)
    assert [n for _, n in merged.source_files] == sizes


def test_merge_is_associative():
    a, b, c = _batch("A", 2), _batch("B", 3), _batch("C", 1)
    left = merge_batches([merge_batches([a, b], "x"), c], "w")
    right = merge_batches([a, merge_batches([b, c], "y")], "w")
    assert left.records == right.records


def test_batch_count_invariant():
    with pytest.raises(ValueError):
        CaptureBatch("x", [PacketRecord(1, 0.0, "a", "b", "TCP", 60)], [("f", 2)])


token = st.text(alphabet=st.characters(blacklist_categories=("Zs", "Cc", "Cs", "Zl", "Zp")), min_size=1, max_size=12)
records = st.builds(
    PacketRecord,
    no=st.integers(1, 10**9),
    time=st.floats(0, 1e6, allow_nan=False).map(lambda t: round(t, 6)),
    source=token,
    destination=token,
    protocol=token,
    length=st.integers(1, 65535),
    info=st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")) | st.sampled_from("\n\t\""), max_size=40),
)


@settings(max_examples=150, deadline=None)
@given(st.lists(records, max_size=20))
def test_write_parse_round_trip(recs):
    data = write_capture_csv(CaptureBatch("x", recs, [("x", len(recs))]))
    if not recs:
        assert len(parse_capture_csv(data)) == 0
        return
    back = parse_capture_csv(io.BytesIO(data))
    assert back.records == tuple(recs)


def test_writer_header():
    out = write_capture_csv([PacketRecord(1, 1e-05, "a", "b", "TCP", 60, 'x "y"')])
    lines = out.decode().splitlines()
    assert lines[0] == ",".join(f'"{h}"' for h in HEADER)
    assert lines[1] == '"1","0.00001","a","b","TCP","60","x ""y"""'
