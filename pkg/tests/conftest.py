import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# Protocol confusion matrix from the week-1 protocol run (rows actual, cols predicted)
PROTOCOL_LABELS = (
    "HTTP", "TCP", "DNS", "ARP", "TLSv1.2", "ICMPv6", "ICMPv3", "DHCP",
    "DHCPv6", "LLNMR", "QOSP", "TLSv1.1", "NEWS", "HTTP/HTML", "NTP",
)
PROTOCOL_MATRIX = np.array([
    [891, 456, 7, 0, 43, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0],
    [289, 37321, 5, 0, 65, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 25, 108, 0, 22, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 214, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [51, 74, 7, 0, 327, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 12, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 6, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 9, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
])

CAPTURE_ROWS = (
    '21590,218.567891,172.21.2.156,224.0.0.252,LWMR,75,Standard query 0x28dc ANY DESKTOP-9RFUE1\n'
    '21591,218.572138,172.21.2.156,74.125.68.93,QUIC,576,"Payload (Encrypted), PK0: 13, CID: 7105916818828189300"\n'
    '21592,218.590826,74.125.68.93,172.21.2.156,QUIC,112,"Payload (Encrypted), PK0: 14"\n'
    '21595,218.778905,172.21.2.156,180.243.51.204,TCP,60,TCP Retransmission(1) 3162 → 443 [SYN] Seq=64308\n'
    '21596,218.414111,NormalPr_F9:b6:41,Broadcast,ARP,42,Who has 172.21.2.156? Tell 0.0.0.0\n'
)


@pytest.fixture
def protocol_matrix():
    from netsvm.evalkit import ConfusionMatrix

    return ConfusionMatrix(PROTOCOL_LABELS, PROTOCOL_MATRIX)


@pytest.fixture
def capture_rows_batch():
    from netsvm.ingest import parse_capture_csv

    return parse_capture_csv(CAPTURE_ROWS.encode(), header_mode="absent", label="sample")


@pytest.fixture(scope="session")
def synthetic_csv(tmp_path_factory):
    from netsvm.ingest import write_capture_csv
    from netsvm.synthetic import synthetic_batch

    path = tmp_path_factory.mktemp("data") / "week1.csv"
    path.write_bytes(write_capture_csv(synthetic_batch(3000, seed=7, label="week1")))
    return path


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
