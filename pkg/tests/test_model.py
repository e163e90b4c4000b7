import io
from dataclasses import replace

import numpy as np
import pytest

import netsvm.svm.model as model_mod
from netsvm.arff import Attribute, Dataset
from netsvm.errors import CorruptModel, SingleClass, UnseenNominal, VersionMismatch
from netsvm.prep import EncodedDataset, SplitSpec, encode, fit_encoder
from netsvm.svm import (
    KernelSpec,
    SvmBinaryModel,
    SvmOvoModel,
    TrainConfig,
    dumps_model,
    load_model,
    loads_model,
    predict,
    save_model,
    train_ovo,
)


def clusters(k, per=20, d=2, seed=0, spread=0.3):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=4.0, size=(k, d))
    X = np.vstack([c + spread * rng.normal(size=(per, d)) for c in centers])
    y = np.repeat(np.arange(k), per)
    return EncodedDataset(X, y, tuple(f"c{i}" for i in range(k)), None)


def test_two_classes_one_binary():
    m = train_ovo(clusters(2))
    assert len(m.binaries) == 1
    assert m.binaries[0].class_pair == (0, 1)


def test_fifteen_classes_give_105_pairs_in_order():
    m = train_ovo(clusters(15, per=4))
    pairs = [b.class_pair for b in m.binaries]
    assert len(pairs) == 105
    assert pairs == sorted(pairs)
    assert len(set(pairs)) == 105 and all(i < j for i, j in pairs)


def test_pairs_only_see_their_own_rows(monkeypatch):
    data = clusters(4, per=5)
    # tag each row with its label so the training rows reveal their origin
    tagged = replace(data, features=np.column_stack([data.labels.astype(float), data.features]))
    seen = []
    real_fit = model_mod._fit

    def spy(X, y, config, class_pair, backend):
        seen.append((class_pair, X.shape[0], set(X[:, 0].astype(int))))
        return real_fit(X, y, config, class_pair, backend)

    monkeypatch.setattr(model_mod, "_fit", spy)
    train_ovo(tagged)
    assert len(seen) == 6
    for (i, j), rows, origin in seen:
        assert origin == {i, j}
        assert rows == 10


def test_single_class_rejected():
    data = clusters(2)
    with pytest.raises(SingleClass):
        train_ovo(data.subset(np.flatnonzero(data.labels == 0)))


def test_absent_class_votes_for_present_side():
    data = clusters(3, per=10)
    # label 1 declared but absent from training rows
    subset = data.subset(np.flatnonzero(data.labels != 1))
    m = train_ovo(subset)
    assert m.train_class_counts == (10, 0, 10)
    assert (m.predict(subset.features) != 1).all()


def test_binary_orientation():
    data = clusters(2, seed=3)
    m = train_ovo(data)
    f = m.binaries[0].decision_function(data.features)
    assert ((f > 0) == (data.labels == 1)).all()
    assert (m.predict(data.features) == data.labels).all()


def _fixed(i, j, sign):
    return SvmBinaryModel(np.empty((0, 1)), np.empty(0), float(sign), KernelSpec("linear"), (i, j))


def test_vote_cycle_breaks_to_lowest_index():
    # 0 beats 1, 1 beats 2, 2 beats 0: one vote each
    bins = [_fixed(0, 1, -1), _fixed(0, 2, +1), _fixed(1, 2, -1)]
    m = SvmOvoModel(("a", "b", "c"), bins, None, TrainConfig())
    assert m.votes([[0.0]]).tolist() == [[1, 1, 1]]
    assert predict(m, [0.0]) == 0


def test_unanimous_vote():
    bins = [_fixed(0, 1, +1), _fixed(0, 2, +1), _fixed(1, 2, -1)]
    m = SvmOvoModel(("a", "b", "c"), bins, None, TrainConfig())
    assert predict(m, [0.0]) == 1


def test_scaling_coefficients_keeps_labels():
    data = clusters(4, per=15, seed=4, spread=1.5)
    m = train_ovo(data)
    rng = np.random.default_rng(0)
    probes = rng.normal(scale=4.0, size=(300, 2))
    base = m.predict(probes)
    for scale in (1e-3, 0.5, 7.0, 1e4):
        scaled = replace(
            m, binaries=[replace(b, coefficients=b.coefficients * scale, bias=b.bias * scale) for b in m.binaries]
        )
        assert np.array_equal(scaled.predict(probes), base)


def _raw_dataset(n=200, seed=0):
    rng = np.random.default_rng(seed)
    attrs = [
        Attribute.nominal("Destination", ["10.0.0.1", "10.0.0.2", "8.8.8.8"]),
        Attribute.nominal("Protocol", ["TCP", "DNS", "QUIC"]),
        Attribute.numeric("Length"),
    ]
    centre = {0: 60.0, 1: 420.0, 2: 1250.0}
    rows = []
    for _ in range(n):
        p = int(rng.integers(3))
        rows.append((int(rng.integers(3)), p, float(round(centre[p] + rng.normal(scale=30.0)))))
    return Dataset("raw", attrs, rows)


def _trained(n_jobs=1):
    d = _raw_dataset()
    spec = fit_encoder(d, "Protocol")
    e = encode(d, spec)
    return train_ovo(e, TrainConfig(KernelSpec("rbf")), n_jobs=n_jobs, split=SplitSpec(70), removed=(1, 2, 3, 7)), e


def test_save_load_preserves_predictions(tmp_path):
    m, e = _trained()
    path = tmp_path / "m.model"
    save_model(m, path)
    back = load_model(path)
    rng = np.random.default_rng(1)
    rows = rng.uniform(-0.2, 1.2, size=(1000, e.features.shape[1]))
    assert np.array_equal(back.predict(rows), m.predict(rows))
    for b0, b1 in zip(m.binaries, back.binaries):
        assert np.array_equal(b0.decision_function(rows), b1.decision_function(rows))
    assert back.label_names == m.label_names
    assert back.encoder == m.encoder
    assert back.split == m.split and back.removed == m.removed
    assert back.train_class_counts == m.train_class_counts
    assert dumps_model(back) == dumps_model(m)


def test_stream_sinks():
    m, _ = _trained()
    t, b = io.StringIO(), io.BytesIO()
    save_model(m, t)
    save_model(m, b)
    assert t.getvalue().encode() == b.getvalue()
    assert dumps_model(load_model(io.BytesIO(b.getvalue()))) == t.getvalue()


def test_raw_instance_prediction():
    m, _ = _trained()
    assert m.label_names[predict(m, {"Destination": "8.8.8.8", "Length": 1250.0})] == "QUIC"
    with pytest.raises(UnseenNominal):
        predict(m, {"Destination": "1.1.1.1", "Length": 60.0})


def test_deterministic_bytes_across_parallelism():
    a, _ = _trained(n_jobs=1)
    b, _ = _trained(n_jobs=4)
    assert dumps_model(a) == dumps_model(b)


def test_header_layout():
    m, _ = _trained()
    lines = dumps_model(m).splitlines()
    assert lines[0] == "netsvm-model 1"
    assert lines[1].startswith("kernel rbf degree 3 gamma ")
    assert lines[-1] == "end"


def test_every_truncation_is_corrupt():
    m, _ = _trained()
    text = dumps_model(m)
    lines = text.splitlines(keepends=True)
    for cut in range(1, len(lines)):
        with pytest.raises(CorruptModel):
            loads_model("".join(lines[:cut]))
    # cut inside a support-vector line
    with pytest.raises(CorruptModel):
        loads_model(text[: text.index("\nend") - 5])


def test_wrong_version():
    text = dumps_model(_trained()[0]).replace("netsvm-model 1", "netsvm-model 2", 1)
    with pytest.raises(VersionMismatch):
        loads_model(text)


def test_corrupt_number_reports_line():
    lines = dumps_model(_trained()[0]).splitlines()
    idx = next(i for i, s in enumerate(lines) if s.startswith("bias "))
    lines[idx] = "bias not-a-number"
    with pytest.raises(CorruptModel) as info:
        loads_model("\n".join(lines))
    assert info.value.line == idx + 1


def test_not_a_model():
    with pytest.raises(CorruptModel):
        loads_model("hello\n")
