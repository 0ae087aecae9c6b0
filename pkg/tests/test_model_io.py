import numpy as np
import pytest

from elmkit.model_io import load_model, save_model
from elmkit.numerics import Rng
from elmkit.pipeline import PipelineConfig, hml_predict, hml_train


def blob_data(n_per_class=25, seed=900):
    gen = Rng(seed).generator()
    centers = gen.uniform(0, 5, (3, 4))
    x = np.vstack([gen.normal(c, 0.4, (n_per_class, 4)) for c in centers])
    labels = np.repeat(np.arange(3), n_per_class)
    return x, labels


@pytest.mark.parametrize("head,head_size", [("sit2", 5), ("ridge", 1), ("elm", 9)])
def test_round_trip_preserves_predictions(tmp_path, head, head_size):
    x, labels = blob_data()
    cfg = PipelineConfig((4, 3), (10.0, 10.0, 1e4), head=head, head_size=head_size, seed=6)
    model = hml_train(x, labels, cfg)
    path = tmp_path / "model.bin"
    save_model(model, path)
    back = load_model(path)
    np.testing.assert_array_equal(hml_predict(model, x), hml_predict(back, x))
    assert back.config == model.config
    assert back.n_classes == model.n_classes
    assert back.metrics.train_accuracy == model.metrics.train_accuracy


def test_same_seed_byte_identical_files(tmp_path):
    x, labels = blob_data()
    cfg = PipelineConfig((4,), (10.0, 1e4), head="sit2", head_size=4, seed=11)
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    save_model(hml_train(x, labels, cfg), p1)
    save_model(hml_train(x, labels, cfg), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_different_seed_differs(tmp_path):
    x, labels = blob_data()
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    save_model(hml_train(x, labels, PipelineConfig((4,), (10.0, 1e4), seed=1, head_size=4)), p1)
    save_model(hml_train(x, labels, PipelineConfig((4,), (10.0, 1e4), seed=2, head_size=4)), p2)
    assert p1.read_bytes() != p2.read_bytes()


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTAMODELxxxx")
    with pytest.raises(ValueError, match="bad magic"):
        load_model(path)


def test_rejects_wrong_version(tmp_path):
    x, labels = blob_data(10)
    cfg = PipelineConfig((4,), (10.0, 1e4), head="ridge", seed=0)
    path = tmp_path / "model.bin"
    save_model(hml_train(x, labels, cfg), path)
    raw = bytearray(path.read_bytes())
    # bump the version digit inside the JSON header
    idx = raw.find(b'"format_version":1')
    raw[idx + len(b'"format_version":') : idx + len(b'"format_version":') + 1] = b"9"
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="unsupported model format"):
        load_model(path)


def test_no_stray_temp_files(tmp_path):
    x, labels = blob_data(10)
    cfg = PipelineConfig((4,), (10.0, 1e4), head="ridge", seed=0)
    save_model(hml_train(x, labels, cfg), tmp_path / "model.bin")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["model.bin"]
