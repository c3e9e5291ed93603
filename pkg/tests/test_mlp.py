import numpy as np
import pytest

from nn2logic.datasets import (
    LabeledDataset,
    make_overlapping_gaussians,
    read_dataset,
    stratified_split,
    write_dataset,
)
from nn2logic.fixedpoint import FixedPointFormat, from_int, quantize
from nn2logic.mlp import (
    DenseLayer,
    Mlp,
    MlpStructureError,
    WeightsParseError,
    extract_distillation_sets,
    forward_capture,
    load_weights,
    loss_and_grad,
    predict,
    predict_batch,
    quantize_to_bits,
    save_weights,
    train,
)


def identity_net(n: int) -> Mlp:
    return Mlp([DenseLayer(np.eye(n), np.zeros(n), "identity")])


def test_forward_capture_zero_net():
    net = Mlp([DenseLayer(np.zeros((3, 2)), np.zeros(3), "relu")])
    acts = forward_capture(net, [1.0, 2.0])
    assert len(acts) == 1
    assert np.all(acts[0] == 0.0)


def test_forward_capture_identity():
    acts = forward_capture(identity_net(3), [1.5, -2.0, 0.25])
    assert np.allclose(acts[-1], [1.5, -2.0, 0.25])


def test_forward_capture_relu_kills_negative():
    net = Mlp([DenseLayer(np.array([[1.0, -1.0]]), np.zeros(1), "relu")])
    acts = forward_capture(net, [2.0, 3.0])
    assert np.allclose(acts[0], [0.0])


def test_forward_capture_width_mismatch():
    with pytest.raises(ValueError):
        forward_capture(identity_net(3), [1.0, 2.0])


def test_predict_tie_breaks_low():
    net = Mlp([DenseLayer(np.zeros((2, 2)), np.zeros(2), "identity")])
    assert predict(net, [1.0, -1.0]) == 0


def test_structure_validation():
    with pytest.raises(MlpStructureError):
        Mlp([])
    with pytest.raises(MlpStructureError):
        Mlp(
            [
                DenseLayer(np.zeros((3, 2)), np.zeros(3), "relu"),
                DenseLayer(np.zeros((1, 4)), np.zeros(1), "identity"),
            ]
        )


def test_weights_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    net = Mlp(
        [
            DenseLayer(rng.normal(size=(20, 27)), rng.normal(size=20), "relu"),
            DenseLayer(rng.normal(size=(2, 20)), rng.normal(size=2), "identity"),
        ],
        scaler=None,
    )
    path = tmp_path / "w.txt"
    save_weights(net, path)
    loaded = load_weights(path)
    for x in rng.normal(size=(100, 27)):
        assert np.allclose(forward_capture(net, x)[-1], forward_capture(loaded, x)[-1])
    for a, b in zip(net.layers, loaded.layers):
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.bias, b.bias)


def test_weights_roundtrip_with_scaler(tmp_path):
    data = make_overlapping_gaussians(60, 4, seed=3)
    net = train(data, hidden_nodes=3, epochs=20, seed=0)
    path = tmp_path / "w.txt"
    save_weights(net, path)
    loaded = load_weights(path)
    assert np.array_equal(loaded.scaler.minimum, net.scaler.minimum)
    assert np.array_equal(loaded.scaler.maximum, net.scaler.maximum)
    x = data.features[0]
    assert np.allclose(forward_capture(net, x)[-1], forward_capture(loaded, x)[-1])


def test_load_rejects_empty_network(tmp_path):
    path = tmp_path / "w.txt"
    path.write_text("mlp 0\n")
    with pytest.raises(MlpStructureError):
        load_weights(path)


def test_load_reports_line_numbers(tmp_path):
    path = tmp_path / "w.txt"
    path.write_text("mlp 1\nlayer 2 1 relu\n1.0 1.0\n")
    with pytest.raises(WeightsParseError, match="line 3"):
        load_weights(path)


def test_load_simple_sum_net(tmp_path):
    path = tmp_path / "w.txt"
    path.write_text("mlp 1\nlayer 2 1 identity\n1.0 1.0 0.0\n")
    net = load_weights(path)
    assert np.allclose(forward_capture(net, [2.0, 3.5])[-1], [5.5])


def test_train_linearly_separable():
    data = make_overlapping_gaussians(200, 2, seed=1, separation=8.0)
    net = train(data, hidden_nodes=8, epochs=300, seed=0)
    acc = float(np.mean(predict_batch(net, data.features) == data.labels))
    assert acc >= 0.95


def test_train_single_class_warns():
    data = LabeledDataset(np.random.default_rng(0).normal(size=(30, 3)), np.zeros(30))
    with pytest.warns(UserWarning):
        net = train(data, hidden_nodes=4, epochs=200, seed=0)
    assert np.all(predict_batch(net, data.features) == 0)


def test_train_xor():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    data = LabeledDataset(np.tile(x, (10, 1)), np.tile(y, 10))
    net = train(data, hidden_nodes=20, epochs=2000, seed=0)
    assert np.array_equal(predict_batch(net, x), y)


def test_train_determinism():
    data = make_overlapping_gaussians(100, 5, seed=2)
    a = train(data, hidden_nodes=6, epochs=50, seed=9)
    b = train(data, hidden_nodes=6, epochs=50, seed=9)
    for la, lb in zip(a.layers, b.layers):
        assert np.array_equal(la.weights, lb.weights)
        assert np.array_equal(la.bias, lb.bias)


def test_gradient_check_against_finite_differences():
    rng = np.random.default_rng(0)
    layers = [
        DenseLayer(rng.normal(size=(4, 3)), rng.normal(size=4), "relu"),
        DenseLayer(rng.normal(size=(2, 4)), rng.normal(size=2), "identity"),
    ]
    x = rng.normal(size=(12, 3))
    y = rng.integers(0, 2, size=12)
    _, grads = loss_and_grad(layers, x, y)
    h = 1e-5
    for li, layer in enumerate(layers):
        for arr, g in ((layer.weights, grads[li][0]), (layer.bias, grads[li][1])):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + h
                up, _ = loss_and_grad(layers, x, y)
                arr[idx] = orig - h
                dn, _ = loss_and_grad(layers, x, y)
                arr[idx] = orig
                num = (up - dn) / (2 * h)
                denom = max(abs(num), abs(g[idx]), 1e-8)
                assert abs(num - g[idx]) / denom < 1e-4


FMT = FixedPointFormat(4, 2)


def test_quantize_to_bits_matches_scalar():
    vals = np.array([[0.0, 1.0], [-0.5, 10.0]])
    bits = quantize_to_bits(vals, FMT)
    expect = [quantize(v, FMT) for v in (0.0, 1.0, -0.5, 10.0)]
    got = "".join(str(b) for b in bits.reshape(-1))
    assert got == "".join(expect)


def test_distillation_set_count_and_shapes():
    rng = np.random.default_rng(4)
    net = Mlp(
        [
            DenseLayer(rng.normal(size=(20, 27)), np.zeros(20), "relu"),
            DenseLayer(rng.normal(size=(2, 20)), np.zeros(2), "identity"),
        ]
    )
    data = LabeledDataset(rng.normal(size=(5, 27)), rng.integers(0, 2, size=5))
    sets = extract_distillation_sets(net, data, FMT)
    assert len(sets) == 22
    first = sets[0]
    assert first.feature_bits.shape == (5, 27 * 4)
    assert first.label_bits.shape == (5, 4)
    last = sets[-1]
    assert last.layer_index == 2 and last.node_index == 1
    assert last.feature_bits.shape == (5, 20 * 4)


def test_distillation_zero_net_all_zero_labels():
    net = Mlp([DenseLayer(np.zeros((3, 2)), np.zeros(3), "relu")])
    data = LabeledDataset(np.zeros((4, 2)), np.zeros(4))
    sets = extract_distillation_sets(net, data, FMT)
    for s in sets:
        assert np.all(s.label_bits == 0)


def test_distillation_single_sample():
    net = Mlp([DenseLayer(np.ones((1, 2)), np.zeros(1), "relu")])
    data = LabeledDataset(np.array([[0.5, 0.25]]), np.array([1]))
    sets = extract_distillation_sets(net, data, FMT)
    assert all(s.label_bits.shape == (1, 4) for s in sets)


def test_distillation_labels_requantize():
    data = make_overlapping_gaussians(40, 6, seed=5)
    net = train(data, hidden_nodes=4, epochs=30, seed=1)
    fmt = FixedPointFormat(8, 6)
    for s in extract_distillation_sets(net, data, fmt):
        for row in s.label_bits:
            word = "".join(str(b) for b in row)
            from nn2logic.fixedpoint import dequantize

            assert quantize(dequantize(word, fmt), fmt) == word


def test_dataset_csv_roundtrip(tmp_path):
    data = make_overlapping_gaussians(25, 3, seed=6)
    path = tmp_path / "d.csv"
    write_dataset(data, path)
    back = read_dataset(path)
    assert np.array_equal(back.features, data.features)
    assert np.array_equal(back.labels, data.labels)
    assert back.feature_names == data.feature_names


def test_stratified_split_deterministic_and_disjoint():
    data = make_overlapping_gaussians(100, 3, seed=7)
    tr1, te1 = stratified_split(data, 0.2, seed=11)
    tr2, te2 = stratified_split(data, 0.2, seed=11)
    assert np.array_equal(tr1, tr2) and np.array_equal(te1, te2)
    assert len(set(tr1) & set(te1)) == 0
    assert len(tr1) + len(te1) == 100
    labels = data.labels[te1]
    assert abs(labels.mean() - 0.5) < 0.2


def test_from_int_helper():
    assert from_int(-2, 4) == "1110"
    assert from_int(4, 4) == "0100"
