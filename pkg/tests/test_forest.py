import numpy as np
import pytest

from nn2logic.aig import lower_netlist, simulate_batch
from nn2logic.forest import (
    RandomForestModel,
    exact_vote_sums,
    forest_from_text,
    forest_module,
    forest_to_text,
    predict_forest,
    train_forest,
)
from nn2logic.netlist import PROB_FRAC_BITS, build_forest_bit, simulate_netlist


def rows_to_words(rows: np.ndarray, m: int) -> list[int]:
    """Pack msb-first feature columns into the AIG's lsb-first input lanes."""
    words = []
    for k in range(rows.shape[1] // m):
        for j in range(m):  # AIG input j of word k is the word's bit j (lsb)
            col = rows[:, k * m + (m - 1 - j)]
            words.append(int(sum(int(b) << s for s, b in enumerate(col))))
    return words


def test_all_zero_labels_single_leaf():
    x = np.random.default_rng(0).integers(0, 2, size=(50, 6))
    model = train_forest(x, np.zeros(50, dtype=int), 3, 4, seed=1)
    for tree in model.trees:
        assert tree.root.feature is None
        assert tree.root.p0 == 1.0 and tree.root.p1 == 0.0
    assert predict_forest(model, x[0]) == 0


def test_label_equals_feature_three():
    rng = np.random.default_rng(1)
    x = rng.integers(0, 2, size=(200, 8)).astype(np.uint8)
    y = x[:, 3]
    model = train_forest(x, y, 4, 1, seed=2, feature_subsample=False)
    for tree in model.trees:
        assert tree.root.feature == 3
    assert all(predict_forest(model, row) == row[3] for row in x)


def test_xor_exhaustive():
    x = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.uint8)
    y = (x[:, 0] ^ x[:, 1]).astype(int)
    model = train_forest(x, y, 1, 2, seed=0, bootstrap=False, feature_subsample=False)
    assert all(predict_forest(model, row) == (row[0] ^ row[1]) for row in x)


def test_empty_dataset_rejected():
    with pytest.raises(ValueError):
        train_forest(np.zeros((0, 3)), np.zeros(0), 1, 2)


def test_determinism():
    rng = np.random.default_rng(3)
    x = rng.integers(0, 2, size=(80, 10))
    y = rng.integers(0, 2, size=80)
    a = train_forest(x, y, 3, 5, seed=9)
    b = train_forest(x, y, 3, 5, seed=9)
    assert forest_to_text(a) == forest_to_text(b)


def test_max_depth_respected():
    rng = np.random.default_rng(4)
    x = rng.integers(0, 2, size=(300, 12))
    y = rng.integers(0, 2, size=300)
    model = train_forest(x, y, 2, 3, seed=0)
    assert all(t.depth() <= 3 for t in model.trees)


def test_text_roundtrip():
    rng = np.random.default_rng(5)
    x = rng.integers(0, 2, size=(60, 7))
    y = rng.integers(0, 2, size=60)
    model = train_forest(x, y, 2, 4, seed=6)
    back = forest_from_text(forest_to_text(model))
    assert forest_to_text(back) == forest_to_text(model)
    for row in x[:20]:
        assert predict_forest(back, row) == predict_forest(model, row)


def test_tree_circuit_shape_depth2():
    x = np.array(
        [[0, 0, 0, 0], [0, 1, 0, 1], [1, 0, 1, 0], [1, 1, 1, 1]] * 4, dtype=np.uint8
    )
    y = np.array([0, 1, 1, 0] * 4)
    model = train_forest(x, y, 1, 2, seed=1, bootstrap=False, feature_subsample=False)
    tree = model.trees[0]
    assert tree.depth() == 2
    from nn2logic.netlist import build_tree

    net = build_tree(tree)
    comparators = sum(1 for g in net.gates if g.kind == "GTU")
    muxes = sum(1 for g in net.gates if g.kind == "MUX")
    assert comparators == 3  # one per internal node
    assert muxes == 6  # three mux levels per probability word


def test_stump_selects_right_leaf():
    x = np.array([[0], [1]] * 10, dtype=np.uint8)
    y = np.array([0, 1] * 10)
    model = train_forest(x, y, 1, 1, seed=0, bootstrap=False)
    net = build_forest_bit(model)
    assert simulate_netlist(net, ["1"]) == ["1"]
    assert simulate_netlist(net, ["0"]) == ["0"]


def test_forest_bit_netlist_matches_software():
    rng = np.random.default_rng(7)
    x = rng.integers(0, 2, size=(100, 6)).astype(np.uint8)
    y = rng.integers(0, 2, size=100)
    model = train_forest(x, y, 3, 3, seed=8)
    net = build_forest_bit(model)
    for row in x[:50]:
        got = simulate_netlist(net, [str(int(b)) for b in row])[0]
        assert int(got) == predict_forest(model, row)


def test_forest_module_cross_simulation():
    rng = np.random.default_rng(9)
    m, n_words = 4, 2
    x = rng.integers(0, 2, size=(120, m * n_words)).astype(np.uint8)
    models = [
        train_forest(x, rng.integers(0, 2, size=120), 2, 3, seed=10 + j)
        for j in range(m)
    ]
    net = forest_module(models)
    g = lower_netlist(net)
    rows = np.vstack([x, rng.integers(0, 2, size=(1000, m * n_words)).astype(np.uint8)])
    out = simulate_batch(g, rows_to_words(rows, m), len(rows))
    for j, model in enumerate(models):
        want = np.array([predict_forest(model, row) for row in rows])
        # output word bit j (msb-first) is AIG output index m-1-j (lsb-first)
        got = np.array([(out[m - 1 - j] >> s) & 1 for s in range(len(rows))])
        assert np.array_equal(got, want)


def test_constant_forest_module():
    x = np.zeros((10, 4), dtype=np.uint8)
    models = [train_forest(x, np.zeros(10, dtype=int), 2, 2, seed=j) for j in range(2)]
    net = forest_module(models)
    assert simulate_netlist(net, ["00", "11"]) == ["00"]


def test_probability_quantization_soundness():
    rng = np.random.default_rng(11)
    x = rng.integers(0, 2, size=(150, 5)).astype(np.uint8)
    y = rng.integers(0, 2, size=150)
    for t in (2, 3, 4):
        model = train_forest(x, y, t, 4, seed=t)
        margin = 2 * t * 2.0**-PROB_FRAC_BITS
        for row in x:
            s0, s1 = exact_vote_sums(model, row)
            if abs(s1 - s0) > margin:
                assert predict_forest(model, row) == int(s1 > s0)
