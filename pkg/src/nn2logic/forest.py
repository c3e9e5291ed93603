"""Per-bit random forests over binary features and their circuit modules.

Features and labels are bits, so every split threshold is 0.5 and a CART
split is just a choice of feature column.  Trees grow on bootstrap samples
with ceil(sqrt(F)) candidate features per split by default; leaves keep the
empirical class frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from nn2logic import netlist as nl

THRESHOLD = 0.5


@dataclass
class TreeNode:
    feature: int | None = None  # None marks a leaf
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    p0: float = 0.0
    p1: float = 0.0


@dataclass
class DecisionTree:
    root: TreeNode
    max_depth: int
    n_features: int

    def leaf_for(self, row) -> TreeNode:
        node = self.root
        while node.feature is not None:
            node = node.right if row[node.feature] else node.left
        return node

    def depth(self) -> int:
        def walk(node):
            if node.feature is None:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)


@dataclass
class RandomForestModel:
    trees: list[DecisionTree] = field(default_factory=list)
    n_estimators: int = 0
    max_depth: int = 0
    seed: int = 0
    n_features: int = 0


def _gini_best_split(x: np.ndarray, y: np.ndarray, candidates: np.ndarray):
    """Lowest-impurity valid split among candidate columns, or None.

    Zero-gain splits of impure nodes are allowed (parity-style targets such
    as XOR have no single informative bit, yet the children become
    separable); both children must be non-empty, so recursion terminates.
    """
    n = len(y)
    ones = int(y.sum())
    sub = x[:, candidates]
    right_n = sub.sum(axis=0)
    right_ones = y @ sub
    best_feature = -1
    best_impurity = float("inf")
    for k in range(len(candidates)):  # ascending feature order; ties stay low
        rn = int(right_n[k])
        if rn == 0 or rn == n:
            continue
        ro = int(right_ones[k])
        ln, lo = n - rn, ones - ro
        gl = 1.0 - (lo / ln) ** 2 - ((ln - lo) / ln) ** 2
        gr = 1.0 - (ro / rn) ** 2 - ((rn - ro) / rn) ** 2
        impurity = (ln * gl + rn * gr) / n
        if impurity < best_impurity - 1e-12:
            best_impurity = impurity
            best_feature = int(candidates[k])
    return best_feature if best_feature >= 0 else None


def _grow(x, y, depth, max_depth, n_candidates, rng) -> TreeNode:
    n = len(y)
    ones = int(y.sum())
    node = TreeNode(p0=(n - ones) / n, p1=ones / n)
    if depth >= max_depth or ones == 0 or ones == n:
        return node
    n_features = x.shape[1]
    if n_candidates >= n_features:
        candidates = np.arange(n_features)
    else:
        candidates = np.sort(rng.choice(n_features, size=n_candidates, replace=False))
    feature = _gini_best_split(x, y, candidates)
    if feature is None:
        return node
    mask = x[:, feature].astype(bool)
    node.feature = feature
    node.left = _grow(x[~mask], y[~mask], depth + 1, max_depth, n_candidates, rng)
    node.right = _grow(x[mask], y[mask], depth + 1, max_depth, n_candidates, rng)
    return node


def train_forest(
    features,
    labels,
    n_estimators: int,
    max_depth: int,
    seed: int = 0,
    bootstrap: bool = True,
    feature_subsample: bool = True,
) -> RandomForestModel:
    x = np.asarray(features, dtype=np.uint8)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("features must be a non-empty bit matrix")
    if n_estimators < 1:
        raise ValueError("need at least one estimator")
    n, f = x.shape
    n_candidates = math.ceil(math.sqrt(f)) if feature_subsample else f
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_estimators):
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        root = _grow(x[rows], y[rows], 0, max_depth, n_candidates, rng)
        trees.append(DecisionTree(root, max_depth, f))
    return RandomForestModel(trees, n_estimators, max_depth, seed, f)


def predict_forest(model: RandomForestModel, feature_row) -> int:
    """Argmax of the quantized vote sums, mirroring the lowered comparator.

    Leaf probabilities enter the circuit as unsigned fixed-point constants,
    so prediction sums those same quantized weights; ties give 0.
    """
    row = np.asarray(feature_row).astype(np.uint8)
    s0 = s1 = 0
    for tree in model.trees:
        leaf = tree.leaf_for(row)
        s0 += nl.quantize_prob(leaf.p0)
        s1 += nl.quantize_prob(leaf.p1)
    return int(s1 > s0)


def exact_vote_sums(model: RandomForestModel, feature_row) -> tuple[float, float]:
    row = np.asarray(feature_row).astype(np.uint8)
    s0 = s1 = 0.0
    for tree in model.trees:
        leaf = tree.leaf_for(row)
        s0 += leaf.p0
        s1 += leaf.p1
    return s0, s1


def forest_module(models: list[RandomForestModel], word_width: int | None = None):
    """Concatenate per-bit forests into one module with word-level I/O.

    ``models[j]`` predicts bit j of the output word, most significant first.
    Inputs are the previous layer's m-bit words; feature column k*m + j is
    the j-th most significant bit of word k.
    """
    m = word_width if word_width is not None else len(models)
    total = models[0].n_features
    if any(mod.n_features != total for mod in models):
        raise ValueError("per-bit forests must share one feature space")
    if total % m:
        raise ValueError("feature count is not a whole number of words")
    net = nl.Netlist()
    words = [net.add_input(m, f"x{k}") for k in range(total // m)]
    feature_sids = []
    for word in words:
        for j in range(m):
            feature_sids.append(net.add_gate("SLICE", (word,), (m - 1 - j, m - 1 - j)))
    bit_outs = []
    for model in models:
        module = nl.build_forest_bit(model)
        mapping = nl.merge_into(net, module, dict(zip(module.inputs, feature_sids)))
        bit_outs.append(mapping[module.outputs[0]])
    out = bit_outs[0] if len(bit_outs) == 1 else net.add_gate("CONCAT", tuple(bit_outs))
    net.set_output(out)
    return net


def forest_to_text(model: RandomForestModel) -> str:
    lines = [
        f"forest {model.n_estimators} {model.max_depth} {model.seed} {model.n_features}"
    ]

    def walk(node: TreeNode) -> None:
        if node.feature is None:
            lines.append(f"leaf {node.p0!r} {node.p1!r}")
        else:
            lines.append(f"node {node.feature}")
            walk(node.left)
            walk(node.right)

    for tree in model.trees:
        lines.append("tree")
        walk(tree.root)
    return "\n".join(lines) + "\n"


def forest_from_text(text: str) -> RandomForestModel:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0][0] != "forest":
        raise ValueError("not a forest dump")
    n_estimators, max_depth, seed, n_features = (int(v) for v in lines[0][1:])
    pos = 1

    def parse() -> TreeNode:
        nonlocal pos
        kind = lines[pos]
        pos += 1
        if kind[0] == "leaf":
            return TreeNode(p0=float(kind[1]), p1=float(kind[2]))
        node = TreeNode(feature=int(kind[1]))
        node.left = parse()
        node.right = parse()
        return node

    trees = []
    while pos < len(lines):
        if lines[pos][0] != "tree":
            raise ValueError(f"expected 'tree' marker, got {lines[pos]}")
        pos += 1
        trees.append(DecisionTree(parse(), max_depth, n_features))
    model = RandomForestModel(trees, n_estimators, max_depth, seed, n_features)
    if len(trees) != n_estimators:
        raise ValueError("tree count does not match the header")
    return model
