"""End-to-end pipeline orchestration: train, distill, compile, sweep.

Grid sweeps fan out over processes; NN2LOGIC_THREADS caps the worker count.
All randomness is derived from the config seeds, so reruns are byte-stable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

import numpy as np

from nn2logic import aig, analysis, forest, lutnet, mlp, netlist
from nn2logic.datasets import LabeledDataset, read_dataset, stratified_split
from nn2logic.fixedpoint import FixedPointFormat


@dataclass
class PipelineConfig:
    dataset: str = ""
    out_dir: str = "out"
    pipeline: str = "direct"
    total_bits: int = 8
    fractional_bits: int = 6
    seed: int = 0
    split_seed: int = 0
    test_fraction: float = 0.2
    hidden_nodes: int = 20
    epochs: int = 1500
    learning_rate: float = 0.01
    rf_estimators: int = 3
    rf_max_depth: int = 5
    lgn_depth: int = 2
    lgn_width: int = 50
    lgn_lut_size: int = 4

    @property
    def fmt(self) -> FixedPointFormat:
        return FixedPointFormat(self.total_bits, self.fractional_bits)


def parse_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    """Flat key=value config file, then flag overrides on top."""
    values: dict = {}
    if path:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#")[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}: line {lineno}: expected key=value")
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    cfg = PipelineConfig()
    casts = {f.name: type(getattr(cfg, f.name)) for f in fields(PipelineConfig)}
    for key, val in values.items():
        if key not in casts:
            raise ValueError(f"unknown config key {key!r}")
        setattr(cfg, key, casts[key](val))
    if cfg.pipeline not in ("direct", "rf", "logicnet"):
        raise ValueError(f"unknown pipeline {cfg.pipeline!r}")
    return cfg


def load_split(cfg: PipelineConfig) -> tuple[LabeledDataset, np.ndarray, np.ndarray]:
    data = read_dataset(cfg.dataset)
    train_idx, test_idx = stratified_split(data, cfg.test_fraction, cfg.split_seed)
    return data, train_idx, test_idx


def write_split_manifest(path, train_idx, test_idx) -> None:
    with open(path, "w") as fh:
        fh.write("train " + " ".join(str(i) for i in train_idx) + "\n")
        fh.write("test " + " ".join(str(i) for i in test_idx) + "\n")


def read_split_manifest(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    parts = {ln.split()[0]: np.array([int(v) for v in ln.split()[1:]]) for ln in lines if ln}
    if "train" not in parts or "test" not in parts:
        raise ValueError(f"{path}: manifest needs 'train' and 'test' lines")
    return parts["train"], parts["test"]


def _bit_seed(base: int, layer: int, node: int, bit: int) -> int:
    return int(np.random.SeedSequence((base, layer, node, bit)).generate_state(1)[0])


def compile_direct(net_mlp: mlp.Mlp, fmt: FixedPointFormat, input_names=None) -> aig.AigGraph:
    word_net = netlist.build_network_direct(net_mlp, fmt, input_names)
    return aig.sweep(aig.lower_netlist(word_net))


def train_rf_modules(
    sets: list[mlp.QuantizedActivationDataset],
    n_estimators: int,
    max_depth: int,
    seed: int,
) -> dict[tuple[int, int], list[forest.RandomForestModel]]:
    """One forest per (layer, node, bit), keyed by (layer, node)."""
    modules: dict[tuple[int, int], list[forest.RandomForestModel]] = {}
    for z in sets:
        m = z.fmt.total_bits
        models = [
            forest.train_forest(
                z.feature_bits,
                z.label_bits[:, j],
                n_estimators,
                max_depth,
                seed=_bit_seed(seed, z.layer_index, z.node_index, j),
            )
            for j in range(m)
        ]
        modules[(z.layer_index, z.node_index)] = models
    return modules


def train_lgn_modules(
    sets: list[mlp.QuantizedActivationDataset],
    depth: int,
    width: int,
    lut_size: int,
    seed: int,
) -> dict[tuple[int, int], list[lutnet.LutNetwork]]:
    modules: dict[tuple[int, int], list[lutnet.LutNetwork]] = {}
    for z in sets:
        m = z.fmt.total_bits
        nets = [
            lutnet.train_logicnet(
                z.feature_bits,
                z.label_bits[:, j],
                depth,
                width,
                lut_size,
                seed=_bit_seed(seed, z.layer_index, z.node_index, j),
            )
            for j in range(m)
        ]
        modules[(z.layer_index, z.node_index)] = nets
    return modules


def _cascade_distilled(
    per_node, layer_sizes: list[int], fmt: FixedPointFormat, build, input_names=None
) -> aig.AigGraph:
    rows = []
    for l in range(1, len(layer_sizes)):
        rows.append([build(per_node[(l, n)]) for n in range(layer_sizes[l])])
    word_net = netlist.cascade_modules(rows, layer_sizes, fmt, input_names)
    return aig.sweep(aig.lower_netlist(word_net))


def compile_rf(
    net_mlp: mlp.Mlp,
    sets,
    fmt: FixedPointFormat,
    n_estimators: int,
    max_depth: int,
    seed: int,
    input_names=None,
):
    modules = train_rf_modules(sets, n_estimators, max_depth, seed)
    graph = _cascade_distilled(
        modules,
        net_mlp.layer_sizes,
        fmt,
        lambda models: forest.forest_module(models, fmt.total_bits),
        input_names,
    )
    return graph, modules


def compile_logicnet(
    net_mlp: mlp.Mlp,
    sets,
    fmt: FixedPointFormat,
    depth: int,
    width: int,
    lut_size: int,
    seed: int,
    input_names=None,
):
    modules = train_lgn_modules(sets, depth, width, lut_size, seed)
    graph = _cascade_distilled(
        modules,
        net_mlp.layer_sizes,
        fmt,
        lambda nets: lutnet.logicnet_module(nets, fmt.total_bits),
        input_names,
    )
    return graph, modules


def worker_count() -> int:
    cap = os.environ.get("NN2LOGIC_THREADS")
    if cap:
        return max(1, int(cap))
    return max(1, os.cpu_count() or 1)


@dataclass
class SweepGrid:
    pipelines: list[str] = field(default_factory=lambda: ["direct", "rf", "logicnet"])
    rf_estimators: list[int] = field(default_factory=lambda: [2, 3, 4])
    rf_max_depth: list[int] = field(default_factory=lambda: [5, 10, 15])
    lgn_depth: list[int] = field(default_factory=lambda: [2, 3, 4])
    lgn_width: list[int] = field(default_factory=lambda: [50, 100, 200])
    lgn_lut_size: list[int] = field(default_factory=lambda: [4, 6, 8])

    def points(self) -> list[tuple[str, dict]]:
        pts: list[tuple[str, dict]] = []
        if "direct" in self.pipelines:
            pts.append(("direct", {}))
        if "rf" in self.pipelines:
            for t in self.rf_estimators:
                for d in self.rf_max_depth:
                    pts.append(("rf", {"estimators": t, "max_depth": d}))
        if "logicnet" in self.pipelines:
            for d in self.lgn_depth:
                for w in self.lgn_width:
                    for k in self.lgn_lut_size:
                        pts.append(
                            ("logicnet", {"depth": d, "width": w, "lut_size": k})
                        )
        return pts


def parse_grid(path) -> SweepGrid:
    grid = SweepGrid()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#")[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected key=value")
            key, _, val = line.partition("=")
            key = key.strip()
            items = [v.strip() for v in val.split(",") if v.strip()]
            if key == "pipelines":
                grid.pipelines = items
            elif hasattr(grid, key):
                setattr(grid, key, [int(v) for v in items])
            else:
                raise ValueError(f"{path}: line {lineno}: unknown grid key {key!r}")
    return grid


_SWEEP_STATE: dict = {}


def _sweep_point(task):
    """Worker body; reads the per-process state installed by the initializer."""
    pipeline, params = task
    st = _SWEEP_STATE
    fmt, net_mlp, sets, seed = st["fmt"], st["mlp"], st["sets"], st["seed"]
    if pipeline == "direct":
        graph = compile_direct(net_mlp, fmt)
    elif pipeline == "rf":
        graph, _ = compile_rf(
            net_mlp, sets, fmt, params["estimators"], params["max_depth"], seed
        )
    else:
        graph, _ = compile_logicnet(
            net_mlp, sets, fmt, params["depth"], params["width"], params["lut_size"], seed
        )
    report = analysis.evaluate_packed(
        graph,
        st["words"],
        st["labels"],
        st["n_test"],
        pipeline=pipeline,
        config=params,
    )
    return report


def _init_sweep(state):
    _SWEEP_STATE.update(state)


def sweep_experiments(
    data: LabeledDataset,
    cfg: PipelineConfig,
    grid: SweepGrid,
    workers: int | None = None,
) -> list[analysis.EvaluationReport]:
    """Run every grid point of every pipeline; reports in grid order.

    The MLP and the distillation sets are shared across grid points; each
    point trains its own distilled models, compiles, and evaluates on the
    held-out test rows.
    """
    train_idx, test_idx = stratified_split(data, cfg.test_fraction, cfg.split_seed)
    train_data = data.subset(train_idx)
    test_data = data.subset(test_idx)
    net_mlp = mlp.train(
        train_data, cfg.hidden_nodes, cfg.epochs, cfg.learning_rate, cfg.seed
    )
    fmt = cfg.fmt
    sets = mlp.extract_distillation_sets(net_mlp, train_data, fmt)
    words, n_test = analysis.dataset_input_words(test_data.features, fmt, net_mlp.scaler)
    state = {
        "fmt": fmt,
        "mlp": net_mlp,
        "sets": sets,
        "seed": cfg.seed,
        "words": words,
        "labels": test_data.labels,
        "n_test": n_test,
    }
    tasks = grid.points()
    n_workers = min(workers if workers is not None else worker_count(), len(tasks))
    if n_workers <= 1:
        _init_sweep(state)
        return [_sweep_point(t) for t in tasks]
    import multiprocessing as mp

    ctx = mp.get_context("fork")
    with ctx.Pool(n_workers, initializer=_init_sweep, initargs=(state,)) as pool:
        return pool.map(_sweep_point, tasks)
