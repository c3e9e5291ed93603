"""Command-line interface wiring the full pipeline together."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from nn2logic import aig, analysis, forest, lutnet, mlp, pipeline, sat
from nn2logic.datasets import read_dataset
from nn2logic.fixedpoint import FixedPointFormat


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bits", type=int, default=None, help="total quantization bits")
    p.add_argument("--frac", type=int, default=None, help="fractional quantization bits")
    p.add_argument("--pipeline", choices=["direct", "rf", "logicnet"], default=None)
    p.add_argument("--out", default=None, help="output directory")


def _config_from(args, extra: dict | None = None) -> pipeline.PipelineConfig:
    overrides = {
        "seed": args.seed,
        "total_bits": args.bits,
        "fractional_bits": args.frac,
        "pipeline": args.pipeline,
        "out_dir": args.out,
    }
    overrides.update(extra or {})
    return pipeline.parse_config(args.config, overrides)


def cmd_train(args) -> int:
    cfg = _config_from(args, {"dataset": args.dataset})
    data, train_idx, test_idx = pipeline.load_split(cfg)
    net = mlp.train(
        data.subset(train_idx), cfg.hidden_nodes, cfg.epochs, cfg.learning_rate, cfg.seed
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    weights_path = os.path.join(cfg.out_dir, "weights.txt")
    split_path = os.path.join(cfg.out_dir, "split.txt")
    mlp.save_weights(net, weights_path)
    pipeline.write_split_manifest(split_path, train_idx, test_idx)
    train_acc = float(
        np.mean(mlp.predict_batch(net, data.features[train_idx]) == data.labels[train_idx])
    )
    test_acc = float(
        np.mean(mlp.predict_batch(net, data.features[test_idx]) == data.labels[test_idx])
    )
    print(f"wrote {weights_path} and {split_path}")
    print(f"train accuracy {train_acc:.4f}, test accuracy {test_acc:.4f}")
    return 0


def cmd_compile(args) -> int:
    cfg = _config_from(args, {"dataset": args.dataset})
    net = mlp.load_weights(args.weights)
    fmt = cfg.fmt
    os.makedirs(cfg.out_dir, exist_ok=True)
    data, train_idx, _ = pipeline.load_split(cfg)
    if args.split:
        train_idx, _ = pipeline.read_split_manifest(args.split)
    names = data.feature_names
    if cfg.pipeline == "direct":
        graph = pipeline.compile_direct(net, fmt, names)
    else:
        sets = mlp.extract_distillation_sets(net, data.subset(train_idx), fmt)
        if cfg.pipeline == "rf":
            graph, modules = pipeline.compile_rf(
                net, sets, fmt, cfg.rf_estimators, cfg.rf_max_depth, cfg.seed, names
            )
            dump = "\n".join(
                f"module {l} {n}\n" + "".join(forest.forest_to_text(m) for m in models)
                for (l, n), models in sorted(modules.items())
            )
        else:
            graph, modules = pipeline.compile_logicnet(
                net,
                sets,
                fmt,
                cfg.lgn_depth,
                cfg.lgn_width,
                cfg.lgn_lut_size,
                cfg.seed,
                names,
            )
            dump = "\n".join(
                f"module {l} {n}\n" + "".join(lutnet.logicnet_to_text(m) for m in models)
                for (l, n), models in sorted(modules.items())
            )
        with open(os.path.join(cfg.out_dir, f"{cfg.pipeline}_models.txt"), "w") as fh:
            fh.write(dump + "\n")
    aig_path = os.path.join(cfg.out_dir, f"{cfg.pipeline}.aag")
    aig.write_aiger(graph, aig_path)
    nodes, levels = aig.stats(graph)
    print(f"wrote {aig_path}: {nodes} nodes, {levels} levels")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config_from(args, {"dataset": args.dataset})
    graph = aig.read_aiger(args.aig)
    data = read_dataset(cfg.dataset)
    if args.split:
        _, test_idx = pipeline.read_split_manifest(args.split)
        data = data.subset(test_idx)
    scaler = mlp.load_weights(args.weights).scaler if args.weights else None
    report = analysis.evaluate(graph, data, cfg.fmt, scaler, pipeline=cfg.pipeline)
    print(analysis.RESULTS_HEADER)
    print(report.csv_row())
    return 0


def cmd_report(args) -> int:
    graph = aig.read_aiger(args.aig)
    input_names = None
    if args.names:
        words = [w.strip() for w in args.names.split(",")]
        per_word = len(graph.inputs) // len(words)
        if per_word * len(words) != len(graph.inputs):
            raise ValueError(
                f"{len(graph.inputs)} input bits do not divide into {len(words)} words"
            )
        input_names = [f"{w}[{j}]" for w in words for j in range(per_word)]
    report = analysis.emit_equations(graph, input_names, title=args.title)
    text = report.render()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.title}.report.txt")
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        print(text, end="")
    return 0


def cmd_sat(args) -> int:
    graph = aig.read_aiger(args.aig)
    vector = sat.find_onset_vector(graph, args.output_index)
    if vector is None:
        print("unsatisfiable")
    else:
        print("".join(str(b) for b in vector))
    return 0


def cmd_equiv(args) -> int:
    g1 = aig.read_aiger(args.aig_a)
    g2 = aig.read_aiger(args.aig_b)
    counterexample = sat.check_equivalence(g1, g2)
    if counterexample is None:
        print("EQUIVALENT")
        return 0
    print("counterexample " + "".join(str(b) for b in counterexample))
    return 1


def cmd_sweep(args) -> int:
    cfg = _config_from(args, {"dataset": args.dataset} if args.dataset else None)
    grid = pipeline.parse_grid(args.grid) if args.grid else pipeline.SweepGrid()
    data = read_dataset(cfg.dataset)
    reports = pipeline.sweep_experiments(data, cfg, grid)
    table = analysis.results_table(reports)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "sweep.csv")
        with open(path, "w") as fh:
            fh.write(table)
        print(f"wrote {path}")
    print(table, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nn2logic",
        description="Compile trained MLP classifiers into And-Inverter logic",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train an MLP and write weights plus split")
    p.add_argument("dataset")
    _common_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compile", help="compile a pipeline into an AIGER file")
    p.add_argument("dataset")
    p.add_argument("weights")
    p.add_argument("--split", help="split manifest restricting distillation rows")
    _common_flags(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("evaluate", help="score a compiled AIG on a dataset")
    p.add_argument("aig")
    p.add_argument("dataset")
    p.add_argument("--split", help="split manifest selecting the test rows")
    p.add_argument("--weights", help="weights file providing the feature scaler")
    _common_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="emit an equation report for an AIG")
    p.add_argument("aig")
    p.add_argument("--names", help="comma-separated input word names")
    p.add_argument("--title", default="circuit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sat", help="find an input vector driving an output to 1")
    p.add_argument("aig")
    p.add_argument("--output-index", type=int, default=0)
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("equiv", help="check two AIGs for equivalence")
    p.add_argument("aig_a")
    p.add_argument("aig_b")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("sweep", help="run the pipeline/parameter grid")
    p.add_argument("dataset", nargs="?", default=None)
    p.add_argument("--grid", help="grid file with comma-separated values")
    _common_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
