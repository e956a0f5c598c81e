"""Command line interface.

Subcommands: train, adapt, predict, eval, synth, bench, ablate,
export-memory. Reports are CSV to --out or standard output. A key-value
config file (--config) supplies defaults that explicit flags override.

Exit codes: 0 success, 2 usage/config error, 3 data error,
4 model/schema error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from emn import errors
from emn.adaptation import AdaptationConfig, adapt
from emn.dataio import (
    SynthConfig,
    load_model,
    read_dataset,
    save_model,
    synth_shifted_blobs,
    write_dataset,
    write_memory_csv,
    write_trace_csv,
)
from emn.harness import (
    BenchConfig,
    baseline_gnb_eval,
    baseline_gnb_train,
    bench,
    evaluate,
    run_ablation,
    train_supervised,
)
from emn.inference import build_model, predict_batch
from emn.memory import HyperParams
from emn.propagation import propagate_trace
from emn.topology import TopologyConfig

USAGE_ERRORS = (errors.ConfigError, errors.UsageError)
DATA_ERRORS = (
    errors.ParseError,
    errors.MagicError,
    errors.VersionError,
    errors.TruncationError,
    errors.DimensionError,
    errors.LabelRangeError,
    errors.MissingLabelsError,
    errors.ClassCountMismatch,
)
MODEL_ERRORS = (
    errors.SchemaVersionError,
    errors.IntegrityError,
    errors.NotTrainedError,
)


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise errors.ConfigError(f"{path}: line {lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


class Resolver:
    """Flag value > config-file value > hard default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = _read_config_file(args.config) if getattr(args, "config", None) else {}

    def get(self, name: str, default, cast):
        flag = getattr(self.args, name, None)
        if flag is not None:
            return flag
        if name in self.file:
            raw = self.file[name]
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        return default


def _hyper_from(r: Resolver) -> HyperParams:
    return HyperParams(
        beta=r.get("beta", 0.9, float),
        sigma1=r.get("sigma1", 1.0, float),
        batch_size=r.get("batch_size", 64, int),
        rounds=r.get("rounds", 3, int),
        fuzzy_enabled=not r.get("no_fuzzy", False, bool),
        confidence_enabled=not r.get("no_confidence", False, bool),
    )


def _topo_from(r: Resolver, feature_dim: int) -> TopologyConfig:
    return TopologyConfig(
        feature_dim=feature_dim,
        hub_count=r.get("hub", 50, int),
        bridging_count=r.get("bridging", 50, int),
        bridging_in_degree=r.get("in_degree", 30, int),
        seed=r.get("seed", 0, int),
    )


def _out_stream(args):
    if getattr(args, "out", None):
        return open(args.out, "w", encoding="utf-8", newline="\n")
    return sys.stdout


def _emit(args, text: str) -> None:
    stream = _out_stream(args)
    try:
        stream.write(text)
    finally:
        if stream is not sys.stdout:
            stream.close()


# ---------------------------------------------------------------------------
# Subcommand handlers


def cmd_synth(args) -> int:
    r = Resolver(args)
    cfg = SynthConfig(
        class_count=r.get("classes", 3, int),
        dim=r.get("dim", 20, int),
        samples_per_class=r.get("samples_per_class", 200, int),
        class_mean_scale=r.get("mean_scale", 1.0, float),
        within_class_spread=r.get("spread", 1.0, float),
        shift_vector_norm=r.get("shift", 1.0, float),
        seed=r.get("seed", 0, int),
    )
    source, target = synth_shifted_blobs(cfg)
    write_dataset(source, args.out_source, args.format)
    write_dataset(target, args.out_target, args.format)
    return 0


def cmd_train(args) -> int:
    r = Resolver(args)
    source = read_dataset(args.source, args.format, "source")
    if source.labels is None:
        raise errors.MissingLabelsError("training data must carry labels")
    class_count = r.get("classes", int(source.labels.max()) + 1, int)
    model = build_model(
        _topo_from(r, source.dim), class_count, _hyper_from(r), {"trained_on": "source"}
    )
    train_supervised(model, source, shuffle_seed=r.get("seed", 0, int))
    save_model(model, args.model)
    return 0


def cmd_adapt(args) -> int:
    r = Resolver(args)
    model = load_model(args.model)
    target = read_dataset(args.target, args.format, "target")
    cfg = AdaptationConfig(
        epochs=r.get("epochs", 16, int),
        batch_size=r.get("batch_size", 64, int),
        beta=r.get("beta", 0.9, float),
        shuffle_seed=r.get("seed", 0, int),
    )
    history = adapt(
        model,
        target.features,
        cfg,
        held_out_labels=target.labels,
        snapshot_dir=args.snapshot_dir,
    )
    save_model(model, args.out or args.model)
    lines = ["epoch,pseudo_label_agreement,accuracy,per_sample_update_seconds"]
    for rec in history.records:
        acc = "" if rec.accuracy is None else repr(rec.accuracy)
        lines.append(
            f"{rec.epoch},{rec.pseudo_label_agreement!r},{acc},"
            f"{rec.per_sample_update_seconds!r}"
        )
    best = history.best_epoch()
    if best is not None:
        # Best-epoch selection consults target labels: an oracle metric.
        lines.append(f"# best_epoch (oracle-selected) = {best.epoch}, "
                     f"accuracy = {best.accuracy!r}")
    print("\n".join(lines))
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    data = read_dataset(args.target, args.format)
    preds = predict_batch(model, data.features)
    header = "row_index,predicted_label," + ",".join(
        f"p_{k}" for k in range(model.class_count)
    )
    lines = [header]
    for i, p in enumerate(preds):
        lines.append(f"{i},{p.label}," + ",".join(repr(v) for v in p.posterior))
    _emit(args, "\n".join(lines) + "\n")
    if args.trace_out:
        if data.n_samples == 0:
            raise errors.UsageError("--trace-out requires at least one input row")
        _, trace = propagate_trace(
            model.topology, data.features[0], model.hyper.rounds
        )
        write_trace_csv(trace, args.trace_out)
    return 0


def _eval_report_csv(report) -> str:
    C = report.confusion.shape[0]
    lines = [f"accuracy,{report.accuracy!r}"]
    lines.append(
        "per_class_accuracy," + ",".join(repr(float(v)) for v in report.per_class_accuracy)
    )
    lines.append("confusion_row," + ",".join(f"pred_{k}" for k in range(C)))
    for k in range(C):
        lines.append(f"true_{k}," + ",".join(str(int(v)) for v in report.confusion[k]))
    return "\n".join(lines) + "\n"


def cmd_eval(args) -> int:
    model = load_model(args.model)
    data = read_dataset(args.target, args.format)
    report = evaluate(model, data)
    text = _eval_report_csv(report)
    if args.baseline_gnb:
        if args.source is None:
            raise errors.UsageError("--baseline-gnb requires --source")
        src = read_dataset(args.source, args.format)
        gnb = baseline_gnb_train(src)
        gnb_report = baseline_gnb_eval(gnb, data)
        text += f"baseline_gnb_accuracy,{gnb_report.accuracy!r}\n"
    _emit(args, text)
    return 0


def cmd_bench(args) -> int:
    r = Resolver(args)
    model = load_model(args.model)
    target = read_dataset(args.target, args.format)
    cfg = BenchConfig(
        repetitions=r.get("repetitions", 5, int),
        batch_size=r.get("batch_size", 64, int),
        beta=r.get("beta", 0.9, float),
        shuffle_seed=r.get("seed", 0, int),
    )
    report = bench(model, target, cfg)
    lines = [
        "metric,value",
        f"per_sample_inference_seconds,{report.per_sample_inference_seconds!r}",
        f"per_sample_adaptation_seconds,{report.per_sample_adaptation_seconds!r}",
        f"sample_count,{report.sample_count}",
        f"repetitions,{report.repetitions}",
        f"forward_passes_per_adapted_sample,{report.forward_passes_per_adapted_sample!r}",
        f"backward_passes,{report.backward_passes}",
    ]
    _emit(args, "\n".join(lines) + "\n")
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write("\n")
    return 0


def cmd_ablate(args) -> int:
    r = Resolver(args)
    source = read_dataset(args.source, args.format, "source")
    target = read_dataset(args.target, args.format, "target")
    if source.labels is None or target.labels is None:
        raise errors.MissingLabelsError("ablation requires labeled source and target")
    topo_cfg = _topo_from(r, source.dim)
    hyper = _hyper_from(r)
    adapt_cfg = AdaptationConfig(
        epochs=r.get("epochs", 16, int),
        batch_size=r.get("batch_size", 64, int),
        beta=r.get("beta", 0.9, float),
        shuffle_seed=r.get("seed", 0, int),
    )
    variants = run_ablation(
        source, target, topo_cfg, hyper, adapt_cfg, train_seed=r.get("seed", 0, int)
    )
    lines = [
        "variant,fuzzy,confidence,source_accuracy,target_before,"
        "target_after,target_best,delta_vs_base"
    ]
    for v in variants:
        lines.append(
            f"{v.name},{v.fuzzy_enabled},{v.confidence_enabled},"
            f"{v.source_report.accuracy!r},{v.target_before.accuracy!r},"
            f"{v.target_after.accuracy!r},{v.target_best!r},{v.delta_vs_base!r}"
        )
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_export_memory(args) -> int:
    model = load_model(args.model)
    write_memory_csv(model, args.out or "/dev/stdout")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--format", choices=["csv", "emnf"], default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="batch parallelism hint (propagation is vectorized)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emn", description="Elastic memory network classifier"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic shifted-blobs task")
    _add_common(p)
    p.add_argument("--out-source", required=True)
    p.add_argument("--out-target", required=True)
    p.add_argument("--classes", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--samples-per-class", type=int)
    p.add_argument("--mean-scale", type=float)
    p.add_argument("--spread", type=float)
    p.add_argument("--shift", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model on labeled source features")
    _add_common(p)
    p.add_argument("--source", required=True)
    p.add_argument("--model", required=True, help="output model path")
    p.add_argument("--classes", type=int)
    p.add_argument("--hub", type=int)
    p.add_argument("--bridging", type=int)
    p.add_argument("--in-degree", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma1", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-fuzzy", action="store_const", const=True, default=None)
    p.add_argument("--no-confidence", action="store_const", const=True, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("adapt", help="reinforced memorization on target features")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", help="adapted model path (default: overwrite --model)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--snapshot-dir", help="write per-epoch memory CSV snapshots")
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("predict", help="predict labels and posteriors")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out")
    p.add_argument("--trace-out", help="activation trace CSV for the first row")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="accuracy and confusion on labeled data")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out")
    p.add_argument("--baseline-gnb", action="store_true",
                   help="also report a Gaussian naive Bayes baseline")
    p.add_argument("--source", help="training data for --baseline-gnb")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="per-sample timing of adaptation vs inference")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out")
    p.add_argument("--json-out", help="machine-readable report path")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablate", help="run the base / base+G / base+G+C variants")
    _add_common(p)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out")
    p.add_argument("--hub", type=int)
    p.add_argument("--bridging", type=int)
    p.add_argument("--in-degree", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma1", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("export-memory", help="memory snapshot CSV (node, class, mu, sigma)")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_memory)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except MODEL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
