#!/usr/bin/env python3
"""Timing benchmark: per-sample inference vs per-sample adaptation cost.

Adaptation is forward-only and reuses cached memory signals, so the
per-sample adaptation cost should stay within a small constant factor of
inference and report exactly one forward pass per adapted sample.
"""

import argparse
import json

from emn.dataio import SynthConfig, synth_shifted_blobs
from emn.harness import BenchConfig, bench, train_supervised
from emn.inference import build_model
from emn.topology import TopologyConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=20)
    ap.add_argument("--samples-per-class", type=int, default=200)
    ap.add_argument("--repetitions", type=int, default=5)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--json-out", type=str, default=None)
    args = ap.parse_args()

    cfg = SynthConfig(
        class_count=3,
        dim=args.dim,
        samples_per_class=args.samples_per_class,
        class_mean_scale=0.1,
        within_class_spread=0.15,
        shift_vector_norm=0.4,
        seed=args.seed,
    )
    src, tgt = synth_shifted_blobs(cfg)
    model = build_model(TopologyConfig(feature_dim=args.dim, seed=args.seed), 3)
    train_supervised(model, src, shuffle_seed=args.seed)

    report = bench(model, tgt, BenchConfig(repetitions=args.repetitions))
    record = report.to_dict()
    record["adaptation_over_inference"] = (
        report.per_sample_adaptation_seconds / report.per_sample_inference_seconds
    )
    for key, value in record.items():
        print(f"{key}: {value}")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(record, fh, indent=2)


if __name__ == "__main__":
    main()
