"""Command-line entry point.

Subcommands: extract (phase 1), build (phase 2), predict, experiment,
synth.  Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 generalization-gate failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import synthgen
from .application import build_target_model, load_model, save_model
from .baselines import METHOD_KEYS
from .dataset import load_dataset, save_dataset, write_text_atomic
from .errors import FirePowerError, GateError
from .generalization import evaluate_generalization
from .harness import run_experiment, summarize
from .knowledge import (
    DEFAULT_THRESHOLD,
    RETRAIN,
    extract_knowledge,
    load_knowledge_base,
    save_knowledge_base,
)
from .metrics import mape, pearson_r
from .trees import GbtHyperparams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_GATE = 3

PER_SAMPLE_HEADER = "config_id,workload,component,predicted_mw,label_mw"
RESULTS_HEADER = "method,k,seed,mape_percent,pearson_r"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _apply_config_file(args: argparse.Namespace):
    """Fill unset options from --config; flags win, file beats defaults."""
    if not getattr(args, "config", None):
        return
    with open(args.config) as fh:
        doc = json.load(fh)
    valid = set(vars(args)) - {"func", "command", "config"}
    for key, value in doc.items():
        if key not in valid:
            print(f"error: unknown config key {key!r}", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
        if getattr(args, key, None) in (None, False):
            setattr(args, key, value)


def _gbt_hyperparams(args) -> GbtHyperparams:
    return GbtHyperparams(
        n_estimators=args.n_estimators if args.n_estimators is not None else 100,
        max_depth=args.max_depth if args.max_depth is not None else 3,
        learning_rate=args.learning_rate if args.learning_rate is not None else 0.3,
    )


def _add_gbt_flags(sub):
    sub.add_argument("--n-estimators", type=int, default=None)
    sub.add_argument("--max-depth", type=int, default=None)
    sub.add_argument("--learning-rate", type=float, default=None)


def cmd_extract(args) -> int:
    ds = load_dataset(args.known)
    threshold = args.threshold if args.threshold is not None else DEFAULT_THRESHOLD
    kb = extract_knowledge(ds, _gbt_hyperparams(args), threshold)
    save_knowledge_base(kb, args.out)
    print(f"{'Component':<16} {'Strategy':<12} Important parameter")
    for name, ck in kb.per_component.items():
        if ck.strategy.kind == RETRAIN:
            print(f"{name:<16} {'Retrain':<12} {ck.strategy.param}")
        else:
            print(f"{name:<16} {'NoRetrain':<12} --")
    print(f"knowledge base written to {args.out}")
    return EXIT_OK


def cmd_build(args) -> int:
    kb = load_knowledge_base(args.kb)
    train = load_dataset(args.target_train)
    gate = args.gate_threshold if args.gate_threshold is not None else 10.0
    report = evaluate_generalization(kb, train, threshold=gate)
    model = build_target_model(kb, train, _gbt_hyperparams(args))
    save_model(model, args.out)
    report_path = args.report if args.report else args.out + ".generalization.csv"
    write_text_atomic(report_path, "\n".join(report.csv_rows()) + "\n")
    print(f"{'Component':<16} {'Scale':>10} {'MAPE%':>8} Verdict")
    for v in report.per_component.values():
        print(f"{v.component:<16} {v.scaling_factor:>10.4f} {v.observed_mape:>8.2f} {v.verdict}")
    print(f"model written to {args.out}; report to {report_path}")
    low = report.low_components()
    if args.fail_on_low_generalization and low:
        raise GateError(f"low generalization quality for components: {', '.join(low)}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    ds = load_dataset(args.input)
    rows = [PER_SAMPLE_HEADER]
    totals_pred = []
    totals_label = []
    for sample in ds.samples:
        cfg = ds.config(sample.config_id)
        total = 0.0
        for comp in model.component_table:
            pred = model.predict_component_power(comp.name, cfg, sample.event_stats)
            total += pred
            label = sample.component_power.get(comp.name)
            rows.append(
                f"{sample.config_id},{sample.workload},{comp.name},{pred!r},"
                f"{'' if label is None else repr(label)}"
            )
        rows.append(
            f"{sample.config_id},{sample.workload},Total,{total!r},{sample.total_power!r}"
        )
        totals_pred.append(total)
        totals_label.append(sample.total_power)
    write_text_atomic(args.out, "\n".join(rows) + "\n")
    labeled = all(s.component_power or s.total_power for s in ds.samples)
    if labeled and len(totals_pred) >= 2:
        m = mape(totals_pred, totals_label)
        r = pearson_r(totals_pred, totals_label)
        summary_path = args.out + ".summary.csv"
        write_text_atomic(summary_path, f"mape_percent,pearson_r\n{m!r},{r!r}\n")
        print(f"total-power MAPE {m:.3f}%  R {r:.4f}  (summary: {summary_path})")
    print(f"predictions written to {args.out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    ds_known = load_dataset(args.known)
    ds_target = load_dataset(args.target)
    ks = [int(v) for v in args.ks.split(",")] if args.ks else [2, 3, 4]
    seeds = list(range(args.seeds if args.seeds is not None else 10))
    methods = args.methods.split(",") if args.methods else list(METHOD_KEYS)
    results = run_experiment(
        ds_known,
        ds_target,
        methods=methods,
        ks=ks,
        seeds=seeds,
        hp=_gbt_hyperparams(args),
        threshold=args.threshold if args.threshold is not None else DEFAULT_THRESHOLD,
    )
    os.makedirs(args.out, exist_ok=True)
    lines = [RESULTS_HEADER]
    for r in results:
        lines.append(f"{r.method},{r.k},{r.seed},{r.mape_percent!r},{r.pearson_r!r}")
    write_text_atomic(os.path.join(args.out, "results.csv"), "\n".join(lines) + "\n")
    sample_dir = os.path.join(args.out, "per_sample")
    os.makedirs(sample_dir, exist_ok=True)
    for r in results:
        rows = [PER_SAMPLE_HEADER]
        for config_id, workload, pred, label in r.per_sample:
            rows.append(f"{config_id},{workload},Total,{pred!r},{label!r}")
        path = os.path.join(sample_dir, f"{r.method}_k{r.k}_seed{r.seed}.csv")
        write_text_atomic(path, "\n".join(rows) + "\n")
    summary = summarize(results)
    print(f"{'method':<32} {'k':>3} {'mean MAPE%':>11} {'mean R':>8}")
    for (method, k), (m, r) in summary.items():
        print(f"{method:<32} {k:>3} {m:>11.3f} {r:>8.4f}")
    print(f"results written to {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.spec:
        spec = synthgen.load_spec(args.spec)
    else:
        spec = synthgen.default_spec(seed=args.seed if args.seed is not None else 0)
    ds_known, ds_target, truth = synthgen.generate_pair(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    save_dataset(ds_known, os.path.join(args.out_dir, "known.json"))
    save_dataset(ds_target, os.path.join(args.out_dir, "target.json"))
    synthgen.save_spec(truth.spec, os.path.join(args.out_dir, "truth.json"))
    print(
        f"wrote {spec.n_known_configs}-config known and "
        f"{spec.n_target_configs}-config target datasets to {args.out_dir}"
    )
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="firepower", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="phase 1: extract a knowledge base")
    p.add_argument("--known", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--config", default=None)
    _add_gbt_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("build", help="phase 2: build a target power model")
    p.add_argument("--kb", required=True)
    p.add_argument("--target-train", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--gate-threshold", type=float, default=None)
    p.add_argument("--fail-on-low-generalization", action="store_true")
    p.add_argument("--config", default=None)
    _add_gbt_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("predict", help="per-sample power predictions to CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("experiment", help="run the few-shot comparison protocol")
    p.add_argument("--known", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--ks", default=None)
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--methods", default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    _add_gbt_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", help="generate a synthetic known/target pair")
    p.add_argument("--spec", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except GateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GATE
    except FirePowerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
