"""Command-line entry point: ``cpdpgan {stats,norm-select,train,sweep,synth}``.

Failures print one line ``error: <category>: <detail>`` on stderr and exit
nonzero (1 for data/config problems, 2 for usage).
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import dataset, normrules, pipeline
from .gan import AdamConfig, GanConfig

OUTPUT_DIR_ENV = "CPDPGAN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "cpdpgan-out"

_TOP_KEYS = {"source", "target", "label_column", "source_label_column", "target_label_column",
             "normalization", "seed", "output_dir", "expected_features", "gan", "optimizer",
             "classifier", "mmd_bandwidth"}
_GAN_KEYS = {"epochs", "batch_size", "d_steps_per_g_step", "loss_variant", "hidden_dims",
             "generator_output", "output_clamp_eps", "record_mmd", "displacement_weight"}
_OPT_KEYS = {"lr", "beta1", "beta2", "eps_stab"}


class CliError(Exception):
    def __init__(self, category, detail, code=1):
        super().__init__(detail)
        self.category = category
        self.detail = detail
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError("usage", message, code=2)


@dataclass
class RunConfig:
    source: str
    target: str
    source_label_column: str
    target_label_column: str
    output_dir: str
    expected_features: int | None
    pipeline: pipeline.PipelineConfig

    @property
    def seed(self):
        return self.pipeline.seed


def _reject_unknown(section, data, allowed):
    extra = sorted(set(data) - allowed)
    if extra:
        raise CliError("config", f"unknown key(s) in {section}: {', '.join(extra)}")


def load_run_config(path, output_dir=None, seed=None, epochs=None):
    """Parse a JSON run config; explicit arguments override file values."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise CliError("io", f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError("config", f"invalid JSON in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise CliError("config", "config must be a JSON object")
    _reject_unknown("config", raw, _TOP_KEYS)
    for key in ("source", "target"):
        if key not in raw:
            raise CliError("config", f"missing required key {key!r}")
    if seed is None:
        if "seed" not in raw:
            raise CliError("config", "missing required key 'seed'")
        seed = raw["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise CliError("config", f"seed must be an integer, got {seed!r}")

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    gan_raw = dict(raw.get("gan", {}))
    opt_raw = dict(raw.get("optimizer", {}))
    _reject_unknown("gan", gan_raw, _GAN_KEYS)
    _reject_unknown("optimizer", opt_raw, _OPT_KEYS)
    if epochs is not None:
        gan_raw["epochs"] = epochs
    clf_raw = dict(raw.get("classifier", {}))
    _reject_unknown("classifier", clf_raw, {"variance_floor"})
    try:
        gan_cfg = GanConfig(seed=seed, optimizer=AdamConfig(**opt_raw), **gan_raw)
        pipe = pipeline.PipelineConfig(
            gan=gan_cfg,
            normalization=raw.get("normalization", "zscore-source-stats"),
            variance_floor=clf_raw.get("variance_floor"),
            mmd_bandwidth=raw.get("mmd_bandwidth", "median"),
        )
    except (TypeError, ValueError) as exc:
        raise CliError("config", str(exc)) from None

    if output_dir is None:
        output_dir = os.environ.get(OUTPUT_DIR_ENV) or (
            resolve(raw["output_dir"]) if "output_dir" in raw else DEFAULT_OUTPUT_DIR)
    shared = raw.get("label_column", "bug")
    return RunConfig(
        source=resolve(raw["source"]),
        target=resolve(raw["target"]),
        source_label_column=raw.get("source_label_column", shared),
        target_label_column=raw.get("target_label_column", shared),
        output_dir=output_dir,
        expected_features=raw.get("expected_features"),
        pipeline=pipe,
    )


def _load(path, label_column):
    try:
        return dataset.load_csv(path, label_column)
    except dataset.DatasetError as exc:
        raise CliError("data", f"{path}: {exc}") from None


def _load_pair(cfg):
    source = _load(cfg.source, cfg.source_label_column)
    target = _load(cfg.target, cfg.target_label_column)
    if source.n_features != target.n_features:
        raise CliError("data", f"feature width mismatch: source has {source.n_features} "
                               f"features, target has {target.n_features}")
    if cfg.expected_features is not None and source.n_features != cfg.expected_features:
        raise CliError("data", f"expected {cfg.expected_features} features, "
                               f"datasets have {source.n_features}")
    return source, target


def _header(path):
    try:
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
    except FileNotFoundError:
        raise CliError("data", f"file not found: {path}") from None
    return [h.strip() for h in first.strip().split(",")] if first.strip() else []


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_stats(args):
    ds = _load(args.path, args.label_column)
    try:
        st = dataset.stats(ds)
    except dataset.DatasetError as exc:
        raise CliError("data", str(exc)) from None
    print(json.dumps({"n": st.n_instances, "faulty": st.n_faulty,
                      "buggy_rate": st.buggy_rate_display}, separators=(",", ":")))


def cmd_norm_select(args):
    # the label column is excluded from features when the file has it
    def load(path):
        label = args.label_column if args.label_column in _header(path) else None
        return _load(path, label)

    source, target = load(args.source), load(args.target)
    try:
        result = normrules.select_normalization(source, target)
    except dataset.DatasetError as exc:
        raise CliError("data", str(exc)) from None
    print(_dump(result), end="")


def _run_cfg(args):
    return load_run_config(args.config, output_dir=args.output_dir, seed=args.seed,
                           epochs=getattr(args, "epochs_override", None))


def cmd_train(args):
    cfg = _run_cfg(args)
    source, target = _load_pair(cfg)
    try:
        result = pipeline.fit_pipeline(source, target, cfg.pipeline)
    except (dataset.DatasetError, ValueError) as exc:
        raise CliError("data", str(exc)) from None
    os.makedirs(cfg.output_dir, exist_ok=True)
    out = cfg.output_dir
    _write(os.path.join(out, "model.json"), _dump(result.model.to_dict()))
    _write(os.path.join(out, "classifier.json"), _dump(result.nb_model.to_dict()))
    result.trace.write_csv(os.path.join(out, "trace.csv"))
    _write(os.path.join(out, "report.json"), result.report.to_json())
    r = result.report
    print(f"f1={r.f1:.4f} precision={r.precision:.4f} recall={r.recall:.4f} "
          f"mmd_before={r.mmd_before:.4f} mmd_after={r.mmd_after:.4f} -> {out}")


def _parse_epochs(text):
    parts = [p.strip() for p in (text or "").split(",") if p.strip()]
    if not parts:
        raise CliError("usage", "--epochs needs a comma-separated list such as 25,50,75,100", 2)
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise CliError("usage", f"--epochs must be integers, got {text!r}", 2) from None
    if any(v < 0 for v in values):
        raise CliError("usage", "--epochs values must be >= 0", 2)
    return values


def cmd_sweep(args):
    try:
        epochs = _parse_epochs(args.epochs)
    except CliError:
        args.parser.print_usage(sys.stderr)
        raise
    cfg = _run_cfg(args)
    source, target = _load_pair(cfg)
    try:
        reports = pipeline.epoch_sweep(source, target, epochs, cfg.pipeline,
                                       max_workers=args.workers)
    except (dataset.DatasetError, ValueError) as exc:
        raise CliError("data", str(exc)) from None
    os.makedirs(cfg.output_dir, exist_ok=True)
    _write(os.path.join(cfg.output_dir, "sweep.csv"), pipeline.sweep_csv(reports))
    _write(os.path.join(cfg.output_dir, "sweep.json"), _dump([r.to_dict() for r in reports]))
    for r in reports:
        print(f"epochs={r.epochs} f1={r.f1:.4f} mmd_after={r.mmd_after:.4f}")


def cmd_synth(args):
    source, target = dataset.shifted_domain_pair(n=args.n, shift=args.shift,
                                                 buggy_fraction=args.buggy_fraction,
                                                 seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    for ds in (source, target):
        dataset.save_csv(ds, os.path.join(args.out_dir, f"{ds.name}.csv"))
    print(f"wrote source.csv and target.csv to {args.out_dir}")


def build_parser():
    p = _Parser(prog="cpdpgan", description="GAN-based cross-project defect prediction")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stats", help="instance count and buggy rate of a labeled CSV")
    s.add_argument("path")
    s.add_argument("--label-column", default="bug")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("norm-select", help="distance statistics and the selected normalization rule")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--label-column", default="bug")
    s.set_defaults(func=cmd_norm_select)

    for name, func, helptext in (("train", cmd_train, "run the full pipeline once"),
                                 ("sweep", cmd_sweep, "run the pipeline for several epoch counts")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config", help="JSON run config")
        s.add_argument("--output-dir", default=None)
        s.add_argument("--seed", type=int, default=None)
        if name == "train":
            s.add_argument("--epochs", dest="epochs_override", type=int, default=None)
        else:
            s.add_argument("--epochs", required=True, help="comma-separated, e.g. 25,50,75,100")
            s.add_argument("--workers", type=int, default=1)
        s.set_defaults(func=func, parser=s)

    s = sub.add_parser("synth", help="write a synthetic shifted source/target pair")
    s.add_argument("out_dir")
    s.add_argument("--n", type=int, default=400)
    s.add_argument("--shift", type=float, default=5.0)
    s.add_argument("--buggy-fraction", type=float, default=0.4)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except CliError as exc:
        detail = " ".join(str(exc.detail).split())
        print(f"error: {exc.category}: {detail}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
