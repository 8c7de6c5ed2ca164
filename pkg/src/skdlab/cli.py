"""Command-line front end: generate | train | evaluate | experiment | bits | capacity.

Exit codes: 0 on success, 2 for usage or configuration problems (bad flags,
bad config values, missing input files, mismatched checkpoints), 1 for
runtime failures (divergence, non-convergence, write errors).

Configs are INI files with one section per role; every key has a desk-scale
default, so an empty file is a valid config.  The raw config text is echoed
into each report for provenance.  All randomness flows from the single
``seed`` key in ``[data]``.

    [data]
    task = SL22                        ; ClassLevel | SL21 | SL22 | SL12
    samples_per_subclass = 248,248,540,540
    difficulty = 0.2,0.8,0.2,0.8
    feature_dim = 2
    train_fraction = 0.5
    seed = 1000

    [teacher]
    hidden_layers = 64,32
    epochs = 40
    batch_size = 32
    learning_rate = 0.001
    weight_decay = 0.0005
    lr_decay = 0.91

    [student]
    hidden_layers = 8
    epochs = 30
    ; remaining keys as in [teacher]

    [distill]
    tau_skd = 5.0
    tau_kd = 128.0
    lam = 0.45

    [experiment]
    n_seeds = 30
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .capacity import (
    BitsReportRow,
    DetectionParams,
    bac_capacity,
    blahut_arimoto,
    confusion_to_channel,
    detection_bits_bound,
    label_bits_report,
    qsc_capacity,
    write_bits_csv,
    write_bits_json,
    z_channel_capacity,
)
from .data import SyntheticSpec, generate_synthetic, load_dataset, load_hierarchy, save_dataset, save_hierarchy, split_dataset
from .experiment import ExperimentConfig, run_experiment, write_experiment_report
from .hierarchy import TASK_PRESETS, build_task_preset
from .losses import STUDENT_MODES, DistillConfig
from .network import load_checkpoint, save_checkpoint
from .training import TrainConfig, evaluate, student_train_config, teacher_train_config, train_student, train_teacher


class ConfigError(Exception):
    """Bad flags, config values, or input files; maps to exit code 2."""


# ---------------------------------------------------------------------------
# Config parsing.


def _load_ini(path) -> tuple[configparser.ConfigParser, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config not found: {p}")
    text = p.read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    return parser, text


def _get(parser, section, key, cast, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _int_tuple(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def _float_tuple(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _train_config(parser, section: str, defaults: TrainConfig) -> TrainConfig:
    return replace(
        defaults,
        hidden_layers=_get(parser, section, "hidden_layers", _int_tuple, defaults.hidden_layers),
        epochs=_get(parser, section, "epochs", int, defaults.epochs),
        batch_size=_get(parser, section, "batch_size", int, defaults.batch_size),
        learning_rate=_get(parser, section, "learning_rate", float, defaults.learning_rate),
        weight_decay=_get(parser, section, "weight_decay", float, defaults.weight_decay),
        lr_decay=_get(parser, section, "lr_decay", float, defaults.lr_decay),
    )


def _experiment_config(parser) -> ExperimentConfig:
    base = ExperimentConfig()
    task = _get(parser, "data", "task", str, base.task)
    if task not in TASK_PRESETS:
        raise ConfigError(f"unknown task {task!r}; choose from {sorted(TASK_PRESETS)}")
    cfg = ExperimentConfig(
        task=task,
        samples_per_subclass=_get(
            parser, "data", "samples_per_subclass", _int_tuple, base.samples_per_subclass
        ),
        difficulty=_get(parser, "data", "difficulty", _float_tuple, base.difficulty),
        feature_dim=_get(parser, "data", "feature_dim", int, base.feature_dim),
        train_fraction=_get(parser, "data", "train_fraction", float, base.train_fraction),
        base_seed=_get(parser, "data", "seed", int, base.base_seed),
        n_seeds=_get(parser, "experiment", "n_seeds", int, base.n_seeds),
        teacher=_train_config(parser, "teacher", teacher_train_config()),
        student=_train_config(parser, "student", student_train_config()),
        tau_skd=_get(parser, "distill", "tau_skd", float, base.tau_skd),
        tau_kd=_get(parser, "distill", "tau_kd", float, base.tau_kd),
        lam=_get(parser, "distill", "lam", float, base.lam),
    )
    n_sub = build_task_preset(task).total_subclasses
    if len(cfg.samples_per_subclass) != n_sub:
        raise ConfigError(
            f"samples_per_subclass has {len(cfg.samples_per_subclass)} entries, task {task} needs {n_sub}"
        )
    return cfg


def _read_matrix(path) -> np.ndarray:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"matrix file not found: {p}")
    rows = []
    with p.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ConfigError(f"{p}:{lineno}: {exc}") from exc
    if not rows:
        raise ConfigError(f"{p}: no rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ConfigError(f"{p}: ragged rows")
    return np.array(rows)


# ---------------------------------------------------------------------------
# Subcommands.


def cmd_generate(args) -> int:
    parser, _ = _load_ini(args.config)
    cfg = _experiment_config(parser)
    hierarchy = cfg.hierarchy()
    spec = SyntheticSpec(
        hierarchy=hierarchy,
        samples_per_subclass=cfg.samples_per_subclass,
        difficulty=cfg.difficulty,
        feature_dim=cfg.feature_dim,
        seed=cfg.base_seed,
    )
    full = generate_synthetic(spec)
    train_set, test_set = split_dataset(full, cfg.train_fraction, cfg.base_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_hierarchy(hierarchy, out / "hierarchy.json")
    save_dataset(train_set, out / "train.csv")
    save_dataset(test_set, out / "test.csv")
    print(f"wrote {out / 'hierarchy.json'}")
    print(f"wrote {out / 'train.csv'} ({len(train_set)} samples)")
    print(f"wrote {out / 'test.csv'} ({len(test_set)} samples)")
    return 0


def _load_data_dir(data_dir):
    d = Path(data_dir)
    for name in ("hierarchy.json", "train.csv", "test.csv"):
        if not (d / name).is_file():
            raise ConfigError(f"data directory is missing {d / name}")
    hierarchy = load_hierarchy(d / "hierarchy.json")
    train_set = load_dataset(d / "train.csv", hierarchy)
    test_set = load_dataset(d / "test.csv", hierarchy)
    return hierarchy, train_set, test_set


def cmd_train(args) -> int:
    parser, cfg_text = _load_ini(args.config)
    hierarchy, train_set, test_set = _load_data_dir(args.data)
    seed = _get(parser, "data", "seed", int, 1000)
    lam = _get(parser, "distill", "lam", float, 0.45)

    if args.role == "teacher":
        if args.mode is not None or args.teacher is not None:
            raise ConfigError("--mode and --teacher apply only to --role student")
        tc = replace(_train_config(parser, "teacher", teacher_train_config()), seed=seed)
        result = train_teacher(train_set, hierarchy, tc, args.labels)
        level, mode = args.labels, None
    else:
        if args.mode is None:
            raise ConfigError("--role student requires --mode")
        if args.mode in ("kd", "skd"):
            tau_key = "tau_kd" if args.mode == "kd" else "tau_skd"
            tau = _get(parser, "distill", tau_key, float, 128.0 if args.mode == "kd" else 5.0)
            if args.teacher is None:
                raise ConfigError(f"--mode {args.mode} requires --teacher")
            teacher_path = Path(args.teacher)
            if not teacher_path.is_file():
                raise ConfigError(f"teacher checkpoint not found: {teacher_path}")
            teacher, meta = load_checkpoint(teacher_path)
            needed = "class" if args.mode == "kd" else "subclass"
            got = meta.get("label_level")
            if got != needed:
                raise ConfigError(
                    f"teacher level mismatch: --mode {args.mode} needs a {needed}-level "
                    f"teacher, checkpoint is {got!r}"
                )
        else:
            tau, teacher = 1.0, None
            if args.teacher is not None:
                raise ConfigError(f"--mode {args.mode} takes no --teacher")
        distill = DistillConfig(mode=args.mode, tau=tau, lam=lam)
        sc = replace(
            _train_config(parser, "student", student_train_config()), seed=seed, distill=distill
        )
        result = train_student(train_set, hierarchy, sc, teacher=teacher)
        level = "subclass" if distill.subclass_level else "class"
        mode = args.mode

    metrics = evaluate(result.network, test_set, hierarchy, level)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ckpt_path = out / "checkpoint.json"
    save_checkpoint(
        result.network,
        ckpt_path,
        extra={"label_level": level, "role": args.role, "mode": mode, "seed": seed},
    )
    report = {
        "config_ini": cfg_text,
        "role": args.role,
        "mode": mode,
        "label_level": level,
        "seed": seed,
        "loss_per_epoch": result.loss_per_epoch,
        "metrics": metrics.to_dict(),
    }
    (out / "metrics.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote {ckpt_path}")
    print(f"wrote {out / 'metrics.json'}")
    print(f"binary_f1={metrics.binary_f1:.6f} macro_f1={metrics.macro_f1:.6f}")
    return 0


def cmd_evaluate(args) -> int:
    ckpt_path = Path(args.checkpoint)
    if not ckpt_path.is_file():
        raise ConfigError(f"checkpoint not found: {ckpt_path}")
    net, meta = load_checkpoint(ckpt_path)
    hierarchy, train_set, test_set = _load_data_dir(args.data)
    level = args.level or meta.get("label_level")
    if level not in ("class", "subclass"):
        raise ConfigError("checkpoint has no label_level; pass --level class|subclass")
    dataset = train_set if args.split == "train" else test_set
    metrics = evaluate(net, dataset, hierarchy, level)
    print(f"binary_f1={metrics.binary_f1:.6f} macro_f1={metrics.macro_f1:.6f}")
    if args.out:
        payload = {"split": args.split, "label_level": level, "metrics": metrics.to_dict()}
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_experiment(args) -> int:
    parser, cfg_text = _load_ini(args.config)
    cfg = _experiment_config(parser)
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    report, timings = run_experiment(cfg, jobs=args.jobs)
    report["config_ini"] = cfg_text
    paths = write_experiment_report(report, args.out, timings)
    for name in report["variants"]:
        row = report["summary"][name]["binary_f1"]
        print(f"{name:18s} binary_f1 {row['mean']:.6f} +/- {row['std']:.6f}")
    if report["failures"]:
        print(f"{len(report['failures'])} seed(s) failed; see report.json", file=sys.stderr)
    for key in ("report", "summary", "per_seed", "log"):
        if key in paths:
            print(f"wrote {paths[key]}")
    return 0


def cmd_capacity(args) -> int:
    if args.qsc is not None:
        n_raw, p_raw = args.qsc
        try:
            n, p = int(n_raw), float(p_raw)
        except ValueError as exc:
            raise ConfigError(f"--qsc expects an integer and a float: {exc}") from exc
        value = qsc_capacity(n, p)
    elif args.bac is not None:
        value = bac_capacity(args.bac[0], args.bac[1])
    elif args.z is not None:
        value = z_channel_capacity(args.z)
    else:
        channel = confusion_to_channel(_read_matrix(args.matrix))
        value, _ = blahut_arimoto(channel)
    print(f"{value:.6f}")
    return 0


def _print_breakdown(breakdown, has_subclass: bool) -> None:
    print(f"class_bits={breakdown.class_bits:.6f}")
    if has_subclass:
        print(f"subclass_bits={breakdown.subclass_bits:.6f}")
    print(f"total_bits={breakdown.total_bits:.6f}")


def cmd_bits(args) -> int:
    if args.from_confusion is not None:
        if args.hierarchy is None:
            raise ConfigError("--from-confusion requires --hierarchy")
        hierarchy = load_hierarchy(Path(args.hierarchy))
        class_conf = _read_matrix(args.from_confusion)
        split_classes = [c for c, n in enumerate(hierarchy.subclasses_per_class) if n > 1]
        given = args.subclass_confusion or []
        if len(given) != len(split_classes):
            raise ConfigError(
                f"need {len(split_classes)} --subclass-confusion file(s) "
                f"(one per multi-subclass class, in class order), got {len(given)}"
            )
        sub_confs, counts = [], []
        it = iter(given)
        for c in range(hierarchy.num_classes):
            if hierarchy.subclasses_per_class[c] > 1:
                m = _read_matrix(next(it))
                sub_confs.append(m)
                counts.append(tuple(int(x) for x in m.sum(axis=1)))
            else:
                sub_confs.append(None)
                counts.append((int(class_conf[c].sum()),))
        row = label_bits_report(class_conf, sub_confs, hierarchy, counts, task=args.task)
    else:
        required = {
            "--p-h0": args.p_h0,
            "--p-h1": args.p_h1,
            "--n-s": args.n_s,
            "--p-s": args.p_s,
            "--n-h0": args.n_h0,
            "--n-h1": args.n_h1,
        }
        missing = [flag for flag, value in required.items() if value is None]
        if missing:
            raise ConfigError(f"missing {' '.join(missing)} (or use --from-confusion)")
        params = DetectionParams(
            p_h0=args.p_h0, p_h1=args.p_h1, n_s=args.n_s, p_s=args.p_s,
            n_h0=args.n_h0, n_h1=args.n_h1,
        )
        breakdown = detection_bits_bound(params)
        row = BitsReportRow(
            task=args.task,
            breakdown=breakdown,
            has_subclass_column=args.n_s > 1,
            fitted={"p_h0": args.p_h0, "p_h1": args.p_h1, "n_s": args.n_s, "p_s": args.p_s},
            empirical={},
            counts={"n_h0": args.n_h0, "n_h1": args.n_h1},
        )
    _print_breakdown(row.breakdown, row.has_subclass_column)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_bits_csv([row], out / "bits.csv")
        write_bits_json([row], out / "bits.json")
        print(f"wrote {out / 'bits.csv'}")
        print(f"wrote {out / 'bits.json'}")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring.


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skdlab",
        description="Subclass-distillation laboratory: synthetic hierarchies, "
        "small dense networks, and label-bit capacity bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write train/test CSVs and hierarchy JSON")
    p.add_argument("-c", "--config", required=True, help="INI config path")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a teacher or student")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("--data", required=True, help="directory from `skdlab generate`")
    p.add_argument("--role", required=True, choices=("teacher", "student"))
    p.add_argument("--labels", choices=("class", "subclass"), default="subclass",
                   help="teacher label level (default subclass)")
    p.add_argument("--mode", choices=STUDENT_MODES, help="student training mode")
    p.add_argument("--teacher", help="teacher checkpoint (kd/skd modes)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="class-level metrics for a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--level", choices=("class", "subclass"),
                   help="override the checkpoint's label level")
    p.add_argument("-o", "--out", help="also write metrics JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="multi-seed six-variant comparison")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="concurrent seed workers")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bits", help="label-bit bounds from parameters or confusions")
    p.add_argument("--p-h0", type=float, help="null-hypothesis class accuracy")
    p.add_argument("--p-h1", type=float, help="alternative-hypothesis class accuracy")
    p.add_argument("--n-s", type=int, help="subclass count of the alternative")
    p.add_argument("--p-s", type=float, help="subclass accuracy of the alternative")
    p.add_argument("--n-h0", type=int, help="null-hypothesis sample count")
    p.add_argument("--n-h1", type=int, help="alternative-hypothesis sample count")
    p.add_argument("--from-confusion", metavar="CLASS_CSV",
                   help="class confusion counts (training set)")
    p.add_argument("--subclass-confusion", metavar="CSV", action="append",
                   help="within-class subclass confusion, once per split class")
    p.add_argument("--hierarchy", help="hierarchy JSON (with --from-confusion)")
    p.add_argument("--task", default="task", help="row label for the report")
    p.add_argument("-o", "--out", help="directory for bits.csv / bits.json")
    p.set_defaults(func=cmd_bits)

    p = sub.add_parser("capacity", help="channel capacity of standard or explicit channels")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--qsc", nargs=2, metavar=("N", "P"),
                       help="symmetric n-ary channel with diagonal p")
    group.add_argument("--bac", nargs=2, type=float, metavar=("P0", "P1"),
                       help="binary asymmetric channel with per-input accuracies")
    group.add_argument("--z", type=float, metavar="P",
                       help="one noiseless input, the other flips with p")
    group.add_argument("--matrix", metavar="CSV",
                       help="row-stochastic matrix, capacity via Blahut-Arimoto")
    p.set_defaults(func=cmd_capacity)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        # bad input values or paths discovered inside the library layer
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
