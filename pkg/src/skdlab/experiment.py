"""Multi-seed experiment orchestration over the six standard variants.

Each seed generates a fresh synthetic dataset, trains two teachers (class
and subclass labels) plus four students (baseline, subclass labels only,
conventional KD, subclass KD), and evaluates everything at class level.
Report files are deterministic byte-for-byte; wall-clock timings go to a
separate log so rerunning an experiment reproduces the reports exactly.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .data import SyntheticSpec, generate_synthetic, split_dataset
from .hierarchy import LabelHierarchy, build_task_preset
from .losses import DistillConfig
from .training import (
    DEFAULT_LAM,
    TAU_KD,
    TAU_SKD,
    Metrics,
    TrainConfig,
    evaluate,
    student_train_config,
    teacher_train_config,
    train_student,
    train_teacher,
)

# Row order used by every report.
VARIANTS = (
    "teacher_class",
    "teacher_subclass",
    "student_baseline",
    "student_subclass",
    "student_kd",
    "student_skd",
)


@dataclass(frozen=True)
class ExperimentConfig:
    task: str = "SL22"
    samples_per_subclass: tuple[int, ...] = (248, 248, 540, 540)
    difficulty: tuple[float, ...] = (0.2, 0.8, 0.2, 0.8)
    feature_dim: int = 2
    train_fraction: float = 0.5
    base_seed: int = 1000
    n_seeds: int = 30
    teacher: TrainConfig = teacher_train_config()
    student: TrainConfig = student_train_config()
    tau_skd: float = TAU_SKD
    tau_kd: float = TAU_KD
    lam: float = DEFAULT_LAM

    def hierarchy(self) -> LabelHierarchy:
        return build_task_preset(self.task)

    def to_dict(self) -> dict:
        def train_dict(cfg: TrainConfig) -> dict:
            return {
                "hidden_layers": list(cfg.hidden_layers),
                "epochs": cfg.epochs,
                "batch_size": cfg.batch_size,
                "learning_rate": cfg.learning_rate,
                "weight_decay": cfg.weight_decay,
                "lr_decay": cfg.lr_decay,
            }

        return {
            "task": self.task,
            "samples_per_subclass": list(self.samples_per_subclass),
            "difficulty": list(self.difficulty),
            "feature_dim": self.feature_dim,
            "train_fraction": self.train_fraction,
            "base_seed": self.base_seed,
            "n_seeds": self.n_seeds,
            "teacher": train_dict(self.teacher),
            "student": train_dict(self.student),
            "tau_skd": self.tau_skd,
            "tau_kd": self.tau_kd,
            "lam": self.lam,
        }


def sl22_trend_config(**overrides) -> ExperimentConfig:
    """Imbalanced two-hard-two-easy preset used for the headline comparison.

    Class 0 is the minority (248 per split at the default 0.5 fraction,
    majority 540); each class has one easy (0.2) and one hard (0.8)
    subclass, laid out by the tiered auto-placement in two dimensions.
    """
    return replace(ExperimentConfig(), **overrides)


def run_single_seed(cfg: ExperimentConfig, seed: int) -> dict[str, Metrics]:
    """Generate, split, train all six variants, evaluate at class level."""
    hierarchy = cfg.hierarchy()
    spec = SyntheticSpec(
        hierarchy=hierarchy,
        samples_per_subclass=cfg.samples_per_subclass,
        difficulty=cfg.difficulty,
        feature_dim=cfg.feature_dim,
        seed=seed,
    )
    full = generate_synthetic(spec)
    train_set, test_set = split_dataset(full, cfg.train_fraction, seed)

    teacher_cfg = replace(cfg.teacher, seed=seed)
    student_cfg = replace(cfg.student, seed=seed)

    teacher_class = train_teacher(train_set, hierarchy, teacher_cfg, "class").network
    teacher_sub = train_teacher(train_set, hierarchy, teacher_cfg, "subclass").network

    def student(mode: str, tau: float = 1.0, teacher=None):
        dcfg = DistillConfig(mode=mode, tau=tau, lam=cfg.lam)
        scfg = replace(student_cfg, distill=dcfg)
        return train_student(train_set, hierarchy, scfg, teacher=teacher).network

    nets = {
        "teacher_class": (teacher_class, "class"),
        "teacher_subclass": (teacher_sub, "subclass"),
        "student_baseline": (student("baseline"), "class"),
        "student_subclass": (student("subclass"), "subclass"),
        "student_kd": (student("kd", cfg.tau_kd, teacher_class), "class"),
        "student_skd": (student("skd", cfg.tau_skd, teacher_sub), "subclass"),
    }
    return {
        name: evaluate(net, test_set, hierarchy, level) for name, (net, level) in nets.items()
    }


def _seed_worker(args: tuple[ExperimentConfig, int]) -> tuple[int, dict, Optional[str], float]:
    cfg, seed = args
    start = time.perf_counter()
    try:
        metrics = run_single_seed(cfg, seed)
    except Exception as exc:  # recorded per seed; surviving seeds still summarize
        return seed, {}, f"{type(exc).__name__}: {exc}", time.perf_counter() - start
    elapsed = time.perf_counter() - start
    return seed, {name: m.to_dict() for name, m in metrics.items()}, None, elapsed


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> tuple[dict, list[str]]:
    """Run all seeds and build the report dict plus timing log lines.

    The report contains no timestamps; timings are returned separately so
    they can be written to a sidecar log.
    """
    if cfg.n_seeds < 2:
        raise ValueError("n_seeds must be at least 2")
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    seeds = [cfg.base_seed + k for k in range(cfg.n_seeds)]
    tasks = [(cfg, s) for s in seeds]
    if jobs == 1:
        raw = [_seed_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_seed_worker, tasks))
    raw.sort(key=lambda item: item[0])  # deterministic merge regardless of pool order

    per_seed = [{"seed": seed, "metrics": m} for seed, m, err, _ in raw if err is None]
    failures = [{"seed": seed, "error": err} for seed, _, err, _ in raw if err is not None]
    if len(per_seed) < 2:
        detail = "; ".join(f"seed {f['seed']}: {f['error']}" for f in failures)
        raise RuntimeError(f"fewer than two seeds completed: {detail}")
    timings = [
        f"{time.strftime('%Y-%m-%dT%H:%M:%S')} seed={seed} wall_clock_s={elapsed:.3f}"
        for seed, _, _, elapsed in raw
    ]

    summary: dict[str, dict] = {}
    for name in VARIANTS:
        summary[name] = {}
        for metric in ("binary_f1", "macro_f1"):
            values = [entry["metrics"][name][metric] for entry in per_seed]
            n = len(values)
            mean = sum(values) / n
            var = sum((v - mean) ** 2 for v in values) / (n - 1)
            summary[name][metric] = {"mean": mean, "std": var**0.5, "values": values}

    report = {
        "config": cfg.to_dict(),
        "variants": list(VARIANTS),
        "per_seed": per_seed,
        "failures": failures,
        "summary": summary,
    }
    return report, timings


def write_experiment_report(report: dict, out_dir, timings=None) -> dict[str, Path]:
    """Write report.json, summary.csv, per_seed.csv, and an optional run.log.

    Only run.log carries timestamps; the other three files are
    byte-identical across repeat runs with the same config.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    paths["report"] = out / "report.json"
    paths["report"].write_text(json.dumps(report, indent=2) + "\n")

    paths["summary"] = out / "summary.csv"
    with paths["summary"].open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["variant", "binary_f1_mean", "binary_f1_std", "macro_f1_mean", "macro_f1_std"]
        )
        for name in report["variants"]:
            row = report["summary"][name]
            writer.writerow(
                [
                    name,
                    f"{row['binary_f1']['mean']:.6f}",
                    f"{row['binary_f1']['std']:.6f}",
                    f"{row['macro_f1']['mean']:.6f}",
                    f"{row['macro_f1']['std']:.6f}",
                ]
            )

    paths["per_seed"] = out / "per_seed.csv"
    with paths["per_seed"].open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "variant", "binary_f1", "macro_f1"])
        for entry in report["per_seed"]:
            for name in report["variants"]:
                m = entry["metrics"][name]
                writer.writerow(
                    [entry["seed"], name, f"{m['binary_f1']:.6f}", f"{m['macro_f1']:.6f}"]
                )

    if timings is not None:
        paths["log"] = out / "run.log"
        paths["log"].write_text("\n".join(timings) + "\n")
    return paths
