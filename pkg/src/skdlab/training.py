"""Training regimes, class-level evaluation, and multi-seed statistics.

Four student regimes are supported through DistillConfig.mode:

* baseline: class-label cross entropy only.
* subclass: subclass-label cross entropy only.
* kd:  class-label cross entropy blended with softened KL against a
  class-level teacher.
* skd: subclass-label cross entropy blended with softened KL against a
  subclass-level teacher.

Models that emit subclass logits are always evaluated at class level by
summing each class's subclass probabilities before the argmax.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .data import Dataset
from .hierarchy import LabelHierarchy
from .losses import (
    CombinedObjective,
    CrossEntropyOnLabels,
    DistillConfig,
    aggregate_class_probabilities,
)
from .network import (
    DenseNetwork,
    OptimizerState,
    backward,
    forward,
    init_network,
    optimizer_step,
    softmax_temperature,
)

# Desk-scale defaults: a 64-32 teacher distilled into an 8-unit student.
TEACHER_HIDDEN = (64, 32)
STUDENT_HIDDEN = (8,)
TEACHER_EPOCHS = 40
STUDENT_EPOCHS = 30
DEFAULT_BATCH = 32
DEFAULT_LR = 1e-3
DEFAULT_WEIGHT_DECAY = 5e-4
DEFAULT_LR_DECAY = 0.91
TAU_SKD = 5.0
TAU_KD = 128.0
DEFAULT_LAM = 0.45


@dataclass(frozen=True)
class TrainConfig:
    hidden_layers: tuple[int, ...] = TEACHER_HIDDEN
    epochs: int = TEACHER_EPOCHS
    batch_size: int = DEFAULT_BATCH
    learning_rate: float = DEFAULT_LR
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    lr_decay: float = DEFAULT_LR_DECAY
    seed: int = 0
    distill: Optional[DistillConfig] = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))


def teacher_train_config(seed: int = 0, **overrides) -> TrainConfig:
    return replace(TrainConfig(seed=seed), **overrides)


def student_train_config(seed: int = 0, **overrides) -> TrainConfig:
    base = TrainConfig(hidden_layers=STUDENT_HIDDEN, epochs=STUDENT_EPOCHS, seed=seed)
    return replace(base, **overrides)


@dataclass
class TrainResult:
    network: DenseNetwork
    loss_per_epoch: list[float]

    @property
    def final_loss(self) -> float:
        return self.loss_per_epoch[-1]


def _check_hierarchy(ds: Dataset, hierarchy: LabelHierarchy) -> None:
    if ds.hierarchy != hierarchy:
        raise ValueError("dataset hierarchy does not match the requested hierarchy")


def _run_training(
    features: np.ndarray,
    labels: np.ndarray,
    num_outputs: int,
    cfg: TrainConfig,
    teacher_logits: Optional[np.ndarray],
    tau: float,
    lam: float,
) -> TrainResult:
    dims = (features.shape[1], *cfg.hidden_layers, num_outputs)
    net = init_network(dims, [cfg.seed, 0])
    state = OptimizerState(
        learning_rate=cfg.learning_rate,
        lr_decay=cfg.lr_decay,
        weight_decay=cfg.weight_decay,
    )
    shuffle_rng = np.random.default_rng([cfg.seed, 1])
    n = len(features)
    loss_per_epoch = []
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            if teacher_logits is None:
                spec = CrossEntropyOnLabels(labels[idx])
            else:
                spec = CombinedObjective(labels[idx], teacher_logits[idx], tau, lam)
            loss, grads = backward(net, features[idx], spec)
            optimizer_step(net, grads, state)
            batch_losses.append(loss)
        state.end_epoch()
        loss_per_epoch.append(float(np.mean(batch_losses)))
    if not np.isfinite(loss_per_epoch[-1]):
        raise FloatingPointError("training diverged: final loss is not finite")
    return TrainResult(net, loss_per_epoch)


def train_teacher(
    train_set: Dataset,
    hierarchy: LabelHierarchy,
    cfg: TrainConfig,
    label_level: str = "subclass",
) -> TrainResult:
    """Minibatch cross-entropy training at class or subclass level."""
    _check_hierarchy(train_set, hierarchy)
    if len(train_set) == 0:
        raise ValueError("empty training set")
    if label_level == "class":
        width, labels = hierarchy.num_classes, train_set.class_labels
    elif label_level == "subclass":
        width, labels = hierarchy.total_subclasses, train_set.subclass_labels
    else:
        raise ValueError("label_level must be 'class' or 'subclass'")
    return _run_training(train_set.features, labels, width, cfg, None, 1.0, 1.0)


def train_student(
    train_set: Dataset,
    hierarchy: LabelHierarchy,
    cfg: TrainConfig,
    teacher: Optional[DenseNetwork] = None,
) -> TrainResult:
    """Train a student under cfg.distill's mode; teacher stays frozen."""
    _check_hierarchy(train_set, hierarchy)
    if len(train_set) == 0:
        raise ValueError("empty training set")
    distill = cfg.distill or DistillConfig()
    if distill.subclass_level:
        width, labels = hierarchy.total_subclasses, train_set.subclass_labels
    else:
        width, labels = hierarchy.num_classes, train_set.class_labels
    if not distill.uses_teacher:
        if teacher is not None:
            raise ValueError(f"mode {distill.mode!r} takes no teacher")
        return _run_training(train_set.features, labels, width, cfg, None, 1.0, 1.0)
    if teacher is None:
        raise ValueError(f"mode {distill.mode!r} requires a teacher")
    if teacher.num_outputs != width:
        level = "subclass" if distill.subclass_level else "class"
        raise ValueError(
            f"teacher level mismatch: mode {distill.mode!r} needs a {level}-level "
            f"teacher with {width} outputs, got {teacher.num_outputs}"
        )
    # teacher is frozen: its logits are fixed targets computed up front
    teacher_logits = forward(teacher, train_set.features)
    return _run_training(
        train_set.features, labels, width, cfg, teacher_logits, distill.tau, distill.lam
    )


# ---------------------------------------------------------------------------
# Evaluation.


@dataclass
class Metrics:
    """Class-level evaluation results (plus subclass confusion when available).

    binary_f1 reports class 0, the minority/positive role in every task
    preset; macro_f1 is the unweighted mean across classes.
    """

    class_confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    binary_f1: float
    macro_f1: float
    subclass_confusion: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {
            "class_confusion": self.class_confusion.tolist(),
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
            "binary_f1": self.binary_f1,
            "macro_f1": self.macro_f1,
        }
        if self.subclass_confusion is not None:
            out["subclass_confusion"] = self.subclass_confusion.tolist()
        return out


def _confusion(true_labels, pred_labels, size) -> np.ndarray:
    counts = np.zeros((size, size), dtype=int)
    np.add.at(counts, (true_labels, pred_labels), 1)
    return counts


def _prf_from_confusion(conf: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    tp = np.diag(conf).astype(float)
    pred_totals = conf.sum(axis=0).astype(float)
    true_totals = conf.sum(axis=1).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pred_totals > 0, tp / pred_totals, 0.0)
        recall = np.where(true_totals > 0, tp / true_totals, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    return precision, recall, f1


def evaluate(
    model: DenseNetwork,
    dataset: Dataset,
    hierarchy: LabelHierarchy,
    level_of_model: str,
) -> Metrics:
    """Class-level metrics; subclass models are aggregated before the argmax."""
    _check_hierarchy(dataset, hierarchy)
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    if level_of_model == "class":
        if model.num_outputs != hierarchy.num_classes:
            raise ValueError("model width does not match class count")
        class_probs = softmax_temperature(forward(model, dataset.features), 1.0)
        subclass_confusion = None
    elif level_of_model == "subclass":
        if model.num_outputs != hierarchy.total_subclasses:
            raise ValueError("model width does not match subclass count")
        subclass_probs = softmax_temperature(forward(model, dataset.features), 1.0)
        class_probs = aggregate_class_probabilities(subclass_probs, hierarchy)
        subclass_pred = np.argmax(subclass_probs, axis=1)
        subclass_confusion = _confusion(
            dataset.subclass_labels, subclass_pred, hierarchy.total_subclasses
        )
    else:
        raise ValueError("level_of_model must be 'class' or 'subclass'")
    pred = np.argmax(class_probs, axis=1)
    conf = _confusion(dataset.class_labels, pred, hierarchy.num_classes)
    precision, recall, f1 = _prf_from_confusion(conf)
    return Metrics(
        class_confusion=conf,
        precision=precision,
        recall=recall,
        f1=f1,
        binary_f1=float(f1[0]),
        macro_f1=float(np.mean(f1)),
        subclass_confusion=subclass_confusion,
    )


def per_class_subclass_confusions(
    model: DenseNetwork, dataset: Dataset, hierarchy: LabelHierarchy
) -> list[Optional[np.ndarray]]:
    """Within-class subclass confusions from a subclass-level model.

    For each class with more than one subclass, the argmax is restricted to
    that class's own subclass columns, giving an n_c x n_c matrix indexed by
    within-class subclass position.  Single-subclass classes yield None.
    """
    if model.num_outputs != hierarchy.total_subclasses:
        raise ValueError("model width does not match subclass count")
    probs = softmax_temperature(forward(model, dataset.features), 1.0)
    out: list[Optional[np.ndarray]] = []
    for c in range(hierarchy.num_classes):
        n_c = hierarchy.subclasses_per_class[c]
        if n_c == 1:
            out.append(None)
            continue
        block = hierarchy.class_slice(c)
        mask = dataset.class_labels == c
        true_within = dataset.subclass_labels[mask] - hierarchy.offsets[c]
        pred_within = np.argmax(probs[mask][:, block], axis=1)
        out.append(_confusion(true_within, pred_within, n_c))
    return out


def confusion_to_row_stochastic(counts_matrix) -> np.ndarray:
    """Divide each confusion row by its sum; rejects empty rows."""
    c = np.asarray(counts_matrix, dtype=float)
    if c.ndim != 2:
        raise ValueError("confusion matrix must be 2-D")
    rows = c.sum(axis=1, keepdims=True)
    if np.any(rows == 0):
        raise ValueError("every true label needs at least one sample")
    return c / rows


# ---------------------------------------------------------------------------
# Multi-seed statistics.


@dataclass
class RunSummary:
    seeds: list[int]
    values: list[float]
    mean: float
    std: float

    @property
    def count(self) -> int:
        return len(self.values)


def multi_run(run_fn: Callable[[int], float], n_seeds: int, base_seed: int) -> RunSummary:
    """Run run_fn at seeds base_seed + k for k < n_seeds and summarize.

    Reports the sample standard deviation (ddof=1); any failure is re-raised
    with the offending seed attached.
    """
    if n_seeds < 2:
        raise ValueError("n_seeds must be at least 2")
    seeds = [base_seed + k for k in range(n_seeds)]
    values = []
    for s in seeds:
        try:
            values.append(float(run_fn(s)))
        except Exception as exc:
            raise RuntimeError(f"run for seed {s} failed: {exc}") from exc
    arr = np.array(values)
    return RunSummary(seeds, values, float(arr.mean()), float(arr.std(ddof=1)))
