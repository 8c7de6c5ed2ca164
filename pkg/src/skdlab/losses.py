"""Distillation losses and subclass-to-class probability aggregation.

Training losses are in nats (natural log); the information-theory module is
the only place that works in bits.  Batch losses are arithmetic means over
samples so the balance weight keeps the same meaning at every batch size.

The distillation term compares temperature-softened distributions:

    distill = KL( softmax(teacher/tau) || softmax(student/tau) )

and the student objective blends it with cross entropy on ground-truth
labels:

    objective = lam * ce + (1 - lam) * distill

with no extra temperature-squared rescaling of the distillation gradient:
the objective is differentiated exactly as written.  In subclass
distillation the cross entropy targets subclass labels; in class-level
distillation and plain baseline training it targets class labels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hierarchy import LabelHierarchy
from .network import log_softmax_temperature, softmax_temperature

PROB_FLOOR = 1e-300

STUDENT_MODES = ("baseline", "subclass", "kd", "skd")


@dataclass(frozen=True)
class DistillConfig:
    """Student-objective settings: mode, temperature, balance weight."""

    mode: str = "baseline"
    tau: float = 1.0
    lam: float = 0.45

    def __post_init__(self):
        if self.mode not in STUDENT_MODES:
            raise ValueError(f"mode must be one of {STUDENT_MODES}, got {self.mode!r}")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")

    @property
    def uses_teacher(self) -> bool:
        return self.mode in ("kd", "skd")

    @property
    def subclass_level(self) -> bool:
        """Whether the student emits subclass logits (vs class logits)."""
        return self.mode in ("subclass", "skd")


def cross_entropy(probabilities, one_hot_target) -> float:
    """-ln p[target] for a single probability vector and one-hot target."""
    p = np.asarray(probabilities, dtype=float)
    t = np.asarray(one_hot_target, dtype=float)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError("probabilities and target must be 1-D and the same length")
    hot = np.flatnonzero(t)
    if len(hot) != 1 or t[hot[0]] != 1.0 or np.any((t != 0.0) & (t != 1.0)):
        raise ValueError("target must be one-hot")
    return float(-np.log(max(p[hot[0]], PROB_FLOOR)))


def kl_divergence(p, q) -> float:
    """sum p ln(p/q) in nats, with 0 ln 0 = 0 and q floored at 1e-300."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must have the same shape")
    q = np.maximum(q, PROB_FLOOR)
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def _batch_logits(name, *arrays):
    out = []
    width = None
    for arr in arrays:
        a = np.atleast_2d(np.asarray(arr, dtype=float))
        if width is None:
            width = a.shape[1]
        elif a.shape[1] != width:
            raise ValueError(f"{name}: logit widths differ ({width} vs {a.shape[1]})")
        out.append(a)
    if out[0].shape[0] != out[1].shape[0]:
        raise ValueError(f"{name}: batch sizes differ")
    return out


def skd_loss(teacher_logits, student_logits, tau: float) -> float:
    """Batch-mean KL between softened teacher and student subclass outputs."""
    t, s = _batch_logits("skd_loss", teacher_logits, student_logits)
    pt = softmax_temperature(t, tau)
    log_ps = log_softmax_temperature(s, tau)
    log_pt = log_softmax_temperature(t, tau)
    per_sample = np.sum(pt * (log_pt - log_ps), axis=1)
    return float(np.mean(per_sample))


def conventional_kd_loss(teacher_class_logits, student_class_logits, tau: float) -> float:
    """Class-level distillation loss; same functional form, class-width logits."""
    return skd_loss(teacher_class_logits, student_class_logits, tau)


def student_objective(ce_term: float, skd_term: float, lam: float) -> float:
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    return lam * ce_term + (1.0 - lam) * skd_term


def aggregate_class_probabilities(subclass_probs, hierarchy: LabelHierarchy) -> np.ndarray:
    """Sum each class's block of subclass probabilities.

    Accepts a single vector or a batch; preserves total mass exactly.
    """
    p = np.asarray(subclass_probs, dtype=float)
    if p.shape[-1] != hierarchy.total_subclasses:
        raise ValueError(
            f"width {p.shape[-1]} does not match {hierarchy.total_subclasses} subclasses"
        )
    starts = np.array(hierarchy.offsets[:-1])
    return np.add.reduceat(p, starts, axis=-1)


# ---------------------------------------------------------------------------
# Loss specs: the output-layer stories handed to network.backward.  Each
# exposes loss_and_logit_grad(logits) -> (batch-mean loss, dL/dlogits).
# Gradients are exact analytic derivatives:
#   d(mean CE)/dz      = (softmax(z) - onehot) / n
#   d(mean distill)/dz = (softmax(z/tau) - softmax(t/tau)) / (n * tau)


def _one_hot(labels, width):
    y = np.asarray(labels, dtype=int).ravel()
    if y.size == 0:
        raise ValueError("empty label batch")
    if y.min() < 0 or y.max() >= width:
        raise ValueError(f"label out of range for width {width}")
    hot = np.zeros((y.size, width))
    hot[np.arange(y.size), y] = 1.0
    return hot


@dataclass
class CrossEntropyOnLabels:
    """Mean cross entropy of softmax(logits) against integer labels."""

    labels: np.ndarray

    def loss_and_logit_grad(self, logits):
        z = np.atleast_2d(logits)
        hot = _one_hot(self.labels, z.shape[1])
        if hot.shape[0] != z.shape[0]:
            raise ValueError("labels do not match batch size")
        n = z.shape[0]
        log_p = log_softmax_temperature(z, 1.0)
        loss = -np.sum(hot * log_p) / n
        grad = (softmax_temperature(z, 1.0) - hot) / n
        return float(loss), grad


@dataclass
class DistillAgainstTeacher:
    """Mean softened KL against fixed teacher logits."""

    teacher_logits: np.ndarray
    tau: float

    def loss_and_logit_grad(self, logits):
        z = np.atleast_2d(logits)
        t = np.atleast_2d(np.asarray(self.teacher_logits, dtype=float))
        if t.shape != z.shape:
            raise ValueError(f"teacher logits {t.shape} do not match student {z.shape}")
        loss = skd_loss(t, z, self.tau)
        n = z.shape[0]
        grad = (softmax_temperature(z, self.tau) - softmax_temperature(t, self.tau)) / (n * self.tau)
        return float(loss), grad


@dataclass
class CombinedObjective:
    """lam * CE(labels) + (1 - lam) * softened KL(teacher)."""

    labels: np.ndarray
    teacher_logits: np.ndarray
    tau: float
    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")

    def loss_and_logit_grad(self, logits):
        ce_loss, ce_grad = CrossEntropyOnLabels(self.labels).loss_and_logit_grad(logits)
        kd_loss_v, kd_grad = DistillAgainstTeacher(
            self.teacher_logits, self.tau
        ).loss_and_logit_grad(logits)
        loss = student_objective(ce_loss, kd_loss_v, self.lam)
        grad = self.lam * ce_grad + (1.0 - self.lam) * kd_grad
        return float(loss), grad
