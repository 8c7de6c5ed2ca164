"""Channel-capacity machinery for counting transferable label bits.

A trained model's label predictions are viewed as a discrete memoryless
channel from true labels to predicted labels.  The capacity of that channel,
in bits per sample, bounds how much label information the model can convey.
Everything in this module works in bits (log base 2) and uses the standard
0 * log 0 = 0 convention.

Three closed-form channel families cover the cases of interest:

* Q-ary symmetric: n inputs, correct with probability p, errors uniform
  over the other n - 1 symbols.  Capacity
  log2(n) + p log2(p) + (1 - p) log2((1 - p) / (n - 1)).
* Binary asymmetric: two inputs with per-input accuracies p_h0, p_h1.
  With K = (H_b(p_h1) - H_b(p_h0)) / (p_h0 + p_h1 - 1), the optimal mass on
  the second input is alpha* = (1 / (2^K + 1) - (1 - p_h0)) / (p_h0 + p_h1 - 1)
  and the capacity is log2(1 + 2^K) - p_h0 * K - H_b(p_h0).
* Z-channel: one input noiseless, the other flipping with probability p.
  Capacity log2(1 + (1 - p) * p^(p / (1 - p))).

The Blahut-Arimoto iteration is implemented independently of all the closed
forms and serves as the numerical oracle they are checked against.

Two bounds combine these capacities into label bits per training sample:

* hierarchy_bits_bound: class-level Q-ary capacity plus a sample-weighted
  average of per-class subclass Q-ary capacities.
* detection_bits_bound: binary-detection form; class-level binary-asymmetric
  capacity plus the alternative hypothesis's relative frequency times its
  subclass Q-ary capacity.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hierarchy import LabelHierarchy

ROW_SUM_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Iterative capacity computation failed to reach tolerance."""


def binary_entropy(x: float) -> float:
    """H_b(x) = -x log2 x - (1-x) log2 (1-x), in bits."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("binary_entropy argument must lie in [0, 1]")
    h = 0.0
    if x > 0.0:
        h -= x * np.log2(x)
    if x < 1.0:
        h -= (1.0 - x) * np.log2(1.0 - x)
    return float(h)


def entropy_bits(dist) -> float:
    """Shannon entropy of a probability vector, in bits."""
    p = np.asarray(dist, dtype=float)
    mask = p > 0
    return float(-np.sum(p[mask] * np.log2(p[mask])))


@dataclass(frozen=True)
class ChannelSpec:
    """Discrete memoryless channel: rows = true labels, columns = predictions."""

    transition: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=float)
        if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
            raise ValueError("transition must be a 2-D matrix")
        if np.any(t < -1e-15) or np.any(t > 1.0 + 1e-15):
            raise ValueError("transition entries must lie in [0, 1]")
        rows = t.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > ROW_SUM_TOL):
            raise ValueError("transition rows must sum to 1")
        t = np.clip(t, 0.0, 1.0)
        object.__setattr__(self, "transition", t)

    @property
    def input_size(self) -> int:
        return self.transition.shape[0]

    @property
    def output_size(self) -> int:
        return self.transition.shape[1]


def qsc_channel(n: int, p: float) -> ChannelSpec:
    """Q-ary symmetric channel matrix."""
    if n < 2:
        raise ValueError("alphabet size must be at least 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    off = (1.0 - p) / (n - 1)
    t = np.full((n, n), off)
    np.fill_diagonal(t, p)
    return ChannelSpec(t)


def bac_channel(p_h0: float, p_h1: float) -> ChannelSpec:
    """Binary asymmetric channel with per-input accuracies."""
    for v in (p_h0, p_h1):
        if not 0.0 < v <= 1.0:
            raise ValueError("accuracies must lie in (0, 1]")
    return ChannelSpec(np.array([[p_h0, 1.0 - p_h0], [1.0 - p_h1, p_h1]]))


def z_channel(p_flip: float) -> ChannelSpec:
    """First input noiseless; second flips to the first with p_flip."""
    if not 0.0 <= p_flip <= 1.0:
        raise ValueError("p_flip must lie in [0, 1]")
    return ChannelSpec(np.array([[1.0, 0.0], [p_flip, 1.0 - p_flip]]))


def mutual_information(input_dist, channel: ChannelSpec) -> float:
    """I(Y; Yhat) in bits for a given input distribution."""
    r = np.asarray(input_dist, dtype=float)
    if r.shape != (channel.input_size,):
        raise ValueError("input distribution length does not match channel")
    if np.any(r < -1e-15) or abs(r.sum() - 1.0) > ROW_SUM_TOL:
        raise ValueError("input distribution must be a probability vector")
    P = channel.transition
    q = r @ P
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(P > 0, np.log2(np.where(P > 0, P, 1.0) / np.where(q > 0, q, 1.0)), 0.0)
    per_input = np.sum(np.where(P > 0, P * log_ratio, 0.0), axis=1)
    return float(max(r @ per_input, 0.0))


def blahut_arimoto(
    channel: ChannelSpec, tol: float = 1e-10, max_iters: int = 100_000
) -> tuple[float, np.ndarray]:
    """Capacity and a capacity-achieving input distribution.

    Alternating maximization from a uniform input.  Each iteration brackets
    the capacity between sum(r * D) and max(D), where D_x is the relative
    entropy between row x and the current output marginal; iteration stops
    when the bracket is tighter than tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    P = channel.transition
    m = channel.input_size
    r = np.full(m, 1.0 / m)
    for _ in range(max_iters):
        q = r @ P
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(P > 0, P / np.where(q > 0, q, 1.0), 1.0)
            D = np.sum(np.where(P > 0, P * np.log2(ratio), 0.0), axis=1)
        i_lower = float(r @ D)
        i_upper = float(D.max())
        if i_upper - i_lower < tol:
            return max(i_lower, 0.0), r
        r = r * np.exp2(D)
        r = r / r.sum()
    raise ConvergenceError(f"no convergence within {max_iters} iterations (gap > {tol})")


def qsc_capacity(n: int, p: float) -> float:
    """Closed-form Q-ary symmetric capacity.

    For p below 1/n the expression is still the mutual information at a
    uniform input but no longer the channel capacity; such calls are
    evaluated with a warning.
    """
    if n < 2:
        raise ValueError("alphabet size must be at least 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p < 1.0 / n:
        warnings.warn(
            f"qsc_capacity: p={p} is below chance 1/{n}; value is the uniform-input "
            "mutual information, not the capacity",
            RuntimeWarning,
            stacklevel=2,
        )
    value = np.log2(n)
    if p > 0.0:
        value += p * np.log2(p)
    if p < 1.0:
        value += (1.0 - p) * np.log2((1.0 - p) / (n - 1))
    return float(value)


def _bac_canonical(p_h0: float, p_h1: float) -> tuple[float, float]:
    for v in (p_h0, p_h1):
        if not 0.0 < v <= 1.0:
            raise ValueError("accuracies must lie in (0, 1]")
    # canonical order: p_h1 <= p_h0 (capacity is invariant to relabeling)
    return (p_h0, p_h1) if p_h0 >= p_h1 else (p_h1, p_h0)


def bac_exponent(p_h0: float, p_h1: float) -> float:
    """K = (H_b(p_h1) - H_b(p_h0)) / (p_h0 + p_h1 - 1) after canonicalization."""
    p0, p1 = _bac_canonical(p_h0, p_h1)
    denom = p0 + p1 - 1.0
    if denom == 0.0:
        raise ValueError("singular channel: p_h0 + p_h1 = 1 has zero capacity")
    return (binary_entropy(p1) - binary_entropy(p0)) / denom


def bac_optimal_input(p_h0: float, p_h1: float) -> float:
    """Optimal mass alpha* on the lower-accuracy (alternative) input.

    Raises on the singular line p_h0 + p_h1 = 1, where the output is
    independent of the input and every distribution is trivially optimal.
    """
    p0, p1 = _bac_canonical(p_h0, p_h1)
    denom = p0 + p1 - 1.0
    if denom == 0.0:
        raise ValueError("singular channel: p_h0 + p_h1 = 1 has zero capacity")
    k = (binary_entropy(p1) - binary_entropy(p0)) / denom
    alpha = (1.0 / (np.exp2(k) + 1.0) - (1.0 - p0)) / denom
    return float(alpha)


def bac_capacity(p_h0: float, p_h1: float) -> float:
    """Closed-form binary asymmetric capacity; 0 on the singular line."""
    p0, p1 = _bac_canonical(p_h0, p_h1)
    if p0 + p1 == 1.0:
        warnings.warn(
            "bac_capacity: p_h0 + p_h1 = 1 makes the output independent of the "
            "input; capacity is 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    k = bac_exponent(p0, p1)
    value = np.log2(1.0 + np.exp2(k)) - p0 * k - binary_entropy(p0)
    return float(max(value, 0.0))


def z_channel_capacity(p_flip: float) -> float:
    """Closed-form Z-channel capacity."""
    if not 0.0 <= p_flip <= 1.0:
        raise ValueError("p_flip must lie in [0, 1]")
    if p_flip == 0.0:
        return 1.0
    if p_flip == 1.0:
        return 0.0
    p = p_flip
    return float(np.log2(1.0 + (1.0 - p) * p ** (p / (1.0 - p))))


# ---------------------------------------------------------------------------
# Label-bit bounds.


@dataclass(frozen=True)
class BitsBreakdown:
    """Class bits + subclass bits per sample; total is their exact float sum."""

    class_bits: float
    subclass_bits: float

    def __post_init__(self):
        if self.class_bits < 0 or self.subclass_bits < 0:
            raise ValueError("bit counts must be nonnegative")

    @property
    def total_bits(self) -> float:
        return self.class_bits + self.subclass_bits


@dataclass(frozen=True)
class HierarchyBitsParams:
    """Inputs for the hierarchy-wide bound.

    p_c: class-level accuracy; p_ci: per-class subclass accuracy (one entry
    per class; entries for single-subclass classes are ignored); counts:
    per-subclass training sample counts grouped by class.
    """

    hierarchy: LabelHierarchy
    p_c: float
    p_ci: tuple[float, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        h = self.hierarchy
        if not 0.0 < self.p_c <= 1.0:
            raise ValueError("p_c must lie in (0, 1]")
        p_ci = tuple(float(p) for p in self.p_ci)
        if len(p_ci) != h.num_classes:
            raise ValueError("p_ci needs one entry per class")
        counts = tuple(tuple(int(n) for n in row) for row in self.counts)
        if len(counts) != h.num_classes or any(
            len(row) != h.subclasses_per_class[c] for c, row in enumerate(counts)
        ):
            raise ValueError("counts shape does not match the hierarchy")
        if any(n < 0 for row in counts for n in row):
            raise ValueError("counts must be nonnegative")
        if sum(n for row in counts for n in row) == 0:
            raise ValueError("total sample count is zero")
        for c, p in enumerate(p_ci):
            if h.subclasses_per_class[c] > 1 and not 0.0 < p <= 1.0:
                raise ValueError(f"subclass accuracy for class {c} must lie in (0, 1]")
        object.__setattr__(self, "p_ci", p_ci)
        object.__setattr__(self, "counts", counts)


def hierarchy_bits_bound(params: HierarchyBitsParams) -> BitsBreakdown:
    """Class Q-ary capacity plus sample-weighted per-class subclass capacities."""
    h = params.hierarchy
    class_bits = qsc_capacity(h.num_classes, params.p_c)
    total = sum(n for row in params.counts for n in row)
    subclass_bits = 0.0
    for c in range(h.num_classes):
        n_c = h.subclasses_per_class[c]
        if n_c == 1:
            continue  # a lone subclass carries no extra label information
        weight = sum(params.counts[c]) / total
        subclass_bits += weight * qsc_capacity(n_c, params.p_ci[c])
    return BitsBreakdown(class_bits, subclass_bits)


@dataclass(frozen=True)
class DetectionParams:
    """Inputs for the binary-detection bound.

    The null hypothesis h0 is the unsplit class; the alternative h1 carries
    n_s subclasses with subclass accuracy p_s.  n_h0/n_h1 are training
    sample counts per hypothesis.
    """

    p_h0: float
    p_h1: float
    n_s: int
    p_s: float
    n_h0: int
    n_h1: int

    def __post_init__(self):
        for v in (self.p_h0, self.p_h1):
            if not 0.0 < v <= 1.0:
                raise ValueError("hypothesis accuracies must lie in (0, 1]")
        if self.n_s < 1:
            raise ValueError("n_s must be at least 1")
        if self.n_s > 1 and not 0.0 < self.p_s <= 1.0:
            raise ValueError("p_s must lie in (0, 1]")
        if self.n_h0 < 0 or self.n_h1 < 0:
            raise ValueError("counts must be nonnegative")
        if self.n_h0 + self.n_h1 == 0:
            raise ValueError("total sample count is zero")


def detection_bits_bound(params: DetectionParams) -> BitsBreakdown:
    """Binary-asymmetric class capacity plus weighted subclass capacity."""
    class_bits = bac_capacity(params.p_h0, params.p_h1)
    if params.n_s == 1:
        subclass_bits = 0.0
    else:
        weight = params.n_h1 / (params.n_h0 + params.n_h1)
        subclass_bits = weight * qsc_capacity(params.n_s, params.p_s)
    return BitsBreakdown(class_bits, subclass_bits)


# ---------------------------------------------------------------------------
# Fitting accuracies from empirical confusion matrices and assembling the
# label-bits report.


def estimate_accuracy(confusion_counts) -> float:
    """Sample-weighted mean diagonal of the row-normalized confusion matrix.

    Collapses an empirical confusion matrix to the single per-level accuracy
    the closed-form channels assume.  Equal to trace / total.
    """
    c = np.asarray(confusion_counts, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.size == 0:
        raise ValueError("confusion matrix must be square and nonempty")
    if np.any(c < 0):
        raise ValueError("confusion counts must be nonnegative")
    rows = c.sum(axis=1)
    if np.any(rows == 0):
        raise ValueError("every true label needs at least one sample")
    return float(np.trace(c) / c.sum())


def confusion_to_channel(confusion_counts) -> ChannelSpec:
    """Row-normalize an empirical confusion matrix into a channel."""
    c = np.asarray(confusion_counts, dtype=float)
    rows = c.sum(axis=1, keepdims=True)
    if np.any(rows == 0):
        raise ValueError("every true label needs at least one sample")
    return ChannelSpec(c / rows)


@dataclass(frozen=True)
class BitsReportRow:
    """One task's label-bit accounting.

    subclass_bits is None when the task has no subclass structure (class
    labels only); fitted accuracies and empirical capacities ride along for
    the JSON report.
    """

    task: str
    breakdown: BitsBreakdown
    has_subclass_column: bool
    fitted: dict
    empirical: dict
    counts: dict


def label_bits_report(
    class_confusion,
    per_class_subclass_confusions,
    hierarchy: LabelHierarchy,
    counts,
    task: str = "task",
) -> BitsReportRow:
    """Fit accuracies from training confusions and bound the label bits.

    Two-class hierarchies with at most one subclass-split class use the
    binary-detection bound (per-hypothesis accuracies straight from the
    class confusion's diagonal); everything else uses the hierarchy-wide
    bound with a single fitted class accuracy.  The empirical dict carries
    the Blahut-Arimoto capacity of each raw normalized confusion so the
    symmetric-model fitting error stays visible.
    """
    class_conf = np.asarray(class_confusion, dtype=float)
    if class_conf.shape != (hierarchy.num_classes, hierarchy.num_classes):
        raise ValueError("class confusion shape does not match the hierarchy")
    sub_confs = list(per_class_subclass_confusions)
    if len(sub_confs) != hierarchy.num_classes:
        raise ValueError("need one subclass confusion (or None) per class")
    counts = tuple(tuple(int(n) for n in row) for row in counts)
    for c in range(hierarchy.num_classes):
        n_c = hierarchy.subclasses_per_class[c]
        if n_c > 1:
            got = np.asarray(sub_confs[c], dtype=float)
            if got.shape != (n_c, n_c):
                raise ValueError(f"class {c} subclass confusion must be {n_c}x{n_c}")
        if len(counts[c]) != n_c:
            raise ValueError("counts shape does not match the hierarchy")

    split_classes = [c for c, n in enumerate(hierarchy.subclasses_per_class) if n > 1]
    class_channel = confusion_to_channel(class_conf)
    empirical = {"class_capacity": blahut_arimoto(class_channel)[0]}
    fitted: dict = {}

    detection = hierarchy.num_classes == 2 and len(split_classes) <= 1
    if detection:
        diag = class_channel.transition.diagonal()
        if len(split_classes) == 1:
            alt = split_classes[0]
            null = 1 - alt
            n_s = hierarchy.subclasses_per_class[alt]
            p_s = estimate_accuracy(sub_confs[alt])
            empirical["subclass_capacity"] = {
                alt: blahut_arimoto(confusion_to_channel(sub_confs[alt]))[0]
            }
        else:
            alt, null = 0, 1
            n_s, p_s = 1, 1.0
        params = DetectionParams(
            p_h0=float(diag[null]),
            p_h1=float(diag[alt]),
            n_s=n_s,
            p_s=p_s,
            n_h0=sum(counts[null]),
            n_h1=sum(counts[alt]),
        )
        fitted.update(
            {"p_h0": params.p_h0, "p_h1": params.p_h1, "n_s": n_s, "p_s": p_s}
        )
        breakdown = detection_bits_bound(params)
    else:
        p_c = estimate_accuracy(class_conf)
        p_ci = []
        sub_caps = {}
        for c in range(hierarchy.num_classes):
            if hierarchy.subclasses_per_class[c] > 1:
                p_ci.append(estimate_accuracy(sub_confs[c]))
                sub_caps[c] = blahut_arimoto(confusion_to_channel(sub_confs[c]))[0]
            else:
                p_ci.append(1.0)
        empirical["subclass_capacity"] = sub_caps
        params = HierarchyBitsParams(hierarchy, p_c, tuple(p_ci), counts)
        fitted.update({"p_c": p_c, "p_ci": list(p_ci)})
        breakdown = hierarchy_bits_bound(params)

    return BitsReportRow(
        task=task,
        breakdown=breakdown,
        has_subclass_column=bool(split_classes),
        fitted=fitted,
        empirical=empirical,
        counts={"per_class": [sum(row) for row in counts], "per_subclass": [list(r) for r in counts]},
    )


def write_bits_csv(rows: list[BitsReportRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "class_bits", "subclass_bits", "total_bits"])
        for row in rows:
            sub = f"{row.breakdown.subclass_bits:.6f}" if row.has_subclass_column else ""
            writer.writerow(
                [
                    row.task,
                    f"{row.breakdown.class_bits:.6f}",
                    sub,
                    f"{row.breakdown.total_bits:.6f}",
                ]
            )


def write_bits_json(rows: list[BitsReportRow], path) -> None:
    payload = []
    for row in rows:
        entry = {
            "task": row.task,
            "class_bits": row.breakdown.class_bits,
            "subclass_bits": row.breakdown.subclass_bits if row.has_subclass_column else None,
            "total_bits": row.breakdown.total_bits,
            "fitted": row.fitted,
            "empirical": row.empirical,
            "counts": row.counts,
        }
        payload.append(entry)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
