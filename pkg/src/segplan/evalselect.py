"""Empirical decisions: Dice bookkeeping, configuration selection,
connected-component postprocessing and bootstrap rank aggregation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import EmptyInput, GeometryMismatch
from .geometry import LabelVolume

ALL_FOREGROUND = "all_foreground"

# Fixed preference order for tie-breaking between configurations.
KIND_PRIORITY = ("3d_fullres", "3d_cascade_fullres", "3d_lowres", "2d")


def dice(pred: LabelVolume, ref: LabelVolume, cls: int) -> float:
    """Overlap coefficient for one class; both-empty counts as 1, one-empty as 0."""
    if pred.shape != ref.shape:
        raise GeometryMismatch(f"pred {pred.shape} vs ref {ref.shape}")
    p = pred.data == cls
    r = ref.data == cls
    p_sum = int(p.sum())
    r_sum = int(r.sum())
    if p_sum == 0 and r_sum == 0:
        return 1.0
    if p_sum == 0 or r_sum == 0:
        return 0.0
    inter = int(np.logical_and(p, r).sum())
    return 2.0 * inter / (p_sum + r_sum)


@dataclass(frozen=True)
class EvaluationResult:
    """Per-case, per-foreground-class Dice plus the pooled mean."""

    per_case: dict = field(default_factory=dict)  # case id -> {class: dice}

    @property
    def mean_foreground_dice(self) -> float:
        values = [d for scores in self.per_case.values() for d in scores.values()]
        if not values:
            raise EmptyInput("no dice entries")
        return float(np.mean(values))

    def class_mean(self, cls: int) -> float:
        values = [scores[cls] for scores in self.per_case.values() if cls in scores]
        if not values:
            raise EmptyInput(f"no entries for class {cls}")
        return float(np.mean(values))

    def to_dict(self) -> dict:
        return {
            "per_case": {
                cid: {str(c): v for c, v in scores.items()}
                for cid, scores in self.per_case.items()
            },
            "mean_foreground_dice": self.mean_foreground_dice,
        }


def evaluate_cases(
    pairs: list[tuple[str, LabelVolume, LabelVolume]], n_classes: int
) -> EvaluationResult:
    """Dice for every (case, foreground class) pair."""
    if not pairs:
        raise EmptyInput("no prediction/reference pairs")
    per_case = {}
    for case_id, pred, ref in pairs:
        per_case[case_id] = {c: dice(pred, ref, c) for c in range(1, n_classes + 1)}
    return EvaluationResult(per_case)


def mean_foreground_dice(results: EvaluationResult) -> float:
    return results.mean_foreground_dice


def select_configuration(candidates: dict) -> tuple[str, ...]:
    """Best single configuration or two-configuration ensemble by mean Dice.

    Keys are tuples of configuration names (singletons for single models).
    Ties prefer a single model over an ensemble, then the fixed kind order.
    """
    if not candidates:
        raise EmptyInput("no candidates")

    def priority(members: tuple[str, ...]) -> tuple:
        ranks = tuple(
            KIND_PRIORITY.index(m) if m in KIND_PRIORITY else len(KIND_PRIORITY)
            for m in members
        )
        return (len(members), ranks)

    top_score = max(candidates.values())
    tied = [tuple(k) for k, v in candidates.items() if v == top_score]
    tied.sort(key=priority)
    return tied[0]


def largest_component_filter(labels: LabelVolume, scope=ALL_FOREGROUND) -> LabelVolume:
    """Suppress all but the largest connected component.

    Scope ``all_foreground`` treats every foreground class as one region and
    clears voxels outside the winning component; an integer scope only clears
    that class's voxels. Full (8/26) connectivity; size ties keep the
    component containing the lexicographically smallest voxel.
    """
    data = labels.data
    if scope == ALL_FOREGROUND:
        mask = data > 0
    else:
        mask = data == int(scope)
    if not mask.any():
        return labels

    structure = np.ones((3,) * data.ndim, dtype=bool)
    comp, n = ndimage.label(mask, structure=structure)
    if n <= 1:
        return labels
    sizes = np.bincount(comp.ravel())
    sizes[0] = 0
    # scipy assigns component ids in scan order, so among equal sizes the
    # smallest id holds the lexicographically smallest seed voxel
    winner = int(np.argmax(sizes))
    out = data.copy()
    clear = mask & (comp != winner)
    out[clear] = 0
    return labels.with_data(out)


@dataclass(frozen=True)
class PostprocessingDecision:
    all_foreground_as_one: bool
    per_class: dict  # class id -> bool

    def to_dict(self) -> dict:
        return {
            "all_foreground_as_one": self.all_foreground_as_one,
            "per_class": {str(c): bool(v) for c, v in self.per_class.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PostprocessingDecision":
        return cls(
            bool(d["all_foreground_as_one"]),
            {int(c): bool(v) for c, v in d["per_class"].items()},
        )


def apply_postprocessing(labels: LabelVolume, decision: PostprocessingDecision) -> LabelVolume:
    out = labels
    if decision.all_foreground_as_one:
        out = largest_component_filter(out, ALL_FOREGROUND)
    for cls, keep in sorted(decision.per_class.items()):
        if keep:
            out = largest_component_filter(out, cls)
    return out


def decide_postprocessing(
    pairs: list[tuple[str, LabelVolume, LabelVolume]], n_classes: int
) -> PostprocessingDecision:
    """Benchmark component suppression on cross-validation outputs.

    Step 1 filters the joint foreground and is adopted only if the mean
    foreground Dice strictly improves while no class average drops. Step 2
    then tests per-class suppression on top of the step-1 outcome, adopting a
    class when its average strictly improves.
    """
    if not pairs:
        raise EmptyInput("no prediction/reference pairs")
    base = evaluate_cases(pairs, n_classes)

    joint = [
        (cid, largest_component_filter(pred, ALL_FOREGROUND), ref)
        for cid, pred, ref in pairs
    ]
    joint_eval = evaluate_cases(joint, n_classes)
    adopt_joint = joint_eval.mean_foreground_dice > base.mean_foreground_dice and all(
        joint_eval.class_mean(c) >= base.class_mean(c) for c in range(1, n_classes + 1)
    )

    current = joint if adopt_joint else pairs
    current_eval = joint_eval if adopt_joint else base

    per_class = {}
    for cls in range(1, n_classes + 1):
        filtered = [
            (cid, largest_component_filter(pred, cls), ref) for cid, pred, ref in current
        ]
        filtered_eval = evaluate_cases(filtered, n_classes)
        per_class[cls] = filtered_eval.class_mean(cls) > current_eval.class_mean(cls)

    return PostprocessingDecision(adopt_joint, per_class)


@dataclass(frozen=True)
class RankDistribution:
    algorithms: tuple[str, ...]
    rank_matrix: np.ndarray = field(repr=False)  # (replicates, algorithms)

    @property
    def mean_ranks(self) -> np.ndarray:
        return self.rank_matrix.mean(axis=0)

    def histogram(self, algorithm: str) -> dict:
        idx = self.algorithms.index(algorithm)
        values, counts = np.unique(self.rank_matrix[:, idx], return_counts=True)
        return {float(v): int(c) for v, c in zip(values, counts)}

    def to_dict(self) -> dict:
        return {
            "algorithms": list(self.algorithms),
            "mean_ranks": [float(r) for r in self.mean_ranks],
            "histograms": {a: {str(k): v for k, v in self.histogram(a).items()}
                           for a in self.algorithms},
            "replicates": int(self.rank_matrix.shape[0]),
        }


def _average_ranks_desc(means: np.ndarray) -> np.ndarray:
    """Rank 1 = best (highest mean); equal means share the average rank."""
    order = np.argsort(-means, kind="stable")
    ranks = np.empty(len(means), dtype=np.float64)
    i = 0
    position = 1
    while i < len(order):
        j = i
        while j + 1 < len(order) and means[order[j + 1]] == means[order[i]]:
            j += 1
        avg = (position + position + (j - i)) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        position += j - i + 1
        i = j + 1
    return ranks


def bootstrap_ranking(
    scores: np.ndarray,
    algorithms: list[str] | None = None,
    replicates: int = 1000,
    seed: int = 0,
) -> RankDistribution:
    """Rank stability over virtual validation sets drawn with replacement.

    ``scores`` is (algorithms, cases). Each replicate resamples the case
    axis, averages per algorithm and ranks descending with average ties.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 1:
        raise EmptyInput(f"need (>=2 algorithms, >=1 case), got {scores.shape}")
    names = tuple(algorithms) if algorithms else tuple(
        f"algo_{i}" for i in range(scores.shape[0])
    )
    rng = np.random.default_rng(seed)
    n_cases = scores.shape[1]
    ranks = np.empty((replicates, scores.shape[0]), dtype=np.float64)
    for rep in range(replicates):
        idx = rng.integers(0, n_cases, size=n_cases)
        means = scores[:, idx].mean(axis=1)
        ranks[rep] = _average_ranks_desc(means)
    return RankDistribution(names, ranks)
