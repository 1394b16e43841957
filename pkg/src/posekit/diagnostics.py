"""Error analysis: object-characteristic slices and azimuth error modes.

The decomposition follows a fixed precedence so every instance lands in
exactly one category even where the raw conditions overlap: small error,
medium error, then the two characteristic confusions (a rotation by pi
about the vertical axis, and an azimuth reflection), then everything
else. An azimuth error of exactly pi/9 counts as medium, not small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .metrics import EvalReport, Instance, PckResult, pck
from .so3 import azimuth_distance, z_reflect_azimuth

SMALL_ERROR = math.pi / 9
MEDIUM_ERROR = 2 * math.pi / 9

DEFAULT_EXCLUDED_CLASSES = frozenset({"diningtable", "bottle"})

ERROR_MODE_NAMES = ("correct", "medium", "pi_flip", "z_ref", "other")


@dataclass(frozen=True)
class SliceSpec:
    """A named subset of instances defined by a predicate."""

    name: str
    predicate: Callable[[Instance], bool]


@dataclass(frozen=True)
class ErrorModeTally:
    correct: int
    medium: int
    pi_flip: int
    z_ref: int
    other: int

    @property
    def total(self) -> int:
        return self.correct + self.medium + self.pi_flip + self.z_ref + self.other

    def percentages(self) -> dict[str, float]:
        n = self.total
        if n == 0:
            raise ValueError("tally is empty")
        return {name: 100.0 * getattr(self, name) / n for name in ERROR_MODE_NAMES}


def error_mode_decomposition(pairs: Sequence[tuple[float, float]]) -> ErrorModeTally:
    """Assign each (gt, predicted) azimuth pair to one error category.

    Categories are tried in order and the first match wins:
    error < pi/9; error < 2pi/9; the pi-flipped prediction lands within
    pi/9; the azimuth-reflected prediction lands within pi/9; other.
    """
    if len(pairs) == 0:
        raise ValueError("error_mode_decomposition needs at least one pair")
    counts = dict.fromkeys(ERROR_MODE_NAMES, 0)
    for gt, pred in pairs:
        delta = azimuth_distance(gt, pred)
        if delta < SMALL_ERROR:
            counts["correct"] += 1
        elif delta < MEDIUM_ERROR:
            counts["medium"] += 1
        elif azimuth_distance(gt, pred + math.pi) < SMALL_ERROR:
            counts["pi_flip"] += 1
        elif azimuth_distance(gt, z_reflect_azimuth(pred)) < SMALL_ERROR:
            counts["z_ref"] += 1
        else:
            counts["other"] += 1
    return ErrorModeTally(**counts)


def size_slices(instances: Sequence[Instance]) -> dict[str, set[int]]:
    """Partition instance indices into small/medium/large area terciles.

    Instances are sorted by (area, id); the bottom and top floor(n/3)
    form the small and large slices, the remainder is medium. Sorting on
    the id as well makes equal-area splits deterministic.
    """
    n = len(instances)
    if n < 3:
        raise ValueError("size_slices needs at least 3 instances")
    order = sorted(range(n), key=lambda i: (instances[i].area, instances[i].id))
    third = n // 3
    return {
        "small": set(order[:third]),
        "medium": set(order[third : n - third]),
        "large": set(order[n - third :]),
    }


def size_slice_specs(instances: Sequence[Instance]) -> list[SliceSpec]:
    """SliceSpec views of the size terciles, membership tested by id."""
    ids = [inst.id for inst in instances]
    if len(set(ids)) != len(ids):
        raise ValueError("size slices need unique instance ids")
    slices = size_slices(instances)
    specs = []
    for name in ("small", "medium", "large"):
        members = frozenset(ids[i] for i in slices[name])
        specs.append(SliceSpec(name, lambda inst, m=members: inst.id in m))
    return specs


def occluded_slice() -> SliceSpec:
    return SliceSpec("occluded", lambda inst: inst.occluded)


def truncated_slice() -> SliceSpec:
    return SliceSpec("truncated", lambda inst: inst.truncated)


MetricFn = Callable[[Sequence[Instance]], float | None]


def sliced_report(
    instances: Sequence[Instance],
    metrics: Mapping[str, MetricFn],
    slices: Sequence[SliceSpec],
    exclude_classes: Iterable[str] = DEFAULT_EXCLUDED_CLASSES,
) -> EvalReport:
    """Evaluate each metric independently on each slice.

    Excluded classes are dropped before slicing. A slice with no
    surviving instances reports None for every metric (absent, never a
    zero that could be mistaken for a measurement).
    """
    excluded = set(exclude_classes)
    kept = [inst for inst in instances if inst.class_name not in excluded]
    report = EvalReport()
    for spec in slices:
        members = [inst for inst in kept if spec.predicate(inst)]
        rows: dict[str, float | None] = {}
        for metric_name, fn in metrics.items():
            rows[metric_name] = fn(members) if members else None
        report.sections[spec.name] = rows
    return report


def left_right_pck(
    gt_instances: Iterable[Instance],
    predicted_keypoints: Mapping[str, Mapping[int, tuple[float, float]]],
    symmetry_pairs: Mapping[str, Mapping[int, int]],
    alpha: float = 0.1,
) -> PckResult:
    """PCK where a prediction may match the keypoint or its lateral twin.

    symmetry_pairs maps each class to an involution on its keypoint ids
    (ids absent from the map are implicitly self-paired). Matching
    against the partner's annotation can only add hits, so the result
    dominates plain pck on the same inputs.
    """
    for cls, pairs in symmetry_pairs.items():
        for k, v in pairs.items():
            if pairs.get(v, v) != k:
                raise ValueError(f"symmetry map for {cls!r} is not an involution")
    return pck(gt_instances, predicted_keypoints, alpha=alpha, alternatives=symmetry_pairs)
