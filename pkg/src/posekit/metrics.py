"""Evaluation metrics for viewpoint and keypoint prediction.

Two settings are covered. With known boxes: median geodesic viewpoint error
(degrees), accuracy under a threshold, and PCK for keypoints. In the
detection setting: average precision where a detection must localize
(IoU > 0.5) and additionally pass a viewpoint test (bin match for AVP,
azimuth error for AVP_theta, full rotation error for ARP_theta), and APK
for scored keypoint hypotheses. All APs are all-points interpolated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .so3 import EulerAngles, azimuth_distance, euler_to_rotation, geodesic_distance
from .viewpoint import angle_to_bin

IOU_THRESHOLD = 0.5

Box = tuple[float, float, float, float]


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    visible: bool = True


@dataclass(frozen=True)
class KeypointHypothesis:
    x: float
    y: float
    score: float


@dataclass
class Instance:
    """An annotated object: identity, box, flags, viewpoint, keypoints."""

    id: str
    image_id: str
    class_name: str
    bbox: Box
    occluded: bool = False
    truncated: bool = False
    viewpoint: EulerAngles | None = None
    keypoints: dict[int, Keypoint] = field(default_factory=dict)

    def __post_init__(self) -> None:
        x, y, w, h = self.bbox
        if not all(math.isfinite(v) for v in (x, y, w, h)):
            raise ValueError(f"instance {self.id}: bbox has non-finite values")
        if w <= 0 or h <= 0:
            raise ValueError(f"instance {self.id}: bbox must have w > 0 and h > 0")
        for k, kp in self.keypoints.items():
            if not (math.isfinite(kp.x) and math.isfinite(kp.y)):
                raise ValueError(f"instance {self.id}: keypoint {k} not finite")

    @property
    def area(self) -> float:
        return self.bbox[2] * self.bbox[3]


@dataclass
class Detection:
    """A scored prediction candidate in the detection setting."""

    image_id: str
    class_name: str
    bbox: Box
    score: float
    viewpoint: EulerAngles | None = None
    keypoint_hypotheses: dict[int, KeypointHypothesis] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError("detection score must be finite")
        x, y, w, h = self.bbox
        if w <= 0 or h <= 0:
            raise ValueError("detection bbox must have w > 0 and h > 0")


@dataclass
class EvalReport:
    """Metric tables plus PR curves, ready for serialization.

    sections maps a section name to ordered rows of name -> value, where
    None marks an absent entry (an empty slice, never a zero). curves maps
    a name to a (recall, precision) array pair.
    """

    sections: dict[str, dict[str, float | None]] = field(default_factory=dict)
    curves: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def validate(self) -> None:
        for name, (rec, _) in self.curves.items():
            if np.any(np.diff(rec) < 0):
                raise ValueError(f"curve {name!r}: recall must be nondecreasing")


def median_error(pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> float:
    """Median geodesic distance over (gt, predicted) rotations, in degrees."""
    if len(pairs) == 0:
        raise ValueError("median_error needs at least one pair")
    errs = [geodesic_distance(r1, r2) for r1, r2 in pairs]
    return float(np.degrees(np.median(errs)))


def accuracy_at(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]], theta: float = math.pi / 6
) -> float:
    """Fraction of pairs with geodesic distance strictly below theta."""
    if len(pairs) == 0:
        raise ValueError("accuracy_at needs at least one pair")
    hits = sum(1 for r1, r2 in pairs if geodesic_distance(r1, r2) < theta)
    return hits / len(pairs)


def iou(b1: Box, b2: Box) -> float:
    """Intersection over union of two (x, y, w, h) boxes."""
    x1, y1, w1, h1 = b1
    x2, y2, w2, h2 = b2
    iw = min(x1 + w1, x2 + w2) - max(x1, x2)
    ih = min(y1 + h1, y2 + h2) - max(y1, y2)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (w1 * h1 + w2 * h2 - inter)


def voc_ap(recalls: np.ndarray, precisions: np.ndarray) -> float:
    """All-points interpolated average precision.

    The precision envelope is made nonincreasing from the right, then the
    area is accumulated over the recall increments. Empty inputs give 0.
    """
    rec = np.asarray(recalls, dtype=np.float64)
    prec = np.asarray(precisions, dtype=np.float64)
    if rec.shape != prec.shape or rec.ndim != 1:
        raise ValueError("recalls and precisions must be 1-D and equally long")
    if rec.size == 0:
        return 0.0
    if np.any(np.diff(rec) < 0):
        raise ValueError("recalls must be nondecreasing")
    mrec = np.concatenate(([0.0], rec, [1.0]))
    mpre = np.concatenate(([0.0], prec, [0.0]))
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    changed = np.flatnonzero(mrec[1:] != mrec[:-1])
    ap = 0.0
    for i in changed:
        ap += (mrec[i + 1] - mrec[i]) * mpre[i + 1]
    return float(ap)


@dataclass
class DetectionEval:
    """Per-class outcome of a detection-setting evaluation."""

    ap: float
    recalls: np.ndarray
    precisions: np.ndarray
    num_gt: int


CorrectFn = Callable[[Detection, Instance], bool]


def _match_class(
    detections: list[Detection],
    gts: list[Instance],
    correct: CorrectFn,
    consume_on_localization: bool,
) -> DetectionEval:
    """Greedy score-ordered matching of one class's detections to its GT.

    Each detection grabs the highest-IoU unmatched ground truth in its
    image when that IoU exceeds 0.5. With consume_on_localization (the
    default everywhere) the ground truth is consumed even when the
    viewpoint/correctness test then fails, so a wrong-viewpoint detection
    blocks re-matching; otherwise only true positives consume.
    """
    order = sorted(range(len(detections)), key=lambda i: -detections[i].score)
    by_image: dict[str, list[int]] = {}
    for g, gt in enumerate(gts):
        by_image.setdefault(gt.image_id, []).append(g)
    taken = [False] * len(gts)
    tp = np.zeros(len(detections), dtype=np.int64)
    for rank, i in enumerate(order):
        det = detections[i]
        best_iou, best_g = 0.0, -1
        for g in by_image.get(det.image_id, ()):
            if taken[g]:
                continue
            ov = iou(det.bbox, gts[g].bbox)
            if ov > best_iou:
                best_iou, best_g = ov, g
        if best_g >= 0 and best_iou > IOU_THRESHOLD:
            ok = correct(det, gts[best_g])
            if ok or consume_on_localization:
                taken[best_g] = True
            if ok:
                tp[rank] = 1
    cum_tp = np.cumsum(tp)
    n_gt = len(gts)
    if n_gt == 0:
        recalls = np.zeros(len(detections))
    else:
        recalls = cum_tp / n_gt
    precisions = cum_tp / np.arange(1, len(detections) + 1) if len(detections) else np.zeros(0)
    ap = voc_ap(recalls, precisions) if n_gt > 0 else 0.0
    return DetectionEval(ap=ap, recalls=recalls, precisions=precisions, num_gt=n_gt)


def evaluate_detections(
    detections: Iterable[Detection],
    gt_instances: Iterable[Instance],
    correct: CorrectFn,
    consume_on_localization: bool = True,
) -> dict[str, DetectionEval]:
    """Run detection matching per class and return AP plus PR curves."""
    dets_by_class: dict[str, list[Detection]] = {}
    for d in detections:
        dets_by_class.setdefault(d.class_name, []).append(d)
    gts_by_class: dict[str, list[Instance]] = {}
    for g in gt_instances:
        gts_by_class.setdefault(g.class_name, []).append(g)
    out: dict[str, DetectionEval] = {}
    for cls in sorted(set(dets_by_class) | set(gts_by_class)):
        gts = gts_by_class.get(cls, [])
        if not gts:
            warnings.warn(f"class {cls!r} has no ground truth; AP reported as 0")
        out[cls] = _match_class(
            dets_by_class.get(cls, []), gts, correct, consume_on_localization
        )
    return out


def _require_viewpoints(det: Detection, gt: Instance) -> tuple[EulerAngles, EulerAngles]:
    if det.viewpoint is None or gt.viewpoint is None:
        raise ValueError("viewpoint metrics need viewpoints on detections and GT")
    return gt.viewpoint, det.viewpoint


def avp(
    detections: Iterable[Detection],
    gt_instances: Iterable[Instance],
    n_bins: int,
    consume_on_localization: bool = True,
) -> dict[str, float]:
    """Detection AP where correctness also requires an azimuth bin match."""

    def correct(det: Detection, gt: Instance) -> bool:
        vg, vp = _require_viewpoints(det, gt)
        return angle_to_bin(vp.azimuth, n_bins) == angle_to_bin(vg.azimuth, n_bins)

    evals = evaluate_detections(detections, gt_instances, correct, consume_on_localization)
    return {cls: e.ap for cls, e in evals.items()}


def avp_theta(
    detections: Iterable[Detection],
    gt_instances: Iterable[Instance],
    theta: float = math.pi / 6,
    consume_on_localization: bool = True,
) -> dict[str, float]:
    """Detection AP with the viewpoint test azimuth_distance < theta."""

    def correct(det: Detection, gt: Instance) -> bool:
        vg, vp = _require_viewpoints(det, gt)
        return azimuth_distance(vg.azimuth, vp.azimuth) < theta

    evals = evaluate_detections(detections, gt_instances, correct, consume_on_localization)
    return {cls: e.ap for cls, e in evals.items()}


def arp_theta(
    detections: Iterable[Detection],
    gt_instances: Iterable[Instance],
    theta: float = math.pi / 6,
    consume_on_localization: bool = True,
) -> dict[str, float]:
    """Detection AP with the full rotation test geodesic_distance < theta."""

    def correct(det: Detection, gt: Instance) -> bool:
        vg, vp = _require_viewpoints(det, gt)
        return geodesic_distance(euler_to_rotation(vg), euler_to_rotation(vp)) < theta

    evals = evaluate_detections(detections, gt_instances, correct, consume_on_localization)
    return {cls: e.ap for cls, e in evals.items()}


def pck_threshold(bbox: Box, alpha: float) -> float:
    """Correctness radius for one instance: alpha * max(h, w)."""
    return alpha * max(bbox[2], bbox[3])


@dataclass
class PckResult:
    """PCK fractions at both aggregation granularities.

    per_keypoint[class][kp_id] is the fraction over instances where that
    keypoint is annotated and visible (None when there are none).
    per_class averages a class's keypoint fractions; pooled_per_class
    instead pools all keypoint-instances of the class into one fraction.
    """

    per_keypoint: dict[str, dict[int, float | None]]
    per_class: dict[str, float | None]
    pooled_per_class: dict[str, float | None]

    def mean(self) -> float | None:
        vals = [v for v in self.per_class.values() if v is not None]
        return sum(vals) / len(vals) if vals else None


PredictedKeypoints = Mapping[str, Mapping[int, tuple[float, float]]]
AlternativeTargets = Mapping[str, Mapping[int, int]]


def pck(
    gt_instances: Iterable[Instance],
    predicted_keypoints: PredictedKeypoints,
    alpha: float = 0.1,
    alternatives: AlternativeTargets | None = None,
) -> PckResult:
    """Fraction of annotated visible keypoints predicted within radius.

    predicted_keypoints maps instance id -> keypoint id -> pixel location;
    every evaluated instance must be present. A keypoint counts as correct
    when the prediction lies within alpha * max(h, w) of its annotation
    (or, if alternatives supplies a laterally symmetric partner for its
    class, of the partner's annotation on the same instance).
    """
    per_kp_hits: dict[str, dict[int, list[int]]] = {}
    for inst in gt_instances:
        if inst.id not in predicted_keypoints:
            raise ValueError(f"no predictions supplied for instance {inst.id}")
        preds = predicted_keypoints[inst.id]
        radius = pck_threshold(inst.bbox, alpha)
        swaps = (alternatives or {}).get(inst.class_name, {})
        for k, kp in inst.keypoints.items():
            if not kp.visible:
                continue
            targets = [(kp.x, kp.y)]
            partner = swaps.get(k)
            if partner is not None and partner != k:
                alt = inst.keypoints.get(partner)
                if alt is not None and alt.visible:
                    targets.append((alt.x, alt.y))
            hit = 0
            p = preds.get(k)
            if p is not None:
                for tx, ty in targets:
                    if math.hypot(p[0] - tx, p[1] - ty) <= radius:
                        hit = 1
                        break
            per_kp_hits.setdefault(inst.class_name, {}).setdefault(k, []).append(hit)

    per_keypoint: dict[str, dict[int, float | None]] = {}
    per_class: dict[str, float | None] = {}
    pooled: dict[str, float | None] = {}
    for cls, kp_hits in per_kp_hits.items():
        fracs = {}
        all_hits: list[int] = []
        for k in sorted(kp_hits):
            hits = kp_hits[k]
            fracs[k] = sum(hits) / len(hits)
            all_hits.extend(hits)
        per_keypoint[cls] = fracs
        vals = [v for v in fracs.values() if v is not None]
        per_class[cls] = sum(vals) / len(vals) if vals else None
        pooled[cls] = sum(all_hits) / len(all_hits) if all_hits else None
    return PckResult(per_keypoint=per_keypoint, per_class=per_class, pooled_per_class=pooled)


@dataclass
class ApkResult:
    """Per-keypoint detection-setting APs and their per-class means."""

    per_keypoint: dict[str, dict[int, float]]
    per_class: dict[str, float | None]

    def mean(self) -> float | None:
        vals = [v for v in self.per_class.values() if v is not None]
        return sum(vals) / len(vals) if vals else None


def apk(
    detections: Iterable[Detection],
    gt_instances: Iterable[Instance],
    alpha: float = 0.1,
) -> ApkResult:
    """Average precision of scored keypoint hypotheses, per keypoint type.

    Hypotheses of one (class, keypoint) type are pooled over the dataset
    and walked in descending score order; each one greedily claims the
    nearest unmatched same-image ground-truth keypoint lying within that
    instance's alpha * max(h, w) radius, and is otherwise a false positive.
    Only annotated visible keypoints form the ground-truth set.
    """
    gt_by_type: dict[tuple[str, int], list[tuple[str, float, float, float]]] = {}
    classes: set[str] = set()
    kp_ids: dict[str, set[int]] = {}
    for inst in gt_instances:
        classes.add(inst.class_name)
        for k, kp in inst.keypoints.items():
            kp_ids.setdefault(inst.class_name, set()).add(k)
            if kp.visible:
                gt_by_type.setdefault((inst.class_name, k), []).append(
                    (inst.image_id, kp.x, kp.y, pck_threshold(inst.bbox, alpha))
                )
    hyps: dict[tuple[str, int], list[tuple[float, str, float, float]]] = {}
    for det in detections:
        for k, h in det.keypoint_hypotheses.items():
            kp_ids.setdefault(det.class_name, set()).add(k)
            hyps.setdefault((det.class_name, k), []).append(
                (h.score, det.image_id, h.x, h.y)
            )

    per_keypoint: dict[str, dict[int, float]] = {}
    for cls in sorted(classes | set(kp_ids)):
        per_keypoint[cls] = {}
        for k in sorted(kp_ids.get(cls, ())):
            gts = gt_by_type.get((cls, k), [])
            cands = hyps.get((cls, k), [])
            order = sorted(range(len(cands)), key=lambda i: -cands[i][0])
            taken = [False] * len(gts)
            tp = np.zeros(len(cands), dtype=np.int64)
            for rank, i in enumerate(order):
                _, image_id, hx, hy = cands[i]
                best_d, best_g = math.inf, -1
                for g, (gt_img, gx, gy, radius) in enumerate(gts):
                    if taken[g] or gt_img != image_id:
                        continue
                    d = math.hypot(hx - gx, hy - gy)
                    if d <= radius and d < best_d:
                        best_d, best_g = d, g
                if best_g >= 0:
                    taken[best_g] = True
                    tp[rank] = 1
            n_gt = len(gts)
            if n_gt == 0:
                per_keypoint[cls][k] = 0.0
                continue
            cum_tp = np.cumsum(tp)
            recalls = cum_tp / n_gt
            precisions = (
                cum_tp / np.arange(1, len(cands) + 1) if len(cands) else np.zeros(0)
            )
            per_keypoint[cls][k] = voc_ap(recalls, precisions)
    per_class: dict[str, float | None] = {}
    for cls, aps in per_keypoint.items():
        per_class[cls] = sum(aps.values()) / len(aps) if aps else None
    return ApkResult(per_keypoint=per_keypoint, per_class=per_class)


def score_hypothesis(det_score: float, kp_log_likelihood: float, lam: float = 0.5) -> float:
    """Linear combination of detector score and keypoint log-likelihood."""
    if not (math.isfinite(det_score) and math.isfinite(kp_log_likelihood) and math.isfinite(lam)):
        raise ValueError("score_hypothesis needs finite inputs")
    return lam * det_score + (1.0 - lam) * kp_log_likelihood
