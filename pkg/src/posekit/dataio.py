"""Dataset files: annotations, predictions, response maps, prior banks.

A dataset directory holds:

  manifest.json        schema version, euler convention tag, class list,
                       keypoint names per class, symmetry pairs, excluded
                       classes for analysis
  instances.jsonl      one ground-truth object per line
  detections.jsonl     one scored prediction per line
  prior_bank.jsonl     one (rotation, normalized keypoints) exemplar per line
  responses/           <instance_id>_fine.vkrm and <instance_id>_coarse.vkrm

Text records are JSON with sorted keys and compact separators so identical
data always serializes to identical bytes; floats use Python's shortest
round-trip representation, so load(save(x)) reproduces x exactly. Response
maps are binary: magic "VKRM", then version, class id, keypoint count, H, W
as little-endian uint32, then K*H*W little-endian float32 values row-major.
Angles are radians in the ZYX-intrinsic convention named by the manifest;
loaders reject unknown convention tags and unknown schema versions rather
than guessing.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .fusion import GRID_SIZE, PriorBank
from .metrics import (
    Detection,
    EvalReport,
    Instance,
    Keypoint,
    KeypointHypothesis,
)
from .so3 import EulerAngles, rotation_matrix

SCHEMA_VERSION = 1
EULER_CONVENTION = "ZYX-intrinsic"

RESPONSE_MAGIC = b"VKRM"
RESPONSE_VERSION = 1
_HEADER = struct.Struct("<4s5I")

COARSE_SIZE = GRID_SIZE // 2


class DatasetError(Exception):
    """Base class for dataset file problems."""


class ParseError(DatasetError):
    """Malformed text or binary content."""


class ValidationError(DatasetError):
    """Well-formed content that breaks a type invariant."""


class SchemaVersionError(DatasetError):
    """A schema version this library does not understand."""


@dataclass
class Manifest:
    """Dataset-level metadata; the keypoint id space is per class.

    keypoint_names[c][k] names keypoint id k of class c, so ids are dense
    0..K_c-1 by construction. symmetry_pairs[c] is an involution on those
    ids (ids not listed are self-paired).
    """

    classes: list[str]
    keypoint_names: dict[str, list[str]]
    symmetry_pairs: dict[str, dict[int, int]] = field(default_factory=dict)
    excluded_classes: list[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION
    euler_convention: str = EULER_CONVENTION

    def __post_init__(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise SchemaVersionError(
                f"unknown schema version {self.schema_version!r}"
                f" (this library reads version {SCHEMA_VERSION})"
            )
        if self.euler_convention != EULER_CONVENTION:
            raise ValidationError(
                f"unknown euler convention tag {self.euler_convention!r}"
            )
        if len(set(self.classes)) != len(self.classes):
            raise ValidationError("manifest classes must be unique")
        if set(self.keypoint_names) != set(self.classes):
            raise ValidationError("keypoint_names must cover exactly the classes")
        for cls, pairs in self.symmetry_pairs.items():
            if cls not in self.keypoint_names:
                raise ValidationError(f"symmetry pairs for unknown class {cls!r}")
            k_c = len(self.keypoint_names[cls])
            for a, b in pairs.items():
                if not (0 <= a < k_c and 0 <= b < k_c):
                    raise ValidationError(
                        f"symmetry pair ({a}, {b}) out of range for class {cls!r}"
                    )
                if pairs.get(b, b) != a:
                    raise ValidationError(
                        f"symmetry map for class {cls!r} is not an involution"
                    )

    def num_keypoints(self, class_name: str) -> int:
        if class_name not in self.keypoint_names:
            raise ValidationError(f"unknown class {class_name!r}")
        return len(self.keypoint_names[class_name])


@dataclass
class Dataset:
    """Everything load_dataset reads from one dataset directory."""

    manifest: Manifest
    instances: list[Instance] = field(default_factory=list)
    detections: list[Detection] = field(default_factory=list)
    response_maps: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    prior_banks: dict[str, PriorBank] = field(default_factory=dict)


def _dump(record: object) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path.name}:{line_no}: bad JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise ParseError(f"{path.name}:{line_no}: record is not an object")
            yield line_no, record


def _check_keys(record: dict, required: tuple[str, ...], where: str) -> None:
    got = set(record)
    missing = set(required) - got
    extra = got - set(required)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing {sorted(missing)}")
        if extra:
            parts.append(f"unexpected {sorted(extra)}")
        raise ParseError(f"{where}: {'; '.join(parts)}")


def _as_bbox(value: object, where: str) -> tuple[float, float, float, float]:
    if not isinstance(value, list) or len(value) != 4:
        raise ParseError(f"{where}: bbox must be a list of 4 numbers")
    try:
        x, y, w, h = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: bbox must be numeric") from exc
    return (x, y, w, h)


def _viewpoint_to_record(v: EulerAngles | None) -> dict | None:
    if v is None:
        return None
    return {
        "azimuth": v.azimuth,
        "elevation": v.elevation,
        "cyclorotation": v.cyclorotation,
    }


def _viewpoint_from_record(value: object, where: str) -> EulerAngles | None:
    if value is None:
        return None
    if not isinstance(value, dict):
        raise ParseError(f"{where}: viewpoint must be an object or null")
    _check_keys(value, ("azimuth", "elevation", "cyclorotation"), f"{where} viewpoint")
    try:
        return EulerAngles(
            float(value["azimuth"]),
            float(value["elevation"]),
            float(value["cyclorotation"]),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: bad viewpoint ({exc})") from exc


def _keypoint_ids(mapping: dict, manifest: Manifest, cls: str, where: str) -> dict[int, list]:
    out: dict[int, list] = {}
    k_c = manifest.num_keypoints(cls)
    for key, value in mapping.items():
        try:
            k = int(key)
        except ValueError as exc:
            raise ParseError(f"{where}: keypoint id {key!r} is not an integer") from exc
        if not 0 <= k < k_c:
            raise ValidationError(
                f"{where}: keypoint id {k} out of range for class {cls!r} ({k_c} keypoints)"
            )
        if not isinstance(value, list):
            raise ParseError(f"{where}: keypoint {k} entry must be a list")
        out[k] = value
    return out


INSTANCE_FIELDS = (
    "id",
    "image_id",
    "class",
    "bbox",
    "occluded",
    "truncated",
    "viewpoint",
    "keypoints",
)


def instance_to_record(inst: Instance) -> dict:
    return {
        "id": inst.id,
        "image_id": inst.image_id,
        "class": inst.class_name,
        "bbox": list(inst.bbox),
        "occluded": inst.occluded,
        "truncated": inst.truncated,
        "viewpoint": _viewpoint_to_record(inst.viewpoint),
        "keypoints": {
            str(k): [kp.x, kp.y, kp.visible] for k, kp in sorted(inst.keypoints.items())
        },
    }


def instance_from_record(record: dict, manifest: Manifest, where: str) -> Instance:
    _check_keys(record, INSTANCE_FIELDS, where)
    cls = record["class"]
    if cls not in manifest.keypoint_names:
        raise ValidationError(f"{where}: unknown class {cls!r}")
    if not isinstance(record["keypoints"], dict):
        raise ParseError(f"{where}: keypoints must be an object")
    keypoints: dict[int, Keypoint] = {}
    for k, entry in _keypoint_ids(record["keypoints"], manifest, cls, where).items():
        if len(entry) != 3:
            raise ParseError(f"{where}: keypoint {k} must be [x, y, visible]")
        try:
            keypoints[k] = Keypoint(float(entry[0]), float(entry[1]), bool(entry[2]))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: keypoint {k} is not numeric") from exc
    try:
        return Instance(
            id=str(record["id"]),
            image_id=str(record["image_id"]),
            class_name=cls,
            bbox=_as_bbox(record["bbox"], where),
            occluded=bool(record["occluded"]),
            truncated=bool(record["truncated"]),
            viewpoint=_viewpoint_from_record(record["viewpoint"], where),
            keypoints=keypoints,
        )
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


DETECTION_FIELDS = (
    "image_id",
    "class",
    "bbox",
    "score",
    "viewpoint",
    "keypoint_hypotheses",
)


def detection_to_record(det: Detection) -> dict:
    return {
        "image_id": det.image_id,
        "class": det.class_name,
        "bbox": list(det.bbox),
        "score": det.score,
        "viewpoint": _viewpoint_to_record(det.viewpoint),
        "keypoint_hypotheses": {
            str(k): [h.x, h.y, h.score]
            for k, h in sorted(det.keypoint_hypotheses.items())
        },
    }


def detection_from_record(record: dict, manifest: Manifest, where: str) -> Detection:
    _check_keys(record, DETECTION_FIELDS, where)
    cls = record["class"]
    if cls not in manifest.keypoint_names:
        raise ValidationError(f"{where}: unknown class {cls!r}")
    if not isinstance(record["keypoint_hypotheses"], dict):
        raise ParseError(f"{where}: keypoint_hypotheses must be an object")
    hyps: dict[int, KeypointHypothesis] = {}
    for k, entry in _keypoint_ids(
        record["keypoint_hypotheses"], manifest, cls, where
    ).items():
        if len(entry) != 3:
            raise ParseError(f"{where}: hypothesis {k} must be [x, y, score]")
        try:
            hyps[k] = KeypointHypothesis(float(entry[0]), float(entry[1]), float(entry[2]))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: hypothesis {k} is not numeric") from exc
    try:
        score = float(record["score"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: score is not numeric") from exc
    try:
        return Detection(
            image_id=str(record["image_id"]),
            class_name=cls,
            bbox=_as_bbox(record["bbox"], where),
            score=score,
            viewpoint=_viewpoint_from_record(record["viewpoint"], where),
            keypoint_hypotheses=hyps,
        )
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path.name}: bad JSON ({exc.msg})") from exc
    if not isinstance(record, dict):
        raise ParseError(f"{path.name}: manifest must be an object")
    _check_keys(
        record,
        (
            "schema_version",
            "euler_convention",
            "classes",
            "keypoint_names",
            "symmetry_pairs",
            "excluded_classes",
        ),
        path.name,
    )
    try:
        symmetry = {
            cls: {int(a): int(b) for a, b in pairs.items()}
            for cls, pairs in record["symmetry_pairs"].items()
        }
    except (AttributeError, TypeError, ValueError) as exc:
        raise ParseError(f"{path.name}: malformed symmetry_pairs") from exc
    return Manifest(
        classes=list(record["classes"]),
        keypoint_names={c: list(v) for c, v in record["keypoint_names"].items()},
        symmetry_pairs=symmetry,
        excluded_classes=list(record["excluded_classes"]),
        schema_version=record["schema_version"],
        euler_convention=record["euler_convention"],
    )


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    record = {
        "schema_version": manifest.schema_version,
        "euler_convention": manifest.euler_convention,
        "classes": manifest.classes,
        "keypoint_names": manifest.keypoint_names,
        "symmetry_pairs": {
            cls: {str(a): b for a, b in sorted(pairs.items())}
            for cls, pairs in manifest.symmetry_pairs.items()
        },
        "excluded_classes": manifest.excluded_classes,
    }
    text = json.dumps(record, sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_instances(path: str | Path, manifest: Manifest) -> list[Instance]:
    path = Path(path)
    instances = []
    seen: set[str] = set()
    for line_no, record in _read_jsonl(path):
        where = f"{path.name}:{line_no}"
        inst = instance_from_record(record, manifest, where)
        if inst.id in seen:
            raise ValidationError(f"{where}: duplicate instance id {inst.id!r}")
        seen.add(inst.id)
        instances.append(inst)
    return instances


def save_instances(instances: Iterable[Instance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(_dump(instance_to_record(inst)) + "\n")


def load_detections(path: str | Path, manifest: Manifest) -> list[Detection]:
    path = Path(path)
    return [
        detection_from_record(record, manifest, f"{path.name}:{line_no}")
        for line_no, record in _read_jsonl(path)
    ]


def save_detections(detections: Iterable[Detection], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for det in detections:
            fh.write(_dump(detection_to_record(det)) + "\n")


def load_prior_banks(path: str | Path, manifest: Manifest) -> dict[str, PriorBank]:
    """Group bank exemplars by class, preserving file order within a class.

    Order matters: the prior averages neighbor Gaussians in bank order, so
    reordering exemplars would change float summation order.
    """
    path = Path(path)
    rows: dict[str, list[tuple[list, list, list]]] = {}
    for line_no, record in _read_jsonl(path):
        where = f"{path.name}:{line_no}"
        _check_keys(record, ("class", "rotation", "keypoints", "present"), where)
        cls = record["class"]
        if cls not in manifest.keypoint_names:
            raise ValidationError(f"{where}: unknown class {cls!r}")
        try:
            rotation_matrix(np.asarray(record["rotation"], dtype=np.float64))
        except ValueError as exc:
            raise ValidationError(f"{where}: bad rotation ({exc})") from exc
        k_c = manifest.num_keypoints(cls)
        if len(record["keypoints"]) != k_c or len(record["present"]) != k_c:
            raise ValidationError(
                f"{where}: expected {k_c} keypoints for class {cls!r}"
            )
        rows.setdefault(cls, []).append(
            (record["rotation"], record["keypoints"], record["present"])
        )
    banks = {}
    for cls, entries in rows.items():
        try:
            banks[cls] = PriorBank(
                class_name=cls,
                rotations=np.array([e[0] for e in entries], dtype=np.float64),
                keypoints=np.array([e[1] for e in entries], dtype=np.float64),
                present=np.array([e[2] for e in entries], dtype=bool),
            )
        except ValueError as exc:
            raise ValidationError(f"{path.name}: bank for {cls!r}: {exc}") from exc
    return banks


def save_prior_banks(banks: Mapping[str, PriorBank], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for cls in sorted(banks):
            bank = banks[cls]
            for i in range(len(bank)):
                record = {
                    "class": cls,
                    "rotation": bank.rotations[i].tolist(),
                    "keypoints": bank.keypoints[i].tolist(),
                    "present": bank.present[i].tolist(),
                }
                fh.write(_dump(record) + "\n")


def write_response_map(path: str | Path, grid: np.ndarray, class_id: int) -> None:
    """Write a (K, H, W) stack of response maps as a VKRM blob."""
    g = np.asarray(grid, dtype=np.float32)
    if g.ndim != 3:
        raise ValidationError(f"response stack must be (K, H, W), got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValidationError("response stack has non-finite entries")
    k, h, w = g.shape
    header = _HEADER.pack(RESPONSE_MAGIC, RESPONSE_VERSION, class_id, k, h, w)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(g, dtype="<f4").tobytes())


def read_response_map(path: str | Path) -> tuple[int, np.ndarray]:
    """Read a VKRM blob; returns (class_id, float32 array of shape (K, H, W))."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise ParseError(f"{path.name}: truncated header")
    magic, version, class_id, k, h, w = _HEADER.unpack_from(blob)
    if magic != RESPONSE_MAGIC:
        raise ParseError(f"{path.name}: bad magic {magic!r}")
    if version != RESPONSE_VERSION:
        raise SchemaVersionError(f"{path.name}: unknown blob version {version}")
    expected = _HEADER.size + 4 * k * h * w
    if len(blob) != expected:
        raise ParseError(
            f"{path.name}: expected {expected} bytes for shape ({k}, {h}, {w}),"
            f" got {len(blob)}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(k, h, w)
    if not np.all(np.isfinite(data)):
        raise ValidationError(f"{path.name}: non-finite response values")
    return class_id, data.copy()


_MAP_KINDS = ("fine", "coarse")
_MAP_SIZES = {"fine": GRID_SIZE, "coarse": COARSE_SIZE}


def load_response_maps(
    directory: str | Path, manifest: Manifest, instances: Iterable[Instance]
) -> dict[str, dict[str, np.ndarray]]:
    """Read every VKRM blob in a directory, keyed by instance id and kind.

    Each blob must belong to a known instance and agree with the manifest
    on class id and keypoint count; fine maps are 12x12, coarse 6x6.
    """
    by_id = {inst.id: inst for inst in instances}
    response_maps: dict[str, dict[str, np.ndarray]] = {}
    for blob_path in sorted(Path(directory).iterdir()):
        name = blob_path.name
        if not name.endswith(".vkrm"):
            continue
        stem = name[: -len(".vkrm")]
        iid, sep, kind = stem.rpartition("_")
        if not sep or kind not in _MAP_KINDS:
            raise ValidationError(f"{name}: expected <id>_fine.vkrm or <id>_coarse.vkrm")
        if iid not in by_id:
            raise ValidationError(f"{name}: unknown instance id {iid!r}")
        class_id, data = read_response_map(blob_path)
        inst = by_id[iid]
        expect_cls = manifest.classes.index(inst.class_name)
        if class_id != expect_cls:
            raise ValidationError(
                f"{name}: class id {class_id} but instance {iid!r}"
                f" is {inst.class_name!r} (id {expect_cls})"
            )
        k_c = manifest.num_keypoints(inst.class_name)
        size = _MAP_SIZES[kind]
        if data.shape != (k_c, size, size):
            raise ValidationError(
                f"{name}: shape {data.shape}, expected ({k_c}, {size}, {size})"
            )
        response_maps.setdefault(iid, {})[kind] = data
    return response_maps


def load_dataset(path: str | Path) -> Dataset:
    """Load a dataset directory, validating every record against the manifest.

    Missing optional files mean empty collections; a missing manifest is an
    I/O error. Response-map blobs must belong to a known instance and agree
    with the manifest on class and keypoint count.
    """
    base = Path(path)
    manifest = load_manifest(base / "manifest.json")
    instances = []
    if (base / "instances.jsonl").exists():
        instances = load_instances(base / "instances.jsonl", manifest)
    detections = []
    if (base / "detections.jsonl").exists():
        detections = load_detections(base / "detections.jsonl", manifest)
    prior_banks = {}
    if (base / "prior_bank.jsonl").exists():
        prior_banks = load_prior_banks(base / "prior_bank.jsonl", manifest)
    response_maps: dict[str, dict[str, np.ndarray]] = {}
    responses = base / "responses"
    if responses.is_dir():
        response_maps = load_response_maps(responses, manifest, instances)
    return Dataset(
        manifest=manifest,
        instances=instances,
        detections=detections,
        response_maps=response_maps,
        prior_banks=prior_banks,
    )


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset directory in the documented formats."""
    base = Path(path)
    base.mkdir(parents=True, exist_ok=True)
    save_manifest(dataset.manifest, base / "manifest.json")
    save_instances(dataset.instances, base / "instances.jsonl")
    save_detections(dataset.detections, base / "detections.jsonl")
    save_prior_banks(dataset.prior_banks, base / "prior_bank.jsonl")
    if dataset.response_maps:
        by_id = {inst.id: inst for inst in dataset.instances}
        responses = base / "responses"
        responses.mkdir(exist_ok=True)
        for iid in sorted(dataset.response_maps):
            if iid not in by_id:
                raise ValidationError(f"response maps for unknown instance {iid!r}")
            class_id = dataset.manifest.classes.index(by_id[iid].class_name)
            for kind, grid in sorted(dataset.response_maps[iid].items()):
                if kind not in _MAP_KINDS:
                    raise ValidationError(f"unknown response-map kind {kind!r}")
                write_response_map(responses / f"{iid}_{kind}.vkrm", grid, class_id)


def load_keypoint_predictions(
    path: str | Path, manifest: Manifest | None = None
) -> dict[str, dict[int, tuple[float, float]]]:
    """Read per-instance keypoint predictions ({"id", "keypoints"} lines)."""
    path = Path(path)
    preds: dict[str, dict[int, tuple[float, float]]] = {}
    for line_no, record in _read_jsonl(path):
        where = f"{path.name}:{line_no}"
        _check_keys(record, ("id", "keypoints"), where)
        iid = str(record["id"])
        if iid in preds:
            raise ValidationError(f"{where}: duplicate prediction for {iid!r}")
        if not isinstance(record["keypoints"], dict):
            raise ParseError(f"{where}: keypoints must be an object")
        kps = {}
        for key, entry in record["keypoints"].items():
            try:
                k = int(key)
            except ValueError as exc:
                raise ParseError(f"{where}: keypoint id {key!r} is not an integer") from exc
            if not isinstance(entry, list) or len(entry) != 2:
                raise ParseError(f"{where}: keypoint {k} must be [x, y]")
            x, y = float(entry[0]), float(entry[1])
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValidationError(f"{where}: keypoint {k} not finite")
            kps[k] = (x, y)
        preds[iid] = kps
    return preds


def save_keypoint_predictions(
    preds: Mapping[str, Mapping[int, tuple[float, float]]], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for iid in sorted(preds):
            record = {
                "id": iid,
                "keypoints": {str(k): list(p) for k, p in sorted(preds[iid].items())},
            }
            fh.write(_dump(record) + "\n")


def _fmt(value: float | None) -> str:
    if value is None:
        return "absent"
    return f"{float(value):.6g}"


def render_report(report: EvalReport, format: str = "table") -> str:
    """Serialize a report deterministically.

    "table" is aligned text for reading; "machine" is JSON. Sections and
    rows are emitted in sorted order and floats are fixed at 6 significant
    digits, so equal reports produce byte-identical output. Absent values
    (empty slices) appear as "absent" in tables and null in JSON.
    """
    report.validate()
    if format == "machine":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "sections": {
                name: {
                    row: (None if v is None else float(_fmt(v)))
                    for row, v in rows.items()
                }
                for name, rows in report.sections.items()
            },
            "curves": {
                name: {
                    "recall": [float(_fmt(v)) for v in rec],
                    "precision": [float(_fmt(v)) for v in prec],
                }
                for name, (rec, prec) in report.curves.items()
            },
        }
        text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
    elif format == "table":
        lines = []
        for name in sorted(report.sections):
            lines.append(f"[{name}]")
            rows = report.sections[name]
            width = max((len(r) for r in rows), default=0)
            for row in sorted(rows):
                lines.append(f"  {row:<{width}}  {_fmt(rows[row])}")
            lines.append("")
        for name in sorted(report.curves):
            rec, _ = report.curves[name]
            lines.append(f"curve {name}: {len(rec)} points")
        text = "\n".join(lines).rstrip("\n") + "\n"
    else:
        raise ValueError(f"unknown report format {format!r}")
    return text


def write_report(report: EvalReport, path: str | Path, format: str = "table") -> None:
    """Render a report (see render_report) and write it to a file."""
    Path(path).write_text(render_report(report, format), encoding="utf-8")
