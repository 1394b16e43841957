"""Command-line entry points.

Subcommands: evaluate-viewpoint, evaluate-keypoints, fuse, diagnose, synth.
Exit codes: 0 on success, 2 when inputs fail to parse or validate, 3 on
I/O failure. All randomness is controlled by --seed.

Prediction files come in two shapes. Detection records (the detections.jsonl
format) carry boxes, scores, viewpoints, and keypoint hypotheses; they feed
evaluate-viewpoint, evaluate-keypoints --mode apk, diagnose, and the
viewpoints used by fuse. Keypoint-prediction records ({"id", "keypoints"}
lines, as written by fuse) feed evaluate-keypoints --mode pck. In known-box
settings a detection is paired with the instance whose image id and box it
reproduces exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Mapping, Sequence

from . import dataio, diagnostics, fusion, metrics, synth
from .metrics import Detection, EvalReport, Instance
from .so3 import euler_to_rotation
from .viewpoint import angle_to_bin


def match_by_box(
    instances: Sequence[Instance], detections: Sequence[Detection]
) -> dict[str, Detection]:
    """Pair each instance with the single detection at its exact box."""
    by_key: dict[tuple, list[Detection]] = {}
    for det in detections:
        by_key.setdefault((det.image_id, det.bbox), []).append(det)
    out = {}
    for inst in instances:
        candidates = by_key.get((inst.image_id, inst.bbox), [])
        if len(candidates) != 1:
            raise dataio.ValidationError(
                f"instance {inst.id!r}: expected exactly one prediction at its"
                f" box, found {len(candidates)}"
            )
        out[inst.id] = candidates[0]
    return out


def _viewpoint_pairs(
    instances: Sequence[Instance], matched: Mapping[str, Detection]
) -> dict[str, list[tuple]]:
    pairs: dict[str, list[tuple]] = {}
    for inst in instances:
        det = matched[inst.id]
        if inst.viewpoint is None or det.viewpoint is None:
            raise dataio.ValidationError(
                f"instance {inst.id!r}: viewpoint evaluation needs viewpoints"
                " on both the annotation and the prediction"
            )
        pairs.setdefault(inst.class_name, []).append(
            (euler_to_rotation(inst.viewpoint), euler_to_rotation(det.viewpoint))
        )
    return pairs


def fuse_predictions(
    dataset: dataio.Dataset,
    viewpoints: Mapping[str, Detection] | None = None,
    w_fine: float = 0.5,
    w_coarse: float = 0.5,
    sigma: float = fusion.PRIOR_SIGMA,
    threshold: float = fusion.NEIGHBOR_THRESHOLD,
    upsample_mode: str = "nearest",
) -> dict[str, dict[int, tuple[float, float]]]:
    """Decode every response map through the viewpoint-conditioned prior.

    The prior for an instance conditions on its predicted viewpoint when a
    matched detection map is supplied, otherwise on the annotated one. A
    keypoint with no support among the prior-bank neighbors falls back to
    a uniform prior. Returns pixel-space predictions per instance.
    """
    by_id = {inst.id: inst for inst in dataset.instances}
    out: dict[str, dict[int, tuple[float, float]]] = {}
    for iid in sorted(dataset.response_maps):
        inst = by_id.get(iid)
        if inst is None:
            raise dataio.ValidationError(f"response maps for unknown instance {iid!r}")
        maps = dataset.response_maps[iid]
        if "fine" not in maps or "coarse" not in maps:
            raise dataio.ValidationError(
                f"instance {iid!r}: needs both fine and coarse response maps"
            )
        if viewpoints is not None:
            vp = viewpoints[iid].viewpoint if iid in viewpoints else None
        else:
            vp = inst.viewpoint
        if vp is None:
            raise dataio.ValidationError(f"instance {iid!r}: no viewpoint to condition on")
        bank = dataset.prior_banks.get(inst.class_name)
        if bank is None:
            raise dataio.ValidationError(
                f"instance {iid!r}: no prior bank for class {inst.class_name!r}"
            )
        r = euler_to_rotation(vp)
        preds = {}
        for k in range(maps["fine"].shape[0]):
            combined = fusion.combine_scales(
                maps["fine"][k], maps["coarse"][k], w_fine, w_coarse, upsample_mode
            )
            try:
                prior = fusion.pose_prior(r, bank, k, sigma, threshold)
            except fusion.NoPriorSupportError:
                prior = fusion.uniform_prior()
            g = fusion.fuse_and_decode(prior, combined)
            preds[k] = fusion.denormalize_keypoint(inst.bbox, g)
        out[iid] = preds
    return out


def _emit_report(report: EvalReport, args: argparse.Namespace) -> None:
    if args.report:
        dataio.write_report(report, args.report, args.format)
    else:
        sys.stdout.write(dataio.render_report(report, args.format))


def _mean_rows(sections: Mapping[str, Mapping[str, float | None]]) -> dict[str, float | None]:
    rows: dict[str, float | None] = {}
    keys = sorted({k for rows_ in sections.values() for k in rows_})
    for key in keys:
        vals = [r[key] for r in sections.values() if r.get(key) is not None]
        rows[key] = sum(vals) / len(vals) if vals else None
    return rows


def _cmd_evaluate_viewpoint(args: argparse.Namespace) -> int:
    dataset = dataio.load_dataset(args.dataset)
    preds = dataio.load_detections(args.preds, dataset.manifest)
    report = EvalReport()
    if args.gt_boxes:
        matched = match_by_box(dataset.instances, preds)
        for cls, pairs in sorted(_viewpoint_pairs(dataset.instances, matched).items()):
            report.sections[cls] = {
                "acc": metrics.accuracy_at(pairs, args.theta),
                "mederr_deg": metrics.median_error(pairs),
            }
        report.sections["mean"] = _mean_rows(
            {c: r for c, r in report.sections.items() if c != "mean"}
        )
    else:
        def bin_match(det: Detection, gt: Instance) -> bool:
            if det.viewpoint is None or gt.viewpoint is None:
                raise dataio.ValidationError("detections mode needs viewpoints")
            return angle_to_bin(det.viewpoint.azimuth, args.bins) == (
                angle_to_bin(gt.viewpoint.azimuth, args.bins)
            )

        by_class = metrics.evaluate_detections(preds, dataset.instances, bin_match)
        avp_t = metrics.avp_theta(preds, dataset.instances, args.theta)
        arp_t = metrics.arp_theta(preds, dataset.instances, args.theta)
        for cls in sorted(by_class):
            report.sections[cls] = {
                f"avp{args.bins}": by_class[cls].ap,
                "avp_theta": avp_t[cls],
                "arp_theta": arp_t[cls],
            }
            report.curves[f"avp/{cls}"] = (
                by_class[cls].recalls,
                by_class[cls].precisions,
            )
        report.sections["mean"] = _mean_rows(
            {c: r for c, r in report.sections.items() if c != "mean"}
        )
    _emit_report(report, args)
    return 0


def _pck_sections(
    report: EvalReport, result: metrics.PckResult, manifest: dataio.Manifest, prefix: str
) -> None:
    for cls in sorted(result.per_keypoint):
        names = manifest.keypoint_names[cls]
        report.sections[f"{prefix}{cls}"] = {
            names[k]: v for k, v in sorted(result.per_keypoint[cls].items())
        }
    report.sections[f"{prefix}mean"] = dict(
        sorted(result.per_class.items()), all=result.mean()
    )
    report.sections[f"{prefix}pooled"] = dict(sorted(result.pooled_per_class.items()))


def _cmd_evaluate_keypoints(args: argparse.Namespace) -> int:
    dataset = dataio.load_dataset(args.dataset)
    report = EvalReport()
    if args.mode == "pck":
        preds = dataio.load_keypoint_predictions(args.preds)
        result = metrics.pck(dataset.instances, preds, args.alpha)
        _pck_sections(report, result, dataset.manifest, "pck/")
    else:
        dets = dataio.load_detections(args.preds, dataset.manifest)
        rescored = [
            dataclasses.replace(
                det,
                keypoint_hypotheses={
                    k: metrics.KeypointHypothesis(
                        h.x, h.y, metrics.score_hypothesis(det.score, h.score, args.lam)
                    )
                    for k, h in det.keypoint_hypotheses.items()
                },
            )
            for det in dets
        ]
        result = metrics.apk(rescored, dataset.instances, args.alpha)
        for cls in sorted(result.per_keypoint):
            names = dataset.manifest.keypoint_names[cls]
            report.sections[f"apk/{cls}"] = {
                names[k]: v for k, v in sorted(result.per_keypoint[cls].items())
            }
        report.sections["apk/mean"] = dict(
            sorted(result.per_class.items()), all=result.mean()
        )
    _emit_report(report, args)
    return 0


def _cmd_fuse(args: argparse.Namespace) -> int:
    base = Path(args.dataset)
    manifest = dataio.load_manifest(base / "manifest.json")
    instances = dataio.load_instances(base / "instances.jsonl", manifest)
    maps_dir = Path(args.maps) if args.maps else base / "responses"
    bank_path = Path(args.prior_bank) if args.prior_bank else base / "prior_bank.jsonl"
    dataset = dataio.Dataset(
        manifest=manifest,
        instances=instances,
        response_maps=dataio.load_response_maps(maps_dir, manifest, instances),
        prior_banks=dataio.load_prior_banks(bank_path, manifest),
    )
    viewpoints = None
    if args.preds:
        dets = dataio.load_detections(args.preds, manifest)
        viewpoints = match_by_box(instances, dets)
    preds = fuse_predictions(
        dataset,
        viewpoints,
        w_fine=args.w_fine,
        w_coarse=args.w_coarse,
        sigma=args.sigma,
        threshold=args.threshold,
    )
    dataio.save_keypoint_predictions(preds, args.out)
    print(f"fused {len(preds)} instances -> {args.out}")
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    dataset = dataio.load_dataset(args.dataset)
    dets = dataio.load_detections(args.preds, dataset.manifest)
    matched = match_by_box(dataset.instances, dets)
    excluded = set(dataset.manifest.excluded_classes)
    kept = [inst for inst in dataset.instances if inst.class_name not in excluded]
    report = EvalReport()

    if args.slices or args.error_modes:
        if not kept:
            raise dataio.ValidationError("no instances left after class exclusion")

    if args.slices:
        pair_by_id = {}
        for inst in kept:
            det = matched[inst.id]
            if inst.viewpoint is None or det.viewpoint is None:
                raise dataio.ValidationError(
                    f"instance {inst.id!r}: slicing needs viewpoints"
                )
            pair_by_id[inst.id] = (
                euler_to_rotation(inst.viewpoint),
                euler_to_rotation(det.viewpoint),
            )
        specs = []
        for token in args.slices.split(","):
            token = token.strip()
            if token == "size":
                specs.extend(diagnostics.size_slice_specs(kept))
            elif token == "occlusion":
                specs.append(diagnostics.occluded_slice())
            elif token == "truncation":
                specs.append(diagnostics.truncated_slice())
            else:
                raise ValueError(
                    f"unknown slice {token!r} (known: size, occlusion, truncation)"
                )
        fns: dict[str, diagnostics.MetricFn] = {
            "acc": lambda insts: metrics.accuracy_at(
                [pair_by_id[i.id] for i in insts], args.theta
            ),
            "mederr_deg": lambda insts: metrics.median_error(
                [pair_by_id[i.id] for i in insts]
            ),
        }
        sliced = diagnostics.sliced_report(kept, fns, specs, exclude_classes=())
        for name, rows in sliced.sections.items():
            report.sections[f"slice/{name}"] = rows

    if args.error_modes:
        pairs = []
        for inst in kept:
            det = matched[inst.id]
            if inst.viewpoint is None or det.viewpoint is None:
                raise dataio.ValidationError(
                    f"instance {inst.id!r}: error modes need viewpoints"
                )
            pairs.append((inst.viewpoint.azimuth, det.viewpoint.azimuth))
        tally = diagnostics.error_mode_decomposition(pairs)
        rows = dict(sorted(tally.percentages().items()))
        rows["count"] = float(tally.total)
        report.sections["error-modes"] = rows

    if args.left_right:
        preds_kp = {
            inst.id: {k: (h.x, h.y) for k, h in matched[inst.id].keypoint_hypotheses.items()}
            for inst in dataset.instances
        }
        base = metrics.pck(dataset.instances, preds_kp, args.alpha)
        swapped = diagnostics.left_right_pck(
            dataset.instances, preds_kp, dataset.manifest.symmetry_pairs, args.alpha
        )
        report.sections["pck"] = dict(sorted(base.per_class.items()), all=base.mean())
        report.sections["left-right-pck"] = dict(
            sorted(swapped.per_class.items()), all=swapped.mean()
        )

    if not report.sections:
        raise ValueError("nothing to diagnose: pass --slices, --error-modes, or --left-right")
    _emit_report(report, args)
    return 0


def _load_profile(value: str) -> synth.NoiseProfile:
    if value in synth.NOISE_PRESETS:
        return synth.NOISE_PRESETS[value]
    path = Path(value)
    if path.exists():
        record = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(record, dict):
            raise ValueError(f"{path.name}: noise profile must be an object")
        return synth.NoiseProfile(**record)
    known = ", ".join(sorted(synth.NOISE_PRESETS))
    raise ValueError(f"unknown noise profile {value!r}: not a preset ({known}) or a file")


def _cmd_synth(args: argparse.Namespace) -> int:
    profile = _load_profile(args.noise_profile)
    dataset = synth.generate_scene(args.seed, args.n, profile)
    dataio.save_dataset(dataset, args.out)
    print(
        f"wrote {len(dataset.instances)} instances"
        f" ({len(dataset.detections)} detections) to {args.out}"
    )
    return 0


def _add_report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--report", help="write the report here instead of stdout")
    p.add_argument(
        "--format",
        choices=("table", "machine"),
        default="table",
        help="report format (default table)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posekit",
        description="Viewpoint and keypoint evaluation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "evaluate-viewpoint", help="median error/accuracy or detection-setting AP"
    )
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--preds", required=True, help="detections.jsonl-format predictions")
    p.add_argument("--theta", type=float, default=math.pi / 6, help="radians")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument(
        "--gt-boxes", action="store_true", help="known boxes: MedErr and Acc_theta"
    )
    mode.add_argument(
        "--detections", action="store_true", help="detection setting: AVP/AVP_theta/ARP_theta"
    )
    p.add_argument("--bins", type=int, default=24, help="azimuth bins for AVP")
    _add_report_flags(p)
    p.set_defaults(func=_cmd_evaluate_viewpoint)

    p = sub.add_parser("evaluate-keypoints", help="PCK (known boxes) or APK (detections)")
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--preds",
        required=True,
        help="keypoint predictions (pck) or detections.jsonl (apk)",
    )
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--mode", choices=("pck", "apk"), default="pck")
    p.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=0.5,
        help="detector-score weight when rescoring apk hypotheses",
    )
    _add_report_flags(p)
    p.set_defaults(func=_cmd_evaluate_keypoints)

    p = sub.add_parser("fuse", help="decode response maps through the pose prior")
    p.add_argument("--dataset", required=True)
    p.add_argument("--maps", help="response-map directory (default <dataset>/responses)")
    p.add_argument(
        "--prior-bank", help="bank file (default <dataset>/prior_bank.jsonl)"
    )
    p.add_argument(
        "--preds",
        help="detections supplying predicted viewpoints (default: annotated ones)",
    )
    p.add_argument("--w-fine", type=float, default=0.5)
    p.add_argument("--w-coarse", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=fusion.PRIOR_SIGMA)
    p.add_argument("--threshold", type=float, default=fusion.NEIGHBOR_THRESHOLD)
    p.add_argument("--out", required=True, help="keypoint predictions file to write")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("diagnose", help="slices, error modes, left/right confusion")
    p.add_argument("--dataset", required=True)
    p.add_argument("--preds", required=True, help="detections.jsonl-format predictions")
    p.add_argument("--slices", help="comma list from: size, occlusion, truncation")
    p.add_argument("--error-modes", action="store_true")
    p.add_argument("--left-right", action="store_true")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--theta", type=float, default=math.pi / 6)
    _add_report_flags(p)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("synth", help="generate a deterministic synthetic dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="number of instances")
    p.add_argument(
        "--noise-profile",
        "--noise",
        dest="noise_profile",
        default="zero",
        help="preset name or JSON profile file",
    )
    p.add_argument("--out", required=True, help="dataset directory to write")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except dataio.DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
