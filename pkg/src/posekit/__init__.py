"""Pose evaluation toolkit: SO(3) viewpoint geometry, azimuth binning,
viewpoint-conditioned keypoint fusion, detection-setting metrics, error
diagnostics, bit-exact dataset files, and a deterministic synthetic
harness with independent oracles.
"""

from .dataio import (
    Dataset,
    DatasetError,
    Manifest,
    ParseError,
    SchemaVersionError,
    ValidationError,
    load_dataset,
    render_report,
    save_dataset,
    write_report,
)
from .diagnostics import (
    ErrorModeTally,
    SliceSpec,
    error_mode_decomposition,
    left_right_pck,
    size_slices,
    sliced_report,
)
from .fusion import (
    GRID_SIZE,
    NoPriorSupportError,
    PriorBank,
    ResponseMap,
    combine_scales,
    denormalize_keypoint,
    fuse_and_decode,
    neighbor_set,
    normalize_keypoint,
    pose_prior,
    receptive_center,
    target_response_map,
    uniform_prior,
    upsample_coarse,
)
from .metrics import (
    ApkResult,
    Detection,
    EvalReport,
    Instance,
    Keypoint,
    KeypointHypothesis,
    PckResult,
    accuracy_at,
    apk,
    arp_theta,
    avp,
    avp_theta,
    evaluate_detections,
    iou,
    median_error,
    pck,
    score_hypothesis,
    voc_ap,
)
from .so3 import (
    EulerAngles,
    azimuth_distance,
    euler_to_rotation,
    geodesic_distance,
    geodesic_distances,
    pi_flip,
    rotation_matrix,
    rotation_to_euler,
    wrap_angle,
    wrap_signed,
    z_reflect_azimuth,
)
from .synth import (
    NoiseProfile,
    generate_scene,
    noise_preset,
    oracle_ap,
    oracle_fuse,
)
from .viewpoint import (
    BinningConfig,
    ViewpointScores,
    angle_to_bin,
    bin_center,
    decode_viewpoint,
    output_index,
)

__version__ = "0.1.0"
