"""Discretizing viewpoints into per-class angle bins and decoding them back.

A viewpoint classifier emits one score per (class, angle slot, bin). The
codec here fixes the layout of that flat score vector and decodes the
per-slot argmax back into euler angles.
"""

import math

import numpy as np

from posekit.viewpoint import (
    BinningConfig,
    ViewpointScores,
    angle_to_bin,
    bin_center,
    decode_viewpoint,
    output_index,
)

config = BinningConfig(num_classes=3, num_bins=21)
print("classes=3, angle slots=3, bins=21 ->", config.total_outputs, "outputs")

# where does azimuth 100 degrees land, and what does that bin mean?
b = angle_to_bin(math.radians(100), config.num_bins)
print("az=100deg -> bin", b, "centered at %.1f deg" % math.degrees(bin_center(b, config.num_bins)))

# coarser bins are more forgiving; these four widths are the usual ladder
for n in (4, 8, 16, 24):
    print("  %2d bins: az=100deg -> bin %2d (width %.1f deg)" % (n, angle_to_bin(math.radians(100), n), 360.0 / n))

# fill a score vector with peaks for class 1 and decode it
scores = np.zeros(config.total_outputs)
target = (math.radians(100), math.radians(-20), math.radians(5))
for slot, angle in enumerate(target):
    idx = output_index(1, slot, angle_to_bin(angle, config.num_bins), config)
    scores[idx] = 9.0

decoded = decode_viewpoint(ViewpointScores(scores, config), class_index=1)
print("decoded:", [round(math.degrees(a), 2) for a in (decoded.azimuth, decoded.elevation, decoded.cyclorotation)])
print("(bin centers, so each angle is within half a bin of the target)")
