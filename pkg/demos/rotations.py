"""Working with viewpoints as euler angles and rotation matrices."""

import math

import numpy as np

from posekit.so3 import (
    EulerAngles,
    azimuth_distance,
    euler_to_rotation,
    geodesic_distance,
    pi_flip,
    rotation_to_euler,
    wrap_angle,
)

# a viewpoint: azimuth 40 degrees, elevation 10, cyclorotation 0
vp = EulerAngles(math.radians(40), math.radians(10), 0.0)
r = euler_to_rotation(vp)
print("rotation matrix for az=40deg el=10deg:")
print(np.round(r, 4))

back = rotation_to_euler(r)
print("recovered:", [round(math.degrees(a), 3) for a in (back.azimuth, back.elevation, back.cyclorotation)])

# out-of-range inputs normalize on construction
folded = EulerAngles(math.radians(400), math.radians(100), 0.0)
print("az 400deg el 100deg normalizes to az=%.1fdeg el=%.1fdeg cy=%.1fdeg" % (
    math.degrees(folded.azimuth),
    math.degrees(folded.elevation),
    math.degrees(folded.cyclorotation),
))

# geodesic distance is the angle of the relative rotation
other = euler_to_rotation(EulerAngles(math.radians(70), math.radians(10), 0.0))
print("geodesic to az=70deg: %.2f deg" % math.degrees(geodesic_distance(r, other)))
print("azimuth-only distance: %.2f deg" % math.degrees(azimuth_distance(vp.azimuth, math.radians(70))))

# a half-turn about the vertical axis: the classic front/back confusion
flipped = pi_flip(r)
print("distance to the pi-flip: %.2f deg" % math.degrees(geodesic_distance(r, flipped)))

print("wrap_angle(-0.1) =", round(wrap_angle(-0.1), 6))
