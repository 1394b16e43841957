"""Rotation representations, conversions, and distances on SO(3).

A viewpoint is either a (azimuth, elevation, cyclorotation) euler triple or
a 3x3 rotation matrix. The euler convention is ZYX intrinsic throughout:

    R = Rz(azimuth) @ Ry(elevation) @ Rx(cyclorotation)

Canonical ranges: azimuth in [0, 2*pi), elevation in [-pi/2, pi/2],
cyclorotation in [-pi, pi). Everything here is a pure function on immutable
values; rotation matrices are plain float64 numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Tolerances for the rotation-matrix invariants and the gimbal-lock band.
ORTHONORMAL_TOL = 1e-9
GIMBAL_BAND = 1e-6


def wrap_angle(a: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    w = float(a) % TWO_PI
    # modulo of a tiny negative value can round up to the modulus itself
    return 0.0 if w == TWO_PI else w


def wrap_signed(a: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return wrap_angle(float(a) + math.pi) - math.pi


@dataclass(frozen=True)
class EulerAngles:
    """A viewpoint as ZYX euler angles, normalized on construction.

    Azimuth wraps to [0, 2*pi) and cyclorotation to [-pi, pi). An elevation
    outside [-pi/2, pi/2] is folded through the equivalent euler triple
    (azimuth+pi, pi-elevation, cyclorotation+pi), which represents the same
    rotation, so any finite triple normalizes without changing the viewpoint.
    """

    azimuth: float
    elevation: float
    cyclorotation: float

    def __post_init__(self) -> None:
        az, el, cy = (
            float(self.azimuth),
            float(self.elevation),
            float(self.cyclorotation),
        )
        if not (math.isfinite(az) and math.isfinite(el) and math.isfinite(cy)):
            raise ValueError("euler angles must be finite")
        # In-range values pass through untouched so that re-normalizing an
        # already normalized triple is bit-exact (wrapping is not).
        if not -math.pi / 2 <= el <= math.pi / 2:
            el = wrap_signed(el)
            if el == -math.pi:  # sign artifact of wrapping; pi and -pi coincide
                el = math.pi
            if abs(el) > math.pi / 2:
                az += math.pi
                cy += math.pi
                el = math.copysign(math.pi, el) - el
        if not 0.0 <= az < TWO_PI:
            az = wrap_angle(az)
        if not -math.pi <= cy < math.pi:
            cy = wrap_signed(cy)
        object.__setattr__(self, "azimuth", az)
        object.__setattr__(self, "elevation", el)
        object.__setattr__(self, "cyclorotation", cy)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.azimuth, self.elevation, self.cyclorotation)


def _rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_matrix(r: np.ndarray) -> np.ndarray:
    """Validate and freeze a 3x3 rotation matrix.

    Checks orthonormality (max |R^T R - I| <= 1e-9) and det(R) = 1 within
    the same tolerance, then returns a read-only float64 copy. Use this as
    the constructor for matrices coming from outside the library.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"rotation matrix must be 3x3, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("rotation matrix has non-finite entries")
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err > ORTHONORMAL_TOL:
        raise ValueError(f"matrix is not orthonormal (max deviation {err:.3e})")
    det = float(np.linalg.det(r))
    if abs(det - 1.0) > ORTHONORMAL_TOL:
        raise ValueError(f"matrix determinant is {det:.12f}, expected 1")
    out = r.copy()
    out.flags.writeable = False
    return out


def euler_to_rotation(e: EulerAngles) -> np.ndarray:
    """Rotation matrix for a euler triple: Rz(az) @ Ry(el) @ Rx(cy)."""
    return _rot_z(e.azimuth) @ _rot_y(e.elevation) @ _rot_x(e.cyclorotation)


def rotation_to_euler(r: np.ndarray) -> EulerAngles:
    """Euler triple of a rotation matrix (inverse of euler_to_rotation).

    Exact away from gimbal lock. Within 1e-6 of |elevation| = pi/2 the
    decomposition is degenerate: cyclorotation is reported as 0 and azimuth
    absorbs the remaining freedom, still reproducing the input rotation.
    """
    r = np.asarray(r, dtype=np.float64)
    s = min(1.0, max(-1.0, -float(r[2, 0])))
    elevation = math.asin(s)
    if abs(s) >= 1.0 - GIMBAL_BAND:
        azimuth = math.atan2(-float(r[0, 1]), float(r[1, 1]))
        cyclo = 0.0
    else:
        azimuth = math.atan2(float(r[1, 0]), float(r[0, 0]))
        cyclo = math.atan2(float(r[2, 1]), float(r[2, 2]))
    return EulerAngles(azimuth, elevation, cyclo)


def geodesic_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    """Geodesic distance between two rotations, in [0, pi].

    Computed as arccos((trace(r1^T r2) - 1) / 2) with the argument clamped
    to [-1, 1], which equals the Frobenius norm of the relative log map
    divided by sqrt(2) while avoiding NaN at the tolerance boundary.
    Identical matrices short-circuit to exactly 0: the float trace of
    r^T r can land a few ulp under 3, which the formula would report as
    an error of ~1e-8 radians.
    """
    r1 = np.asarray(r1)
    r2 = np.asarray(r2)
    if np.array_equal(r1, r2):
        return 0.0
    tr = float(np.einsum("ij,ij->", r1, r2))
    return math.acos(min(1.0, max(-1.0, (tr - 1.0) / 2.0)))


def geodesic_distances(r: np.ndarray, rs: np.ndarray) -> np.ndarray:
    """Geodesic distance from one rotation to a stack of shape (n, 3, 3)."""
    tr = np.einsum("ij,nij->n", np.asarray(r), np.asarray(rs))
    return np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))


def azimuth_distance(a1: float, a2: float) -> float:
    """Circular distance between two azimuths, in [0, pi]."""
    d = abs(wrap_angle(a1) - wrap_angle(a2))
    return min(d, TWO_PI - d)


def pi_flip(r: np.ndarray) -> np.ndarray:
    """Rotate a pose by pi about the Z axis: Rz(pi) @ R."""
    return _rot_z(math.pi) @ np.asarray(r, dtype=np.float64)


def z_reflect_azimuth(a: float) -> float:
    """Azimuth of the pose reflected across the image plane: (-a) mod 2*pi."""
    return wrap_angle(-float(a))
