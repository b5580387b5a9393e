"""3D unit-vector algebra, axis-angle rotations, and dipolar-coupling geometry.

Directions are plain length-3 numpy arrays.  The sensor quantization
axis is the lab z-axis; the bias-field direction ``e_B`` is an
independent unit vector and need not coincide with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CODATA, NM, US

E_X = np.array([1.0, 0.0, 0.0])
E_Y = np.array([0.0, 1.0, 0.0])
E_Z = np.array([0.0, 0.0, 1.0])


def _as_vector3(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have exactly 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components: {arr}")
    return arr


def vector_norm(v) -> float:
    """Euclidean norm of a 3-vector, safe against overflow."""
    arr = _as_vector3(v)
    return math.hypot(arr[0], arr[1], arr[2])


def unit_vector(v, name: str = "vector") -> np.ndarray:
    """Return ``v`` normalized to unit length.

    Raises
    ------
    ValueError
        If ``v`` is non-finite or has zero norm.
    """
    arr = _as_vector3(v, name)
    n = vector_norm(arr)
    if n == 0.0:
        raise ValueError(f"{name} has zero norm and cannot be normalized")
    return arr / n


@dataclass(frozen=True)
class SphericalDirection:
    """Direction given by polar angle ``theta`` and azimuth ``phi`` (radians).

    ``theta`` must lie in [0, pi]; ``phi`` is wrapped into [0, 2*pi).
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("angles must be finite")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must be in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", self.phi % (2.0 * math.pi))

    def to_cartesian(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi),
                         st * math.sin(self.phi),
                         math.cos(self.theta)])


@dataclass(frozen=True, eq=False)
class DipolarCoupling:
    """Magnitude and direction of the dipolar field a target spin projects
    onto the sensor.

    Attributes
    ----------
    lambda_mag : field magnitude [T]
    e_i : unit direction of the dipolar field
    r : separation [nm]
    theta_r : polar angle of the displacement unit vector [rad]
    """

    lambda_mag: float
    e_i: np.ndarray
    r: float
    theta_r: float


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Right-handed rotation matrix about ``axis`` by ``angle`` (Rodrigues form)."""
    ax = unit_vector(axis, "axis")
    if not math.isfinite(angle):
        raise ValueError("angle must be finite")
    k = np.array([[0.0, -ax[2], ax[1]],
                  [ax[2], 0.0, -ax[0]],
                  [-ax[1], ax[0], 0.0]])
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def rotate_axis_angle(v, axis, angle: float) -> np.ndarray:
    """Rotate ``v`` about unit ``axis`` by ``angle`` radians (right-handed).

    Uses the Rodrigues vector form; the norm of ``v`` is preserved to
    better than 1e-12 relative.
    """
    vec = _as_vector3(v, "v")
    ax = unit_vector(axis, "axis")
    if not math.isfinite(angle):
        raise ValueError("angle must be finite")
    c, s = math.cos(angle), math.sin(angle)
    return vec * c + np.cross(ax, vec) * s + ax * np.dot(ax, vec) * (1.0 - c)


def dipolar_coupling(r: float, direction: SphericalDirection) -> DipolarCoupling:
    """Dipolar field magnitude and direction for a target spin at distance ``r``.

    Parameters
    ----------
    r : separation between sensor and target [nm], must be > 0
    direction : orientation of the displacement unit vector

    Returns
    -------
    DipolarCoupling
        ``lambda_mag`` [T] scales as 1/r^3 and carries the angular factor
        sqrt(3*cos(theta_r)**2 + 1); ``e_i`` is the exactly unit-norm
        direction [3*(e_r . e_z)*e_r - e_z] / sqrt(3*cos(theta_r)**2 + 1).
    """
    if not (math.isfinite(r) and r > 0.0):
        raise ValueError(f"separation r must be positive and finite, got {r}")
    e_r = direction.to_cartesian()
    cos_t = e_r[2]
    scale = math.sqrt(3.0 * cos_t * cos_t + 1.0)
    e_i = (3.0 * cos_t * e_r - E_Z) / scale
    lam = CODATA.mu0 * CODATA.gamma_e * CODATA.hbar * scale / (8.0 * math.pi * (r * NM) ** 3)
    return DipolarCoupling(lambda_mag=lam, e_i=e_i, r=r, theta_r=direction.theta)


def coupling_prefactor(coupling: DipolarCoupling, tau: float, e_B) -> float:
    """Dimensionless sensor phase scale c = gamma_e * tau * lambda * (e_B . e_i).

    Parameters
    ----------
    coupling : dipolar coupling of one target spin
    tau : half-length of the spin-echo sequence [us], must be > 0
    e_B : unit vector along the bias field

    Returns
    -------
    float
        Signed prefactor; zero when ``e_B`` is orthogonal to the dipolar
        field direction.
    """
    if not (math.isfinite(tau) and tau > 0.0):
        raise ValueError(f"tau must be positive and finite, got {tau}")
    eb = unit_vector(e_B, "e_B")
    return CODATA.gamma_e * (tau * US) * coupling.lambda_mag * float(np.dot(eb, coupling.e_i))
