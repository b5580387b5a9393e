"""DEER signal from a single target spin.

A drive pulse applied to the target mid-way through the sensor spin
echo rotates the target spin and imprints a phase on the sensor that
depends on the target orientation and on the random phase of the drive.
The observable signal is the average of cos(phase) over both, computed
here by deterministic quadrature with a seeded Monte Carlo oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import E_X, E_Y, rotation_matrix, unit_vector

DEFAULT_NODES = 32
CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class DrivePulse:
    """Target-spin drive pulse: Rabi frequency and detuning in ordinary MHz,
    length in microseconds.

    The effective rotation angle is alpha = 2*pi * length * sqrt(rabi^2
    + detuning^2), so a resonant pulse with rabi_freq*length = 1/2 is a
    pi pulse.
    """

    rabi_freq: float
    detuning: float
    length: float

    def __post_init__(self):
        if not (math.isfinite(self.rabi_freq) and self.rabi_freq >= 0.0):
            raise ValueError(f"rabi_freq must be >= 0, got {self.rabi_freq}")
        if not math.isfinite(self.detuning):
            raise ValueError("detuning must be finite")
        if not (math.isfinite(self.length) and self.length >= 0.0):
            raise ValueError(f"pulse length must be >= 0, got {self.length}")

    @property
    def generalized_rabi(self) -> float:
        """sqrt(rabi^2 + detuning^2) [MHz]."""
        return math.hypot(self.rabi_freq, self.detuning)

    @property
    def rotation_angle(self) -> float:
        """alpha = 2*pi * length * generalized Rabi frequency [rad]."""
        return 2.0 * math.pi * self.length * self.generalized_rabi


@dataclass(frozen=True, eq=False)
class EchoConfig:
    """Spin-echo half-length tau [us] and bias-field direction."""

    tau: float
    e_B: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        object.__setattr__(self, "e_B", unit_vector(self.e_B, "e_B"))


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts for the (phi_rand, cos(theta_1), phi_1) average."""

    n_phi_rand: int = DEFAULT_NODES
    n_cos_theta1: int = DEFAULT_NODES
    n_phi1: int = DEFAULT_NODES

    def __post_init__(self):
        for label, n in (("n_phi_rand", self.n_phi_rand),
                         ("n_cos_theta1", self.n_cos_theta1),
                         ("n_phi1", self.n_phi1)):
            if int(n) != n or n < 4:
                raise ValueError(f"{label} must be an integer >= 4, got {n}")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.n_phi_rand, 2 * self.n_cos_theta1, 2 * self.n_phi1)


@dataclass(frozen=True)
class DeerSignal:
    """Normalized <cos(phase)> in [-1, 1] plus a convergence estimate."""

    value: float
    converged: bool
    est_error: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("signal value must be finite")
        if abs(self.value) > 1.0 + 1e-9:
            raise ValueError(f"signal value out of range [-1, 1]: {self.value}")
        object.__setattr__(self, "value", min(1.0, max(-1.0, self.value)))


def drive_axis(pulse: DrivePulse, e_B: np.ndarray) -> np.ndarray:
    """Lab-frame drive axis of the target rotating frame.

    The rotating frame's z-axis is e_B; the axis is (rabi, 0, detuning)
    normalized, expressed with a fixed arbitrary perpendicular as the
    first basis vector (the random-phase average removes the
    arbitrariness).
    """
    nu = pulse.generalized_rabi
    if nu == 0.0:
        raise ValueError("drive axis undefined for rabi_freq = detuning = 0")
    b = unit_vector(e_B, "e_B")
    ref = E_X if abs(b[0]) < 0.9 else E_Y
    u = ref - np.dot(ref, b) * b
    u /= np.linalg.norm(u)
    return (pulse.rabi_freq * u + pulse.detuning * b) / nu


def accumulated_phase(c: float, e_B, e_1, pulse: DrivePulse, phi_rand: float) -> float:
    """Sensor phase for one target orientation and one drive phase.

    phase = c * [(R_B(phi_rand) R_a(alpha) e_1 - e_1) . e_B] with R_a the
    rotation about the drive axis by alpha and R_B the rotation about
    the bias direction by the random drive phase.
    """
    b = unit_vector(e_B, "e_B")
    e1 = unit_vector(e_1, "e_1")
    if not math.isfinite(phi_rand):
        raise ValueError("phi_rand must be finite")
    alpha = pulse.rotation_angle
    if alpha == 0.0 or pulse.generalized_rabi == 0.0:
        return 0.0
    axis = drive_axis(pulse, b)
    rotated = rotation_matrix(b, phi_rand) @ (rotation_matrix(axis, alpha) @ e1)
    return c * float(np.dot(rotated - e1, b))


def _projection_row(pulse: DrivePulse) -> np.ndarray:
    # third row of (R_a - I) in the frame whose z-axis is e_B;
    # phase = c * e_1 . row.  The subsequent rotation about e_B leaves
    # the e_B projection invariant, so the phi_rand average is exact.
    nu = pulse.generalized_rabi
    axis = np.array([pulse.rabi_freq, 0.0, pulse.detuning]) / nu
    r = rotation_matrix(axis, pulse.rotation_angle)
    return r[2, :] - np.array([0.0, 0.0, 1.0])


def _quadrature_mean(c: float, pulse: DrivePulse, n_ct: int, n_p1: int) -> float:
    row = _projection_row(pulse)
    nodes, weights = np.polynomial.legendre.leggauss(n_ct)
    phi1 = 2.0 * math.pi * np.arange(n_p1) / n_p1
    st = np.sqrt(1.0 - nodes ** 2)
    e1 = np.empty((n_ct, n_p1, 3))
    e1[..., 0] = st[:, None] * np.cos(phi1)[None, :]
    e1[..., 1] = st[:, None] * np.sin(phi1)[None, :]
    e1[..., 2] = nodes[:, None]
    phase = c * (e1 @ row)
    return float(weights @ np.cos(phase).mean(axis=1)) / 2.0


def deer_signal_quadrature(c: float, echo: EchoConfig, pulse: DrivePulse,
                           quad: QuadratureSpec | None = None,
                           tol: float = CONVERGENCE_TOL) -> DeerSignal:
    """Single-spin DEER signal by deterministic quadrature.

    Averages cos(phase) over the target orientation (Gauss-Legendre on
    cos(theta_1), periodic trapezoid on phi_1) and the random drive
    phase, normalized so the signal is exactly 1 at zero coupling.  The
    returned value uses doubled node counts; ``est_error`` is the change
    from the requested counts to the doubled ones and ``converged``
    flags est_error <= tol (non-convergence is flagged, not fatal).
    """
    if quad is None:
        quad = QuadratureSpec()
    if not math.isfinite(c):
        raise ValueError("coupling prefactor must be finite")
    if c == 0.0 or pulse.length == 0.0 or pulse.generalized_rabi == 0.0:
        return DeerSignal(value=1.0, converged=True, est_error=0.0)
    coarse = _quadrature_mean(c, pulse, quad.n_cos_theta1, quad.n_phi1)
    fine_spec = quad.doubled()
    fine = _quadrature_mean(c, pulse, fine_spec.n_cos_theta1, fine_spec.n_phi1)
    err = abs(fine - coarse)
    return DeerSignal(value=fine, converged=bool(err <= tol), est_error=err)


def deer_signal_montecarlo(c: float, echo: EchoConfig, pulse: DrivePulse,
                           n_samples: int, seed: int) -> DeerSignal:
    """Monte Carlo oracle for the single-spin DEER signal.

    Samples the target orientation uniformly on the sphere and the
    drive phase uniformly on the circle from a seeded generator and
    evaluates the full lab-frame phase expression, including the
    explicit random-phase rotation about e_B.  Identical (seed, inputs)
    give bit-identical output; ``est_error`` is the standard error of
    the mean.
    """
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    rng = np.random.default_rng(seed)
    cos_t = rng.uniform(-1.0, 1.0, n_samples)
    phi = rng.uniform(0.0, 2.0 * math.pi, n_samples)
    phi_rand = rng.uniform(0.0, 2.0 * math.pi, n_samples)
    st = np.sqrt(1.0 - cos_t ** 2)
    e1 = np.stack([st * np.cos(phi), st * np.sin(phi), cos_t], axis=-1)

    b = echo.e_B
    if pulse.generalized_rabi == 0.0 or pulse.rotation_angle == 0.0 or c == 0.0:
        values = np.ones(n_samples)
    else:
        r_a = rotation_matrix(drive_axis(pulse, b), pulse.rotation_angle)
        w = e1 @ r_a.T
        # R_B(phi_rand) w via the Rodrigues vector form, per sample
        cph = np.cos(phi_rand)[:, None]
        sph = np.sin(phi_rand)[:, None]
        rotated = w * cph + np.cross(np.broadcast_to(b, w.shape), w) * sph \
            + b * (w @ b)[:, None] * (1.0 - cph)
        phase = c * ((rotated - e1) @ b)
        values = np.cos(phase)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(n_samples))
    return DeerSignal(value=mean, converged=True, est_error=stderr)


def revival_detuning(pulse: DrivePulse) -> float:
    """Detuning at which the signal first fully revives (alpha = 2*pi).

    Delta_R = sqrt(1/length^2 - rabi^2) in ordinary-frequency units.

    Raises
    ------
    ValueError
        If length <= 0 or rabi_freq * length > 1 (no real revival).
    """
    if pulse.length <= 0.0:
        raise ValueError("pulse length must be positive")
    scale = 1.0 / pulse.length ** 2
    inv = scale - pulse.rabi_freq ** 2
    if inv < -1e-12 * scale:
        raise ValueError("no revival detuning exists: rabi_freq * length > 1")
    return math.sqrt(max(inv, 0.0))


def _check_grid(grid, name: str) -> np.ndarray:
    arr = np.asarray(grid, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1D grid")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if np.any(np.diff(arr) < 0):
        raise ValueError(f"{name} must be sorted ascending")
    return arr


def deer_spectrum(c: float, echo: EchoConfig, rabi_freq: float, length: float,
                  detuning_grid, quad: QuadratureSpec | None = None):
    """Quadrature DEER signal swept over drive detuning.

    Returns a list of (detuning, DeerSignal) pairs.
    """
    grid = _check_grid(detuning_grid, "detuning_grid")
    out = []
    for delta in grid:
        pulse = DrivePulse(rabi_freq=rabi_freq, detuning=float(delta), length=length)
        out.append((float(delta), deer_signal_quadrature(c, echo, pulse, quad)))
    return out


def deer_rabi(c: float, echo: EchoConfig, rabi_freq: float, detuning: float,
              length_grid, quad: QuadratureSpec | None = None):
    """Quadrature DEER signal swept over drive pulse length.

    Returns a list of (length, DeerSignal) pairs.
    """
    grid = _check_grid(length_grid, "length_grid")
    if np.any(grid < 0):
        raise ValueError("pulse lengths must be >= 0")
    out = []
    for t_p in grid:
        pulse = DrivePulse(rabi_freq=rabi_freq, detuning=detuning, length=float(t_p))
        out.append((float(t_p), deer_signal_quadrature(c, echo, pulse, quad)))
    return out
