"""Ensemble DEER signal in the central-limit regime.

For many weakly coupled target spins the accumulated sensor phase is a
sum of independent contributions, so it tends to a zero-mean Gaussian
and the signal has the closed form exp(-variance/2).  A many-spin Monte
Carlo oracle validates the Gaussian approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deer_single import DeerSignal, DrivePulse, EchoConfig, drive_axis
from .geometry import rotation_matrix

_MC_CHUNK = 50000


@dataclass(frozen=True, eq=False)
class SpinBathSample:
    """Fixed bath of target spins: prefactor c_k and dipolar-field direction
    per spin.

    The couplings encode the fixed spin positions (the dipolar geometry
    is already absorbed into c_k); spin orientations are drawn fresh
    every shot.  ``directions`` keeps the per-spin dipolar field
    directions for bookkeeping and defaults to unset.  ``n_c2`` is
    sum(c_k^2), the quantity controlling the ensemble signal.
    """

    couplings: np.ndarray
    directions: np.ndarray | None = None

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.couplings, dtype=float))
        if arr.ndim != 1:
            raise ValueError("couplings must be a 1D list of prefactors")
        if not np.all(np.isfinite(arr)):
            raise ValueError("couplings must be finite")
        object.__setattr__(self, "couplings", arr)
        if self.directions is not None:
            dirs = np.asarray(self.directions, dtype=float)
            if dirs.shape != (arr.size, 3):
                raise ValueError("directions must have shape (n_spins, 3)")
            norms = np.linalg.norm(dirs, axis=1)
            if not np.allclose(norms, 1.0, atol=1e-9):
                raise ValueError("directions must be unit vectors")
            object.__setattr__(self, "directions", dirs)

    @classmethod
    def from_dipolar(cls, couplings, tau: float, e_B) -> "SpinBathSample":
        """Build a bath from per-spin dipolar couplings at echo time ``tau``."""
        from .geometry import coupling_prefactor
        c_k = [coupling_prefactor(cp, tau, e_B) for cp in couplings]
        dirs = np.stack([cp.e_i for cp in couplings]) if couplings else None
        return cls(couplings=np.asarray(c_k), directions=dirs)

    @property
    def n_c2(self) -> float:
        return float(np.sum(self.couplings ** 2))


def ensemble_variance(n_c2: float, pulse: DrivePulse) -> float:
    """Variance of the accumulated phase for total coupling ``n_c2``.

    sigma^2 = n_c2 * 4 rabi^2 / (3 (rabi^2 + detuning^2))
                   * sin^2(pi * length * sqrt(rabi^2 + detuning^2))

    The rabi = detuning = 0 limit is defined as 0.
    """
    if not (math.isfinite(n_c2) and n_c2 >= 0.0):
        raise ValueError(f"n_c2 must be >= 0, got {n_c2}")
    nu2 = pulse.rabi_freq ** 2 + pulse.detuning ** 2
    if nu2 == 0.0:
        return 0.0
    sin_half = math.sin(pulse.rotation_angle / 2.0)
    return n_c2 * (4.0 * pulse.rabi_freq ** 2 / (3.0 * nu2)) * sin_half ** 2


def ensemble_signal(n_c2: float, pulse: DrivePulse) -> DeerSignal:
    """Closed-form ensemble DEER signal exp(-sigma^2 / 2)."""
    return DeerSignal(value=math.exp(-ensemble_variance(n_c2, pulse) / 2.0),
                      converged=True, est_error=0.0)


def ensemble_signal_montecarlo(bath: SpinBathSample, echo: EchoConfig,
                               pulse: DrivePulse, n_samples: int,
                               seed: int) -> DeerSignal:
    """Monte Carlo ensemble signal for a fixed bath of couplings.

    Each shot draws an independent orientation per spin and one shared
    drive phase, accumulates the summed phase, and averages cos(phase).
    Deterministic for a given seed; ``est_error`` is the standard error.
    """
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    rng = np.random.default_rng(seed)
    c_k = bath.couplings
    n_spins = c_k.size
    b = echo.e_B

    if n_spins == 0 or pulse.generalized_rabi == 0.0 or pulse.rotation_angle == 0.0:
        return DeerSignal(value=1.0, converged=True, est_error=0.0)

    r_a = rotation_matrix(drive_axis(pulse, b), pulse.rotation_angle)
    values = np.empty(n_samples)
    done = 0
    while done < n_samples:
        m = min(_MC_CHUNK, n_samples - done)
        cos_t = rng.uniform(-1.0, 1.0, (m, n_spins))
        phi = rng.uniform(0.0, 2.0 * math.pi, (m, n_spins))
        phi_rand = rng.uniform(0.0, 2.0 * math.pi, m)
        st = np.sqrt(1.0 - cos_t ** 2)
        e_k = np.stack([st * np.cos(phi), st * np.sin(phi), cos_t], axis=-1)
        w = e_k @ r_a.T
        cph = np.cos(phi_rand)[:, None, None]
        sph = np.sin(phi_rand)[:, None, None]
        rotated = w * cph + np.cross(np.broadcast_to(b, w.shape), w) * sph \
            + b * (w @ b)[..., None] * (1.0 - cph)
        phase = ((rotated - e_k) @ b) @ c_k
        values[done:done + m] = np.cos(phase)
        done += m
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(n_samples))
    return DeerSignal(value=mean, converged=True, est_error=stderr)
