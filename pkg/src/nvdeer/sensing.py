"""Sensing-volume estimation for a sensor below a spin-bearing film.

The per-spin prefactor falls off as c(r) = kappa / r^3, so the summed
n*cbar^2 from a uniform spin density converges and defines a finite
sensing region.  For a sensor at depth h below an infinite film the
accumulated total has the closed form rho * kappa^2 * pi / (6 h^3),
used here as the oracle for the shell quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .constants import AVOGADRO, CODATA, NM, US

R_MIN_NM = 0.3          # interatomic floor guarding the 1/r^6 divergence
HALF_SPACE = "half_space_above_surface"
SPHERICAL_CAP = "spherical_cap"
_RADIUS_CAP_NM = 1e7    # beyond this the radius is reported as open-ended


@dataclass(frozen=True)
class SampleGeometry:
    """Sensor depth below the surface, film thickness, and spin density.

    ``film_thickness`` may be ``math.inf`` for an effectively unbounded
    film; ``spin_density`` in spins / nm^3.
    """

    nv_depth: float
    spin_density: float
    film_thickness: float = math.inf

    def __post_init__(self):
        if not (math.isfinite(self.nv_depth) and self.nv_depth > 0.0):
            raise ValueError(f"nv_depth must be positive, got {self.nv_depth}")
        if not (self.spin_density >= 0.0 and math.isfinite(self.spin_density)):
            raise ValueError(f"spin_density must be >= 0, got {self.spin_density}")
        if math.isnan(self.film_thickness) or self.film_thickness <= 0.0:
            raise ValueError(f"film_thickness must be positive, got {self.film_thickness}")


@dataclass(frozen=True)
class SensingModel:
    """Distance scale kappa [nm^3], detectability threshold on n*cbar^2,
    and the region shape used for accumulation."""

    kappa: float
    threshold: float = 1.0
    region: str = HALF_SPACE
    cap_radius: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0.0):
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not (math.isfinite(self.threshold) and self.threshold > 0.0):
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.region not in (HALF_SPACE, SPHERICAL_CAP):
            raise ValueError(f"unknown region kind {self.region!r}")
        if self.region == SPHERICAL_CAP and not (self.cap_radius and self.cap_radius > 0.0):
            raise ValueError("spherical_cap region requires a positive cap_radius")


def kappa_constant(tau: float) -> float:
    """Distance-scale constant kappa = mu0 gamma_e^2 hbar tau / (8 pi) in nm^3.

    Linear in the echo time ``tau`` [us].  Note the gamma_e^2 * hbar
    combination: it is the dimensionally consistent form of the
    prefactor scale (a volume), matching c(r) = gamma_e tau lambda(r)
    with the angular factors set to unity.
    """
    if not (math.isfinite(tau) and tau > 0.0):
        raise ValueError(f"tau must be positive, got {tau}")
    kappa_m3 = CODATA.mu0 * CODATA.gamma_e ** 2 * CODATA.hbar * (tau * US) / (8.0 * math.pi)
    return kappa_m3 / NM ** 3


def prefactor_at(r: float, model: SensingModel) -> float:
    """Per-spin prefactor magnitude c(r) = kappa / r^3 at distance ``r`` [nm].

    The angular factor |e_B . e_i| is approximated as unity.
    """
    if not (math.isfinite(r) and r > 0.0):
        raise ValueError(f"r must be positive, got {r}")
    return model.kappa / r ** 3


def _shell_fraction(r: float, h: float, thickness: float) -> float:
    # solid-angle fraction of the radius-r shell lying inside the film
    if r <= h:
        return 0.0
    top = h + thickness
    return (min(r, top) - h) / (2.0 * r)


def _cumulative_nc2(geom: SampleGeometry, model: SensingModel, r_max: float) -> float:
    h = geom.nv_depth
    lo = max(h, R_MIN_NM)
    if r_max <= lo:
        return 0.0
    rho_k2 = geom.spin_density * model.kappa ** 2

    # substituting u = 1/r maps the shell integral onto compact intervals
    # where the integrand is piecewise polynomial in u, so the adaptive
    # quadrature is exact regardless of how far the region extends
    def integrand(u):
        if u <= 0.0:
            return 0.0
        r = 1.0 / u
        return 4.0 * math.pi * _shell_fraction(r, h, geom.film_thickness) * u * u

    top = h + geom.film_thickness
    u_hi = 1.0 / lo
    u_lo = 0.0 if math.isinf(r_max) else 1.0 / r_max
    edges = [u_lo]
    if math.isfinite(top) and lo < top < r_max:
        edges.append(1.0 / top)
    edges.append(u_hi)
    val = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        piece, _ = quad(integrand, a, b, limit=100, epsabs=0.0, epsrel=1e-11)
        val += piece
    return rho_k2 * val


def accumulate_nc2(geom: SampleGeometry, model: SensingModel) -> float:
    """Total n*cbar^2 accumulated over the model's region by shell quadrature.

    For the half-space region this matches the closed form
    rho * kappa^2 * pi / (6 h^3) to much better than 0.1 %; the
    spherical-cap region integrates only out to ``model.cap_radius``.
    Radii below the 0.3 nm interatomic floor are excluded.
    """
    if geom.spin_density == 0.0:
        return 0.0
    r_max = model.cap_radius if model.region == SPHERICAL_CAP else math.inf
    return _cumulative_nc2(geom, model, r_max)


def halfspace_nc2_analytic(rho: float, kappa: float, depth: float) -> float:
    """Closed-form total for the infinite half-space: rho kappa^2 pi / (6 h^3)."""
    return rho * kappa ** 2 * math.pi / (6.0 * depth ** 3)


def threshold_depth(geom: SampleGeometry, model: SensingModel,
                    resolution: float = 0.01) -> float:
    """Depth at which the accumulated n*cbar^2 equals the model threshold.

    Solved by bisection on the shell quadrature; shallower sensors
    exceed the threshold, deeper ones fall below it.
    """
    if geom.spin_density <= 0.0:
        raise ValueError("threshold depth undefined for zero spin density")

    def total_at(h):
        g = SampleGeometry(nv_depth=h, spin_density=geom.spin_density,
                           film_thickness=geom.film_thickness)
        return accumulate_nc2(g, model)

    lo, hi = R_MIN_NM, 1.0
    if total_at(lo) < model.threshold:
        raise ValueError("signal is below threshold even at the interatomic floor")
    while total_at(hi) > model.threshold:
        lo, hi = hi, hi * 2.0
        if hi > _RADIUS_CAP_NM:
            raise ValueError("threshold depth exceeds the supported range")
    while hi - lo > resolution:
        mid = (lo + hi) / 2.0
        if total_at(mid) > model.threshold:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


@dataclass(frozen=True)
class SensingRadius:
    """Radius enclosing a requested fraction of the total signal."""

    radius: float        # nm; inf when open-ended
    open_ended: bool
    detectable: bool     # total n*cbar^2 above the model threshold
    total_nc2: float


def detectability_radius(geom: SampleGeometry, model: SensingModel,
                         signal_fraction: float) -> SensingRadius:
    """Radius of the sensor-centered sphere (intersected with the film)
    containing ``signal_fraction`` of the total n*cbar^2.

    Bisection to 1 nm resolution.  The result is flagged not detectable
    when the total falls below the model threshold, and open-ended when
    the requested fraction is not reached within the supported range.
    """
    if not (0.0 < signal_fraction < 1.0):
        raise ValueError(f"signal_fraction must be in (0, 1), got {signal_fraction}")
    total = _cumulative_nc2(geom, model, math.inf)
    detectable = total >= model.threshold
    if total == 0.0:
        return SensingRadius(radius=math.inf, open_ended=True,
                             detectable=False, total_nc2=0.0)
    target = signal_fraction * total
    lo = geom.nv_depth
    hi = 2.0 * lo
    while _cumulative_nc2(geom, model, hi) < target:
        lo, hi = hi, hi * 2.0
        if hi > _RADIUS_CAP_NM:
            return SensingRadius(radius=math.inf, open_ended=True,
                                 detectable=detectable, total_nc2=total)
    while hi - lo > 1.0:
        mid = (lo + hi) / 2.0
        if _cumulative_nc2(geom, model, mid) < target:
            lo = mid
        else:
            hi = mid
    return SensingRadius(radius=(lo + hi) / 2.0, open_ended=False,
                         detectable=detectable, total_nc2=total)


def density_estimate(amount_mol: float, volume_mm3: float) -> float:
    """Spin number density [nm^-3] from an amount of substance and a volume."""
    if not (math.isfinite(amount_mol) and amount_mol > 0.0):
        raise ValueError(f"amount must be positive, got {amount_mol}")
    if not (math.isfinite(volume_mm3) and volume_mm3 > 0.0):
        raise ValueError(f"volume must be positive, got {volume_mm3}")
    return amount_mol * AVOGADRO / (volume_mm3 * 1e18)
