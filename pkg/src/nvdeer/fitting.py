"""Lineshape models, lineshape fitting, and the (B, theta) chi-square grid fit.

The resonance-dip models are a sinc-squared profile (resonant pi-pulse
driving) and a Lorentzian.  The field fit scans a raw (B, theta) grid,
scoring each cell by the weighted squared distance between simulated
transition lines and the observed resonances, and extracts local minima
with delta-chi-square = 1 uncertainty intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .hamiltonian import (SpinSystem, _assemble_lines, _operator_stack,
                          build_hamiltonians)
from .linalg import jacobi_eigh

LINESHAPE_KINDS = ("sinc_squared", "lorentzian")
CHI2_REL_TOL = 1e-6
_MAX_FIT_ITER = 4000


def sinc_squared_profile(detuning, rabi_freq: float):
    """Transition probability (pi^2/4) sinc^2(pi sqrt(rabi^2 + delta^2) / (2 rabi)).

    Unity at zero detuning, first null at detuning = sqrt(3) * rabi.
    """
    if not (math.isfinite(rabi_freq) and rabi_freq > 0.0):
        raise ValueError(f"rabi_freq must be positive, got {rabi_freq}")
    delta = np.asarray(detuning, dtype=float)
    arg = np.sqrt(rabi_freq ** 2 + delta ** 2) / (2.0 * rabi_freq)
    # np.sinc(x) = sin(pi x)/(pi x), so pass the argument divided by pi
    out = (np.pi ** 2 / 4.0) * np.sinc(arg) ** 2
    return float(out) if np.isscalar(detuning) else out


def lorentzian_profile(detuning, hwhm: float):
    """Unit-peak Lorentzian 1 / (1 + (delta/hwhm)^2); FWHM = 2*hwhm."""
    if not (math.isfinite(hwhm) and hwhm > 0.0):
        raise ValueError(f"hwhm must be positive, got {hwhm}")
    delta = np.asarray(detuning, dtype=float)
    out = 1.0 / (1.0 + (delta / hwhm) ** 2)
    return float(out) if np.isscalar(detuning) else out


@dataclass(frozen=True)
class LineshapeModel:
    """Resonance-dip model: signal(f) = baseline - amplitude * profile(f - center).

    ``width`` is the drive Rabi frequency for the sinc-squared profile
    and the half-width at half maximum for the Lorentzian, both in MHz.
    """

    kind: str
    center: float
    amplitude: float
    width: float
    baseline: float

    def __post_init__(self):
        if self.kind not in LINESHAPE_KINDS:
            raise ValueError(f"kind must be one of {LINESHAPE_KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.width) and self.width > 0.0):
            raise ValueError(f"width must be positive, got {self.width}")

    def profile(self, freq):
        delta = np.asarray(freq, dtype=float) - self.center
        if self.kind == "lorentzian":
            return lorentzian_profile(delta, self.width)
        return sinc_squared_profile(delta, self.width)

    def __call__(self, freq):
        return self.baseline - self.amplitude * self.profile(freq)

    def fwhm(self) -> float:
        """Full width at half maximum of the dip [MHz]."""
        if self.kind == "lorentzian":
            return 2.0 * self.width
        # profile is monotone on [0, sqrt(3)*width] (first null), bisect P = 1/2
        lo, hi = 0.0, math.sqrt(3.0) * self.width
        for _ in range(200):
            mid = (lo + hi) / 2.0
            if sinc_squared_profile(mid, self.width) > 0.5:
                lo = mid
            else:
                hi = mid
        return lo + hi


@dataclass(frozen=True)
class LineshapeFit:
    """Fitted model plus goodness and status flags."""

    model: LineshapeModel
    reduced_chi2: float
    converged: bool
    degenerate: bool


def _parse_fit_data(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("data must be rows of (frequency, signal, error)")
    if arr.shape[0] < 5:
        raise ValueError("need at least 5 data points")
    if not np.all(np.isfinite(arr)):
        raise ValueError("data must be finite")
    if np.any(arr[:, 2] <= 0.0):
        raise ValueError("errors must be positive")
    return arr[:, 0], arr[:, 1], arr[:, 2]


def _linear_baseline_amplitude(profile_vals, signal, weights):
    # weighted least squares for (baseline, amplitude) at fixed center/width
    a11 = weights.sum()
    a12 = -(weights * profile_vals).sum()
    a22 = (weights * profile_vals ** 2).sum()
    b1 = (weights * signal).sum()
    b2 = -(weights * signal * profile_vals).sum()
    det = a11 * a22 - a12 * a12
    if det <= 0.0 or not math.isfinite(det):
        return float(b1 / a11), 0.0
    baseline = (a22 * b1 - a12 * b2) / det
    amplitude = (a11 * b2 - a12 * b1) / det
    return float(baseline), float(amplitude)


def fit_lineshape(data, model_kind: str) -> LineshapeFit:
    """Weighted least-squares fit of a dip lineshape to (freq, signal, error) rows.

    Seeds (center, width) on a coarse grid with the linear subproblem for
    (baseline, amplitude) solved exactly, then refines all four
    parameters with Nelder-Mead to 1e-6 relative on chi-square.
    Non-convergence and degenerate (flat-data) fits are flagged, with
    the best point still returned.
    """
    if model_kind not in LINESHAPE_KINDS:
        raise ValueError(f"model_kind must be one of {LINESHAPE_KINDS}")
    freq, signal, err = _parse_fit_data(data)
    weights = 1.0 / err ** 2
    span = freq.max() - freq.min()
    if span <= 0.0:
        raise ValueError("frequency values must not be all identical")

    def profile(delta, width):
        if model_kind == "lorentzian":
            return lorentzian_profile(delta, width)
        return sinc_squared_profile(delta, width)

    def chi2_at(center, width):
        p = profile(freq - center, width)
        baseline, amplitude = _linear_baseline_amplitude(p, signal, weights)
        resid = signal - (baseline - amplitude * p)
        return float((weights * resid ** 2).sum()), baseline, amplitude

    centers = np.linspace(freq.min(), freq.max(), 41)
    widths = np.geomspace(max(span / 200.0, 1e-6), span, 25)
    best = None
    for c0 in centers:
        for w0 in widths:
            chi2, b0, a0 = chi2_at(c0, w0)
            if best is None or chi2 < best[0]:
                best = (chi2, c0, w0, b0, a0)
    _, c0, w0, b0, a0 = best

    def objective(x):
        center, log_w, amplitude, baseline = x
        p = profile(freq - center, math.exp(log_w))
        resid = signal - (baseline - amplitude * p)
        return float((weights * resid ** 2).sum())

    x0 = np.array([c0, math.log(w0), a0, b0])
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": CHI2_REL_TOL * max(best[0], 1e-12),
                            "maxiter": _MAX_FIT_ITER, "maxfev": _MAX_FIT_ITER})
    center, log_w, amplitude, baseline = res.x
    chi2 = float(res.fun)
    dof = max(len(freq) - 4, 1)
    signal_spread = float(signal.max() - signal.min())
    degenerate = abs(amplitude) <= 1e-9 * max(1.0, abs(baseline)) or signal_spread == 0.0
    model = LineshapeModel(kind=model_kind, center=float(center),
                           amplitude=float(amplitude), width=float(math.exp(log_w)),
                           baseline=float(baseline))
    return LineshapeFit(model=model, reduced_chi2=chi2 / dof,
                        converged=bool(res.success), degenerate=degenerate)


@dataclass(frozen=True, eq=False)
class ObservedPeaks:
    """Observed resonance frequencies with 1-sigma uncertainties [MHz]."""

    frequencies: np.ndarray
    uncertainties: np.ndarray

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        u = np.asarray(self.uncertainties, dtype=float)
        if u.ndim == 0:
            u = np.full(f.shape, float(u))
        if f.ndim != 1 or f.size < 1:
            raise ValueError("need at least one observed peak")
        if u.shape != f.shape:
            raise ValueError("uncertainties must match frequencies in length")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(u))):
            raise ValueError("peaks must be finite")
        if np.any(u <= 0.0):
            raise ValueError("uncertainties must be positive")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "uncertainties", u)


@dataclass(frozen=True)
class AxisInterval:
    """Parameter interval where chi2 <= chi2_min + 1 along one grid axis."""

    lower: float
    upper: float
    open_lower: bool
    open_upper: bool

    @property
    def half_width(self) -> float:
        return (self.upper - self.lower) / 2.0

    @property
    def is_open(self) -> bool:
        return self.open_lower or self.open_upper


@dataclass(frozen=True)
class FitMinimum:
    """One grid-local minimum of the chi-square surface."""

    b_gauss: float
    theta_rad: float
    chi2: float
    index: tuple[int, int]
    b_interval: AxisInterval
    theta_interval: AxisInterval


@dataclass(frozen=True, eq=False)
class FitGrid:
    """Chi-square values over a (B, theta) grid with its local minima."""

    b_values: np.ndarray       # Gauss, ascending
    theta_values: np.ndarray   # radians, ascending
    chi2: np.ndarray           # shape (len(b_values), len(theta_values))
    minima: tuple[FitMinimum, ...]

    def to_csv(self, fileobj) -> None:
        """Write rows of B [G], theta [rad], chi2 for external contouring."""
        fileobj.write("b_gauss,theta_rad,chi2\n")
        for i, b in enumerate(self.b_values):
            for j, t in enumerate(self.theta_values):
                fileobj.write(f"{b!r},{t!r},{self.chi2[i, j]!r}\n")


def _matched_chi2(sim_freqs, obs_freqs, obs_sigma) -> float:
    # globally nearest greedy assignment without replacement; ties broken
    # by (observed, simulated) frequency order so the result is
    # independent of input ordering
    sim_left = sorted(float(f) for f in sim_freqs)
    pairs_left = sorted(range(len(obs_freqs)), key=lambda k: float(obs_freqs[k]))
    total = 0.0
    while pairs_left:
        best = None
        for oi in pairs_left:
            fo = float(obs_freqs[oi])
            for si, fs in enumerate(sim_left):
                key = (abs(fs - fo), fo, fs)
                if best is None or key < best[0]:
                    best = (key, oi, si)
        _, oi, si = best
        fs = sim_left.pop(si)
        fo = float(obs_freqs[oi])
        total += (fs - fo) ** 2 / float(obs_sigma[oi]) ** 2
        pairs_left.remove(oi)
    return total


def chi2_surface(sys: SpinSystem, peaks: ObservedPeaks, b_grid, theta_grid,
                 intensity_floor: float = 1e-3, merge_tol: float = 0.1) -> FitGrid:
    """Chi-square of simulated vs observed peak positions over a (B, theta) grid.

    For every cell the transition spectrum is computed and each observed
    peak is matched to the nearest unused simulated line above the
    intensity floor; cells with fewer usable lines than observed peaks
    get chi2 = +inf.  Reported minima are less than or equal to all of
    their existing grid neighbors, sorted by chi2, each with linearly
    interpolated delta-chi2 = 1 intervals.
    """
    b_values = np.asarray(b_grid, dtype=float)
    theta_values = np.asarray(theta_grid, dtype=float)
    for name, arr in (("b_grid", b_values), ("theta_grid", theta_values)):
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"{name} must be a non-empty 1D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} must be finite")
        if arr.size > 1 and np.any(np.diff(arr) <= 0):
            raise ValueError(f"{name} must be strictly ascending")

    bb, tt = np.meshgrid(b_values, theta_values, indexing="ij")
    st, ct = np.sin(tt).ravel(), np.cos(tt).ravel()
    b_vecs = np.stack([bb.ravel() * st, np.zeros(bb.size), bb.ravel() * ct], axis=-1)
    h = build_hamiltonians(sys, b_vecs)
    w, v = jacobi_eigh(h)

    s_ops, _ = _operator_stack(sys)
    drive = ct[:, None, None] * s_ops[0] - st[:, None, None] * s_ops[2]
    mel = np.einsum("mji,mjk,mkl->mil", v.conj(), drive, v)
    dim = h.shape[-1]
    iu, ju = np.triu_indices(dim, 1)
    freqs = w[:, ju] - w[:, iu]
    ints = np.abs(mel[:, ju, iu]) ** 2

    n_obs = peaks.frequencies.size
    chi2_flat = np.empty(bb.size)
    for m in range(bb.size):
        lines = _assemble_lines(freqs[m], ints[m], intensity_floor, merge_tol)
        if lines.frequencies.size < n_obs:
            chi2_flat[m] = np.inf
        else:
            chi2_flat[m] = _matched_chi2(lines.frequencies, peaks.frequencies,
                                         peaks.uncertainties)
    chi2 = chi2_flat.reshape(bb.shape)

    grid = FitGrid(b_values=b_values, theta_values=theta_values, chi2=chi2, minima=())
    minima = []
    ni, nj = chi2.shape
    for i in range(ni):
        for j in range(nj):
            val = chi2[i, j]
            if not np.isfinite(val):
                continue
            window = chi2[max(0, i - 1):i + 2, max(0, j - 1):j + 2]
            if val <= window.min():
                b_int, t_int = uncertainty_intervals(grid, (i, j))
                minima.append(FitMinimum(b_gauss=float(b_values[i]),
                                         theta_rad=float(theta_values[j]),
                                         chi2=float(val), index=(i, j),
                                         b_interval=b_int, theta_interval=t_int))
    minima.sort(key=lambda m: m.chi2)
    return FitGrid(b_values=b_values, theta_values=theta_values, chi2=chi2,
                   minima=tuple(minima))


def _axis_interval(values, chi2_line, j0: int) -> AxisInterval:
    target = chi2_line[j0] + 1.0
    upper, open_upper = float(values[-1]), True
    for j in range(j0 + 1, len(values)):
        if chi2_line[j] > target:
            prev, cur = chi2_line[j - 1], chi2_line[j]
            if not np.isfinite(cur):
                upper, open_upper = float(values[j - 1]), False
            else:
                frac = (target - prev) / (cur - prev)
                upper = float(values[j - 1] + frac * (values[j] - values[j - 1]))
                open_upper = False
            break
    lower, open_lower = float(values[0]), True
    for j in range(j0 - 1, -1, -1):
        if chi2_line[j] > target:
            prev, cur = chi2_line[j + 1], chi2_line[j]
            if not np.isfinite(cur):
                lower, open_lower = float(values[j + 1]), False
            else:
                frac = (target - prev) / (cur - prev)
                lower = float(values[j + 1] + frac * (values[j] - values[j + 1]))
                open_lower = False
            break
    return AxisInterval(lower=lower, upper=upper,
                        open_lower=open_lower, open_upper=open_upper)


def uncertainty_intervals(grid: FitGrid, minimum_index: tuple[int, int]):
    """Delta-chi2 = 1 intervals along each axis through a grid minimum.

    Returns (b_interval, theta_interval); an interval that runs off the
    grid edge before crossing chi2_min + 1 is flagged open on that side.
    """
    i0, j0 = minimum_index
    if not np.isfinite(grid.chi2[i0, j0]):
        raise ValueError("minimum must have finite chi2")
    b_int = _axis_interval(grid.b_values, grid.chi2[:, j0], i0)
    t_int = _axis_interval(grid.theta_values, grid.chi2[i0, :], j0)
    return b_int, t_int
