"""Acceptance suite: one test per numbered criterion, each printing a
PASS/FAIL line (run with -s to see them).

Criterion 2 pins reference peak positions for the substitutional-nitrogen
system that are not reproducible from its stated Hamiltonian parameters
at the stated field; the test asserts the pinned values as specified and
is expected to fail.  See the assertion message for the quantitative
analysis.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from nvdeer import (DrivePulse, EchoConfig, FieldConfig, LineshapeModel,
                    ObservedPeaks, SampleGeometry, SensingModel, SpinBathSample,
                    chi2_surface, deer_signal_montecarlo, deer_signal_quadrature,
                    ensemble_signal, ensemble_signal_montecarlo, fit_lineshape,
                    get_preset, jacobi_eigh, kappa_constant, prefactor_at,
                    revival_detuning, sinc_squared_profile, spin_operators,
                    threshold_depth, transition_spectrum)

EB_Z = np.array([0.0, 0.0, 1.0])
ECHO = EchoConfig(tau=6.0, e_B=EB_Z)


def _report(number, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    tail = f" ({detail})" if detail else ""
    print(f"{status} criterion {number}: {description}{tail}")
    return ok


def test_criterion_01_free_electron_line():
    spec = transition_spectrum(get_preset("free-electron"),
                               FieldConfig.from_angles(200.0, 0.0))
    line = float(spec.frequencies[0])
    ok = _report(1, "free-electron line at 200 G = 560 +/- 1 MHz",
                 abs(line - 560.0) <= 1.0, f"line = {line:.3f} MHz")
    assert ok


def test_criterion_02_p1_spectrum():
    spec = transition_spectrum(get_preset("P1"),
                               FieldConfig.from_cartesian(114.0, 0.0, 163.0))
    strongest = spec.strongest(3)
    target = np.array([79.0, 188.0, 231.0])
    deviation = np.abs(strongest - target).max()
    ok = _report(2, "P1 strongest lines at (114,0,163) G = 79/188/231 +/- 5 MHz",
                 deviation <= 5.0,
                 f"computed {np.round(strongest, 1)} MHz")
    assert ok, (
        "the pinned reference peaks {79, 188, 231} MHz are not reproducible "
        "from the stated P1 Hamiltonian at B = (114, 0, 163) G: the electron "
        f"Zeeman splitting alone is ~557 MHz, the computed strong lines are "
        f"{np.round(strongest, 1)} MHz, and no eigenvalue gap of this "
        "Hamiltonian lies near 188 or 231 MHz under any intensity model "
        "(the full gap set spans 47-110 MHz and 461-669 MHz). Reproducing "
        "the reference values would require |B| ~ 43 G nearly perpendicular "
        "to the defect axis, inconsistent with the stated field."
    )


def _acceptance_grids():
    return np.arange(150.0, 261.0, 1.0), np.radians(np.arange(0.0, 91.0, 1.0))


def test_criterion_03_copper_fit_minima():
    b_grid, t_grid = _acceptance_grids()
    peaks = ObservedPeaks(frequencies=np.array([486.0, 811.0, 1104.0]),
                          uncertainties=2.0)
    grid = chi2_surface(get_preset("Cu2+"), peaks, b_grid, t_grid)
    found = [(m.b_gauss, math.degrees(m.theta_rad)) for m in grid.minima]

    def near(target_b, target_t):
        return any(abs(b - target_b) <= 3.0 and abs(t - target_t) <= 3.0
                   for b, t in found)

    ok = _report(3, "chi2 minima within +/-3 G, +/-3 deg of (192, 29) and (220, 50)",
                 near(192.0, 29.0) and near(220.0, 50.0),
                 f"nearest minima: {[(b, round(t)) for b, t in found[:3]]}")
    assert ok


def test_criterion_04_fit_roundtrip():
    b_grid, t_grid = _acceptance_grids()
    sys_cu = get_preset("Cu2+")
    spec = transition_spectrum(sys_cu, FieldConfig.from_angles(200.0, math.radians(40.0)))
    peaks = ObservedPeaks(frequencies=spec.strongest(3), uncertainties=2.0)
    grid = chi2_surface(sys_cu, peaks, b_grid, t_grid)
    best = grid.minima[0]
    at_cell = (best.b_gauss == 200.0
               and math.degrees(best.theta_rad) == pytest.approx(40.0, abs=1e-9))
    ok = _report(4, "forward-model peaks recovered with chi2 < 1e-6 at (200 G, 40 deg)",
                 best.chi2 < 1e-6 and at_cell,
                 f"chi2_min = {best.chi2:.2e} at ({best.b_gauss:.0f} G, "
                 f"{math.degrees(best.theta_rad):.0f} deg)")
    assert ok


def test_criterion_05_revival_detuning():
    pulse = DrivePulse(rabi_freq=5.0, detuning=0.0, length=0.1)
    delta_r = revival_detuning(pulse)
    formula_ok = abs(delta_r - 8.660) <= 1e-3

    grid = np.arange(-11.0, 11.0 + 1e-9, 0.05)
    values = np.array([deer_signal_quadrature(
        1.0, ECHO, DrivePulse(5.0, float(d), 0.1)).value for d in grid])
    interior = np.arange(1, len(grid) - 1)
    is_max = (values[interior] >= values[interior - 1]) & \
             (values[interior] >= values[interior + 1])
    maxima = grid[interior[is_max]]
    near_plus = np.abs(maxima - delta_r).min() <= 0.3
    near_minus = np.abs(maxima + delta_r).min() <= 0.3
    ok = _report(5, "revival detuning 8.660 MHz and spectrum maxima at +/- Delta_R",
                 formula_ok and near_plus and near_minus,
                 f"Delta_R = {delta_r:.4f} MHz")
    assert ok


def test_criterion_06_single_vs_ensemble_phenomenology():
    rabi = 5.0
    period = 1.0 / rabi
    lengths = np.linspace(0.0, period, 101)
    single = np.array([deer_signal_quadrature(
        10.0, ECHO, DrivePulse(rabi, 0.0, float(t))).value for t in lengths])
    d = np.diff(single)
    interior_extrema = int(np.sum(d[1:] * d[:-1] < 0))

    to_pi = np.linspace(0.0, 0.5 / rabi, 101)
    ens = np.array([ensemble_signal(100.0, DrivePulse(rabi, 0.0, float(t))).value
                    for t in to_pi])
    monotone = bool(np.all(np.diff(ens) < 0.0))
    ok = _report(6, "c=10 single-spin curve oscillates; n_c2=100 ensemble is monotone",
                 interior_extrema >= 2 and monotone,
                 f"{interior_extrema} interior extrema; ensemble monotone = {monotone}")
    assert ok


def test_criterion_07_quadrature_monte_carlo_agreement():
    rng = np.random.default_rng(20250810)
    worst = 0.0
    all_ok = True
    for k in range(20):
        c = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        pulse = DrivePulse(rabi_freq=float(rng.uniform(0.5, 8.0)),
                           detuning=float(rng.uniform(-8.0, 8.0)),
                           length=float(rng.uniform(0.02, 0.5)))
        q = deer_signal_quadrature(c, ECHO, pulse)
        m = deer_signal_montecarlo(c, ECHO, pulse, 1_000_000, seed=1000 + k)
        pull = abs(q.value - m.value) / m.est_error if m.est_error > 0 else 0.0
        worst = max(worst, pull)
        all_ok &= pull <= 3.0
    ok = _report(7, "20 random parameter sets: |quadrature - MC(1e6)| <= 3 SE",
                 all_ok, f"worst pull = {worst:.2f} SE")
    assert ok


def test_criterion_08_central_limit_convergence():
    n_spins, n_c2 = 100, 9.0
    bath = SpinBathSample(couplings=np.full(n_spins, math.sqrt(n_c2 / n_spins)))
    pulse = DrivePulse(rabi_freq=5.0, detuning=0.0, length=0.1)
    mc = ensemble_signal_montecarlo(bath, ECHO, pulse, 200_000, seed=88)
    closed = math.exp(-2.0 * n_c2 / 3.0)
    ok = _report(8, "100-spin MC at n_c2=9 matches exp(-6) within 0.02",
                 abs(mc.value - closed) <= 0.02,
                 f"|{mc.value:.5f} - {closed:.5f}| = {abs(mc.value - closed):.2e}")
    assert ok


def test_criterion_09_kappa_and_threshold_depth():
    kappa = kappa_constant(6.0)
    kappa_ok = abs(kappa - 9.9 ** 3) <= 0.02 * 9.9 ** 3
    c_ok = abs(prefactor_at(9.9, SensingModel(kappa=kappa)) - 1.0) <= 0.02
    geom = SampleGeometry(nv_depth=50.0, spin_density=0.6)
    model = SensingModel(kappa=kappa)
    depth = threshold_depth(geom, model)
    analytic = (0.6 * kappa ** 2 * math.pi / 6.0) ** (1.0 / 3.0)
    depth_ok = abs(depth - 67.0) <= 1.0 and abs(depth - analytic) <= 0.1
    ok = _report(9, "kappa(6 us) = (9.9 nm)^3 +/- 2%, c(9.9 nm) = 1, "
                    "threshold depth 67 +/- 1 nm",
                 kappa_ok and c_ok and depth_ok,
                 f"kappa = ({kappa ** (1/3):.3f} nm)^3, depth = {depth:.2f} nm")
    assert ok


def test_criterion_10_eigensolver_battery():
    rng = np.random.default_rng(314159)
    worst = 0.0
    count = 0
    while count < 500:
        n = int(rng.integers(2, 17))
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = (x + x.conj().T) / 2.0
        w, v = jacobi_eigh(h)
        worst = max(worst, np.linalg.norm(h @ v - v * w) / np.linalg.norm(h))
        count += 1
    solver_ok = worst <= 1e-8

    algebra_ok = True
    for s in (0.5, 1.0, 1.5):
        sx, sy, sz = spin_operators(s)
        algebra_ok &= np.abs(sx @ sy - sy @ sx - 1j * sz).max() <= 1e-12
        casimir = sx @ sx + sy @ sy + sz @ sz
        algebra_ok &= np.abs(casimir - s * (s + 1) * np.eye(sx.shape[0])).max() <= 1e-12
    ok = _report(10, "500 random Hermitian solves residual <= 1e-8; spin algebra "
                     "exact to 1e-12",
                 solver_ok and algebra_ok, f"worst residual = {worst:.2e}")
    assert ok


def test_criterion_11_lineshape_roundtrip():
    truth = LineshapeModel(kind="lorentzian", center=495.0, amplitude=0.3,
                           width=1.0, baseline=1.0)
    freq = np.linspace(488.0, 502.0, 80)
    data = np.stack([freq, truth(freq), np.full_like(freq, 0.01)], axis=1)
    fit = fit_lineshape(data, "lorentzian")
    fwhm_ok = abs(fit.model.fwhm() - 2.0) <= 0.01

    p0 = sinc_squared_profile(0.0, 1.12)
    null = sinc_squared_profile(math.sqrt(3.0) * 1.12, 1.12)
    profile_ok = abs(p0 - 1.0) <= 1e-12 and null <= 1e-30
    ok = _report(11, "Lorentzian FWHM 2.0 MHz recovered +/- 0.01; sinc^2 anchors exact",
                 fwhm_ok and profile_ok,
                 f"fitted FWHM = {fit.model.fwhm():.4f} MHz, P(0) - 1 = {p0 - 1:.1e}")
    assert ok


def test_criterion_12_cli_determinism(tmp_path):
    configs = {
        "deer-spectrum": {"coupling": 1.0, "rabi_mhz": 5.0, "pulse_us": 0.1,
                          "detuning_mhz": {"start": -10.0, "stop": 10.0, "num": 21},
                          "quadrature": {"n_phi_rand": 8, "n_cos_theta1": 8,
                                         "n_phi1": 8}},
        "deer-rabi": {"n_c2": 2.0, "rabi_mhz": 2.2, "detuning_mhz": 0.0,
                      "t_p_us": {"start": 0.0, "stop": 0.45, "num": 16}},
        "epr": {"system": "Cu2+", "field": {"B_gauss": 192.0, "theta_deg": 29.0}},
        "fit": {"system": "Cu2+",
                "peaks": [{"frequency_mhz": 486.0, "uncertainty_mhz": 2.0}],
                "b_gauss": [191.0, 192.0, 193.0],
                "theta_deg": [28.0, 29.0, 30.0]},
        "volume": {"tau_us": 6.0, "nv_depth_nm": 70.0, "spin_density_per_nm3": 0.6},
    }
    modes = {"deer-spectrum": ["--mode", "single"], "deer-rabi": ["--mode", "ensemble"]}
    all_ok = True
    for command, payload in configs.items():
        cfg = tmp_path / f"{command}.json"
        cfg.write_text(json.dumps(payload))
        outputs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{command}-{rep}.out"
            args = [sys.executable, "-m", "nvdeer", command, "--config", str(cfg),
                    "--out", str(out), "--seed", "7"] + modes.get(command, [])
            res = subprocess.run(args, capture_output=True, text=True)
            assert res.returncode == 0, f"{command}: {res.stderr}"
            blob = out.read_bytes()
            if command == "fit":
                blob += (tmp_path / f"{command}-{rep}.out.minima.json").read_bytes()
            outputs.append(blob)
        all_ok &= outputs[0] == outputs[1]
    ok = _report(12, "every subcommand is byte-identical across reruns", all_ok)
    assert ok
