import math

import mpmath as mp
import numpy as np
import pytest

from nvdeer import (DrivePulse, EchoConfig, QuadratureSpec, accumulated_phase,
                    deer_rabi, deer_signal_montecarlo, deer_signal_quadrature,
                    deer_spectrum, revival_detuning, unit_vector)

EB_Z = np.array([0.0, 0.0, 1.0])


def echo(e_B=EB_Z, tau=6.0):
    return EchoConfig(tau=tau, e_B=e_B)


def pi_pulse(rabi=5.0, detuning=0.0):
    return DrivePulse(rabi_freq=rabi, detuning=detuning, length=0.5 / rabi)


# ------------------------------------------------------------ accumulated phase

def _mp_rotate(v, axis, angle):
    # independent high-precision oracle: quaternion conjugation in mpmath
    half = angle / 2
    w = mp.cos(half)
    s = mp.sin(half)
    qx, qy, qz = s * axis[0], s * axis[1], s * axis[2]
    vx, vy, vz = v
    # t = 2 q x v
    tx = 2 * (qy * vz - qz * vy)
    ty = 2 * (qz * vx - qx * vz)
    tz = 2 * (qx * vy - qy * vx)
    return (vx + w * tx + qy * tz - qz * ty,
            vy + w * ty + qz * tx - qx * tz,
            vz + w * tz + qx * ty - qy * tx)


def _mp_phase(c, e_B, e_1, rabi, detuning, length, phi_rand):
    mp.mp.dps = 50
    nu = mp.sqrt(mp.mpf(rabi) ** 2 + mp.mpf(detuning) ** 2)
    alpha = 2 * mp.pi * mp.mpf(length) * nu
    b = [mp.mpf(x) for x in e_B]
    # fixed perpendicular matching the library's frame convention
    ref = [mp.mpf(1), mp.mpf(0), mp.mpf(0)] if abs(e_B[0]) < 0.9 else \
        [mp.mpf(0), mp.mpf(1), mp.mpf(0)]
    dot = sum(r * bb for r, bb in zip(ref, b))
    u = [r - dot * bb for r, bb in zip(ref, b)]
    un = mp.sqrt(sum(x * x for x in u))
    u = [x / un for x in u]
    axis = [(mp.mpf(rabi) * ux + mp.mpf(detuning) * bx) / nu for ux, bx in zip(u, b)]
    e1 = [mp.mpf(x) for x in e_1]
    rotated = _mp_rotate(e1, axis, alpha)
    rotated = _mp_rotate(rotated, b, mp.mpf(phi_rand))
    return float(mp.mpf(c) * sum((r - e) * bb for r, e, bb in zip(rotated, e1, b)))


class TestAccumulatedPhase:
    def test_pure_detuning_gives_zero(self):
        pulse = DrivePulse(rabi_freq=0.0, detuning=3.0, length=0.37)
        rng = np.random.default_rng(0)
        for _ in range(20):
            e1 = unit_vector(rng.normal(size=3))
            phi_rand = rng.uniform(0, 2 * math.pi)
            assert abs(accumulated_phase(2.0, EB_Z, e1, pulse, phi_rand)) < 1e-12

    def test_zero_length_gives_zero(self):
        pulse = DrivePulse(rabi_freq=5.0, detuning=1.0, length=0.0)
        assert accumulated_phase(3.0, EB_Z, [1, 0, 0], pulse, 0.4) == 0.0

    def test_matches_high_precision_oracle(self):
        # c = 5.8, resonant pi pulse, grid of orientations and drive phases
        pulse = pi_pulse(rabi=1.12)
        c = 5.8
        for e_B in (EB_Z, unit_vector([1.0, 2.0, -0.5])):
            for cos_t in (-0.9, -0.3, 0.2, 0.8):
                for phi1 in (0.0, 1.1, 3.9):
                    for phi_rand in (0.0, 0.7, 2.9, 5.5):
                        st = math.sqrt(1 - cos_t ** 2)
                        e1 = np.array([st * math.cos(phi1), st * math.sin(phi1), cos_t])
                        got = accumulated_phase(c, e_B, e1, pulse, phi_rand)
                        want = _mp_phase(c, e_B, e1, 1.12, 0.0, pulse.length, phi_rand)
                        assert abs(got - want) < 1e-12


# ----------------------------------------------------------------- quadrature

class TestQuadrature:
    def test_zero_coupling_exact_one(self):
        sig = deer_signal_quadrature(0.0, echo(), pi_pulse())
        assert sig.value == 1.0 and sig.est_error == 0.0 and sig.converged

    def test_zero_length_exact_one(self):
        pulse = DrivePulse(rabi_freq=5.0, detuning=2.0, length=0.0)
        assert deer_signal_quadrature(4.0, echo(), pulse).value == 1.0

    def test_matches_monte_carlo(self):
        for c, rabi, det, tp, seed in [(3.0, 5.0, 0.0, 0.1, 11),
                                       (1.0, 5.0, 0.0, 0.1, 12),
                                       (0.5, 2.0, 4.0, 0.3, 13)]:
            pulse = DrivePulse(rabi_freq=rabi, detuning=det, length=tp)
            q = deer_signal_quadrature(c, echo(), pulse)
            m = deer_signal_montecarlo(c, echo(), pulse, 200_000, seed)
            assert abs(q.value - m.value) <= 3.0 * m.est_error + 1e-12

    def test_range(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            pulse = DrivePulse(rabi_freq=rng.uniform(0, 8), detuning=rng.uniform(-8, 8),
                               length=rng.uniform(0, 0.6))
            sig = deer_signal_quadrature(rng.uniform(0.1, 10.0), echo(), pulse)
            assert -1.0 <= sig.value <= 1.0

    def test_even_in_detuning(self):
        for delta in (0.5, 2.0, 7.7):
            p_plus = DrivePulse(rabi_freq=4.0, detuning=delta, length=0.13)
            p_minus = DrivePulse(rabi_freq=4.0, detuning=-delta, length=0.13)
            f_plus = deer_signal_quadrature(2.5, echo(), p_plus)
            f_minus = deer_signal_quadrature(2.5, echo(), p_minus)
            assert abs(f_plus.value - f_minus.value) <= 2 * max(f_plus.est_error, 1e-12)

    def test_periodic_in_length(self):
        rabi, det = 3.0, 4.0
        period = 1.0 / math.hypot(rabi, det)
        for tp in (0.04, 0.11):
            f1 = deer_signal_quadrature(2.0, echo(), DrivePulse(rabi, det, tp))
            f2 = deer_signal_quadrature(2.0, echo(), DrivePulse(rabi, det, tp + period))
            assert abs(f1.value - f2.value) <= 2 * max(f1.est_error, 1e-10)

    def test_doubling_within_reported_error(self):
        # standard battery: convergence estimate bounds the change on doubling
        base = QuadratureSpec(8, 8, 8)
        for c, rabi, det, tp in [(1.0, 5.0, 0.0, 0.1), (5.8, 1.12, 0.0, 0.3),
                                 (10.0, 5.0, 2.0, 0.07), (0.3, 2.0, 6.0, 0.4)]:
            pulse = DrivePulse(rabi, det, tp)
            coarse = deer_signal_quadrature(c, echo(), pulse, base)
            fine = deer_signal_quadrature(c, echo(), pulse, base.doubled())
            assert abs(fine.value - coarse.value) <= coarse.est_error + 1e-14

    def test_quadrature_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(n_phi_rand=2)


# ---------------------------------------------------------------- monte carlo

class TestMonteCarlo:
    def test_zero_coupling(self):
        sig = deer_signal_montecarlo(0.0, echo(), pi_pulse(), 2000, 1)
        assert sig.value == 1.0 and sig.est_error == 0.0

    def test_deterministic_given_seed(self):
        a = deer_signal_montecarlo(2.0, echo(), pi_pulse(), 50_000, 99)
        b = deer_signal_montecarlo(2.0, echo(), pi_pulse(), 50_000, 99)
        assert a.value == b.value and a.est_error == b.est_error

    def test_seed_changes_draws(self):
        a = deer_signal_montecarlo(2.0, echo(), pi_pulse(), 50_000, 1)
        b = deer_signal_montecarlo(2.0, echo(), pi_pulse(), 50_000, 2)
        assert a.value != b.value

    def test_tilted_bias_field_matches_quadrature(self):
        # the orientation average is frame-independent
        e_B = unit_vector([1.0, -1.0, 0.7])
        pulse = DrivePulse(rabi_freq=5.0, detuning=1.5, length=0.09)
        q = deer_signal_quadrature(1.0, echo(), pulse)
        m = deer_signal_montecarlo(1.0, echo(e_B=e_B), pulse, 200_000, 21)
        assert abs(q.value - m.value) <= 3.0 * m.est_error

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            deer_signal_montecarlo(1.0, echo(), pi_pulse(), 100, 0)


# ------------------------------------------------------------ revival detuning

class TestRevivalDetuning:
    def test_formula_value(self):
        assert revival_detuning(pi_pulse()) == pytest.approx(math.sqrt(75.0), abs=1e-12)

    def test_zero_rabi(self):
        pulse = DrivePulse(rabi_freq=0.0, detuning=0.0, length=0.1)
        assert revival_detuning(pulse) == pytest.approx(10.0, abs=1e-12)

    def test_full_rotation_boundary(self):
        pulse = DrivePulse(rabi_freq=5.0, detuning=0.0, length=0.2)
        assert revival_detuning(pulse) == pytest.approx(0.0, abs=1e-12)

    def test_no_revival(self):
        pulse = DrivePulse(rabi_freq=5.0, detuning=0.0, length=0.3)
        with pytest.raises(ValueError, match="no revival"):
            revival_detuning(pulse)

    def test_signal_is_exactly_one_at_revival(self):
        pulse = pi_pulse()
        delta_r = revival_detuning(pulse)
        sig = deer_signal_quadrature(3.0, echo(),
                                     DrivePulse(5.0, delta_r, pulse.length))
        assert sig.value == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------- sweeps

class TestSweeps:
    def test_spectrum_even_and_dip_at_resonance(self):
        grid = np.linspace(-12.0, 12.0, 97)
        points = deer_spectrum(1.0, echo(), rabi_freq=5.0, length=0.1,
                               detuning_grid=grid)
        values = np.array([s.value for _, s in points])
        np.testing.assert_allclose(values, values[::-1], atol=1e-9)
        assert np.argmin(values) == len(grid) // 2

    def test_spectrum_far_detuned_recovers(self):
        grid = np.array([250.0])
        (_, sig), = deer_spectrum(1.0, echo(), rabi_freq=5.0, length=0.1,
                                  detuning_grid=grid)
        assert sig.value >= 0.99

    def test_rabi_starts_at_one_and_revives(self):
        rabi = 1.12
        grid = np.linspace(0.0, 1.0 / rabi, 41)
        points = deer_rabi(5.8, echo(), rabi_freq=rabi, detuning=0.0,
                           length_grid=grid)
        assert points[0][1].value == 1.0
        # full 2*pi rotation at t_p = 1/rabi restores the signal exactly
        assert points[-1][1].value == pytest.approx(1.0, abs=1e-12)

    def test_rabi_oscillations_at_strong_coupling(self):
        grid = np.linspace(0.0, 1.0 / 1.12, 81)
        points = deer_rabi(5.8, echo(), rabi_freq=1.12, detuning=0.0,
                           length_grid=grid)
        values = np.array([s.value for _, s in points])
        sign_changes = np.sum(np.diff(np.sign(np.diff(values))) != 0)
        assert sign_changes >= 2

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            deer_spectrum(1.0, echo(), 5.0, 0.1, [3.0, 1.0])
        with pytest.raises(ValueError):
            deer_spectrum(1.0, echo(), 5.0, 0.1, [])
        with pytest.raises(ValueError):
            deer_rabi(1.0, echo(), 5.0, 0.0, [-0.1, 0.2])
